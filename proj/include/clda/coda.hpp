#pragma once

// Copula discriminant analysis baseline: class-specific latent means with a
// common covariance, estimated from per-class Kendall matrices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "clda/dataset.hpp"
#include "clda/direction.hpp"

namespace clda::coda {

// f_j(x) = mean_j + sd_j * Phi^{-1}(clamp(F_j(x), delta_n, 1 - delta_n)),
// F_j the pooled empirical CDF of column j.
struct MomentTransform {
  std::vector<std::vector<double>> sorted;
  Eigen::VectorXd mean, sd;
  double delta_n = 0.0;

  static MomentTransform fit(const Dataset& data);
  double apply(std::size_t j, double x) const;
  Eigen::VectorXd apply(std::span<const double> x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

// Per-class D sin(pi/2 tau) D with D the class standard deviations, pooled
// with weights n_g / n, then eigenvalue clipped to PSD.
Eigen::MatrixXd pooled_kendall_covariance(const Dataset& data);

// Everything the objective needs, shared across a lambda path.
struct CodaProblem {
  MomentTransform transform;
  Eigen::VectorXd mu0, mu1;  // sample class means
  Eigen::MatrixXd pooled_s;
  double nu = 0.0;           // n0 n1 / n^2
  std::size_t n0 = 0, n1 = 0;

  Eigen::VectorXd mu_d() const { return mu1 - mu0; }
  Eigen::VectorXd mu_a() const { return 0.5 * (mu0 + mu1); }
  // 0.5 b'(S + nu mu_d mu_d')b - nu mu_d'b, the objective up to a constant.
  Eigen::MatrixXd gram() const;
  Eigen::VectorXd linear() const;
  double lambda_max() const;
};

CodaProblem prepare(const Dataset& data);

struct CodaModel {
  Eigen::VectorXd beta;
  double lambda = 0.0;
  double intercept = 0.0;
  bool intercept_fallback = false;  // beta'mu_d was zero; intercept is log(n1/n0)
  CodaProblem problem;

  double nu_coda() const { return problem.nu; }
};

// Sparse-LDA optimal intercept; falls back to log(n1/n0) when beta'mu_d = 0.
double optimal_intercept(const CodaProblem& prob, const Eigen::VectorXd& beta, bool* fallback = nullptr);

CodaModel finish(CodaProblem prob, Eigen::VectorXd beta, double lambda);
CodaModel coda_fit(const Dataset& data, double lambda, const direction::SolverOptions& opts = {});

// f(x)'beta + intercept.
double coda_score(const CodaModel& model, std::span<const double> x);
int coda_predict(const CodaModel& model, std::span<const double> x);
std::vector<int> coda_predict(const CodaModel& model, const Eigen::MatrixXd& x);

struct CodaConfig {
  int n_folds = 5;
  int n_lambdas = 100;
  double lambda_ratio = 1e-3;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct CodaCvResult {
  std::vector<double> lambdas;
  Eigen::VectorXd error;  // mean held-out error per lambda
  std::size_t best_index = 0;
  double best_lambda = 0.0;
  double best_error = 0.0;
};

// Ties go to the larger lambda.
CodaCvResult coda_cross_validate(const Dataset& data, const CodaConfig& cfg);

struct CodaFit {
  CodaModel model;
  CodaCvResult cv;
};

CodaFit coda_fit_cv(const Dataset& data, const CodaConfig& cfg);

}  // namespace clda::coda
