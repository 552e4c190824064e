#pragma once

// l1-penalized quadratic programs
//
//   minimize 0.5 b'Q b - c'b + lambda |b|_1
//
// by cyclic coordinate descent with an active set. The classification
// direction is the case Q = Sigma22, c = Sigma21.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "clda/errors.hpp"

namespace clda::direction {

struct SolverOptions {
  double tol_change = 1e-7;  // max coordinate change in a full sweep
  double tol_kkt = 1e-6;
  int max_sweeps = 10000;
  int full_sweep_every = 10;  // restricted sweeps between full sweeps
  bool record_objective = false;
};

struct SparseDirection {
  Eigen::VectorXd beta;
  double lambda = 0.0;
  std::vector<std::size_t> support;
  double kkt_residual = 0.0;
  int iterations = 0;                   // coordinate sweeps
  std::vector<double> objective_trace;  // per sweep, when requested
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, SparseDirection best)
      : NumericalError(what), best_(std::move(best)) {}
  const SparseDirection& best() const { return best_; }

 private:
  SparseDirection best_;
};

double objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, const Eigen::VectorXd& beta,
                 double lambda);

// Largest violation of the subgradient optimality conditions.
double kkt_residual(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, const Eigen::VectorXd& beta,
                    double lambda);

// Q symmetric PSD with a positive diagonal.
SparseDirection solve_lasso_qp(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, double lambda,
                               const Eigen::VectorXd* warm_start = nullptr,
                               const SolverOptions& opts = {});

// Q must also have a unit diagonal.
SparseDirection solve_direction(const Eigen::MatrixXd& sigma22, const Eigen::VectorXd& sigma21,
                                double lambda,
                                const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                                const SolverOptions& opts = {});

struct LambdaPath {
  std::vector<double> lambdas;  // strictly decreasing
  std::vector<SparseDirection> solutions;
};

// n values log-spaced from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, int n, double ratio);

// Solves along a decreasing grid, warm-starting each problem from the last.
LambdaPath solve_path(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                      const std::vector<double>& lambdas, const SolverOptions& opts = {});

// Grid from lambda_max = |sigma21|_inf, where the solution is zero.
LambdaPath lambda_path(const Eigen::MatrixXd& sigma22, const Eigen::VectorXd& sigma21,
                       int n_lambdas = 100, double ratio = 1e-3, const SolverOptions& opts = {});

}  // namespace clda::direction
