#pragma once

// Cross-validated choice of the penalty and the intercept, and the final fit.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "clda/classify.hpp"
#include "clda/dataset.hpp"

namespace clda::tune {

struct TuneConfig {
  int n_folds = 5;
  int n_lambdas = 100;
  double lambda_ratio = 1e-3;
  double intercept_lo = -1.5;
  double intercept_hi = 1.5;
  int intercept_count = 100;
  classify::RuleConfig cv_rule{};     // rule scored during CV
  classify::RuleConfig final_rule{};  // rule stored in the fitted model
  double nu = 0.01;
  std::uint64_t seed = 0;
  int threads = 1;
};

void validate(const TuneConfig& cfg);

// count points from lo to hi inclusive; a single point is lo.
std::vector<double> intercept_grid(double lo, double hi, int count);

// Fold index per observation. Each class is shuffled and dealt round-robin,
// so class counts per fold differ by at most one.
std::vector<int> stratified_folds(const std::vector<int>& labels, int n_folds, std::uint64_t seed);

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> intercepts;
  Eigen::MatrixXd error;  // mean held-out error, lambdas x intercepts
  std::size_t best_lambda_index = 0;
  std::size_t best_intercept_index = 0;
  double best_lambda = 0.0;
  double best_intercept = 0.0;
  double best_error = 0.0;
};

// Minimum of the table; ties go to the larger lambda, then the intercept
// closest to zero.
void select_best(CvResult& cv);

// Throws InputError if a class is missing from some fold.
CvResult cross_validate(const Dataset& data, const TuneConfig& cfg);

// Latent correlation, transforms and direction at `lambda` on all of `data`.
classify::ClassifierModel fit_at(const Dataset& data, double lambda, double intercept,
                                 const TuneConfig& cfg);

struct FitResult {
  classify::ClassifierModel model;
  CvResult cv;
};

FitResult fit(const Dataset& data, const TuneConfig& cfg);

}  // namespace clda::tune
