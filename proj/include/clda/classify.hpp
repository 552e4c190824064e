#pragma once

// Posterior class probabilities for a new zero-inflated observation.
//
// Zeros in x_new only bound their latent coordinates from above, so the
// posterior integrates the probit term over the conditional truncated
// Gaussian of those coordinates given the observed ones.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clda/latentcorr.hpp"
#include "clda/transform.hpp"

namespace clda::classify {

enum class Rule { MonteCarlo, Linear };

const char* rule_name(Rule rule);
Rule parse_rule(const std::string& name);  // "mc" or "linear"

struct RuleConfig {
  Rule rule = Rule::Linear;
  int samples = 100;  // S
  int burn_in = 100;
};

struct ClassifierModel {
  Eigen::VectorXd beta;
  double lambda = 0.0;
  double delta_y = 0.0;  // intercept
  double v_hat = 1.0;
  latent::LatentCorrelation latent;
  std::vector<transform::MarginalTransform> transforms;
  RuleConfig rule;
  std::vector<std::string> names;

  std::size_t p() const { return static_cast<std::size_t>(beta.size()); }
};

// sqrt(max(1 - s21' S22^{-1} s21, 1e-8)) from the blended correlation.
double compute_v_hat(const latent::LatentCorrelation& latent);

// Checks dimensions and fills v_hat.
ClassifierModel make_model(latent::LatentCorrelation latent,
                           std::vector<transform::MarginalTransform> transforms,
                           Eigen::VectorXd beta, double lambda, double delta_y, RuleConfig rule,
                           std::vector<std::string> names);

struct SplitObservation {
  std::vector<std::size_t> observed;
  std::vector<std::size_t> truncated;
  Eigen::VectorXd z_observed;  // latent values of the observed coordinates
};

// Throws InputError for negative or non-finite entries.
SplitObservation split_observation(std::span<const double> x,
                                   const std::vector<transform::MarginalTransform>& transforms);

struct ConditionalTruncatedGaussian {
  Eigen::VectorXd mu;
  Eigen::MatrixXd gamma;
  Eigen::VectorXd upper;
};

// Law of sigma's `sampled` coordinates given the `observed` ones equal z_o,
// truncated above at `upper`.
ConditionalTruncatedGaussian conditional(const Eigen::MatrixXd& sigma,
                                         std::span<const std::size_t> observed,
                                         const Eigen::VectorXd& z_observed,
                                         std::span<const std::size_t> sampled,
                                         const Eigen::VectorXd& upper);

// One draw of N(mean, sd^2) conditioned on (-inf, upper].
double truncated_normal_upper(double mean, double sd, double upper, double u);

// Gibbs sampler; returns S x p_t draws, each strictly below `upper`.
// Throws NumericalError if gamma is not PD after a 1e-8 jitter.
Eigen::MatrixXd sample_truncated(const ConditionalTruncatedGaussian& cond, int samples,
                                 std::uint64_t seed, int burn_in = 100);

struct Posterior {
  double mc = 0.0;
  double linear = 0.0;
  double mc_se = 0.0;  // Monte Carlo standard error of `mc`
  std::size_t sampled = 0;
};

// Truncated coordinates with a nonzero coefficient; only these are sampled.
std::vector<std::size_t> sampled_coordinates(const Eigen::VectorXd& beta,
                                             const SplitObservation& split);

// S x |sampled| conditional draws for one observation. Empty when nothing
// is sampled.
Eigen::MatrixXd draw_truncated(const Eigen::MatrixXd& sigma22, const Eigen::VectorXd& thresholds,
                               const SplitObservation& split,
                               std::span<const std::size_t> sampled, const RuleConfig& rule,
                               std::uint64_t seed);

// beta'z per draw (a single value when nothing is sampled), no intercept.
Eigen::VectorXd score_draws(const Eigen::VectorXd& beta, const SplitObservation& split,
                            std::span<const std::size_t> sampled, const Eigen::MatrixXd& draws);

Posterior posterior_from_scores(const Eigen::VectorXd& scores, double delta_y, double v_hat);

// Both rules from one set of draws. S and burn-in come from model.rule.
Posterior posterior(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed);

double posterior_mc(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed);
double posterior_linear(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed);

// 1 iff the posterior of model.rule exceeds 0.5.
int classify(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed);

// Row i uses derive_seed(seed, i), so results do not depend on `threads`.
std::vector<Posterior> posterior_batch(const ClassifierModel& model, const Eigen::MatrixXd& x,
                                       std::uint64_t seed, int threads = 1);

double rule_value(const Posterior& post, Rule rule);
inline int decide(double probability) { return probability > 0.5 ? 1 : 0; }

}  // namespace clda::classify
