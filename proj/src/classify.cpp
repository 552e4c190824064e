#include "clda/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "clda/errors.hpp"
#include "clda/gauss.hpp"
#include "clda/parallel.hpp"
#include "clda/rng.hpp"

namespace clda::classify {

namespace {

constexpr double kJitter = 1e-8;

// Below this standardized bound Phi(alpha) loses all precision; the
// overshoot (upper - z) / sd is then close to Exp(|alpha|).
constexpr double kTailAlpha = -37.0;

Eigen::MatrixXd principal(const Eigen::MatrixXd& m, std::span<const std::size_t> rows,
                          std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

double truncated_mean(double mean, double sd, double upper) {
  if (!std::isfinite(upper)) return mean;
  const double alpha = (upper - mean) / sd;
  if (alpha < kTailAlpha) return upper - sd / -alpha;
  return mean - sd * gauss::norm_pdf(alpha) / gauss::norm_cdf(alpha);
}

}  // namespace

const char* rule_name(Rule rule) { return rule == Rule::MonteCarlo ? "mc" : "linear"; }

Rule parse_rule(const std::string& name) {
  if (name == "mc") return Rule::MonteCarlo;
  if (name == "linear") return Rule::Linear;
  throw InputError("unknown rule '" + name + "' (expected mc or linear)");
}

double compute_v_hat(const latent::LatentCorrelation& latent) {
  const Eigen::MatrixXd s22 = latent.sigma22();
  const Eigen::VectorXd s21 = latent.sigma21();
  Eigen::LLT<Eigen::MatrixXd> llt(s22);
  if (llt.info() != Eigen::Success) throw NumericalError("covariate correlation is not positive definite");
  const double explained = s21.dot(llt.solve(s21));
  return std::sqrt(std::max(1.0 - explained, 1e-8));
}

ClassifierModel make_model(latent::LatentCorrelation latent,
                           std::vector<transform::MarginalTransform> transforms,
                           Eigen::VectorXd beta, double lambda, double delta_y, RuleConfig rule,
                           std::vector<std::string> names) {
  const auto p = static_cast<std::size_t>(beta.size());
  if (latent.p() != p || transforms.size() != p) {
    throw std::invalid_argument("make_model: inconsistent dimensions");
  }
  if (rule.samples < 1 || rule.burn_in < 0) throw InputError("rule needs S >= 1 and burn-in >= 0");
  if (names.empty()) names = default_names(p);
  ClassifierModel m;
  m.v_hat = compute_v_hat(latent);
  m.beta = std::move(beta);
  m.lambda = lambda;
  m.delta_y = delta_y;
  m.latent = std::move(latent);
  m.transforms = std::move(transforms);
  m.rule = rule;
  m.names = std::move(names);
  return m;
}

SplitObservation split_observation(std::span<const double> x,
                                   const std::vector<transform::MarginalTransform>& transforms) {
  if (x.size() != transforms.size()) throw InputError("observation has the wrong number of covariates");
  SplitObservation s;
  std::vector<double> z;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j]) || x[j] < 0.0) {
      throw InputError("covariate " + std::to_string(j + 1) + " must be finite and non-negative");
    }
    if (x[j] == 0.0) {
      s.truncated.push_back(j);
    } else {
      s.observed.push_back(j);
      z.push_back(transforms[j].to_latent(x[j]));
    }
  }
  s.z_observed = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  return s;
}

ConditionalTruncatedGaussian conditional(const Eigen::MatrixXd& sigma,
                                         std::span<const std::size_t> observed,
                                         const Eigen::VectorXd& z_observed,
                                         std::span<const std::size_t> sampled,
                                         const Eigen::VectorXd& upper) {
  ConditionalTruncatedGaussian c;
  c.upper = upper;
  c.gamma = principal(sigma, sampled, sampled);
  if (observed.empty()) {
    c.mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sampled.size()));
    return c;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(principal(sigma, observed, observed));
  if (llt.info() != Eigen::Success) throw NumericalError("observed block is not positive definite");
  const Eigen::MatrixXd cross = principal(sigma, observed, sampled);
  const Eigen::MatrixXd w = llt.solve(cross);  // Sigma_o^{-1} Sigma_ot
  c.mu = w.transpose() * z_observed;
  c.gamma.noalias() -= cross.transpose() * w;
  c.gamma = 0.5 * (c.gamma + c.gamma.transpose());
  return c;
}

double truncated_normal_upper(double mean, double sd, double upper, double u) {
  if (!std::isfinite(upper)) return mean + sd * gauss::norm_quantile(u);
  const double alpha = (upper - mean) / sd;
  double z;
  if (alpha < kTailAlpha) {
    z = upper + sd * std::log(u) / -alpha;
  } else {
    const double q = u * gauss::norm_cdf(alpha);
    z = q > 0.0 ? mean + sd * gauss::norm_quantile(q) : upper;
  }
  if (!(z < upper)) z = std::nextafter(upper, -std::numeric_limits<double>::infinity());
  return z;
}

Eigen::MatrixXd sample_truncated(const ConditionalTruncatedGaussian& cond, int samples,
                                 std::uint64_t seed, int burn_in) {
  if (samples < 1) throw std::invalid_argument("sample_truncated: need S >= 1");
  const Eigen::Index k = cond.mu.size();
  Eigen::MatrixXd out(samples, k);
  if (k == 0) return out;

  Eigen::MatrixXd gamma = cond.gamma;
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success) {
    gamma.diagonal().array() += kJitter;
    llt.compute(gamma);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("conditional covariance is not positive definite after jitter");
    }
  }
  const Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::VectorXd cond_sd(k);
  for (Eigen::Index i = 0; i < k; ++i) cond_sd(i) = 1.0 / std::sqrt(prec(i, i));

  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    z(i) = truncated_mean(cond.mu(i), std::sqrt(gamma(i, i)), cond.upper(i));
  }
  Eigen::VectorXd dev = z - cond.mu;

  Rng rng(seed);
  const int sweeps = burn_in + samples;
  for (int t = 0; t < sweeps; ++t) {
    for (Eigen::Index i = 0; i < k; ++i) {
      // E[z_i | z_-i] = mu_i - sum_{j != i} P_ij (z_j - mu_j) / P_ii
      const double shift = (prec.col(i).dot(dev) - prec(i, i) * dev(i)) / prec(i, i);
      const double m = cond.mu(i) - shift;
      z(i) = truncated_normal_upper(m, cond_sd(i), cond.upper(i), rng.uniform());
      dev(i) = z(i) - cond.mu(i);
    }
    if (t >= burn_in) out.row(t - burn_in) = z.transpose();
  }
  return out;
}

std::vector<std::size_t> sampled_coordinates(const Eigen::VectorXd& beta,
                                             const SplitObservation& split) {
  std::vector<std::size_t> sampled;
  for (const std::size_t j : split.truncated) {
    if (beta(static_cast<Eigen::Index>(j)) != 0.0) sampled.push_back(j);
  }
  return sampled;
}

Eigen::MatrixXd draw_truncated(const Eigen::MatrixXd& sigma22, const Eigen::VectorXd& thresholds,
                               const SplitObservation& split,
                               std::span<const std::size_t> sampled, const RuleConfig& rule,
                               std::uint64_t seed) {
  const auto k = static_cast<Eigen::Index>(sampled.size());
  if (k == 0) return Eigen::MatrixXd(rule.samples, 0);
  Eigen::VectorXd upper(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    upper(i) = thresholds(static_cast<Eigen::Index>(sampled[static_cast<std::size_t>(i)]));
  }
  const auto cond = conditional(sigma22, split.observed, split.z_observed, sampled, upper);
  return sample_truncated(cond, rule.samples, seed, rule.burn_in);
}

Eigen::VectorXd score_draws(const Eigen::VectorXd& beta, const SplitObservation& split,
                            std::span<const std::size_t> sampled, const Eigen::MatrixXd& draws) {
  double base = 0.0;
  for (std::size_t i = 0; i < split.observed.size(); ++i) {
    base += beta(static_cast<Eigen::Index>(split.observed[i])) *
            split.z_observed(static_cast<Eigen::Index>(i));
  }
  if (sampled.empty()) return Eigen::VectorXd::Constant(1, base);
  Eigen::VectorXd beta_t(static_cast<Eigen::Index>(sampled.size()));
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    beta_t(static_cast<Eigen::Index>(i)) = beta(static_cast<Eigen::Index>(sampled[i]));
  }
  return (draws * beta_t).array() + base;
}

Posterior posterior_from_scores(const Eigen::VectorXd& scores, double delta_y, double v_hat) {
  Posterior post;
  double sum = 0.0, sum_sq = 0.0;
  for (Eigen::Index s = 0; s < scores.size(); ++s) {
    const double v = gauss::norm_cdf((scores(s) - delta_y) / v_hat);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(scores.size());
  post.linear = gauss::norm_cdf((scores.mean() - delta_y) / v_hat);
  if (scores.size() == 1) {
    post.mc = post.linear;
    return post;
  }
  post.mc = sum / n;
  post.mc_se = std::sqrt(std::max(0.0, (sum_sq - n * post.mc * post.mc) / (n - 1) / n));
  return post;
}

Posterior posterior(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed) {
  const SplitObservation split = split_observation(x, model.transforms);
  const auto sampled = sampled_coordinates(model.beta, split);
  Eigen::MatrixXd draws;
  if (!sampled.empty()) {
    draws = draw_truncated(model.latent.sigma22(), model.latent.thresholds.delta, split, sampled,
                           model.rule, seed);
  }
  Posterior post = posterior_from_scores(score_draws(model.beta, split, sampled, draws),
                                         model.delta_y, model.v_hat);
  post.sampled = sampled.size();
  return post;
}

double posterior_mc(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed) {
  return posterior(model, x, seed).mc;
}

double posterior_linear(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed) {
  return posterior(model, x, seed).linear;
}

double rule_value(const Posterior& post, Rule rule) {
  return rule == Rule::MonteCarlo ? post.mc : post.linear;
}

int classify(const ClassifierModel& model, std::span<const double> x, std::uint64_t seed) {
  return decide(rule_value(posterior(model, x, seed), model.rule.rule));
}

std::vector<Posterior> posterior_batch(const ClassifierModel& model, const Eigen::MatrixXd& x,
                                       std::uint64_t seed, int threads) {
  if (static_cast<std::size_t>(x.cols()) != model.p()) {
    throw InputError("data has " + std::to_string(x.cols()) + " covariates, model expects " +
                     std::to_string(model.p()));
  }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = x;
  std::vector<Posterior> out(static_cast<std::size_t>(x.rows()));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const std::span<const double> row(rows.data() + i * static_cast<std::size_t>(rows.cols()),
                                      static_cast<std::size_t>(rows.cols()));
    out[i] = posterior(model, row, derive_seed(seed, i));
  });
  return out;
}

}  // namespace clda::classify
