#include "clda/tune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clda/direction.hpp"
#include "clda/errors.hpp"
#include "clda/gauss.hpp"
#include "clda/latentcorr.hpp"
#include "clda/parallel.hpp"
#include "clda/rng.hpp"

namespace clda::tune {

namespace {

constexpr double kTieTolerance = 1e-12;

std::vector<transform::MarginalTransform> fit_transforms(const Dataset& data) {
  std::vector<transform::MarginalTransform> out;
  out.reserve(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) {
    const Eigen::VectorXd col = data.x.col(static_cast<Eigen::Index>(j));
    out.push_back(transform::MarginalTransform::fit({col.data(), static_cast<std::size_t>(col.size())}));
  }
  return out;
}

std::vector<double> common_lambdas(const Dataset& data, const TuneConfig& cfg) {
  const auto lc = latent::estimate_latent_correlation(data, {cfg.nu, std::nullopt, cfg.threads});
  const double lmax = lc.sigma21().lpNorm<Eigen::Infinity>();
  if (!(lmax > 0.0)) throw NumericalError("estimated label-covariate correlation is identically zero");
  return direction::lambda_grid(lmax, cfg.n_lambdas, cfg.lambda_ratio);
}

// Misclassification counts of one held-out fold, lambdas x intercepts.
Eigen::MatrixXd fold_errors(const Dataset& train, const Dataset& held_out,
                            const std::vector<double>& lambdas, const std::vector<double>& intercepts,
                            const TuneConfig& cfg, std::uint64_t fold_seed) {
  const auto lc = latent::estimate_latent_correlation(train, {cfg.nu, std::nullopt, 1});
  const auto transforms = fit_transforms(train);
  const double v_hat = classify::compute_v_hat(lc);
  const Eigen::MatrixXd s22 = lc.sigma22();
  const Eigen::VectorXd s21 = lc.sigma21();
  const auto path = direction::solve_path(s22, s21, lambdas);

  const auto nl = static_cast<Eigen::Index>(lambdas.size());
  const auto ni = static_cast<Eigen::Index>(intercepts.size());
  Eigen::MatrixXd errors = Eigen::MatrixXd::Zero(nl, ni);
  const bool mc = cfg.cv_rule.rule == classify::Rule::MonteCarlo;

  for (std::size_t i = 0; i < held_out.n(); ++i) {
    const Eigen::VectorXd row = held_out.x.row(static_cast<Eigen::Index>(i));
    const auto split = classify::split_observation({row.data(), static_cast<std::size_t>(row.size())},
                                                   transforms);
    const int label = held_out.labels[i];
    const std::uint64_t seed = derive_seed(fold_seed, i);

    // The draws depend on lambda only through the sampled set, and the
    // sampled set changes rarely along the path.
    std::vector<std::size_t> cached_set;
    Eigen::MatrixXd draws;
    bool have_draws = false;
    for (Eigen::Index l = 0; l < nl; ++l) {
      const Eigen::VectorXd& beta = path.solutions[static_cast<std::size_t>(l)].beta;
      const auto sampled = classify::sampled_coordinates(beta, split);
      if (!sampled.empty() && (!have_draws || sampled != cached_set)) {
        draws = classify::draw_truncated(s22, lc.thresholds.delta, split, sampled, cfg.cv_rule, seed);
        cached_set = sampled;
        have_draws = true;
      }
      const Eigen::VectorXd scores = classify::score_draws(beta, split, sampled, draws);
      for (Eigen::Index c = 0; c < ni; ++c) {
        const auto post =
            classify::posterior_from_scores(scores, intercepts[static_cast<std::size_t>(c)], v_hat);
        const int predicted = classify::decide(mc ? post.mc : post.linear);
        if (predicted != label) errors(l, c) += 1.0;
      }
    }
  }
  return errors / static_cast<double>(held_out.n());
}

}  // namespace

void validate(const TuneConfig& cfg) {
  if (cfg.n_folds < 2) throw InputError("n_folds must be at least 2");
  if (cfg.n_lambdas < 1) throw InputError("n_lambdas must be at least 1");
  if (!(cfg.lambda_ratio > 0.0 && cfg.lambda_ratio < 1.0)) throw InputError("lambda_ratio must lie in (0,1)");
  if (cfg.intercept_count < 1) throw InputError("intercept count must be at least 1");
  if (!(cfg.intercept_lo < cfg.intercept_hi)) throw InputError("intercept grid needs lo < hi");
  if (!(cfg.nu >= 0.0 && cfg.nu < 1.0)) throw InputError("nu must lie in [0,1)");
  for (const auto* r : {&cfg.cv_rule, &cfg.final_rule}) {
    if (r->samples < 1 || r->burn_in < 0) throw InputError("rule needs S >= 1 and burn-in >= 0");
  }
}

std::vector<double> intercept_grid(double lo, double hi, int count) {
  if (count < 1) throw InputError("intercept count must be at least 1");
  std::vector<double> g(static_cast<std::size_t>(count));
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo + i * step;
  g.back() = hi;
  return g;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int n_folds, std::uint64_t seed) {
  std::vector<int> fold(labels.size(), 0);
  int offset = 0;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(i);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    // Continue dealing where the previous class stopped so fold sizes stay balanced.
    for (std::size_t k = 0; k < idx.size(); ++k) {
      fold[idx[k]] = static_cast<int>((static_cast<std::size_t>(offset) + k) % static_cast<std::size_t>(n_folds));
    }
    offset = static_cast<int>((static_cast<std::size_t>(offset) + idx.size()) % static_cast<std::size_t>(n_folds));
  }
  return fold;
}

void select_best(CvResult& cv) {
  const Eigen::Index nl = cv.error.rows(), ni = cv.error.cols();
  Eigen::Index bl = 0, bi = 0;
  for (Eigen::Index l = 0; l < nl; ++l) {
    for (Eigen::Index c = 0; c < ni; ++c) {
      const double e = cv.error(l, c), best = cv.error(bl, bi);
      if (e < best - kTieTolerance) {
        bl = l;
        bi = c;
      } else if (e <= best + kTieTolerance && l == bl) {
        const double a = std::abs(cv.intercepts[static_cast<std::size_t>(c)]);
        const double b = std::abs(cv.intercepts[static_cast<std::size_t>(bi)]);
        if (a < b) bi = c;
      }
    }
  }
  cv.best_lambda_index = static_cast<std::size_t>(bl);
  cv.best_intercept_index = static_cast<std::size_t>(bi);
  cv.best_lambda = cv.lambdas[cv.best_lambda_index];
  cv.best_intercept = cv.intercepts[cv.best_intercept_index];
  cv.best_error = cv.error(bl, bi);
}

CvResult cross_validate(const Dataset& data, const TuneConfig& cfg) {
  validate(cfg);
  validate_dataset(data);
  CvResult cv;
  cv.lambdas = common_lambdas(data, cfg);
  cv.intercepts = intercept_grid(cfg.intercept_lo, cfg.intercept_hi, cfg.intercept_count);

  const auto folds = stratified_folds(data.labels, cfg.n_folds, derive_seed(cfg.seed, 0xf01d));
  std::vector<std::vector<std::size_t>> train_idx(static_cast<std::size_t>(cfg.n_folds));
  std::vector<std::vector<std::size_t>> test_idx(train_idx.size());
  for (std::size_t i = 0; i < folds.size(); ++i) {
    for (int f = 0; f < cfg.n_folds; ++f) {
      (folds[i] == f ? test_idx : train_idx)[static_cast<std::size_t>(f)].push_back(i);
    }
  }
  for (int f = 0; f < cfg.n_folds; ++f) {
    const Dataset held = data.rows(test_idx[static_cast<std::size_t>(f)]);
    if (held.count(0) == 0 || held.count(1) == 0) {
      throw InputError("fold " + std::to_string(f + 1) +
                       " is missing a class; use fewer folds or a different seed");
    }
  }

  std::vector<Eigen::MatrixXd> per_fold(static_cast<std::size_t>(cfg.n_folds));
  parallel_for(per_fold.size(), cfg.threads, [&](std::size_t f) {
    per_fold[f] = fold_errors(data.rows(train_idx[f]), data.rows(test_idx[f]), cv.lambdas,
                              cv.intercepts, cfg, derive_seed(cfg.seed, 0x100 + f));
  });
  cv.error = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cv.lambdas.size()),
                                   static_cast<Eigen::Index>(cv.intercepts.size()));
  for (const auto& e : per_fold) cv.error += e;
  cv.error /= static_cast<double>(cfg.n_folds);
  select_best(cv);
  return cv;
}

classify::ClassifierModel fit_at(const Dataset& data, double lambda, double intercept,
                                 const TuneConfig& cfg) {
  validate_dataset(data);
  auto lc = latent::estimate_latent_correlation(data, {cfg.nu, std::nullopt, cfg.threads});
  auto transforms = fit_transforms(data);
  const Eigen::MatrixXd s22 = lc.sigma22();
  const Eigen::VectorXd s21 = lc.sigma21();
  auto dir = direction::solve_direction(s22, s21, lambda);
  return classify::make_model(std::move(lc), std::move(transforms), std::move(dir.beta), lambda,
                              intercept, cfg.final_rule, data.names);
}

FitResult fit(const Dataset& data, const TuneConfig& cfg) {
  FitResult out{{}, cross_validate(data, cfg)};
  out.model = fit_at(data, out.cv.best_lambda, out.cv.best_intercept, cfg);
  return out;
}

}  // namespace clda::tune
