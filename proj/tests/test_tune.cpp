#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "clda/bench.hpp"
#include "clda/errors.hpp"
#include "clda/simgen.hpp"
#include "clda/tune.hpp"

using namespace clda::tune;

namespace {

clda::Dataset small_data(std::uint64_t seed) {
  clda::simgen::SimConfig cfg;
  cfg.p = 10;
  cfg.s = 3;
  cfg.n = 80;
  cfg.n_test = 10;
  cfg.seed = seed;
  return clda::simgen::generate(cfg).train;
}

TuneConfig quick() {
  TuneConfig c;
  c.n_lambdas = 10;
  c.intercept_count = 7;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Tune, InterceptGrid) {
  const auto g = intercept_grid(-1.5, 1.5, 7);
  ASSERT_EQ(g.size(), 7u);
  EXPECT_DOUBLE_EQ(g.front(), -1.5);
  EXPECT_DOUBLE_EQ(g.back(), 1.5);
  EXPECT_NEAR(g[3], 0.0, 1e-15);
  EXPECT_EQ(intercept_grid(0.2, 1.0, 1), std::vector<double>{0.2});
}

TEST(Tune, StratifiedFoldsBalanced) {
  std::vector<int> labels;
  for (int i = 0; i < 53; ++i) labels.push_back(i % 3 == 0 ? 1 : 0);
  const auto folds = stratified_folds(labels, 5, 7);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<int> count(5, 0);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) ++count[static_cast<std::size_t>(folds[i])];
    EXPECT_LE(*std::max_element(count.begin(), count.end()) - *std::min_element(count.begin(), count.end()), 1);
  }
  EXPECT_EQ(folds, stratified_folds(labels, 5, 7));
}

TEST(Tune, SelectBestTieBreaks) {
  CvResult cv;
  cv.lambdas = {1.0, 0.5, 0.25};
  cv.intercepts = {-0.5, 0.0, 0.5};
  cv.error = Eigen::MatrixXd::Constant(3, 3, 0.3);
  cv.error(1, 0) = 0.1;
  cv.error(2, 1) = 0.1;
  cv.error(1, 2) = 0.1;
  select_best(cv);
  EXPECT_EQ(cv.best_lambda_index, 1u);
  EXPECT_EQ(cv.best_intercept_index, 0u);
  cv.error(1, 1) = 0.1;
  select_best(cv);
  EXPECT_EQ(cv.best_intercept_index, 1u);
}

TEST(Tune, CrossValidationDeterministicAndThreadInvariant) {
  const auto data = small_data(3);
  auto c1 = quick(), c2 = quick();
  c2.threads = 3;
  const auto a = cross_validate(data, c1), b = cross_validate(data, c2);
  EXPECT_EQ(a.error, b.error);
  EXPECT_EQ(a.best_lambda, b.best_lambda);
  EXPECT_EQ(a.lambdas, b.lambdas);
  EXPECT_EQ(a.error.rows(), 10);
  EXPECT_EQ(a.error.cols(), 7);
  EXPECT_TRUE((a.error.array() >= 0.0).all() && (a.error.array() <= 1.0).all());
}

TEST(Tune, MonteCarloCvRuns) {
  const auto data = small_data(4);
  auto c = quick();
  c.cv_rule.rule = clda::classify::Rule::MonteCarlo;
  c.cv_rule.samples = 20;
  const auto a = cross_validate(data, c), b = cross_validate(data, c);
  EXPECT_EQ(a.error, b.error);
}

TEST(Tune, FitProducesUsableModel) {
  const auto data = small_data(5);
  const auto f = fit(data, quick());
  EXPECT_EQ(f.model.p(), 10u);
  EXPECT_EQ(f.model.lambda, f.cv.best_lambda);
  EXPECT_EQ(f.model.delta_y, f.cv.best_intercept);
  EXPECT_GT(f.model.v_hat, 0.0);
}

TEST(Tune, RejectsTooManyFolds) {
  auto data = small_data(6);
  auto c = quick();
  c.n_folds = 60;
  EXPECT_THROW(cross_validate(data, c), clda::InputError);
}

TEST(Bench, ReplicateDeterministic) {
  clda::simgen::SimConfig sim;
  sim.p = 10;
  sim.s = 3;
  sim.n = 80;
  sim.n_test = 40;
  sim.seed = 12;
  const auto t = quick();
  const clda::coda::CodaConfig cc{5, 8, 1e-2, 0, 1};
  const auto a = clda::bench::run(sim, t, cc, clda::bench::kMethods, 2, 1);
  const auto b = clda::bench::run(sim, t, cc, clda::bench::kMethods, 2, 2);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t r = 0; r < a.size(); ++r) EXPECT_EQ(a[r].errors, b[r].errors);
  const auto s = clda::bench::summarize(a);
  EXPECT_EQ(s.size(), clda::bench::kMethods.size());
}
