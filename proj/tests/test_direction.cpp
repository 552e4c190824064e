#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "clda/direction.hpp"
#include "clda/rng.hpp"

using namespace clda::direction;

namespace {

Eigen::MatrixXd random_correlation(int p, clda::Rng& rng, int m = 40) {
  Eigen::MatrixXd a(m, p);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal() + (j > 0 ? 0.5 * a(i, j - 1) : 0.0);
  Eigen::MatrixXd q = a.transpose() * a / m;
  const Eigen::VectorXd d = q.diagonal().cwiseSqrt().cwiseInverse();
  return d.asDiagonal() * q * d.asDiagonal();
}

// Proximal gradient with step 1/L, run well past convergence.
Eigen::VectorXd ista(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, double lambda) {
  const double step = 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(c.size());
  for (int it = 0; it < 100000; ++it) {
    const Eigen::VectorXd v = b - step * (q * b - c);
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = std::copysign(std::max(std::abs(v(j)) - step * lambda, 0.0), v(j));
  }
  return b;
}

}  // namespace

TEST(Direction, UnpenalizedIsLinearSolve) {
  clda::Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const Eigen::MatrixXd q = random_correlation(10, rng);
    Eigen::VectorXd c(10);
    for (int j = 0; j < 10; ++j) c(j) = rng.uniform(-0.7, 0.7);
    const auto sol = solve_direction(q, c, 0.0);
    EXPECT_LT((sol.beta - q.ldlt().solve(c)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Direction, MatchesProximalOracle) {
  clda::Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    const Eigen::MatrixXd q = random_correlation(15, rng);
    Eigen::VectorXd c(15);
    for (int j = 0; j < 15; ++j) c(j) = rng.uniform(-0.7, 0.7);
    const double lambda = rng.uniform(0.02, 0.5);
    const auto sol = solve_direction(q, c, lambda);
    const Eigen::VectorXd ref = ista(q, c, lambda);
    EXPECT_NEAR(objective(q, c, sol.beta, lambda), objective(q, c, ref, lambda), 1e-9);
    EXPECT_LE(kkt_residual(q, c, sol.beta, lambda), 1e-6);
    EXPECT_LE(sol.kkt_residual, 1e-6);
  }
}

TEST(Direction, ObjectiveDefinition) {
  Eigen::MatrixXd q(2, 2);
  q << 2, 0.5, 0.5, 1;
  const Eigen::VectorXd c = Eigen::Vector2d(1, -1), b = Eigen::Vector2d(0.3, -0.2);
  EXPECT_NEAR(objective(q, c, b, 0.1), 0.5 * b.dot(q * b) - c.dot(b) + 0.1 * 0.5, 1e-15);
}

TEST(Direction, ZeroAboveLambdaMax) {
  clda::Rng rng(3);
  const Eigen::MatrixXd q = random_correlation(8, rng);
  Eigen::VectorXd c(8);
  for (int j = 0; j < 8; ++j) c(j) = rng.uniform(-0.5, 0.5);
  const auto sol = solve_direction(q, c, c.cwiseAbs().maxCoeff());
  EXPECT_TRUE(sol.beta.isZero());
  EXPECT_TRUE(sol.support.empty());
}

TEST(Direction, PathWarmStartsAgree) {
  clda::Rng rng(4);
  const Eigen::MatrixXd q = random_correlation(20, rng);
  Eigen::VectorXd c(20);
  for (int j = 0; j < 20; ++j) c(j) = rng.uniform(-0.6, 0.6);
  const auto path = lambda_path(q, c, 15, 1e-2);
  ASSERT_EQ(path.lambdas.size(), 15u);
  EXPECT_DOUBLE_EQ(path.lambdas.front(), c.cwiseAbs().maxCoeff());
  for (std::size_t i = 1; i < path.lambdas.size(); ++i) EXPECT_LT(path.lambdas[i], path.lambdas[i - 1]);
  for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
    const auto cold = solve_direction(q, c, path.lambdas[i]);
    EXPECT_NEAR(objective(q, c, path.solutions[i].beta, path.lambdas[i]), objective(q, c, cold.beta, path.lambdas[i]), 1e-10);
  }
}

TEST(Direction, ObjectiveTraceNonIncreasing) {
  clda::Rng rng(5);
  const Eigen::MatrixXd q = random_correlation(12, rng);
  Eigen::VectorXd c(12);
  for (int j = 0; j < 12; ++j) c(j) = rng.uniform(-0.6, 0.6);
  SolverOptions opts;
  opts.record_objective = true;
  const auto sol = solve_direction(q, c, 0.05, std::nullopt, opts);
  for (std::size_t i = 1; i < sol.objective_trace.size(); ++i) {
    EXPECT_LE(sol.objective_trace[i], sol.objective_trace[i - 1] + 1e-12);
  }
}

TEST(Direction, RequiresUnitDiagonal) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  EXPECT_ANY_THROW(solve_direction(q, Eigen::Vector3d(1, 0, 0), 0.1));
}

TEST(Direction, GridSpacing) {
  const auto g = lambda_grid(2.0, 5, 1e-2);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 2.0);
  EXPECT_NEAR(g.back(), 0.02, 1e-15);
  EXPECT_NEAR(g[1] / g[0], g[2] / g[1], 1e-12);
}
