#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "clda/errors.hpp"
#include "clda/simgen.hpp"

using namespace clda::simgen;

TEST(Structure, ArAndCs) {
  const Eigen::MatrixXd ar = build_structure(Structure::AR, 5, 0);
  EXPECT_DOUBLE_EQ(ar(0, 3), std::pow(0.7, 3));
  EXPECT_DOUBLE_EQ(ar(2, 2), 1.0);
  const Eigen::MatrixXd cs = build_structure(Structure::CS, 4, 0);
  EXPECT_DOUBLE_EQ(cs(1, 3), 0.7);
  EXPECT_DOUBLE_EQ(cs(3, 3), 1.0);
}

TEST(Structure, GeneralDecayEigenvalues) {
  const int p = 30;
  const Eigen::VectorXd nu = gd_eigenvalues(p);
  EXPECT_NEAR(nu.sum(), p, 1e-10);
  for (int j = 1; j < p; ++j) EXPECT_NEAR(nu(j) / nu(j - 1), 0.9, 1e-12);
  const Eigen::MatrixXd m = build_structure(Structure::GD, p, 17);
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
  Eigen::VectorXd want = nu;
  std::sort(want.data(), want.data() + p);
  EXPECT_LT((ev - want).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Structure, HaarIsOrthogonal) {
  const Eigen::MatrixXd q = haar_orthogonal(12, 3);
  EXPECT_LT((q.transpose() * q - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tables, GeneralizedInverse) {
  EmpiricalTable t{{0, 0, 1, 2, 5}};
  EXPECT_DOUBLE_EQ(t.zero_mass(), 0.4);
  EXPECT_EQ(t.generalized_inverse(0.1), 0.0);
  EXPECT_EQ(t.generalized_inverse(0.4), 0.0);
  EXPECT_EQ(t.generalized_inverse(0.41), 1.0);
  EXPECT_EQ(t.generalized_inverse(1.0), 5.0);
}

TEST(Tables, SyntheticBands) {
  const auto lib = MarginalLibrary::synthetic(4);
  for (const auto& t : lib.none) EXPECT_EQ(t.zero_mass(), 0.0);
  for (const auto& t : lib.low) {
    EXPECT_GE(t.zero_mass(), 0.1 - 1e-12);
    EXPECT_LE(t.zero_mass(), 0.5 + 1e-12);
  }
  for (const auto& t : lib.high) {
    EXPECT_GE(t.zero_mass(), 0.4 - 1e-12);
    EXPECT_LE(t.zero_mass(), 0.8 + 1e-12);
  }
}

TEST(Tables, FromCsv) {
  const auto path = std::filesystem::temp_directory_path() / "clda_tables.csv";
  std::ofstream(path) << "table,value\na,0\na,0\na,1\na,3\nb,2\nb,5\nc,0\nc,0\nc,0\nc,4\nc,1\n";
  const auto lib = MarginalLibrary::from_csv(path.string());
  EXPECT_EQ(lib.none.size(), 1u);
  EXPECT_EQ(lib.low.size(), 1u);   // a: 0.5
  EXPECT_EQ(lib.high.size(), 2u);  // a: 0.5 and c: 0.6
  std::filesystem::remove(path);
}

TEST(Joint, ZeroRatesAndBalance) {
  SimConfig cfg;
  cfg.p = 20;
  cfg.s = 4;
  cfg.n = 4000;
  cfg.n_test = 10;
  cfg.seed = 8;
  cfg.truncation = Truncation::High;
  const auto sim = generate(cfg);
  for (int j = 0; j < cfg.p; ++j) {
    const double z = (sim.train.x.col(j).array() == 0.0).cast<double>().mean();
    EXPECT_GT(z, 0.35);
    EXPECT_LT(z, 0.85);
  }
  const double ones = std::count(sim.train.labels.begin(), sim.train.labels.end(), 1) / 4000.0;
  EXPECT_NEAR(ones, 0.5, 0.04);
  // Label latent given the covariates has variance v2.
  const Eigen::VectorXd s21 = sim.sigma.col(0).tail(cfg.p);
  const Eigen::MatrixXd s22 = sim.sigma.bottomRightCorner(cfg.p, cfg.p);
  EXPECT_NEAR(1.0 - s21.dot(s22.ldlt().solve(s21)), cfg.v2, 1e-10);
}

TEST(Joint, Deterministic) {
  SimConfig cfg;
  cfg.p = 8;
  cfg.s = 2;
  cfg.n = 30;
  cfg.n_test = 5;
  cfg.seed = 3;
  const auto a = generate(cfg), b = generate(cfg);
  EXPECT_EQ(a.train.x, b.train.x);
  EXPECT_EQ(a.test.labels, b.test.labels);
  cfg.seed = 4;
  EXPECT_NE(generate(cfg).train.x, a.train.x);
}

TEST(Mixture, BayesErrorAndTruncation) {
  SimConfig cfg;
  cfg.family = Family::Mixture;
  cfg.truncation = Truncation::Low;
  cfg.p = 10;
  cfg.s = 3;
  cfg.n = 2000;
  cfg.n_test = 20000;
  cfg.alpha = 0.1;
  cfg.seed = 2;
  const auto sim = generate(cfg);
  const double err = error_rate(oracle_classify(sim.oracle, sim.test_latent), sim.test.labels);
  EXPECT_NEAR(err, 0.1, 0.01);
  for (int j = 0; j < cfg.p; ++j) {
    const double z = (sim.train.x.col(j).array() == 0.0).cast<double>().mean();
    EXPECT_GT(z, 0.05);
    EXPECT_LT(z, 0.55);
  }
  EXPECT_TRUE((sim.train.x.array() >= 0.0).all());
}

TEST(Config, Validation) {
  SimConfig cfg;
  cfg.p = 5;
  cfg.s = 6;
  EXPECT_THROW(validate(cfg), clda::InputError);
  cfg.s = 2;
  cfg.v2 = 1.2;
  EXPECT_THROW(validate(cfg), clda::InputError);
  EXPECT_THROW(parse_family("gamma"), clda::InputError);
  EXPECT_EQ(parse_structure("gd"), Structure::GD);
  EXPECT_EQ(parse_truncation("high"), Truncation::High);
}
