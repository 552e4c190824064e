#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "clda/dataset.hpp"
#include "clda/errors.hpp"
#include "clda/latentcorr.hpp"
#include "clda/rng.hpp"

using namespace clda::latent;

namespace {

double brute_tau(const std::vector<double>& x, const std::vector<double>& y) {
  long long s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double a = x[i] - x[j], b = y[i] - y[j];
      s += ((a > 0) - (a < 0)) * ((b > 0) - (b < 0));
    }
  }
  return static_cast<double>(s) / (static_cast<double>(x.size()) * static_cast<double>(x.size() - 1) / 2.0);
}

}  // namespace

TEST(Kendall, MatchesBruteForceWithTies) {
  clda::Rng rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(80);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform() < 0.5 ? 0.0 : static_cast<double>(rng.below(4));
      y[i] = rng.uniform() < 0.3 ? 0.0 : rng.normal();
    }
    EXPECT_EQ(kendall_tau(x, y), brute_tau(x, y));
  }
}

TEST(Kendall, AllTiedIsZero) {
  const std::vector<double> x(10, 0.0), y = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(kendall_tau(x, y), 0.0);
}

TEST(Kendall, MatrixRejectsNonBinaryLabel) {
  Eigen::MatrixXd d(3, 2);
  d << 0, 1, 2, 3, 1, 0;
  EXPECT_THROW(kendall_tau_matrix(d), clda::InputError);
}

TEST(Kendall, MatrixThreadInvariant) {
  clda::Rng rng(2);
  Eigen::MatrixXd d(60, 7);
  for (int i = 0; i < 60; ++i) {
    d(i, 0) = static_cast<double>(rng.below(2));
    for (int j = 1; j < 7; ++j) d(i, j) = rng.uniform() < 0.4 ? 0.0 : rng.uniform();
  }
  EXPECT_EQ(kendall_tau_matrix(d, 1).tau, kendall_tau_matrix(d, 3).tau);
}

TEST(Thresholds, ClampFloor) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 1, 0, 2, 1, 3, 2, 4;
  const auto t = estimate_thresholds(x);
  EXPECT_DOUBLE_EQ(t.pi_hat(0), 0.5);
  EXPECT_DOUBLE_EQ(t.pi_hat(1), 0.0);
  EXPECT_NEAR(t.delta(0), 0.0, 1e-15);
  EXPECT_NEAR(t.delta(1), -1.1503493803760079, 1e-12);  // Phi^{-1}(1/8)
}

// Monte Carlo population tau with standard errors near 4e-4.
struct McCase {
  double r, dj, dk, tau;
};

TEST(Bridge, BinaryTruncatedMatchesMonteCarlo) {
  for (const McCase c : {McCase{0.5, 0, 0, 0.1978}, McCase{0.7, -0.5, 0.3, 0.1925}, McCase{-0.4, 0.8, -1.0, -0.1298},
                         McCase{0.9, 0.2, 0.5, 0.3155}}) {
    EXPECT_NEAR(bridge_bt(c.r, c.dj, c.dk), c.tau, 0.0016) << c.r << " " << c.dj << " " << c.dk;
  }
}

TEST(Bridge, TruncatedTruncatedMatchesMonteCarlo) {
  for (const McCase c : {McCase{0.5, 0, 0, 0.247}, McCase{0.7, -0.5, 0.3, 0.3512}, McCase{-0.4, 0.8, -1, -0.1349},
                         McCase{0.9, 0.2, 0.5, 0.4046}}) {
    EXPECT_NEAR(bridge_tt(c.r, c.dj, c.dk), c.tau, 0.0016) << c.r << " " << c.dj << " " << c.dk;
  }
}

TEST(Bridge, ZeroAtZeroAndSymmetries) {
  for (double dj : {-1.0, 0.0, 0.7}) {
    for (double dk : {-0.3, 1.2}) {
      EXPECT_NEAR(bridge_bt(0.0, dj, dk), 0.0, 1e-14);
      EXPECT_NEAR(bridge_tt(0.0, dj, dk), 0.0, 1e-14);
      for (double r : {-0.7, 0.2, 0.85}) {
        EXPECT_NEAR(bridge_tt(r, dj, dk), bridge_tt(r, dk, dj), 1e-13);
        EXPECT_NEAR(bridge_bt(-r, dj, dk), -bridge_bt(r, -dj, dk), 1e-13);
      }
    }
  }
}

TEST(Bridge, NoTruncationLimit) {
  // Far below the support both variables are continuous: tau = 2/pi asin r.
  const double r = 0.6;
  EXPECT_NEAR(bridge_tt(r, -8.0, -8.0), 2.0 / M_PI * std::asin(r), 1e-10);
}

TEST(Bridge, IncreasingInR) {
  for (PairKind kind : {PairKind::BinaryTruncated, PairKind::TruncatedTruncated}) {
    for (double dj : {-1.5, 0.0, 1.5}) {
      for (double dk : {-1.5, 0.5}) {
        double prev = -1.0;
        for (int i = -99; i <= 99; i += 3) {
          const double v = bridge(kind, 0.01 * i, dj, dk);
          EXPECT_GE(v, prev);
          prev = v;
        }
      }
    }
  }
}

TEST(Bridge, TailFormIsContinuous) {
  // Sweep across the switch between the closed form and the tail form.
  for (PairKind kind : {PairKind::BinaryTruncated, PairKind::TruncatedTruncated}) {
    double prev = bridge(kind, -0.5, 1.5, 1.5);
    for (int i = 1; i <= 400; ++i) {
      const double r = -0.5 - 0.001 * i;
      const double v = bridge(kind, r, 1.5, 1.5);
      EXPECT_LE(v, prev + 1e-13) << r;
      EXPECT_LT(prev - v, 1e-4) << r;
      prev = v;
    }
  }
}

TEST(BridgeInverse, RoundTripRandom) {
  clda::Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const PairKind kind = i % 2 ? PairKind::BinaryTruncated : PairKind::TruncatedTruncated;
    const double r = rng.uniform(-0.9, 0.9), dj = rng.uniform(-1.5, 1.5), dk = rng.uniform(-1.5, 1.5);
    const auto inv = bridge_inverse(bridge(kind, r, dj, dk), dj, dk, kind);
    EXPECT_NEAR(inv.r, r, 1e-6);
    EXPECT_FALSE(inv.clamped);
  }
}

TEST(BridgeInverse, ClampsUnattainable) {
  const auto inv = bridge_inverse(0.99, 1.0, 1.0, PairKind::TruncatedTruncated);
  EXPECT_TRUE(inv.clamped);
  EXPECT_DOUBLE_EQ(inv.r, 1.0 - kBridgeEps);
  EXPECT_EQ(bridge_inverse(0.0, 0.3, 0.2, PairKind::BinaryTruncated).r, 0.0);
}

TEST(Psd, LeavesPsdUnchanged) {
  Eigen::Matrix3d m;
  m << 1, 0.3, 0.1, 0.3, 1, 0.2, 0.1, 0.2, 1;
  EXPECT_EQ(project_psd_correlation(m), Eigen::MatrixXd(m));
}

TEST(Psd, ProjectsIndefinite) {
  Eigen::Matrix3d m;
  m << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;
  const Eigen::MatrixXd p = project_psd_correlation(m);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p).eigenvalues().minCoeff(), -1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p(i, i), 1.0, 1e-12);
  EXPECT_NEAR((p - p.transpose()).norm(), 0.0, 1e-14);
}

TEST(LatentCorrelation, RecoversJointCorrelation) {
  // Label latent correlated 0.6 with x1 and 0.3 with x2; x1, x2 correlated 0.5.
  Eigen::Matrix3d s;
  s << 1, 0.6, 0.3, 0.6, 1, 0.5, 0.3, 0.5, 1;
  const Eigen::Matrix3d l = s.llt().matrixL();
  clda::Rng rng(3);
  const int n = 20000;
  clda::Dataset d;
  d.x.resize(n, 2);
  d.names = {"a", "b"};
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d z = l * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    d.labels.push_back(z(0) > 0.2 ? 1 : 0);
    d.x(i, 0) = z(1) > -0.3 ? std::exp(z(1)) : 0.0;
    d.x(i, 1) = z(2) > 0.6 ? z(2) * z(2) : 0.0;
  }
  LatentOptions opts;
  opts.nu = 0.0;
  const auto est = estimate_latent_correlation(d, opts);
  EXPECT_NEAR(est.sigma(0, 1), 0.6, 0.03);
  EXPECT_NEAR(est.sigma(0, 2), 0.3, 0.03);
  EXPECT_NEAR(est.sigma(1, 2), 0.5, 0.03);
  EXPECT_NEAR(est.label_threshold, 0.2, 0.03);
  EXPECT_EQ(est.kinds[0], VariableKind::BinaryLabel);
}

TEST(LatentCorrelation, BlendAndUnitDiagonal) {
  clda::Rng rng(4);
  clda::Dataset d;
  d.x.resize(50, 4);
  d.names = clda::default_names(4);
  for (int i = 0; i < 50; ++i) {
    d.labels.push_back(i % 2);
    for (int j = 0; j < 4; ++j) d.x(i, j) = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
  }
  LatentOptions a, b;
  a.nu = 0.0;
  b.nu = 0.2;
  const auto ea = estimate_latent_correlation(d, a), eb = estimate_latent_correlation(d, b);
  const Eigen::MatrixXd want = 0.8 * ea.sigma + 0.2 * Eigen::MatrixXd::Identity(5, 5);
  EXPECT_LT((eb.sigma - want).cwiseAbs().maxCoeff(), 1e-14);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(eb.sigma(i, i), 1.0, 1e-14);
}
