#pragma once

// Rank-based estimation of the joint latent correlation of (label, covariates)
// under the binary/truncated Gaussian copula.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "clda/dataset.hpp"

namespace clda::latent {

// Bridge inversion works on [-1 + kBridgeEps, 1 - kBridgeEps].
inline constexpr double kBridgeEps = 1e-5;

enum class VariableKind { BinaryLabel, Truncated, EffectivelyContinuous };

// Variables without zeros are handled by the truncated bridges at the
// clamped threshold, so only two pair kinds exist.
enum class PairKind { BinaryTruncated, TruncatedTruncated };

struct ThresholdVector {
  Eigen::VectorXd delta;   // latent thresholds, Phi^{-1}(max(pi_hat, floor))
  Eigen::VectorXd pi_hat;  // observed zero proportions
};

struct KendallMatrix {
  Eigen::MatrixXd tau;  // unit diagonal
};

// Kendall's tau_a of two samples: tied pairs contribute zero. O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Pairwise tau_a of the n x (1+p) matrix with a 0/1 label in column 0.
// Throws InputError for n < 2 or a non-binary label column.
KendallMatrix kendall_tau_matrix(const Eigen::MatrixXd& data, int threads = 1);

// pi_hat_j = zeros/n, delta_j = Phi^{-1}(max(pi_hat_j, clamp_floor)).
// The floor defaults to 1/(2n).
ThresholdVector estimate_thresholds(const Eigen::MatrixXd& covariates,
                                    std::optional<double> clamp_floor = std::nullopt);

std::vector<VariableKind> variable_kinds(const ThresholdVector& thresholds);

// Population tau between Y = 1(Z_j > delta_binary) and the zero-inflated
// X = 1(Z_k > delta_truncated) Z_k, corr(Z_j, Z_k) = r.
double bridge_bt(double r, double delta_binary, double delta_truncated);

// Population tau between two zero-inflated variables; symmetric in the deltas.
double bridge_tt(double r, double delta_j, double delta_k);

double bridge(PairKind kind, double r, double delta_j, double delta_k);

struct BridgeInverse {
  double r = 0.0;
  bool clamped = false;  // tau_hat was outside the attainable range
  int evaluations = 0;
};

// Solves bridge(r) = tau_hat on [-1 + eps, 1 - eps] by bracketed secant
// steps with bisection fallback. For BinaryTruncated delta_j is the label's.
BridgeInverse bridge_inverse(double tau_hat, double delta_j, double delta_k, PairKind kind);

struct LatentCorrelation {
  Eigen::MatrixXd sigma;  // (1+p) x (1+p); index 0 is the label
  double nu = 0.01;
  ThresholdVector thresholds;
  double label_threshold = 0.0;
  std::vector<VariableKind> kinds;  // kinds[0] is BinaryLabel
  std::size_t clamped_pairs = 0;

  std::size_t p() const { return static_cast<std::size_t>(sigma.rows() - 1); }
  auto sigma21() const { return sigma.col(0).tail(sigma.rows() - 1); }
  auto sigma22() const { return sigma.bottomRightCorner(sigma.rows() - 1, sigma.cols() - 1); }
};

struct LatentOptions {
  double nu = 0.01;
  std::optional<double> clamp_floor;
  int threads = 1;
};

// Nearest PSD matrix by eigenvalue clipping, then rescaled to unit diagonal.
// An input that is already PSD is returned unchanged.
Eigen::MatrixXd project_psd_correlation(const Eigen::MatrixXd& m);

// Entrywise bridge inversion of Kendall's tau, PSD projection and the
// blend (1 - nu) Sigma_p + nu I.
LatentCorrelation estimate_latent_correlation(const Dataset& data, const LatentOptions& opts = {});

}  // namespace clda::latent
