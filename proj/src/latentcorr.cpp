#include "clda/latentcorr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "clda/errors.hpp"
#include "clda/gauss.hpp"
#include "clda/parallel.hpp"

namespace clda::latent {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Counts strict inversions of v while merge-sorting it.
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf) {
  const std::size_t n = v.size();
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

std::int64_t tied_pairs(const std::vector<double>& sorted) {
  std::int64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::int64_t>(run * (run - 1) / 2);
      run = 1;
    }
  }
  return ties;
}

double phi3(double a, double b, double c, std::initializer_list<double> m) {
  const double u[3] = {a, b, c};
  return gauss::mvn_cdf(u, gauss::CorrelationMatrixSmall(3, m));
}

double phi4(double a, double b, std::initializer_list<double> m) {
  const double u[4] = {a, b, 0.0, 0.0};
  return gauss::mvn_cdf(u, gauss::CorrelationMatrixSmall(4, m));
}

void check_r(double r) {
  if (!(std::abs(r) <= 1.0 - 1e-6)) {
    throw std::domain_error("bridge: |r| must be at most 1 - 1e-6, got " + std::to_string(r));
  }
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("kendall_tau: length mismatch");
  if (n < 2) throw InputError("kendall_tau: need at least two observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  // Ties in x and joint ties, read off the (x, y)-sorted order.
  std::int64_t x_ties = 0, joint_ties = 0;
  std::size_t run_x = 1, run_xy = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const bool same_x = i < n && x[order[i]] == x[order[i - 1]];
    const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
    if (same_x) {
      ++run_x;
    } else {
      x_ties += static_cast<std::int64_t>(run_x * (run_x - 1) / 2);
      run_x = 1;
    }
    if (same_xy) {
      ++run_xy;
    } else {
      joint_ties += static_cast<std::int64_t>(run_xy * (run_xy - 1) / 2);
      run_xy = 1;
    }
  }

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = count_inversions(ys, buf);
  const std::int64_t y_ties = tied_pairs(ys);

  const std::int64_t total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t s = total - x_ties - y_ties + joint_ties - 2 * swaps;
  return 2.0 * static_cast<double>(s) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

KendallMatrix kendall_tau_matrix(const Eigen::MatrixXd& data, int threads) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 2) throw InputError("kendall_tau_matrix: need at least two observations");
  if (d < 1) throw InputError("kendall_tau_matrix: no columns");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data(i, 0) != 0.0 && data(i, 0) != 1.0) {
      throw InputError("kendall_tau_matrix: label column must be 0/1");
    }
  }

  std::vector<std::vector<double>> cols(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    cols[static_cast<std::size_t>(j)].assign(data.col(j).data(), data.col(j).data() + n);
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) pairs.emplace_back(j, k);
  }
  KendallMatrix out{Eigen::MatrixXd::Identity(d, d)};
  parallel_for(pairs.size(), threads, [&](std::size_t q) {
    const auto [j, k] = pairs[q];
    const double t = kendall_tau(cols[static_cast<std::size_t>(j)], cols[static_cast<std::size_t>(k)]);
    out.tau(j, k) = t;
    out.tau(k, j) = t;
  });
  return out;
}

ThresholdVector estimate_thresholds(const Eigen::MatrixXd& covariates,
                                    std::optional<double> clamp_floor) {
  const Eigen::Index n = covariates.rows();
  if (n < 1) throw InputError("estimate_thresholds: empty data");
  const double floor = clamp_floor.value_or(1.0 / (2.0 * static_cast<double>(n)));
  ThresholdVector out;
  out.pi_hat.resize(covariates.cols());
  out.delta.resize(covariates.cols());
  for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
    const double zeros = static_cast<double>((covariates.col(j).array() == 0.0).count());
    const double pi = zeros / static_cast<double>(n);
    out.pi_hat(j) = pi;
    out.delta(j) = gauss::norm_quantile(std::max(pi, floor));
  }
  return out;
}

std::vector<VariableKind> variable_kinds(const ThresholdVector& thresholds) {
  std::vector<VariableKind> kinds{VariableKind::BinaryLabel};
  for (Eigen::Index j = 0; j < thresholds.pi_hat.size(); ++j) {
    kinds.push_back(thresholds.pi_hat(j) > 0.0 ? VariableKind::Truncated
                                               : VariableKind::EffectivelyContinuous);
  }
  return kinds;
}

namespace {

// Below this co-positive probability the closed forms lose the r-dependent
// part of tau to cancellation, so tau is rebuilt from its small pieces.
constexpr double kTailCell = 1e-6;

// P(Z1 > h1, Z2 > h2) to relative accuracy.
double upper_orthant(double h1, double h2, double r, double s) {
  auto f = [&](double x) { return gauss::norm_pdf(x) * gauss::norm_cdf((r * x - h2) / s); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, h1, std::numeric_limits<double>::infinity(), 20, 1e-12);
}

// E[1(Z1 > h1, Z2 > h2) 1(Z1' > h1, Z2' < h2) sgn(Z1 - Z1')] for independent
// copies, given q = P(Z1 > h1, Z2 > h2).
double cross_term(double h1, double h2, double r, double s, double q) {
  const double base = gauss::bvn_cdf(h1, h2, r);
  auto f = [&](double x) {
    const double below = std::max(gauss::bvn_cdf(x, h2, r) - base, 0.0);
    return gauss::norm_pdf(x) * gauss::norm_cdf((r * x - h2) / s) * below;
  };
  const double weighted = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, h1, std::numeric_limits<double>::infinity(), 20, 1e-12);
  return 2.0 * weighted - q * (gauss::norm_cdf(-h1) - q);
}

// Tail forms for r < 0. With p1, p2 the nonzero rates and q the co-positive
// cell, tau = -2 p1 p2 + 2q plus cross terms of order q; the term from two
// co-positive draws lies in [-q^2, q^2] and is taken at its r -> -1 value.
double tail_bt(double r, double h_binary, double h_truncated) {
  const double s = std::sqrt(1.0 - r * r);
  const double q = upper_orthant(h_binary, h_truncated, r, s);
  return -2.0 * gauss::norm_cdf(-h_binary) * gauss::norm_cdf(-h_truncated) + 2.0 * q +
         2.0 * cross_term(h_truncated, h_binary, r, s, q);
}

double tail_tt(double r, double hj, double hk) {
  const double s = std::sqrt(1.0 - r * r);
  const double q = upper_orthant(hj, hk, r, s);
  return -2.0 * gauss::norm_cdf(-hj) * gauss::norm_cdf(-hk) + 2.0 * q - q * q +
         2.0 * cross_term(hj, hk, r, s, q) + 2.0 * cross_term(hk, hj, r, s, q);
}

bool in_tail(double r, double h1, double h2) {
  return r < 0.0 && gauss::bvn_cdf(-h1, -h2, r) < kTailCell;
}

double closed_bt(double r, double delta_binary, double delta_truncated) {
  const double s = kInvSqrt2;
  const double a = -delta_truncated;
  const double b = delta_binary;
  const double first = phi3(a, b, 0.0, {1.0, -r, s, -r, 1.0, -r * s, s, -r * s, 1.0});
  const double second = phi3(a, b, 0.0, {1.0, 0.0, -s, 0.0, 1.0, -r * s, -s, -r * s, 1.0});
  return 2.0 * (1.0 - gauss::norm_cdf(delta_truncated)) * gauss::norm_cdf(delta_binary) -
         2.0 * first - 2.0 * second;
}

double closed_tt(double r, double delta_j, double delta_k) {
  const double s = kInvSqrt2;
  const double rs = r * s;
  const double a = phi4(-delta_j, -delta_k,
                        {1.0, 0.0, s, -rs,  //
                         0.0, 1.0, -rs, s,  //
                         s, -rs, 1.0, -r,   //
                         -rs, s, -r, 1.0});
  const double b = phi4(-delta_j, -delta_k,
                        {1.0, r, s, rs,   //
                         r, 1.0, rs, s,   //
                         s, rs, 1.0, r,   //
                         rs, s, r, 1.0});
  return -2.0 * a + 2.0 * b;
}

}  // namespace

double bridge_bt(double r, double delta_binary, double delta_truncated) {
  check_r(r);
  // Flipping the latent label reverses the order of Y: tau(r, b, t) = -tau(-r, -b, t).
  if (r < 0.0 && in_tail(r, delta_binary, delta_truncated)) {
    return tail_bt(r, delta_binary, delta_truncated);
  }
  if (r > 0.0 && in_tail(-r, -delta_binary, delta_truncated)) {
    return -tail_bt(-r, -delta_binary, delta_truncated);
  }
  return closed_bt(r, delta_binary, delta_truncated);
}

double bridge_tt(double r, double delta_j, double delta_k) {
  check_r(r);
  if (in_tail(r, delta_j, delta_k)) return tail_tt(r, delta_j, delta_k);
  return closed_tt(r, delta_j, delta_k);
}

double bridge(PairKind kind, double r, double delta_j, double delta_k) {
  return kind == PairKind::BinaryTruncated ? bridge_bt(r, delta_j, delta_k)
                                           : bridge_tt(r, delta_j, delta_k);
}

BridgeInverse bridge_inverse(double tau_hat, double delta_j, double delta_k, PairKind kind) {
  if (!std::isfinite(tau_hat) || !std::isfinite(delta_j) || !std::isfinite(delta_k)) {
    throw std::invalid_argument("bridge_inverse: non-finite input");
  }
  BridgeInverse out;
  if (tau_hat == 0.0) return out;

  auto g = [&](double r) {
    ++out.evaluations;
    return bridge(kind, r, delta_j, delta_k);
  };

  // G(0) = 0 and G is increasing, so the sign of tau_hat picks the half-bracket.
  const double edge = tau_hat > 0.0 ? 1.0 - kBridgeEps : -1.0 + kBridgeEps;
  const double g_edge = g(edge);
  if ((tau_hat > 0.0 && tau_hat >= g_edge) || (tau_hat < 0.0 && tau_hat <= g_edge)) {
    out.r = edge;
    out.clamped = tau_hat != g_edge;
    return out;
  }

  // Brent's method on f(r) = G(r) - tau_hat over [0, edge].
  double a = 0.0, fa = -tau_hat;
  double b = edge, fb = g_edge - tau_hat;
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a, fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b, b = c, c = a;
      fa = fb, fb = fc, fc = fa;
    }
    const double tol = 2.0 * 1e-16 * std::abs(b) + 0.5e-13;
    const double m = 0.5 * (c - b);
    if (fb == 0.0 || std::abs(m) <= tol) break;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, rr = fb / fc;
        p = s * (2.0 * m * qq * (qq - rr) - (b - a) * (rr - 1.0));
        q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m, e = m;
      }
    } else {
      d = m, e = m;
    }
    a = b, fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = g(b) - tau_hat;
  }
  out.r = b;
  return out;
}

Eigen::MatrixXd project_psd_correlation(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= 0.0) return m;
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd psd = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd d = psd.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  psd = d.asDiagonal() * psd * d.asDiagonal();
  psd = 0.5 * (psd + psd.transpose());
  psd.diagonal().setOnes();
  return psd;
}

LatentCorrelation estimate_latent_correlation(const Dataset& data, const LatentOptions& opts) {
  validate_dataset(data);
  if (!(opts.nu >= 0.0 && opts.nu < 1.0)) throw InputError("nu must lie in [0, 1)");

  const std::size_t p = data.p();
  const KendallMatrix tau = kendall_tau_matrix(data.joint(), opts.threads);

  LatentCorrelation out;
  out.nu = opts.nu;
  out.thresholds = estimate_thresholds(data.x, opts.clamp_floor);
  out.kinds = variable_kinds(out.thresholds);
  out.label_threshold =
      gauss::norm_quantile(static_cast<double>(data.count(0)) / static_cast<double>(data.n()));

  auto delta = [&](std::size_t j) {
    return j == 0 ? out.label_threshold : out.thresholds.delta(static_cast<Eigen::Index>(j - 1));
  };

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j <= p; ++j) {
    for (std::size_t k = j + 1; k <= p; ++k) pairs.emplace_back(j, k);
  }
  std::vector<BridgeInverse> solved(pairs.size());
  parallel_for(pairs.size(), opts.threads, [&](std::size_t q) {
    const auto [j, k] = pairs[q];
    const PairKind kind = j == 0 ? PairKind::BinaryTruncated : PairKind::TruncatedTruncated;
    solved[q] = bridge_inverse(tau.tau(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)),
                               delta(j), delta(k), kind);
  });

  Eigen::MatrixXd raw = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p + 1),
                                                  static_cast<Eigen::Index>(p + 1));
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto j = static_cast<Eigen::Index>(pairs[q].first);
    const auto k = static_cast<Eigen::Index>(pairs[q].second);
    raw(j, k) = raw(k, j) = solved[q].r;
    if (solved[q].clamped) ++out.clamped_pairs;
  }

  const Eigen::MatrixXd projected = project_psd_correlation(raw);
  out.sigma = (1.0 - opts.nu) * projected +
              opts.nu * Eigen::MatrixXd::Identity(projected.rows(), projected.cols());
  return out;
}

}  // namespace clda::latent
