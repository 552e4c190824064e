#pragma once

// Gaussian kernels: univariate pdf/cdf/quantile and orthant-type
// probabilities of 2-, 3- and 4-variate standard normals.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace clda::gauss {

inline constexpr double kPi = 3.14159265358979323846;

double norm_pdf(double x);

// Total on the extended reals: -inf -> 0, +inf -> 1.
double norm_cdf(double x);

// Inverse of norm_cdf (Wichura's AS241). Throws std::domain_error unless 0 < p < 1.
double norm_quantile(double p);

// Bivariate density with unit variances and correlation rho.
double bvn_pdf(double x, double y, double rho);

// P(Z1 < a, Z2 < b) for a standard bivariate normal with correlation rho.
// |rho| <= 1; the degenerate cases rho = +-1 are exact.
double bvn_cdf(double a, double b, double rho);

// Symmetric, unit-diagonal, positive definite correlation matrix of
// dimension 2, 3 or 4. Construction validates; invalid input throws
// std::invalid_argument.
class CorrelationMatrixSmall {
 public:
  // Row-major dim x dim entries.
  CorrelationMatrixSmall(std::size_t dim, std::span<const double> entries);
  CorrelationMatrixSmall(std::size_t dim, std::initializer_list<double> entries);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * 4 + j]; }

 private:
  void validate() const;

  std::size_t dim_;
  std::array<double, 16> a_{};
};

// Phi_d(upper; corr) for d = corr.dim() in {2,3,4}. Finite limits beyond
// +-8.5 are clamped to +-8.5. Deterministic fixed-node quadrature, so
// repeated calls with equal input return bit-identical output.
double mvn_cdf(std::span<const double> upper, const CorrelationMatrixSmall& corr);

}  // namespace clda::gauss
