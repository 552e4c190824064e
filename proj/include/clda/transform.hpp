#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace clda::transform {

// Winsorized empirical CDF of one training column and the induced map of
// observed positive values onto the latent Gaussian scale.
//
//   F(t) = clamp(#{x_i <= t} / n, lower, 1 - delta_n),  lower = max(pi_hat, delta_n)
//   to_latent(x) = Phi^{-1}(F(x))
class MarginalTransform {
 public:
  // delta_n defaults to 1/(2n). Throws InputError for n < 2, negative or
  // non-finite values, or a constant column.
  static MarginalTransform fit(std::span<const double> column,
                               std::optional<double> delta_n = std::nullopt);

  // Rebuilds a fitted transform from its stored parts (model files).
  static MarginalTransform from_parts(std::vector<double> sorted_values, double delta_n);

  // Unclamped empirical CDF, right-continuous.
  double ecdf(double t) const;
  double cdf(double t) const;
  double lower_clamp() const;
  double upper_clamp() const { return 1.0 - delta_n_; }

  // Throws std::domain_error for x <= 0; zeros belong to the truncated path.
  double to_latent(double x) const;

  const std::vector<double>& sorted_values() const { return sorted_; }
  double pi_hat() const { return pi_hat_; }
  double delta_n() const { return delta_n_; }
  std::size_t n() const { return sorted_.size(); }

 private:
  MarginalTransform(std::vector<double> sorted, double delta_n);

  std::vector<double> sorted_;
  double pi_hat_ = 0.0;
  double delta_n_ = 0.0;
};

}  // namespace clda::transform
