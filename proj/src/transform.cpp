#include "clda/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "clda/errors.hpp"
#include "clda/gauss.hpp"

namespace clda::transform {

MarginalTransform::MarginalTransform(std::vector<double> sorted, double delta_n)
    : sorted_(std::move(sorted)), delta_n_(delta_n) {
  const auto n = sorted_.size();
  if (n < 2) throw InputError("marginal transform needs at least two values");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(sorted_[i]) || sorted_[i] < 0.0) {
      throw InputError("marginal transform values must be finite and non-negative");
    }
    if (i > 0 && sorted_[i] < sorted_[i - 1]) {
      throw InputError("marginal transform values must be sorted");
    }
  }
  if (sorted_.front() == sorted_.back()) throw InputError("marginal transform of a constant column");
  if (!(delta_n_ > 0.0 && delta_n_ < 0.5)) throw InputError("winsorization constant must lie in (0, 0.5)");
  const auto zeros = std::upper_bound(sorted_.begin(), sorted_.end(), 0.0) - sorted_.begin();
  pi_hat_ = static_cast<double>(zeros) / static_cast<double>(n);
}

MarginalTransform MarginalTransform::fit(std::span<const double> column, std::optional<double> delta_n) {
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  const double dn = delta_n.value_or(1.0 / (2.0 * static_cast<double>(sorted.size())));
  return MarginalTransform(std::move(sorted), dn);
}

MarginalTransform MarginalTransform::from_parts(std::vector<double> sorted_values, double delta_n) {
  return MarginalTransform(std::move(sorted_values), delta_n);
}

double MarginalTransform::ecdf(double t) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double MarginalTransform::lower_clamp() const { return std::max(pi_hat_, delta_n_); }

double MarginalTransform::cdf(double t) const {
  return std::clamp(ecdf(t), lower_clamp(), upper_clamp());
}

double MarginalTransform::to_latent(double x) const {
  if (!(x > 0.0)) {
    throw std::domain_error("to_latent: expects a positive value, got " + std::to_string(x));
  }
  return gauss::norm_quantile(cdf(x));
}

}  // namespace clda::transform
