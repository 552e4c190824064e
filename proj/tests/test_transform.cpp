#include <gtest/gtest.h>

#include <stdexcept>
#include <vector>

#include "clda/errors.hpp"
#include "clda/gauss.hpp"
#include "clda/transform.hpp"

using clda::transform::MarginalTransform;

TEST(Transform, WinsorizedCdf) {
  const std::vector<double> col = {0, 0, 0, 1, 2, 3, 4, 5, 6, 7};
  const auto t = MarginalTransform::fit(col);
  EXPECT_DOUBLE_EQ(t.pi_hat(), 0.3);
  EXPECT_DOUBLE_EQ(t.delta_n(), 0.05);
  EXPECT_DOUBLE_EQ(t.lower_clamp(), 0.3);
  EXPECT_DOUBLE_EQ(t.cdf(0.5), 0.3);
  EXPECT_DOUBLE_EQ(t.cdf(2.0), 0.5);
  EXPECT_DOUBLE_EQ(t.cdf(7.0), 0.95);
  EXPECT_DOUBLE_EQ(t.cdf(100.0), 0.95);
  EXPECT_DOUBLE_EQ(t.to_latent(3.0), clda::gauss::norm_quantile(0.6));
}

TEST(Transform, LowerClampWithoutZeros) {
  const std::vector<double> col = {1, 2, 3, 4};
  const auto t = MarginalTransform::fit(col);
  EXPECT_DOUBLE_EQ(t.lower_clamp(), 0.125);
  EXPECT_DOUBLE_EQ(t.cdf(0.5), 0.125);
}

TEST(Transform, MonotoneLatent) {
  const std::vector<double> col = {0, 0.5, 0, 1.5, 2.5, 0.1, 9, 4};
  const auto t = MarginalTransform::fit(col);
  double prev = -1e300;
  for (double x = 0.01; x < 12; x += 0.05) {
    const double z = t.to_latent(x);
    EXPECT_GE(z, prev);
    prev = z;
  }
  EXPECT_THROW(t.to_latent(0.0), std::domain_error);
}

TEST(Transform, RejectsBadColumns) {
  EXPECT_THROW(MarginalTransform::fit(std::vector<double>{1.0}), clda::InputError);
  EXPECT_THROW(MarginalTransform::fit(std::vector<double>{2, 2, 2}), clda::InputError);
  EXPECT_THROW(MarginalTransform::fit(std::vector<double>{1, -1, 2}), clda::InputError);
}

TEST(Transform, FromPartsRoundTrip) {
  const std::vector<double> col = {0, 0, 3, 1, 2};
  const auto t = MarginalTransform::fit(col);
  const auto u = MarginalTransform::from_parts(t.sorted_values(), t.delta_n());
  for (double x : {0.5, 1.0, 2.5, 3.0, 10.0}) EXPECT_EQ(t.to_latent(x), u.to_latent(x));
}
