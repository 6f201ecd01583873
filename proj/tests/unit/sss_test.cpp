#include "f3b/sss.hpp"

#include <gtest/gtest.h>

#include "f3b/errors.hpp"

namespace f3b {
namespace {

Polynomial poly_of(std::initializer_list<std::uint64_t> coeffs) {
  Polynomial p;
  for (auto c : coeffs) p.coefficients.push_back(Scalar::from_u64(c));
  return p;
}

TEST(Sss, SampleShape) {
  Rng rng(1);
  auto p = sample_polynomial(1, Scalar::from_u64(7), rng);
  ASSERT_EQ(p.threshold(), 1u);
  for (std::uint32_t i = 1; i < 10; ++i) EXPECT_EQ(eval(p, i).value, Scalar::from_u64(7));
  EXPECT_EQ(sample_polynomial(3, std::nullopt, rng).threshold(), 3u);
  EXPECT_THROW(sample_polynomial(0, std::nullopt, rng), DomainError);
}

TEST(Sss, FreshCoefficients) {
  Rng rng(2);
  auto a = sample_polynomial(4, Scalar::from_u64(9), rng);
  auto b = sample_polynomial(4, Scalar::from_u64(9), rng);
  EXPECT_EQ(a.secret(), b.secret());
  for (std::size_t j = 1; j < 4; ++j) EXPECT_NE(a.coefficients[j], b.coefficients[j]);
}

TEST(Sss, EvalByHand) {
  EXPECT_EQ(eval(poly_of({5}), 9).value, Scalar::from_u64(5));
  EXPECT_EQ(eval(poly_of({1, 1}), 2).value, Scalar::from_u64(3));
  EXPECT_EQ(eval(poly_of({0, 1, 1}), 2).value, Scalar::from_u64(6));
  EXPECT_THROW(eval(poly_of({1, 1}), 0), DomainError);
}

TEST(Sss, InterpolateByHand) {
  std::vector<Share> same{{1, Scalar::from_u64(5)}, {2, Scalar::from_u64(5)}};
  EXPECT_EQ(interpolate_at_zero(same), Scalar::from_u64(5));
  auto line = poly_of({3, 4});
  std::vector<Share> s{eval(line, 1), eval(line, 3)};
  EXPECT_EQ(interpolate_at_zero(s), Scalar::from_u64(3));
  std::vector<Share> dup{{1, Scalar::one()}, {1, Scalar::one()}};
  EXPECT_THROW(interpolate_at_zero(dup), DomainError);
  EXPECT_THROW(interpolate_at_zero(std::vector<Share>{}), DomainError);
}

// All t-subsets of n shares recover a_0 for every n <= 8.
TEST(Sss, ExhaustiveSubsets) {
  Rng rng(3);
  for (std::uint32_t n = 1; n <= 8; ++n) {
    for (std::uint32_t t = 1; t <= n; ++t) {
      auto p = sample_polynomial(t, std::nullopt, rng);
      std::vector<Share> all;
      for (std::uint32_t i = 1; i <= n; ++i) all.push_back(eval(p, i));
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::uint32_t>(__builtin_popcount(mask)) != t) continue;
        std::vector<Share> sub;
        for (std::uint32_t i = 0; i < n; ++i)
          if (mask & (1u << i)) sub.push_back(all[i]);
        ASSERT_EQ(interpolate_at_zero(sub), p.secret()) << "n=" << n << " t=" << t << " mask=" << mask;
      }
    }
  }
}

TEST(Sss, BelowThresholdDiffers) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t t = 2 + rng.uniform(6);
    auto p = sample_polynomial(t, std::nullopt, rng);
    std::vector<Share> sub;
    for (std::uint32_t i = 1; i < t; ++i) sub.push_back(eval(p, i * 3 + 1));
    EXPECT_NE(interpolate_at_zero(sub), p.secret());
  }
}

}  // namespace
}  // namespace f3b
