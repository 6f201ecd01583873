#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "f3b/group.hpp"

namespace f3b {

// s(x) = a_0 + a_1 x + ... + a_{t-1} x^{t-1} over Z_q; a_0 is the secret.
struct Polynomial {
  std::vector<Scalar> coefficients;

  std::size_t threshold() const { return coefficients.size(); }
  const Scalar& secret() const { return coefficients.front(); }
};

struct Share {
  std::uint32_t index = 0;  // 1-based
  Scalar value;
};

// Throws DomainError when t < 1.
Polynomial sample_polynomial(std::size_t t, std::optional<Scalar> secret, Rng& rng);

// Horner evaluation at a positive index; index 0 would reveal the secret and
// is rejected with DomainError.
Share eval(const Polynomial& poly, std::uint32_t index);
Scalar eval_at(const Polynomial& poly, const Scalar& x);

// Lagrange interpolation at x = 0. Does not know the threshold: with fewer
// than t shares the result is simply unrelated to the secret.
Scalar interpolate_at_zero(std::span<const Share> shares);

}  // namespace f3b
