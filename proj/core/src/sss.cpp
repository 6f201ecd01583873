#include "f3b/sss.hpp"

namespace f3b {

Polynomial sample_polynomial(std::size_t t, std::optional<Scalar> secret, Rng& rng) {
  if (t < 1) throw DomainError("polynomial threshold must be at least 1");
  Polynomial poly;
  poly.coefficients.reserve(t);
  poly.coefficients.push_back(secret ? *secret : Scalar::random(rng));
  for (std::size_t j = 1; j < t; ++j) poly.coefficients.push_back(Scalar::random(rng));
  return poly;
}

Scalar eval_at(const Polynomial& poly, const Scalar& x) {
  Scalar acc;
  for (auto it = poly.coefficients.rbegin(); it != poly.coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Share eval(const Polynomial& poly, std::uint32_t index) {
  if (index == 0) throw DomainError("evaluating a sharing polynomial at 0 reveals the secret");
  return {index, eval_at(poly, Scalar::from_u64(index))};
}

Scalar interpolate_at_zero(std::span<const Share> shares) {
  if (shares.empty()) throw DomainError("interpolation needs at least one share");
  std::vector<std::uint32_t> indices;
  indices.reserve(shares.size());
  for (const auto& s : shares) indices.push_back(s.index);
  auto lambdas = lagrange_coefficients(indices);
  Scalar acc;
  for (std::size_t i = 0; i < shares.size(); ++i) acc += lambdas[i] * shares[i].value;
  return acc;
}

}  // namespace f3b
