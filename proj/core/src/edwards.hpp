#pragma once

#include <optional>

#include "field25519.hpp"

// edwards25519 group law (a = -1) and the ristretto255 quotient encoding.
namespace f3b::detail {

inline constexpr ExtendedPoint kIdentity{kZero, kOne, kOne, kZero};
inline constexpr ExtendedPoint kBasePoint{kBaseX, kBaseY, kOne, kBaseT};

inline CachedPoint to_cached(const ExtendedPoint& p) {
  return {fe_add_lazy(p.Y, p.X), fe_sub(p.Y, p.X), fe_add_lazy(p.Z, p.Z), fe_mul(p.T, kD2)};
}

inline CachedPoint cached_neg(const CachedPoint& c) { return {c.YminusX, c.YplusX, c.Z2, fe_neg(c.T2d)}; }

inline constexpr CachedPoint kCachedIdentity{kOne, kOne, {{2, 0, 0, 0, 0}}, kZero};

inline ExtendedPoint point_add(const ExtendedPoint& p, const CachedPoint& q) {
  Fe a = fe_mul(fe_sub(p.Y, p.X), q.YminusX);
  Fe b = fe_mul(fe_add_lazy(p.Y, p.X), q.YplusX);
  Fe c = fe_mul(p.T, q.T2d);
  Fe d = fe_mul(p.Z, q.Z2);
  Fe e = fe_sub(b, a), f = fe_sub(d, c), g = fe_add_lazy(d, c), h = fe_add_lazy(b, a);
  return {fe_mul(e, f), fe_mul(g, h), fe_mul(f, g), fe_mul(e, h)};
}

inline ExtendedPoint point_add(const ExtendedPoint& p, const ExtendedPoint& q) { return point_add(p, to_cached(q)); }

inline ExtendedPoint point_neg(const ExtendedPoint& p) { return {fe_neg(p.X), p.Y, p.Z, fe_neg(p.T)}; }

inline ExtendedPoint point_double(const ExtendedPoint& p) {
  Fe a = fe_sqr(p.X);
  Fe b = fe_sqr(p.Y);
  Fe z2 = fe_sqr(p.Z);
  Fe c = fe_add_lazy(z2, z2);
  Fe h = fe_add_lazy(a, b);
  Fe e = fe_sub(h, fe_sqr(fe_add_lazy(p.X, p.Y)));
  Fe g = fe_sub(a, b);
  Fe f = fe_add_lazy(c, g);
  // (X3, Y3, Z3, T3) = (E*F, G*H, F*G, E*H) with the signs folded for a = -1.
  return {fe_mul(e, f), fe_mul(g, h), fe_mul(f, g), fe_mul(e, h)};
}

// Doubling that skips T; valid only when the result is doubled again.
inline ExtendedPoint point_double_no_t(const ExtendedPoint& p) {
  Fe a = fe_sqr(p.X);
  Fe b = fe_sqr(p.Y);
  Fe z2 = fe_sqr(p.Z);
  Fe c = fe_add_lazy(z2, z2);
  Fe h = fe_add_lazy(a, b);
  Fe e = fe_sub(h, fe_sqr(fe_add_lazy(p.X, p.Y)));
  Fe g = fe_sub(a, b);
  Fe f = fe_add_lazy(c, g);
  return {fe_mul(e, f), fe_mul(g, h), fe_mul(f, g), p.T};
}

// Four doublings, i.e. multiplication by 16.
inline ExtendedPoint point_mul16(const ExtendedPoint& p) {
  ExtendedPoint q = point_double_no_t(p);
  q = point_double_no_t(q);
  q = point_double_no_t(q);
  return point_double(q);
}

// Equality in the ristretto quotient group.
inline bool ristretto_equal(const ExtendedPoint& p, const ExtendedPoint& q) {
  return fe_equal(fe_mul(p.X, q.Y), fe_mul(p.Y, q.X)) || fe_equal(fe_mul(p.Y, q.Y), fe_mul(p.X, q.X));
}

inline void ristretto_encode(std::uint8_t* out, const ExtendedPoint& p) {
  Fe u1 = fe_mul(fe_add(p.Z, p.Y), fe_sub(p.Z, p.Y));
  Fe u2 = fe_mul(p.X, p.Y);
  Fe invsqrt = fe_sqrt_ratio_m1(kOne, fe_mul(u1, fe_sqr(u2))).root;
  Fe den1 = fe_mul(invsqrt, u1);
  Fe den2 = fe_mul(invsqrt, u2);
  Fe z_inv = fe_mul(fe_mul(den1, den2), p.T);
  Fe ix0 = fe_mul(p.X, kSqrtM1);
  Fe iy0 = fe_mul(p.Y, kSqrtM1);
  Fe enchanted = fe_mul(den1, kInvSqrtAMinusD);
  bool rotate = fe_is_negative(fe_mul(p.T, z_inv));
  Fe x = fe_select(p.X, iy0, rotate);
  Fe y = fe_select(p.Y, ix0, rotate);
  Fe den_inv = fe_select(den2, enchanted, rotate);
  if (fe_is_negative(fe_mul(x, z_inv))) y = fe_neg(y);
  Fe s = fe_abs(fe_mul(den_inv, fe_sub(p.Z, y)));
  fe_to_bytes(out, s);
}

inline std::optional<ExtendedPoint> ristretto_decode(const std::uint8_t* in) {
  Fe s = fe_from_bytes(in);
  std::uint8_t canon[32];
  fe_to_bytes(canon, s);
  if (std::memcmp(canon, in, 32) != 0) return std::nullopt;  // non-canonical or top bit set
  if (canon[0] & 1) return std::nullopt;                       // negative
  Fe ss = fe_sqr(s);
  Fe u1 = fe_sub(kOne, ss);
  Fe u2 = fe_add(kOne, ss);
  Fe u2_sqr = fe_sqr(u2);
  Fe v = fe_sub(fe_neg(fe_mul(kD, fe_sqr(u1))), u2_sqr);
  auto [was_square, invsqrt] = fe_sqrt_ratio_m1(kOne, fe_mul(v, u2_sqr));
  Fe den_x = fe_mul(invsqrt, u2);
  Fe den_y = fe_mul(fe_mul(invsqrt, den_x), v);
  Fe x = fe_abs(fe_mul(fe_add(s, s), den_x));
  Fe y = fe_mul(u1, den_y);
  Fe t = fe_mul(x, y);
  if (!was_square || fe_is_negative(t) || fe_is_zero(y)) return std::nullopt;
  return ExtendedPoint{x, y, kOne, t};
}

// One-way map from a field element to the group.
inline ExtendedPoint ristretto_elligator(const Fe& t) {
  Fe r = fe_mul(kSqrtM1, fe_sqr(t));
  Fe u = fe_mul(fe_add(r, kOne), kOneMinusDSq);
  Fe v = fe_mul(fe_sub(fe_neg(kOne), fe_mul(r, kD)), fe_add(r, kD));
  auto [was_square, s] = fe_sqrt_ratio_m1(u, v);
  Fe s_prime = fe_neg(fe_abs(fe_mul(s, t)));
  s = fe_select(s_prime, s, was_square);
  Fe c = fe_select(r, fe_neg(kOne), was_square);
  Fe n = fe_sub(fe_mul(fe_mul(c, fe_sub(r, kOne)), kDMinusOneSq), v);
  Fe w0 = fe_mul(fe_add(s, s), v);
  Fe w1 = fe_mul(n, kSqrtAdMinusOne);
  Fe s2 = fe_sqr(s);
  Fe w2 = fe_sub(kOne, s2);
  Fe w3 = fe_add(kOne, s2);
  return {fe_mul(w0, w3), fe_mul(w2, w1), fe_mul(w1, w3), fe_mul(w0, w2)};
}

inline ExtendedPoint ristretto_from_uniform(const std::uint8_t* bytes64) {
  std::uint8_t half[32];
  std::memcpy(half, bytes64, 32);
  half[31] &= 0x7f;
  ExtendedPoint p1 = ristretto_elligator(fe_from_bytes(half));
  std::memcpy(half, bytes64 + 32, 32);
  half[31] &= 0x7f;
  ExtendedPoint p2 = ristretto_elligator(fe_from_bytes(half));
  return point_add(p1, p2);
}

}  // namespace f3b::detail
