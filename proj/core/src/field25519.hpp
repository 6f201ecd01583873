#pragma once

#include <cstdint>
#include <cstring>

#include "f3b/detail/curve25519.hpp"

// Arithmetic in GF(2^255 - 19), radix 2^51. Every operation leaves limbs
// below 2^52 so products never overflow 128-bit accumulators.
namespace f3b::detail {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u64 kMask51 = (u64{1} << 51) - 1;

inline constexpr Fe kZero{{0, 0, 0, 0, 0}};
inline constexpr Fe kOne{{1, 0, 0, 0, 0}};
inline constexpr Fe kD{{{0x34dca135978a3ULL, 0x1a8283b156ebdULL, 0x5e7a26001c029ULL, 0x739c663a03cbbULL, 0x52036cee2b6ffULL}}};
inline constexpr Fe kD2{{{0x69b9426b2f159ULL, 0x35050762add7aULL, 0x3cf44c0038052ULL, 0x6738cc7407977ULL, 0x2406d9dc56dffULL}}};
inline constexpr Fe kSqrtM1{{{0x61b274a0ea0b0ULL, 0xd5a5fc8f189dULL, 0x7ef5e9cbd0c60ULL, 0x78595a6804c9eULL, 0x2b8324804fc1dULL}}};
inline constexpr Fe kSqrtAdMinusOne{{{0x7f6a0497b2e1bULL, 0x1836f0a97afd2ULL, 0x7d747f6be7638ULL, 0x456079e7e6498ULL, 0x376931bf2b834ULL}}};
inline constexpr Fe kInvSqrtAMinusD{{{0xfdaa805d40eaULL, 0x2eb482e57d339ULL, 0x7610274bc58ULL, 0x6510b613dc8ffULL, 0x786c8905cfaffULL}}};
inline constexpr Fe kOneMinusDSq{{{0x409c1945fc176ULL, 0x719abc6a1fc4fULL, 0x1c37f90b20684ULL, 0x6bccca55eedfULL, 0x29072a8b2b3eULL}}};
inline constexpr Fe kDMinusOneSq{{{0x55aaa44ed4d20ULL, 0x59603c3332635ULL, 0x26d3baf4a7928ULL, 0x120a66e6997a9ULL, 0x5968b37af66c2ULL}}};
inline constexpr Fe kBaseX{{{0x62d608f25d51aULL, 0x412a4b4f6592aULL, 0x75b7171a4b31dULL, 0x1ff60527118feULL, 0x216936d3cd6e5ULL}}};
inline constexpr Fe kBaseY{{{0x6666666666658ULL, 0x4ccccccccccccULL, 0x1999999999999ULL, 0x3333333333333ULL, 0x6666666666666ULL}}};
inline constexpr Fe kBaseT{{{0x68ab3a5b7dda3ULL, 0xeea2a5eadbbULL, 0x2af8df483c27eULL, 0x332b375274732ULL, 0x67875f0fd78b7ULL}}};

inline Fe fe_carry(Fe a) {
  u64 c;
  c = a.v[0] >> 51; a.v[0] &= kMask51; a.v[1] += c;
  c = a.v[1] >> 51; a.v[1] &= kMask51; a.v[2] += c;
  c = a.v[2] >> 51; a.v[2] &= kMask51; a.v[3] += c;
  c = a.v[3] >> 51; a.v[3] &= kMask51; a.v[4] += c;
  c = a.v[4] >> 51; a.v[4] &= kMask51; a.v[0] += c * 19;
  return a;
}

inline Fe fe_add(const Fe& a, const Fe& b) {
  Fe r;
  for (int i = 0; i < 5; ++i) r.v[i] = a.v[i] + b.v[i];
  return fe_carry(r);
}

// Sum without carrying: limbs stay below 2^54 for inputs below 2^53, which
// fe_mul and fe_sqr accept. Must not feed the subtrahend of fe_sub.
inline Fe fe_add_lazy(const Fe& a, const Fe& b) {
  Fe r;
  for (int i = 0; i < 5; ++i) r.v[i] = a.v[i] + b.v[i];
  return r;
}

// a - b computed as a + 4p - b.
inline Fe fe_sub(const Fe& a, const Fe& b) {
  Fe r;
  r.v[0] = a.v[0] + 0x1fffffffffffb4ULL - b.v[0];
  r.v[1] = a.v[1] + 0x1ffffffffffffcULL - b.v[1];
  r.v[2] = a.v[2] + 0x1ffffffffffffcULL - b.v[2];
  r.v[3] = a.v[3] + 0x1ffffffffffffcULL - b.v[3];
  r.v[4] = a.v[4] + 0x1ffffffffffffcULL - b.v[4];
  return fe_carry(r);
}

inline Fe fe_neg(const Fe& a) { return fe_sub(kZero, a); }

inline Fe fe_reduce_wide(u128 r0, u128 r1, u128 r2, u128 r3, u128 r4) {
  Fe out;
  r1 += static_cast<u64>(r0 >> 51);
  out.v[0] = static_cast<u64>(r0) & kMask51;
  r2 += static_cast<u64>(r1 >> 51);
  out.v[1] = static_cast<u64>(r1) & kMask51;
  r3 += static_cast<u64>(r2 >> 51);
  out.v[2] = static_cast<u64>(r2) & kMask51;
  r4 += static_cast<u64>(r3 >> 51);
  out.v[3] = static_cast<u64>(r3) & kMask51;
  u64 c = static_cast<u64>(r4 >> 51);
  out.v[4] = static_cast<u64>(r4) & kMask51;
  out.v[0] += c * 19;
  out.v[1] += out.v[0] >> 51;
  out.v[0] &= kMask51;
  return out;
}

inline Fe fe_mul(const Fe& a, const Fe& b) {
  const u64 a0 = a.v[0], a1 = a.v[1], a2 = a.v[2], a3 = a.v[3], a4 = a.v[4];
  const u64 b0 = b.v[0], b1 = b.v[1], b2 = b.v[2], b3 = b.v[3], b4 = b.v[4];
  const u64 b1_19 = b1 * 19, b2_19 = b2 * 19, b3_19 = b3 * 19, b4_19 = b4 * 19;
  u128 r0 = (u128)a0 * b0 + (u128)a1 * b4_19 + (u128)a2 * b3_19 + (u128)a3 * b2_19 + (u128)a4 * b1_19;
  u128 r1 = (u128)a0 * b1 + (u128)a1 * b0 + (u128)a2 * b4_19 + (u128)a3 * b3_19 + (u128)a4 * b2_19;
  u128 r2 = (u128)a0 * b2 + (u128)a1 * b1 + (u128)a2 * b0 + (u128)a3 * b4_19 + (u128)a4 * b3_19;
  u128 r3 = (u128)a0 * b3 + (u128)a1 * b2 + (u128)a2 * b1 + (u128)a3 * b0 + (u128)a4 * b4_19;
  u128 r4 = (u128)a0 * b4 + (u128)a1 * b3 + (u128)a2 * b2 + (u128)a3 * b1 + (u128)a4 * b0;
  return fe_reduce_wide(r0, r1, r2, r3, r4);
}

inline Fe fe_sqr(const Fe& a) {
  const u64 a0 = a.v[0], a1 = a.v[1], a2 = a.v[2], a3 = a.v[3], a4 = a.v[4];
  const u64 d0 = a0 * 2, d1 = a1 * 2, d2 = a2 * 2 * 19, d419 = a4 * 19, d4 = d419 * 2;
  u128 r0 = (u128)a0 * a0 + (u128)d4 * a1 + (u128)d2 * a3;
  u128 r1 = (u128)d0 * a1 + (u128)d4 * a2 + (u128)a3 * (a3 * 19);
  u128 r2 = (u128)d0 * a2 + (u128)a1 * a1 + (u128)d4 * a3;
  u128 r3 = (u128)d0 * a3 + (u128)d1 * a2 + (u128)a4 * d419;
  u128 r4 = (u128)d0 * a4 + (u128)d1 * a3 + (u128)a2 * a2;
  return fe_reduce_wide(r0, r1, r2, r3, r4);
}

inline Fe fe_sqr_n(Fe a, int n) {
  for (int i = 0; i < n; ++i) a = fe_sqr(a);
  return a;
}

// Little-endian 32 bytes, top bit ignored; result may be >= p (reduced lazily).
inline Fe fe_from_bytes(const std::uint8_t* s) {
  u64 w[4];
  std::memcpy(w, s, 32);
  Fe r;
  r.v[0] = w[0] & kMask51;
  r.v[1] = (w[0] >> 51 | w[1] << 13) & kMask51;
  r.v[2] = (w[1] >> 38 | w[2] << 26) & kMask51;
  r.v[3] = (w[2] >> 25 | w[3] << 39) & kMask51;
  r.v[4] = (w[3] >> 12) & kMask51;
  return r;
}

// Canonical (fully reduced) little-endian encoding.
inline void fe_to_bytes(std::uint8_t* s, const Fe& in) {
  Fe a = fe_carry(fe_carry(in));
  u64 q = (a.v[0] + 19) >> 51;
  q = (a.v[1] + q) >> 51;
  q = (a.v[2] + q) >> 51;
  q = (a.v[3] + q) >> 51;
  q = (a.v[4] + q) >> 51;
  a.v[0] += 19 * q;
  a.v[1] += a.v[0] >> 51; a.v[0] &= kMask51;
  a.v[2] += a.v[1] >> 51; a.v[1] &= kMask51;
  a.v[3] += a.v[2] >> 51; a.v[2] &= kMask51;
  a.v[4] += a.v[3] >> 51; a.v[3] &= kMask51;
  a.v[4] &= kMask51;
  u64 w[4];
  w[0] = a.v[0] | a.v[1] << 51;
  w[1] = a.v[1] >> 13 | a.v[2] << 38;
  w[2] = a.v[2] >> 26 | a.v[3] << 25;
  w[3] = a.v[3] >> 39 | a.v[4] << 12;
  std::memcpy(s, w, 32);
}

inline bool fe_is_negative(const Fe& a) {
  std::uint8_t s[32];
  fe_to_bytes(s, a);
  return s[0] & 1;
}

inline bool fe_is_zero(const Fe& a) {
  std::uint8_t s[32];
  fe_to_bytes(s, a);
  std::uint8_t acc = 0;
  for (auto b : s) acc |= b;
  return acc == 0;
}

inline bool fe_equal(const Fe& a, const Fe& b) { return fe_is_zero(fe_sub(a, b)); }

inline Fe fe_select(const Fe& if_false, const Fe& if_true, bool cond) { return cond ? if_true : if_false; }

inline Fe fe_abs(const Fe& a) { return fe_is_negative(a) ? fe_neg(a) : a; }

// a^(2^250 - 1) and the a^11 intermediate, shared by invert and pow22523.
inline Fe fe_pow2_250_1(const Fe& z, Fe& z11) {
  Fe t0 = fe_sqr(z);                      // 2
  Fe t1 = fe_sqr_n(t0, 2);                // 8
  t1 = fe_mul(z, t1);                     // 9
  t0 = fe_mul(t0, t1);                    // 11
  z11 = t0;
  Fe t2 = fe_sqr(t0);                     // 22
  t1 = fe_mul(t1, t2);                    // 2^5 - 1
  t2 = fe_sqr_n(t1, 5);
  t1 = fe_mul(t2, t1);                    // 2^10 - 1
  t2 = fe_sqr_n(t1, 10);
  t2 = fe_mul(t2, t1);                    // 2^20 - 1
  Fe t3 = fe_sqr_n(t2, 20);
  t2 = fe_mul(t3, t2);                    // 2^40 - 1
  t2 = fe_sqr_n(t2, 10);
  t1 = fe_mul(t2, t1);                    // 2^50 - 1
  t2 = fe_sqr_n(t1, 50);
  t2 = fe_mul(t2, t1);                    // 2^100 - 1
  t3 = fe_sqr_n(t2, 100);
  t2 = fe_mul(t3, t2);                    // 2^200 - 1
  t2 = fe_sqr_n(t2, 50);
  return fe_mul(t2, t1);                  // 2^250 - 1
}

inline Fe fe_invert(const Fe& z) {
  Fe z11;
  Fe t = fe_pow2_250_1(z, z11);
  t = fe_sqr_n(t, 5);                     // 2^255 - 32
  return fe_mul(t, z11);                  // 2^255 - 21
}

// z^((p-5)/8) = z^(2^252 - 3)
inline Fe fe_pow22523(const Fe& z) {
  Fe z11;
  Fe t = fe_pow2_250_1(z, z11);
  t = fe_sqr_n(t, 2);
  return fe_mul(t, z);
}

struct SqrtRatio {
  bool was_square;
  Fe root;
};

// Nonnegative sqrt(u/v) when it exists, otherwise sqrt(i*u/v).
inline SqrtRatio fe_sqrt_ratio_m1(const Fe& u, const Fe& v) {
  Fe v3 = fe_mul(fe_sqr(v), v);
  Fe v7 = fe_mul(fe_sqr(v3), v);
  Fe r = fe_mul(fe_mul(u, v3), fe_pow22523(fe_mul(u, v7)));
  Fe check = fe_mul(v, fe_sqr(r));
  Fe neg_u = fe_neg(u);
  bool correct_sign = fe_equal(check, u);
  bool flipped = fe_equal(check, neg_u);
  bool flipped_i = fe_equal(check, fe_mul(neg_u, kSqrtM1));
  Fe r_prime = fe_mul(kSqrtM1, r);
  r = fe_select(r, r_prime, flipped || flipped_i);
  return {correct_sign || flipped, fe_abs(r)};
}

}  // namespace f3b::detail
