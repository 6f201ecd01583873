#pragma once

// Prime-order group (ristretto255) used by every protocol in the library.
// Written multiplicatively in the protocol code: `a * b` is the group
// operation and `p ^ k` is exponentiation. Scalars live in Z_q with
// q = 2^252 + 27742317777372353535851937790883648493.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "f3b/bytes.hpp"
#include "f3b/detail/curve25519.hpp"
#include "f3b/rng.hpp"

namespace f3b {

inline constexpr std::size_t kScalarBytes = 32;
inline constexpr std::size_t kElementBytes = 32;

class Scalar {
 public:
  Scalar() = default;

  static Scalar zero() { return {}; }
  static Scalar one() { return from_u64(1); }
  static Scalar from_u64(std::uint64_t v);
  static Scalar random(Rng& rng);
  // Canonical little-endian decoding; throws DecodeError on values >= q.
  static Scalar from_bytes(ByteView bytes);
  // Reduces 64 uniformly distributed bytes mod q.
  static Scalar from_wide(ByteView bytes64);

  const Bytes32& bytes() const { return bytes_; }
  bool is_zero() const;
  Scalar inverse() const;  // throws DomainError on zero

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a);
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  Bytes32 bytes_{};
};

class GroupElement {
 public:
  // Identity element.
  GroupElement();

  static GroupElement identity() { return {}; }
  // The fixed generator g (the ristretto255 base point).
  static const GroupElement& generator();
  // Throws DecodeError on non-canonical or invalid encodings.
  static GroupElement decode(ByteView bytes);
  static std::optional<GroupElement> try_decode(ByteView bytes);
  // Uniform map from 64 bytes (two Elligator evaluations).
  static GroupElement from_uniform_bytes(ByteView bytes64);
  static GroupElement random(Rng& rng);

  Bytes32 encode() const;
  bool is_identity() const;
  GroupElement inverse() const;

  friend GroupElement operator*(const GroupElement& a, const GroupElement& b);
  friend GroupElement operator/(const GroupElement& a, const GroupElement& b);
  friend GroupElement operator^(const GroupElement& base, const Scalar& exponent);
  GroupElement& operator*=(const GroupElement& o) { return *this = *this * o; }
  friend bool operator==(const GroupElement& a, const GroupElement& b);

  const detail::ExtendedPoint& point() const { return p_; }
  explicit GroupElement(const detail::ExtendedPoint& p) : p_(p) {}

 private:
  detail::ExtendedPoint p_;
  // Set only by decode: elements read off the wire are hashed again often.
  std::optional<Bytes32> encoding_;
};

// g^a computed with the precomputed table of the base point.
GroupElement base_pow(const Scalar& a);

// Precomputed multiples of a fixed base in signed radix 64: exponentiation
// costs 43 additions and no doublings. Worth building for bases used many times (g, g_bar, the
// per-trustee verification keys).
class FixedBaseTable {
 public:
  explicit FixedBaseTable(const GroupElement& base);
  GroupElement pow(const Scalar& exponent) const;
  const GroupElement& base() const { return base_; }

 private:
  GroupElement base_;
  std::vector<detail::CachedPoint> table_;  // 43 windows x 32 multiples
};

// prod_i bases[i]^exponents[i] using one shared chain of doublings.
GroupElement multi_pow(std::span<const GroupElement> bases, std::span<const Scalar> exponents);
// base^k for a small machine-word exponent (binary method, no table).
GroupElement pow_small(const GroupElement& base, std::uint64_t k);
// a^x * b^y
GroupElement double_pow(const GroupElement& a, const Scalar& x, const GroupElement& b, const Scalar& y);

// Chain identifier bound into every ciphertext and deal.
class Label {
 public:
  // Throws DomainError on an empty label.
  explicit Label(Bytes bytes);
  explicit Label(std::string_view text) : Label(to_bytes(text)) {}

  const Bytes& bytes() const { return bytes_; }
  friend bool operator==(const Label&, const Label&) = default;

 private:
  Bytes bytes_;
};

// Generator with unknown discrete log relative to g, derived from a label.
GroupElement derive_generator(const Label& label);
GroupElement derive_generator(std::string_view domain_tag, ByteView input);
// Second TDH2 generator, hash-derived from a fixed domain tag.
const GroupElement& generator_g_bar();
const FixedBaseTable& table_g();
const FixedBaseTable& table_g_bar();

// Fiat-Shamir / key-derivation hash into Z_q. Every input is framed with a
// type byte and a length so distinct input lists never collide.
class ScalarHasher {
 public:
  explicit ScalarHasher(std::string_view domain_tag);
  ScalarHasher& add(const GroupElement& element);
  ScalarHasher& add(ByteView bytes);
  ScalarHasher& add(std::uint64_t value);
  Scalar finish() const;
  // 32-byte digest of the same transcript, for symmetric keys and hashes.
  Bytes32 finish_bytes() const;

 private:
  Bytes transcript_;
};

using HashInput = std::variant<GroupElement, Bytes>;
Scalar hash_to_scalar(std::string_view domain_tag, std::span<const HashInput> inputs);

// Lagrange coefficient for evaluation at x = 0:
//   lambda_i = prod_{j in S, j != i} j / (j - i)   (mod q)
// Throws DomainError if i is not in the set, an index is 0, or indices repeat.
Scalar lagrange_coefficient(std::span<const std::uint32_t> index_set, std::uint32_t i);
// All coefficients for the set at once (one field inversion).
std::vector<Scalar> lagrange_coefficients(std::span<const std::uint32_t> index_set);

// Domain tags for the hash functions used by the protocols.
namespace tags {
inline constexpr std::string_view kTdh2H1 = "f3b/tdh2/H1";
inline constexpr std::string_view kTdh2H2 = "f3b/tdh2/H2";
inline constexpr std::string_view kPvssDealProof = "f3b/pvss/deal-dleq";
inline constexpr std::string_view kPvssDecProof = "f3b/pvss/dec-dleq";
inline constexpr std::string_view kKeyDerivation = "f3b/aead/kdf";
inline constexpr std::string_view kKeyHash = "f3b/key-hash";
inline constexpr std::string_view kLabelGenerator = "f3b/label-h";
inline constexpr std::string_view kGBar = "f3b/gbar";
}  // namespace tags

}  // namespace f3b
