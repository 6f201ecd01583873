#include "f3b/group.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <unordered_set>

#include "edwards.hpp"
#include "sodium_init.hpp"

namespace f3b {

using detail::CachedPoint;
using detail::ExtendedPoint;

// ---------------------------------------------------------------------------
// Scalar

Scalar Scalar::from_u64(std::uint64_t v) {
  Scalar s;
  for (int i = 0; i < 8; ++i) s.bytes_[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

Scalar Scalar::random(Rng& rng) {
  std::array<std::uint8_t, 64> wide;
  rng.fill(wide);
  return from_wide(wide);
}

Scalar Scalar::from_wide(ByteView bytes64) {
  if (bytes64.size() != 64) throw DecodeError("wide scalar input must be 64 bytes");
  detail::ensure_sodium();
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.bytes_.data(), bytes64.data());
  return s;
}

Scalar Scalar::from_bytes(ByteView bytes) {
  if (bytes.size() != kScalarBytes) throw DecodeError("scalar encoding must be 32 bytes");
  std::array<std::uint8_t, 64> wide{};
  std::copy(bytes.begin(), bytes.end(), wide.begin());
  Scalar s = from_wide(wide);
  if (!std::equal(bytes.begin(), bytes.end(), s.bytes_.begin())) throw DecodeError("non-canonical scalar");
  return s;
}

bool Scalar::is_zero() const {
  return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t b) { return b == 0; });
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw DomainError("zero has no inverse");
  Scalar out;
  crypto_core_ristretto255_scalar_invert(out.bytes_.data(), bytes_.data());
  return out;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  Scalar out;
  crypto_core_ristretto255_scalar_add(out.bytes_.data(), a.bytes_.data(), b.bytes_.data());
  return out;
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  Scalar out;
  crypto_core_ristretto255_scalar_sub(out.bytes_.data(), a.bytes_.data(), b.bytes_.data());
  return out;
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  Scalar out;
  crypto_core_ristretto255_scalar_mul(out.bytes_.data(), a.bytes_.data(), b.bytes_.data());
  return out;
}

Scalar operator-(const Scalar& a) {
  Scalar out;
  crypto_core_ristretto255_scalar_negate(out.bytes_.data(), a.bytes_.data());
  return out;
}

// ---------------------------------------------------------------------------
// Exponentiation helpers

namespace {

// Signed radix-64 digits in [-32, 32); scalars are < 2^253 so 43 digits suffice.
constexpr int kFixedWindows = 43;
constexpr int kFixedEntries = 32;

std::array<std::int8_t, kFixedWindows> radix64(const Scalar& s) {
  std::uint64_t x[5] = {0, 0, 0, 0, 0};
  std::memcpy(x, s.bytes().data(), 32);
  std::array<std::int8_t, kFixedWindows> e{};
  int carry = 0;
  for (int i = 0; i < kFixedWindows; ++i) {
    const int pos = 6 * i, idx = pos / 64, bit = pos % 64;
    std::uint64_t buf = bit <= 58 ? x[idx] >> bit : (x[idx] >> bit) | (x[idx + 1] << (64 - bit));
    int d = static_cast<int>(buf & 63) + carry;
    carry = (d + 32) >> 6;
    e[i] = static_cast<std::int8_t>(d - (carry << 6));
  }
  return e;
}

// [P, 2P, ..., 32P]
std::array<CachedPoint, kFixedEntries> small_multiples(const ExtendedPoint& p) {
  std::array<CachedPoint, kFixedEntries> t;
  ExtendedPoint cur = p;
  t[0] = detail::to_cached(p);
  for (int j = 1; j < kFixedEntries; ++j) {
    cur = j == 1 ? detail::point_double(p) : detail::point_add(cur, t[0]);
    t[j] = detail::to_cached(cur);
  }
  return t;
}

inline ExtendedPoint add_digit(const ExtendedPoint& acc, const CachedPoint* table, int digit) {
  if (digit > 0) return detail::point_add(acc, table[digit - 1]);
  if (digit < 0) return detail::point_add(acc, detail::cached_neg(table[-digit - 1]));
  return acc;
}

// Width-5 NAF: odd digits in [-15, 15] with at least four zeros after each
// non-zero digit, so roughly one addition per six bits.
using Naf = std::array<std::int8_t, 256>;

Naf wnaf5(const Scalar& s) {
  std::uint64_t x[5] = {0, 0, 0, 0, 0};
  std::memcpy(x, s.bytes().data(), 32);
  Naf naf{};
  std::uint64_t carry = 0;
  std::size_t pos = 0;
  while (pos < 256) {
    std::size_t idx = pos / 64, bit = pos % 64;
    std::uint64_t buf = bit < 59 ? x[idx] >> bit : (x[idx] >> bit) | (x[idx + 1] << (64 - bit));
    std::uint64_t window = carry + (buf & 31);
    if ((window & 1) == 0) {
      ++pos;
      continue;
    }
    if (window < 16) {
      carry = 0;
      naf[pos] = static_cast<std::int8_t>(window);
    } else {
      carry = 1;
      naf[pos] = static_cast<std::int8_t>(static_cast<int>(window) - 32);
    }
    pos += 5;
  }
  return naf;
}

// [P, 3P, 5P, ..., 15P]
std::array<CachedPoint, 8> odd_multiples(const ExtendedPoint& p) {
  std::array<CachedPoint, 8> t;
  const CachedPoint p2 = detail::to_cached(detail::point_double(p));
  ExtendedPoint cur = p;
  t[0] = detail::to_cached(p);
  for (int j = 1; j < 8; ++j) {
    cur = detail::point_add(cur, p2);
    t[j] = detail::to_cached(cur);
  }
  return t;
}

inline ExtendedPoint add_odd_digit(const ExtendedPoint& acc, const CachedPoint* table, int digit) {
  if (digit > 0) return detail::point_add(acc, table[digit >> 1]);
  return detail::point_add(acc, detail::cached_neg(table[(-digit) >> 1]));
}

ExtendedPoint straus(std::span<const GroupElement> bases, std::span<const Scalar> exponents) {
  const std::size_t k = bases.size();
  std::vector<std::array<CachedPoint, 8>> tables(k);
  std::vector<Naf> digits(k);
  std::array<bool, 256> busy{};
  int top = -1;
  for (std::size_t i = 0; i < k; ++i) {
    tables[i] = odd_multiples(bases[i].point());
    digits[i] = wnaf5(exponents[i]);
    for (int pos = 255; pos >= 0; --pos) {
      if (digits[i][pos] == 0) continue;
      busy[pos] = true;
      top = std::max(top, pos);
    }
  }
  if (top < 0) return detail::kIdentity;
  ExtendedPoint acc = detail::kIdentity;
  for (int pos = top; pos >= 0; --pos) {
    if (pos != top) {
      // T is only read by additions, so skip it when none follow.
      acc = busy[pos] || pos == 0 ? detail::point_double(acc) : detail::point_double_no_t(acc);
    }
    if (!busy[pos]) continue;
    for (std::size_t i = 0; i < k; ++i) {
      if (digits[i][pos] != 0) acc = add_odd_digit(acc, tables[i].data(), digits[i][pos]);
    }
  }
  return acc;
}

const std::string_view kElementTag = "element";

}  // namespace

// ---------------------------------------------------------------------------
// GroupElement

GroupElement::GroupElement() : p_(detail::kIdentity) {}

const GroupElement& GroupElement::generator() {
  static const GroupElement g(detail::kBasePoint);
  return g;
}

std::optional<GroupElement> GroupElement::try_decode(ByteView bytes) {
  if (bytes.size() != kElementBytes) return std::nullopt;
  auto p = detail::ristretto_decode(bytes.data());
  if (!p) return std::nullopt;
  GroupElement e(*p);
  Bytes32 enc;
  std::copy(bytes.begin(), bytes.end(), enc.begin());
  e.encoding_ = enc;
  return e;
}

GroupElement GroupElement::decode(ByteView bytes) {
  auto e = try_decode(bytes);
  if (!e) throw DecodeError("invalid group element encoding");
  return *e;
}

GroupElement GroupElement::from_uniform_bytes(ByteView bytes64) {
  if (bytes64.size() != 64) throw DecodeError("uniform input must be 64 bytes");
  return GroupElement(detail::ristretto_from_uniform(bytes64.data()));
}

GroupElement GroupElement::random(Rng& rng) {
  std::array<std::uint8_t, 64> wide;
  rng.fill(wide);
  return from_uniform_bytes(wide);
}

Bytes32 GroupElement::encode() const {
  if (encoding_) return *encoding_;
  Bytes32 out;
  detail::ristretto_encode(out.data(), p_);
  return out;
}

bool GroupElement::is_identity() const { return *this == GroupElement(); }

GroupElement GroupElement::inverse() const { return GroupElement(detail::point_neg(p_)); }

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  return GroupElement(detail::point_add(a.p_, b.p_));
}

GroupElement operator/(const GroupElement& a, const GroupElement& b) {
  return GroupElement(detail::point_add(a.p_, detail::cached_neg(detail::to_cached(b.p_))));
}

GroupElement operator^(const GroupElement& base, const Scalar& exponent) {
  const GroupElement bases[1] = {base};
  const Scalar exps[1] = {exponent};
  return GroupElement(straus(bases, exps));
}

bool operator==(const GroupElement& a, const GroupElement& b) { return detail::ristretto_equal(a.p_, b.p_); }

GroupElement multi_pow(std::span<const GroupElement> bases, std::span<const Scalar> exponents) {
  if (bases.size() != exponents.size()) throw DomainError("multi_pow: bases and exponents differ in length");
  return GroupElement(straus(bases, exponents));
}

GroupElement pow_small(const GroupElement& base, std::uint64_t k) {
  if (k == 0) return GroupElement();
  const CachedPoint cached = detail::to_cached(base.point());
  ExtendedPoint acc = base.point();
  for (int bit = 62 - __builtin_clzll(k) + 0; bit >= 0; --bit) {
    acc = detail::point_double(acc);
    if ((k >> bit) & 1) acc = detail::point_add(acc, cached);
  }
  return GroupElement(acc);
}

GroupElement double_pow(const GroupElement& a, const Scalar& x, const GroupElement& b, const Scalar& y) {
  const GroupElement bases[2] = {a, b};
  const Scalar exps[2] = {x, y};
  return GroupElement(straus(bases, exps));
}

// ---------------------------------------------------------------------------
// FixedBaseTable

FixedBaseTable::FixedBaseTable(const GroupElement& base) : base_(base) {
  table_.resize(kFixedWindows * kFixedEntries);
  ExtendedPoint cur = base.point();
  for (int i = 0; i < kFixedWindows; ++i) {
    auto multiples = small_multiples(cur);
    std::copy(multiples.begin(), multiples.end(), table_.begin() + i * kFixedEntries);
    for (int d = 0; d < 6; ++d) cur = detail::point_double(cur);
  }
}

GroupElement FixedBaseTable::pow(const Scalar& exponent) const {
  auto digits = radix64(exponent);
  ExtendedPoint acc = detail::kIdentity;
  for (int w = 0; w < kFixedWindows; ++w) acc = add_digit(acc, table_.data() + w * kFixedEntries, digits[w]);
  return GroupElement(acc);
}

GroupElement base_pow(const Scalar& a) { return table_g().pow(a); }

const FixedBaseTable& table_g() {
  static const FixedBaseTable t(GroupElement::generator());
  return t;
}

const FixedBaseTable& table_g_bar() {
  static const FixedBaseTable t(generator_g_bar());
  return t;
}

// ---------------------------------------------------------------------------
// Hashing

ScalarHasher::ScalarHasher(std::string_view domain_tag) {
  ByteWriter w;
  w.blob(ByteView(reinterpret_cast<const std::uint8_t*>(domain_tag.data()), domain_tag.size()));
  transcript_ = std::move(w).take();
}

ScalarHasher& ScalarHasher::add(const GroupElement& element) {
  transcript_.push_back(0x01);
  auto enc = element.encode();
  transcript_.insert(transcript_.end(), enc.begin(), enc.end());
  return *this;
}

ScalarHasher& ScalarHasher::add(ByteView bytes) {
  ByteWriter w;
  w.u8(0x02);
  w.blob(bytes);
  transcript_.insert(transcript_.end(), w.bytes().begin(), w.bytes().end());
  return *this;
}

ScalarHasher& ScalarHasher::add(std::uint64_t value) {
  ByteWriter w;
  w.u8(0x03);
  w.u64(value);
  transcript_.insert(transcript_.end(), w.bytes().begin(), w.bytes().end());
  return *this;
}

Scalar ScalarHasher::finish() const {
  detail::ensure_sodium();
  std::array<std::uint8_t, 64> digest;
  crypto_hash_sha512(digest.data(), transcript_.data(), transcript_.size());
  return Scalar::from_wide(digest);
}

Bytes32 ScalarHasher::finish_bytes() const {
  detail::ensure_sodium();
  std::array<std::uint8_t, 64> digest;
  crypto_hash_sha512(digest.data(), transcript_.data(), transcript_.size());
  Bytes32 out;
  std::copy_n(digest.begin(), 32, out.begin());
  return out;
}

Scalar hash_to_scalar(std::string_view domain_tag, std::span<const HashInput> inputs) {
  ScalarHasher h(domain_tag);
  for (const auto& in : inputs) {
    std::visit([&h](const auto& v) { h.add(v); }, in);
  }
  return h.finish();
}

// ---------------------------------------------------------------------------
// Generators

Label::Label(Bytes bytes) : bytes_(std::move(bytes)) {
  if (bytes_.empty()) throw DomainError("label must be non-empty");
}

GroupElement derive_generator(std::string_view domain_tag, ByteView input) {
  detail::ensure_sodium();
  ByteWriter w;
  w.blob(ByteView(reinterpret_cast<const std::uint8_t*>(domain_tag.data()), domain_tag.size()));
  w.blob(input);
  std::array<std::uint8_t, 64> digest;
  crypto_hash_sha512(digest.data(), w.bytes().data(), w.size());
  return GroupElement::from_uniform_bytes(digest);
}

GroupElement derive_generator(const Label& label) { return derive_generator(tags::kLabelGenerator, label.bytes()); }

const GroupElement& generator_g_bar() {
  static const GroupElement g_bar = derive_generator(tags::kGBar, ByteView{});
  return g_bar;
}

// ---------------------------------------------------------------------------
// Lagrange

namespace {

void check_index_set(std::span<const std::uint32_t> index_set) {
  std::unordered_set<std::uint32_t> seen;
  for (auto j : index_set) {
    if (j == 0) throw DomainError("share indices are 1-based; index 0 is not allowed");
    if (!seen.insert(j).second) throw DomainError("duplicate share index " + std::to_string(j));
  }
}

Scalar signed_diff(std::uint32_t j, std::uint32_t i) {
  return j > i ? Scalar::from_u64(j - i) : -Scalar::from_u64(i - j);
}

}  // namespace

Scalar lagrange_coefficient(std::span<const std::uint32_t> index_set, std::uint32_t i) {
  check_index_set(index_set);
  if (std::find(index_set.begin(), index_set.end(), i) == index_set.end()) {
    throw DomainError("index " + std::to_string(i) + " is not in the interpolation set");
  }
  Scalar num = Scalar::one();
  Scalar den = Scalar::one();
  for (auto j : index_set) {
    if (j == i) continue;
    num *= Scalar::from_u64(j);
    den *= signed_diff(j, i);
  }
  return num * den.inverse();
}

std::vector<Scalar> lagrange_coefficients(std::span<const std::uint32_t> index_set) {
  check_index_set(index_set);
  const std::size_t k = index_set.size();
  // num[a] = prod_{b != a} j_b via prefix/suffix products.
  std::vector<Scalar> num(k, Scalar::one()), den(k, Scalar::one());
  Scalar run = Scalar::one();
  for (std::size_t a = 0; a < k; ++a) {
    num[a] = run;
    run *= Scalar::from_u64(index_set[a]);
  }
  run = Scalar::one();
  for (std::size_t a = k; a-- > 0;) {
    num[a] *= run;
    run *= Scalar::from_u64(index_set[a]);
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a != b) den[a] *= signed_diff(index_set[b], index_set[a]);
    }
  }
  // Montgomery batch inversion of the denominators.
  std::vector<Scalar> prefix(k);
  Scalar acc = Scalar::one();
  for (std::size_t a = 0; a < k; ++a) {
    prefix[a] = acc;
    acc *= den[a];
  }
  Scalar inv = acc.inverse();
  std::vector<Scalar> out(k);
  for (std::size_t a = k; a-- > 0;) {
    out[a] = num[a] * inv * prefix[a];
    inv *= den[a];
  }
  return out;
}

}  // namespace f3b
