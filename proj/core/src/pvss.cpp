#include "f3b/pvss.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "f3b/sss.hpp"

namespace f3b::pvss {

namespace {

Scalar deal_challenge(const GroupElement& x_i, const GroupElement& s_hat, const GroupElement& a1,
                      const GroupElement& a2) {
  return ScalarHasher(tags::kPvssDealProof).add(x_i).add(s_hat).add(a1).add(a2).finish();
}

Scalar dec_challenge(const GroupElement& pk_i, const GroupElement& s_hat, const GroupElement& s_i,
                     const GroupElement& a1, const GroupElement& a2) {
  return ScalarHasher(tags::kPvssDecProof).add(pk_i).add(s_hat).add(s_i).add(a1).add(a2).finish();
}

GroupElement read_element(ByteReader& r) { return GroupElement::decode(r.raw(32)); }

}  // namespace

// ---------------------------------------------------------------------------

GroupElement encrypted_share_at(ByteView serialized_deal, std::uint32_t index) {
  ByteReader r(serialized_deal);
  const std::uint32_t n = r.u32();
  const std::uint32_t t = r.u32();
  if (t == 0 || t > n) throw DecodeError("deal header has invalid (n, t)");
  if (serialized_deal.size() != Deal::serialized_size(n, t)) throw DecodeError("deal length does not match its header");
  // Dealers write entries in index order; fall back to a scan otherwise.
  auto entry_index = [&](std::size_t pos) {
    ByteReader e(serialized_deal.subspan(kDealHeaderBytes + pos * kEntryBytes, 4));
    return e.u32();
  };
  std::size_t pos = index - 1;
  if (index == 0 || pos >= n || entry_index(pos) != index) {
    pos = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (entry_index(i) == index) {
        pos = i;
        break;
      }
    }
    if (pos == n || index == 0) throw DecodeError("deal has no share for trustee " + std::to_string(index));
  }
  ByteReader e(serialized_deal.subspan(kDealHeaderBytes + pos * kEntryBytes + 4, 32));
  return read_element(e);
}

const EncryptedShare& Deal::share_for(std::uint32_t index) const {
  for (const auto& s : encrypted_shares) {
    if (s.index == index) return s;
  }
  throw DomainError("deal has no share for trustee " + std::to_string(index));
}

Bytes Deal::serialize() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(encrypted_shares.size()));
  w.u32(static_cast<std::uint32_t>(commitments.size()));
  for (const auto& s : encrypted_shares) {
    w.u32(s.index);
    w.raw(s.s_hat.encode());
    s.proof.write(w);
  }
  for (const auto& b : commitments) w.raw(b.encode());
  return std::move(w).take();
}

Deal Deal::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  const std::uint32_t n = r.u32();
  const std::uint32_t t = r.u32();
  if (t == 0 || t > n) throw DecodeError("deal header has invalid (n, t)");
  if (bytes.size() != serialized_size(n, t)) throw DecodeError("deal length does not match its header");
  Deal d;
  d.encrypted_shares.reserve(n);
  std::unordered_set<std::uint32_t> seen;
  for (std::uint32_t i = 0; i < n; ++i) {
    EncryptedShare s;
    s.index = r.u32();
    if (s.index == 0 || !seen.insert(s.index).second) throw DecodeError("deal has a zero or repeated index");
    s.s_hat = read_element(r);
    s.proof = DleqProof::read(r);
    d.encrypted_shares.push_back(s);
  }
  d.commitments.reserve(t);
  for (std::uint32_t j = 0; j < t; ++j) d.commitments.push_back(read_element(r));
  r.expect_done();
  return d;
}

Bytes DecShare::serialize() const {
  ByteWriter w;
  w.u32(index);
  w.raw(s_i.encode());
  proof.write(w);
  return std::move(w).take();
}

DecShare DecShare::deserialize(ByteView bytes) {
  if (bytes.size() != kDecShareBytes) throw DecodeError("PVSS decrypted share must be 100 bytes");
  ByteReader r(bytes);
  DecShare d;
  d.index = r.u32();
  if (d.index == 0) throw DecodeError("share index 0");
  d.s_i = read_element(r);
  d.proof = DleqProof::read(r);
  return d;
}

// ---------------------------------------------------------------------------

Setting::Setting(const Label& label, std::vector<GroupElement> trustee_pks)
    : label_(label),
      pks_(std::move(trustee_pks)),
      h_table_(std::make_shared<const FixedBaseTable>(derive_generator(label_))) {
  pk_tables_.reserve(pks_.size());
  for (const auto& pk : pks_) pk_tables_.push_back(std::make_shared<const FixedBaseTable>(pk));
}

const FixedBaseTable& Setting::pk_table(std::uint32_t index) const {
  if (index == 0 || index > pk_tables_.size()) throw DomainError("trustee index out of range");
  return *pk_tables_[index - 1];
}

DealResult deal(const Setting& setting, std::size_t t, Rng& rng) {
  const std::size_t n = setting.n();
  if (t < 1 || t > n) {
    throw DomainError("PVSS threshold " + std::to_string(t) + " outside 1.." + std::to_string(n));
  }
  const Polynomial poly = sample_polynomial(t, std::nullopt, rng);
  DealResult out;
  out.secret = base_pow(poly.secret());
  out.deal.commitments.reserve(t);
  for (const auto& a : poly.coefficients) out.deal.commitments.push_back(setting.h_table().pow(a));
  out.deal.encrypted_shares.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) {
    const Scalar s_of_i = eval(poly, i).value;
    const FixedBaseTable& pk = setting.pk_table(i);
    EncryptedShare share;
    share.index = i;
    share.s_hat = pk.pow(s_of_i);
    const GroupElement x_i = setting.h_table().pow(s_of_i);
    const Scalar w = Scalar::random(rng);
    const GroupElement a1 = setting.h_table().pow(w);
    const GroupElement a2 = pk.pow(w);
    share.proof.challenge = deal_challenge(x_i, share.s_hat, a1, a2);
    share.proof.response = w - s_of_i * share.proof.challenge;
    out.deal.encrypted_shares.push_back(share);
  }
  return out;
}

DealResult deal(std::span<const GroupElement> trustee_pks, std::size_t t, const Label& label, Rng& rng) {
  return deal(Setting(label, {trustee_pks.begin(), trustee_pks.end()}), t, rng);
}

GroupElement commitment_at(std::span<const GroupElement> commitments, std::uint32_t index) {
  if (commitments.empty()) throw DomainError("no commitments");
  GroupElement acc = commitments.back();
  for (std::size_t j = commitments.size() - 1; j-- > 0;) acc = pow_small(acc, index) * commitments[j];
  return acc;
}

namespace {

bool check_deal_share(const Deal& deal, std::uint32_t index, const GroupElement& h, const GroupElement& pk_i,
                      const FixedBaseTable* h_table, const FixedBaseTable* pk_table) {
  if (deal.commitments.empty()) return false;
  const auto it = std::find_if(deal.encrypted_shares.begin(), deal.encrypted_shares.end(),
                               [index](const EncryptedShare& s) { return s.index == index; });
  if (it == deal.encrypted_shares.end()) return false;
  const GroupElement x_i = commitment_at(deal.commitments, index);
  const auto& [c, r] = it->proof;
  const GroupElement h_r = h_table ? h_table->pow(r) : h ^ r;
  const GroupElement pk_r = pk_table ? pk_table->pow(r) : pk_i ^ r;
  const GroupElement a1 = h_r * (x_i ^ c);
  const GroupElement a2 = pk_r * (it->s_hat ^ c);
  return c == deal_challenge(x_i, it->s_hat, a1, a2);
}

}  // namespace

bool verify_deal_share(const Deal& deal, std::uint32_t index, const GroupElement& pk_i, const Label& label) {
  return check_deal_share(deal, index, derive_generator(label), pk_i, nullptr, nullptr);
}

bool verify_deal_share(const Deal& deal, std::uint32_t index, const Setting& setting) {
  if (index == 0 || index > setting.n()) return false;
  return check_deal_share(deal, index, setting.h(), setting.trustee_pks()[index - 1], &setting.h_table(),
                          &setting.pk_table(index));
}

DecShare decrypt_share(const Scalar& sk_i, std::uint32_t index, const GroupElement& s_hat, Rng& rng) {
  if (sk_i.is_zero()) throw DomainError("trustee secret key must be non-zero");
  if (index == 0) throw DomainError("trustee indices are 1-based");
  DecShare out;
  out.index = index;
  out.s_i = s_hat ^ sk_i.inverse();
  const GroupElement pk_i = base_pow(sk_i);
  const Scalar w = Scalar::random(rng);
  const GroupElement a1 = base_pow(w);
  const GroupElement a2 = out.s_i ^ w;
  out.proof.challenge = dec_challenge(pk_i, s_hat, out.s_i, a1, a2);
  out.proof.response = w - sk_i * out.proof.challenge;
  return out;
}

namespace {

bool check_dec_share(const GroupElement& pk_i, const GroupElement& pk_pow_c, const GroupElement& s_hat,
                     const DecShare& dec) {
  const auto& [c, r] = dec.proof;
  const GroupElement a1 = base_pow(r) * pk_pow_c;
  const GroupElement a2 = double_pow(dec.s_i, r, s_hat, c);
  return c == dec_challenge(pk_i, s_hat, dec.s_i, a1, a2);
}

}  // namespace

bool verify_dec_share(const GroupElement& pk_i, const GroupElement& s_hat, const DecShare& dec) {
  return check_dec_share(pk_i, pk_i ^ dec.proof.challenge, s_hat, dec);
}

bool verify_dec_share(const FixedBaseTable& pk_i, const GroupElement& s_hat, const DecShare& dec) {
  return check_dec_share(pk_i.base(), pk_i.pow(dec.proof.challenge), s_hat, dec);
}

GroupElement reconstruct(std::span<const DecShare> dec_shares, std::span<const Scalar> lambdas) {
  if (dec_shares.size() < lambdas.size()) {
    throw ThresholdError("need " + std::to_string(lambdas.size()) + " shares, got " +
                         std::to_string(dec_shares.size()));
  }
  std::vector<GroupElement> bases;
  bases.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) bases.push_back(dec_shares[i].s_i);
  return multi_pow(bases, lambdas);
}

GroupElement reconstruct(std::span<const DecShare> dec_shares, std::size_t t) {
  if (t == 0) throw DomainError("threshold must be at least 1");
  if (dec_shares.size() < t) {
    throw ThresholdError("need " + std::to_string(t) + " shares, got " + std::to_string(dec_shares.size()));
  }
  std::vector<std::uint32_t> indices;
  for (const auto& d : dec_shares) indices.push_back(d.index);
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw DomainError("duplicate share index in reconstruct");
  }
  indices.clear();
  for (std::size_t i = 0; i < t; ++i) indices.push_back(dec_shares[i].index);
  return reconstruct(dec_shares, lagrange_coefficients(indices));
}

}  // namespace f3b::pvss
