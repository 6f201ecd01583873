#include "f3b/tdh2.hpp"

#include <algorithm>
#include <string>

namespace f3b::tdh2 {

namespace {

Scalar h1(const GroupElement& c, const GroupElement& u, const GroupElement& u_bar, const GroupElement& w,
          const GroupElement& w_bar, const Label& label) {
  return ScalarHasher(tags::kTdh2H1).add(c).add(u).add(u_bar).add(w).add(w_bar).add(label.bytes()).finish();
}

Scalar h2(const GroupElement& u_i, const GroupElement& u_hat, const GroupElement& h_hat) {
  return ScalarHasher(tags::kTdh2H2).add(u_i).add(u_hat).add(h_hat).finish();
}

void put(ByteWriter& w, const GroupElement& e) { w.raw(e.encode()); }
void put(ByteWriter& w, const Scalar& s) { w.raw(s.bytes()); }
GroupElement get_element(ByteReader& r) { return GroupElement::decode(r.raw(32)); }
Scalar get_scalar(ByteReader& r) { return Scalar::from_bytes(r.raw(32)); }

}  // namespace

const GroupElement& PublicKey::verification_key(std::uint32_t index) const {
  if (index == 0 || index > verification_keys.size()) {
    throw DomainError("trustee index " + std::to_string(index) + " outside 1.." +
                      std::to_string(verification_keys.size()));
  }
  return verification_keys[index - 1];
}

Bytes Ciphertext::serialize() const {
  ByteWriter w;
  put(w, c);
  put(w, u);
  put(w, u_bar);
  put(w, e);
  put(w, f);
  return std::move(w).take();
}

Ciphertext Ciphertext::deserialize(ByteView bytes) {
  if (bytes.size() != kCiphertextBytes) throw DecodeError("TDH2 ciphertext must be 160 bytes");
  ByteReader r(bytes);
  Ciphertext ct;
  ct.c = get_element(r);
  ct.u = get_element(r);
  ct.u_bar = get_element(r);
  ct.e = get_scalar(r);
  ct.f = get_scalar(r);
  return ct;
}

Bytes Share::serialize() const {
  ByteWriter w;
  w.u32(index);
  put(w, u_i);
  put(w, e_i);
  put(w, f_i);
  return std::move(w).take();
}

Share Share::deserialize(ByteView bytes) {
  if (bytes.size() != kShareBytes) throw DecodeError("TDH2 share must be 100 bytes");
  ByteReader r(bytes);
  Share s;
  s.index = r.u32();
  if (s.index == 0) throw DecodeError("share index 0");
  s.u_i = get_element(r);
  s.e_i = get_scalar(r);
  s.f_i = get_scalar(r);
  return s;
}

Ciphertext encrypt_with(const GroupElement& pk, const GroupElement& payload_point, const Label& label,
                        const Scalar& r, const Scalar& s) {
  Ciphertext ct;
  ct.c = (pk ^ r) * payload_point;
  ct.u = table_g().pow(r);
  ct.u_bar = table_g_bar().pow(r);
  const GroupElement w = table_g().pow(s);
  const GroupElement w_bar = table_g_bar().pow(s);
  ct.e = h1(ct.c, ct.u, ct.u_bar, w, w_bar, label);
  ct.f = s + r * ct.e;
  return ct;
}

Ciphertext encrypt(const PublicKey& pk, const GroupElement& payload_point, const Label& label, Rng& rng) {
  const Scalar r = Scalar::random(rng);
  const Scalar s = Scalar::random(rng);
  return encrypt_with(pk.pk, payload_point, label, r, s);
}

bool verify_ciphertext(const Ciphertext& ct, const Label& label) {
  const Scalar neg_e = -ct.e;
  const GroupElement w = table_g().pow(ct.f) * (ct.u ^ neg_e);
  const GroupElement w_bar = table_g_bar().pow(ct.f) * (ct.u_bar ^ neg_e);
  return ct.e == h1(ct.c, ct.u, ct.u_bar, w, w_bar, label);
}

Share create_share(const Scalar& sk_i, std::uint32_t index, const Ciphertext& ct, const Label& label, Rng& rng) {
  if (index == 0) throw DomainError("trustee indices are 1-based");
  if (!verify_ciphertext(ct, label)) throw RefusalError("ciphertext proof does not verify; refusing to decrypt");
  const Scalar s_i = Scalar::random(rng);
  Share share;
  share.index = index;
  share.u_i = ct.u ^ sk_i;
  const GroupElement u_hat = ct.u ^ s_i;
  const GroupElement h_hat = table_g().pow(s_i);
  share.e_i = h2(share.u_i, u_hat, h_hat);
  share.f_i = s_i + sk_i * share.e_i;
  return share;
}

bool verify_share(const Ciphertext& ct, const Share& share, const FixedBaseTable& h_i) {
  const Scalar neg_e = -share.e_i;
  const GroupElement u_hat = double_pow(ct.u, share.f_i, share.u_i, neg_e);
  const GroupElement h_hat = table_g().pow(share.f_i) * h_i.pow(neg_e);
  return share.e_i == h2(share.u_i, u_hat, h_hat);
}

bool verify_share(const Ciphertext& ct, const Share& share, const GroupElement& h_i) {
  const Scalar neg_e = -share.e_i;
  const GroupElement u_hat = double_pow(ct.u, share.f_i, share.u_i, neg_e);
  const GroupElement h_hat = table_g().pow(share.f_i) * (h_i ^ neg_e);
  return share.e_i == h2(share.u_i, u_hat, h_hat);
}

GroupElement combine(const Ciphertext& ct, std::span<const Share> shares, std::span<const Scalar> lambdas) {
  if (shares.size() < lambdas.size()) {
    throw ThresholdError("need " + std::to_string(lambdas.size()) + " shares, got " + std::to_string(shares.size()));
  }
  std::vector<GroupElement> bases;
  bases.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) bases.push_back(shares[i].u_i);
  const GroupElement pk_r = multi_pow(bases, lambdas);
  return ct.c / pk_r;
}

GroupElement combine(const Ciphertext& ct, std::span<const Share> shares, std::size_t t) {
  if (t == 0) throw DomainError("threshold must be at least 1");
  if (shares.size() < t) {
    throw ThresholdError("need " + std::to_string(t) + " shares, got " + std::to_string(shares.size()));
  }
  std::vector<std::uint32_t> indices;
  indices.reserve(shares.size());
  for (const auto& s : shares) indices.push_back(s.index);
  // Duplicates anywhere in the input are rejected, not only among the first t.
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw DomainError("duplicate share index in combine");
  }
  indices.clear();
  for (std::size_t i = 0; i < t; ++i) indices.push_back(shares[i].index);
  const auto lambdas = lagrange_coefficients(indices);
  return combine(ct, shares, lambdas);
}

}  // namespace f3b::tdh2
