#pragma once

// Publicly verifiable secret sharing of a group element s = g^{s(0)} to a
// roster of trustee public keys, with label-derived commitment generator h.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "f3b/dleq.hpp"
#include "f3b/group.hpp"

namespace f3b::pvss {

inline constexpr std::size_t kEntryBytes = 4 + 32 + DleqProof::kBytes;   // 100
inline constexpr std::size_t kDecShareBytes = 4 + 32 + DleqProof::kBytes;  // 100
inline constexpr std::size_t kDealHeaderBytes = 8;                        // n, t

struct EncryptedShare {
  std::uint32_t index = 0;
  GroupElement s_hat;  // pk_i^{s(i)}
  DleqProof proof;     // log_h X_i = log_{pk_i} s_hat
  friend bool operator==(const EncryptedShare&, const EncryptedShare&) = default;
};

struct Deal {
  std::vector<EncryptedShare> encrypted_shares;
  std::vector<GroupElement> commitments;  // b_j = h^{a_j}, j = 0..t-1

  std::size_t threshold() const { return commitments.size(); }
  // Throws DomainError if the deal has no entry for `index`.
  const EncryptedShare& share_for(std::uint32_t index) const;

  // u32 n | u32 t | n x (u32 index | s_hat | c | r) | t x b_j
  Bytes serialize() const;
  static Deal deserialize(ByteView bytes);
  static std::size_t serialized_size(std::size_t n, std::size_t t) {
    return kDealHeaderBytes + kEntryBytes * n + 32 * t;
  }
  friend bool operator==(const Deal&, const Deal&) = default;
};

struct DecShare {
  std::uint32_t index = 0;
  GroupElement s_i;  // g^{s(i)}
  DleqProof proof;   // log_g pk_i = log_{s_i} s_hat

  Bytes serialize() const;
  static DecShare deserialize(ByteView bytes);
  friend bool operator==(const DecShare&, const DecShare&) = default;
};

// Reads one trustee's s_hat straight from a serialized deal without decoding
// the rest. Throws DecodeError on a malformed header or a missing index.
GroupElement encrypted_share_at(ByteView serialized_deal, std::uint32_t index);

// Per-(label, roster) precomputation: the commitment generator and fixed-base
// tables for h and every trustee key. Build once, share across deals.
class Setting {
 public:
  Setting(const Label& label, std::vector<GroupElement> trustee_pks);

  const Label& label() const { return label_; }
  const GroupElement& h() const { return h_table_->base(); }
  const FixedBaseTable& h_table() const { return *h_table_; }
  std::size_t n() const { return pks_.size(); }
  const std::vector<GroupElement>& trustee_pks() const { return pks_; }
  // 1-based.
  const FixedBaseTable& pk_table(std::uint32_t index) const;

 private:
  Label label_;
  std::vector<GroupElement> pks_;
  std::shared_ptr<const FixedBaseTable> h_table_;
  std::vector<std::shared_ptr<const FixedBaseTable>> pk_tables_;
};

struct DealResult {
  Deal deal;
  GroupElement secret;  // s = g^{s(0)}
};

// Throws DomainError unless 1 <= t <= n.
DealResult deal(const Setting& setting, std::size_t t, Rng& rng);
DealResult deal(std::span<const GroupElement> trustee_pks, std::size_t t, const Label& label, Rng& rng);

// X_i = prod_j b_j^{i^j}, evaluated by Horner in the exponent.
GroupElement commitment_at(std::span<const GroupElement> commitments, std::uint32_t index);

bool verify_deal_share(const Deal& deal, std::uint32_t index, const GroupElement& pk_i, const Label& label);
bool verify_deal_share(const Deal& deal, std::uint32_t index, const Setting& setting);

// s_i = s_hat^{1/sk_i} with a proof of correct decryption. Throws DomainError if sk_i = 0.
DecShare decrypt_share(const Scalar& sk_i, std::uint32_t index, const GroupElement& s_hat, Rng& rng);

bool verify_dec_share(const GroupElement& pk_i, const GroupElement& s_hat, const DecShare& dec);
bool verify_dec_share(const FixedBaseTable& pk_i, const GroupElement& s_hat, const DecShare& dec);

// s = prod s_i^{lambda_i} over the first t shares. Throws ThresholdError below t.
GroupElement reconstruct(std::span<const DecShare> dec_shares, std::size_t t);
GroupElement reconstruct(std::span<const DecShare> dec_shares, std::span<const Scalar> lambdas);

}  // namespace f3b::pvss
