#pragma once

// TDH2 threshold cryptosystem over the library group. The label is not part
// of the serialized ciphertext; callers pass it to every check instead.

#include <cstdint>
#include <span>
#include <vector>

#include "f3b/group.hpp"

namespace f3b::tdh2 {

inline constexpr std::size_t kCiphertextBytes = 5 * 32;
inline constexpr std::size_t kShareBytes = 4 + 3 * 32;

struct PublicKey {
  GroupElement pk;                               // g^sk
  std::vector<GroupElement> verification_keys;   // h_i = g^{sk_i}, index i at position i-1

  std::size_t n() const { return verification_keys.size(); }
  // Throws DomainError for indices outside 1..n.
  const GroupElement& verification_key(std::uint32_t index) const;
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

struct Ciphertext {
  GroupElement c, u, u_bar;
  Scalar e, f;

  Bytes serialize() const;
  static Ciphertext deserialize(ByteView bytes);
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

struct Share {
  std::uint32_t index = 0;
  GroupElement u_i;
  Scalar e_i, f_i;

  Bytes serialize() const;
  static Share deserialize(ByteView bytes);
  friend bool operator==(const Share&, const Share&) = default;
};

// Encrypts the key-encapsulation point k' under the committee key.
Ciphertext encrypt(const PublicKey& pk, const GroupElement& payload_point, const Label& label, Rng& rng);
// Same with caller-chosen randomness (r, s); used by tests that need r.
Ciphertext encrypt_with(const GroupElement& pk, const GroupElement& payload_point, const Label& label,
                        const Scalar& r, const Scalar& s);

// Checks the ciphertext's proof that log_g u = log_gbar u_bar under `label`.
bool verify_ciphertext(const Ciphertext& ct, const Label& label);

// Decryption share for trustee `index`. Re-verifies the ciphertext and throws
// RefusalError if it does not check out.
Share create_share(const Scalar& sk_i, std::uint32_t index, const Ciphertext& ct, const Label& label, Rng& rng);

// Checks that (u, h_i, u_i) is a Diffie-Hellman triple via the share's proof.
bool verify_share(const Ciphertext& ct, const Share& share, const GroupElement& h_i);
bool verify_share(const Ciphertext& ct, const Share& share, const FixedBaseTable& h_i);

// k' = c / prod u_i^{lambda_i} over the first t shares. Shares must already
// be verified. Throws ThresholdError below t, DomainError on duplicates.
GroupElement combine(const Ciphertext& ct, std::span<const Share> shares, std::size_t t);
// Variant with precomputed Lagrange coefficients for the first t indices.
GroupElement combine(const Ciphertext& ct, std::span<const Share> shares, std::span<const Scalar> lambdas);

}  // namespace f3b::tdh2
