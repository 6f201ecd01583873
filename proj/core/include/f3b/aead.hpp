#pragma once

// Authenticated encryption of transactions and key derivation from group
// elements. Envelope layout (version 1):
//
//   u8 version = 0x01 | 24-byte nonce | ciphertext | 16-byte tag
//
// XChaCha20-Poly1305 (IETF), so a random nonce per seal is safe.

#include "f3b/group.hpp"

namespace f3b::aead {

inline constexpr std::uint8_t kEnvelopeVersion = 0x01;
inline constexpr std::size_t kNonceBytes = 24;
inline constexpr std::size_t kTagBytes = 16;
inline constexpr std::size_t kOverheadBytes = 1 + kNonceBytes + kTagBytes;

class SymmetricKey {
 public:
  SymmetricKey() = default;
  explicit SymmetricKey(const Bytes32& bytes) : bytes_(bytes) {}

  const Bytes32& bytes() const { return bytes_; }
  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;

 private:
  Bytes32 bytes_{};
};

// Domain-separated hash of the canonical point encoding.
SymmetricKey derive_key(const GroupElement& point);

// h_k = H(k), the optional key commitment carried by a write transaction.
Bytes32 key_hash(const SymmetricKey& key);

Bytes seal(const SymmetricKey& key, ByteView plaintext, Rng& rng);
// Throws AuthError on a wrong key, tampering, or an unknown envelope version.
Bytes open(const SymmetricKey& key, ByteView envelope);

}  // namespace f3b::aead
