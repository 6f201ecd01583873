#pragma once

// Actor identity keys (Ed25519) for signing transactions and bus records.

#include <array>

#include "f3b/bytes.hpp"
#include "f3b/rng.hpp"

namespace f3b {

inline constexpr std::size_t kSignatureBytes = 64;
inline constexpr std::size_t kPublicKeyBytes = 32;

using Signature = std::array<std::uint8_t, kSignatureBytes>;
using PublicKeyBytes = std::array<std::uint8_t, kPublicKeyBytes>;
// Simulated account address: first 20 bytes of H(public key).
using Address = std::array<std::uint8_t, 20>;

class Identity {
 public:
  static Identity generate(Rng& rng);

  const PublicKeyBytes& public_key() const { return public_key_; }
  Address address() const;
  Signature sign(ByteView message) const;

 private:
  PublicKeyBytes public_key_{};
  std::array<std::uint8_t, 64> secret_key_{};
};

bool verify_signature(const PublicKeyBytes& public_key, ByteView message, const Signature& signature);
Address address_of(const PublicKeyBytes& public_key);

}  // namespace f3b
