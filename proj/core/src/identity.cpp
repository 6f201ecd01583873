#include "f3b/identity.hpp"

#include <sodium.h>

#include <algorithm>

#include "sodium_init.hpp"

namespace f3b {

Identity Identity::generate(Rng& rng) {
  detail::ensure_sodium();
  Bytes32 seed;
  rng.fill(seed);
  Identity id;
  crypto_sign_seed_keypair(id.public_key_.data(), id.secret_key_.data(), seed.data());
  return id;
}

Address Identity::address() const { return address_of(public_key_); }

Signature Identity::sign(ByteView message) const {
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_key_.data());
  return sig;
}

bool verify_signature(const PublicKeyBytes& public_key, ByteView message, const Signature& signature) {
  detail::ensure_sodium();
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
}

Address address_of(const PublicKeyBytes& public_key) {
  detail::ensure_sodium();
  std::array<std::uint8_t, 32> digest;
  crypto_generichash(digest.data(), digest.size(), public_key.data(), public_key.size(), nullptr, 0);
  Address a;
  std::copy_n(digest.begin(), a.size(), a.begin());
  return a;
}

}  // namespace f3b
