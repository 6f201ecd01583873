#include "f3b/aead.hpp"

#include <sodium.h>

#include "sodium_init.hpp"

namespace f3b::aead {

static_assert(kNonceBytes == crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
static_assert(kTagBytes == crypto_aead_xchacha20poly1305_ietf_ABYTES);

SymmetricKey derive_key(const GroupElement& point) {
  return SymmetricKey(ScalarHasher(tags::kKeyDerivation).add(point).finish_bytes());
}

Bytes32 key_hash(const SymmetricKey& key) { return ScalarHasher(tags::kKeyHash).add(key.bytes()).finish_bytes(); }

Bytes seal(const SymmetricKey& key, ByteView plaintext, Rng& rng) {
  detail::ensure_sodium();
  Bytes out(kOverheadBytes + plaintext.size());
  out[0] = kEnvelopeVersion;
  std::uint8_t* nonce = out.data() + 1;
  rng.fill(std::span(nonce, kNonceBytes));
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + 1 + kNonceBytes, &written, plaintext.data(),
                                             plaintext.size(), &kEnvelopeVersion, 1, nullptr, nonce,
                                             key.bytes().data());
  out.resize(1 + kNonceBytes + written);
  return out;
}

Bytes open(const SymmetricKey& key, ByteView envelope) {
  detail::ensure_sodium();
  if (envelope.size() < kOverheadBytes) throw AuthError("envelope too short");
  if (envelope[0] != kEnvelopeVersion) throw AuthError("unknown envelope version");
  const std::uint8_t* nonce = envelope.data() + 1;
  const std::uint8_t* body = nonce + kNonceBytes;
  const std::size_t body_len = envelope.size() - 1 - kNonceBytes;
  Bytes out(body_len - kTagBytes);
  unsigned long long written = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(out.data(), &written, nullptr, body, body_len, envelope.data(), 1,
                                                 nonce, key.bytes().data()) != 0) {
    throw AuthError("authentication failed");
  }
  out.resize(written);
  return out;
}

}  // namespace f3b::aead
