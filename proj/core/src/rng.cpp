#include "f3b/rng.hpp"

#include <sodium.h>

#include <cstring>

#include "sodium_init.hpp"

namespace f3b {

Rng::Rng(std::uint64_t seed) {
  detail::ensure_sodium();
  std::uint8_t in[16] = {'f', '3', 'b', '/', 'r', 'n', 'g', 0};
  for (int i = 0; i < 8; ++i) in[8 + i] = static_cast<std::uint8_t>(seed >> (8 * i));
  crypto_generichash(key_.data(), key_.size(), in, sizeof in, nullptr, 0);
}

Rng Rng::from_os() {
  detail::ensure_sodium();
  Bytes32 key;
  randombytes_buf(key.data(), key.size());
  return Rng(key);
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES];
  static_assert(sizeof nonce == 8);
  std::memcpy(nonce, &counter_, sizeof nonce);
  ++counter_;
  crypto_stream_chacha20(out.data(), out.size(), nonce, key_.data());
}

std::uint64_t Rng::next_u64() {
  std::uint8_t buf[8];
  fill(buf);
  std::uint64_t v;
  std::memcpy(&v, buf, sizeof v);
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw DomainError("uniform bound must be positive");
  // Rejection sampling keeps the distribution exact.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    auto v = next_u64();
    if (v < limit) return v % bound;
  }
}

double Rng::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Rng Rng::fork() {
  Bytes32 key;
  fill(key);
  return Rng(key);
}

}  // namespace f3b
