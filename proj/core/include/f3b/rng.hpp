#pragma once

#include <cstdint>
#include <span>

#include "f3b/bytes.hpp"

namespace f3b {

// Deterministic ChaCha20 keystream generator. Every randomized operation takes
// one of these so that a whole simulation replays bit-for-bit from its seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  explicit Rng(const Bytes32& key) : key_(key) {}

  // Seeded from the operating system; for callers that do not need replay.
  static Rng from_os();

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  // Uniform in [0, bound); bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);
  double unit();

  // Independent child stream; the parent advances by one draw.
  Rng fork();

 private:
  Bytes32 key_{};
  std::uint64_t counter_ = 0;
};

}  // namespace f3b
