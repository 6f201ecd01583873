#pragma once

// Simulated network between actors. Every hop takes the same fixed delay.
// Records are versioned, length-prefixed and signed by the sender's identity:
//
//   u8 version | u8 type | u32 from | u32 to | u64 epoch | blob payload | 64-byte signature
//
// The signature covers everything before it.

#include <cstdint>
#include <map>
#include <vector>

#include "f3b/bytes.hpp"
#include "f3b/identity.hpp"

namespace f3b {

enum class MessageType : std::uint8_t {
  kDkgDeal = 1,
  kDkgComplaint = 2,
  kDkgJustification = 3,
  kReshareDeal = 4,
  kReshareComplaint = 5,
  kReshareJustification = 6,
  kShareRelease = 7,
  kRefusal = 8,
  kKeyBatch = 9,
};

inline constexpr std::uint8_t kRecordVersion = 1;
inline constexpr std::uint32_t kBroadcast = 0xffffffffu;

struct Record {
  MessageType type{};
  std::uint32_t from = 0;
  std::uint32_t to = kBroadcast;
  std::uint64_t epoch = 0;
  Bytes payload;
  Signature signature{};

  Bytes signed_bytes() const;
  Bytes serialize() const;
  static Record deserialize(ByteView bytes);
  void sign(const Identity& identity) { signature = identity.sign(signed_bytes()); }
};

struct BusStats {
  std::uint64_t records = 0;
  std::uint64_t bytes = 0;
  std::uint64_t rejected = 0;  // bad signature or unknown sender
  std::uint64_t hops = 0;      // delivery rounds
};

// Round-based delivery: everything sent before deliver() arrives together,
// one hop later in simulated time. Records whose signature does not verify
// against the registered sender are dropped.
class Bus {
 public:
  explicit Bus(double delay_ms = 100.0) : delay_ms_(delay_ms) {}

  void register_actor(std::uint32_t id, const PublicKeyBytes& key) { keys_[id] = key; }
  void send(const Record& record);

  // Advances the simulated clock by one hop and returns the records in
  // sending order, after wire round-trip and signature checks.
  std::vector<Record> deliver();

  double delay_ms() const { return delay_ms_; }
  double now_ms() const { return now_ms_; }
  bool idle() const { return in_flight_.empty(); }
  const BusStats& stats() const { return stats_; }

 private:
  double delay_ms_;
  double now_ms_ = 0;
  std::map<std::uint32_t, PublicKeyBytes> keys_;
  std::vector<Bytes> in_flight_;
  BusStats stats_;
};

}  // namespace f3b
