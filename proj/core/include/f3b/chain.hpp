#pragma once

// Deterministic simulated blockchain: fixed block time, finality after m
// confirmations, encrypted write transactions with a storage deposit,
// delayed execution after key release, a slashing contract for premature
// share release, and on-chain key storage for catch-up.
//
// Block h is produced at simulated time h * block_time_ms; genesis is h = 0.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "f3b/aead.hpp"
#include "f3b/identity.hpp"
#include "f3b/pvss.hpp"
#include "f3b/tdh2.hpp"
#include "f3b/trace.hpp"

namespace f3b::chain {

enum class Protocol : std::uint8_t { kTdh2 = 1, kPvss = 2 };

std::string_view to_string(Protocol p);
// Accepts "tdh2" or "pvss"; throws DomainError otherwise.
Protocol parse_protocol(std::string_view text);

// Exact non-negative rational, so fee and collateral arithmetic never rounds.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  // Parses "0.9", "1", "3/4". Throws DomainError on anything else.
  static Rational parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  // floor(x * this)
  std::uint64_t apply(std::uint64_t x) const;
};

struct ChainConfig {
  std::uint64_t block_time_ms = 12000;
  std::uint32_t confirmations = 64;  // m
  Label label{"f3b-sim-genesis"};
  std::uint64_t deposit_per_byte = 1;
  Rational refund_fraction{9, 10};
  std::uint32_t key_write_deadline_blocks = 2;  // delta
  std::uint64_t execution_fee = 0;              // flat, burned at submission
  std::size_t block_capacity = 0;               // txs per block; 0 = unlimited
  std::uint64_t epoch_grace_blocks = 32;        // old epoch key still accepted this long

  // Throws DomainError on m < 1, block_time_ms = 0, refund fraction > 1 or delta < 1.
  void validate() const;
};

using TxId = Bytes32;
std::string short_id(const TxId& id);

// The plaintext transaction inside c_tx: a signed balance transfer with an
// opaque call payload.
struct InnerTx {
  PublicKeyBytes signer{};
  Address to{};
  std::uint64_t amount = 0;
  std::uint64_t nonce = 0;
  Bytes call;
  Signature signature{};

  static InnerTx make(const Identity& signer, const Address& to, std::uint64_t amount, std::uint64_t nonce,
                      Bytes call = {});
  Bytes body() const;
  Bytes serialize() const;
  static InnerTx deserialize(ByteView bytes);
  bool signature_valid() const;
};

// On-chain envelope:
//   u8 version=1 | u8 protocol | 32 sender | u64 epoch | blob c_tx | blob c_k |
//   u8 has_hk | [32 h_k] | u64 deposit | 64 signature
struct WriteTx {
  PublicKeyBytes sender{};
  Protocol protocol = Protocol::kTdh2;
  std::uint64_t epoch = 0;
  Bytes c_tx;
  Bytes c_k;
  std::optional<Bytes32> h_k;
  std::uint64_t deposit_paid = 0;
  Signature signature{};

  Bytes body() const;
  Bytes serialize() const;
  static WriteTx deserialize(ByteView bytes);
  TxId id() const;
  // Bytes the deposit is charged on: c_tx, c_k and h_k.
  std::size_t storage_bytes() const { return c_tx.size() + c_k.size() + (h_k ? 32 : 0); }
  void sign(const Identity& sender_identity);
  bool signature_valid() const;
};

enum class TxState : std::uint8_t { kPending, kIncluded, kFinalized, kRevealed, kExecuted, kFailed };
std::string_view to_string(TxState s);

struct Transition {
  TxState state;
  std::uint64_t sim_time_ms;
  std::uint64_t block_height;
};

enum class ExecStatus : std::uint8_t { kSuccess, kReverted, kFailed };

struct ExecutionResult {
  ExecStatus status = ExecStatus::kFailed;
  std::string reason;
  std::optional<InnerTx> inner;
  std::uint64_t refund = 0;
};

struct TxRecord {
  TxId id{};
  WriteTx tx;
  TxState state = TxState::kPending;
  std::uint64_t included_height = 0;
  std::uint64_t finalized_height = 0;
  std::uint64_t escrow = 0;
  std::optional<aead::SymmetricKey> key;
  std::optional<std::uint64_t> key_height;  // block that stored the key
  std::optional<ExecutionResult> result;
  std::vector<Transition> history;
};

struct SubmitResult {
  bool accepted = false;
  TxId id{};
  std::string reason;
  bool retriable = false;
};

struct Block {
  std::uint64_t height = 0;
  std::uint64_t time_ms = 0;
  std::vector<TxId> included;
  std::vector<TxId> finalized;
  std::vector<TxId> keys_recorded;
};

enum class Verdict : std::uint8_t { kSlash, kNoSlash, kRejected };
std::string_view to_string(Verdict v);

using Evidence = std::variant<tdh2::Share, pvss::DecShare>;

struct DisputeResult {
  Verdict verdict = Verdict::kRejected;
  std::uint32_t defendant = 0;
  std::string reason;
  std::uint64_t transferred = 0;
};

// Committee material published on chain for one epoch.
struct EpochKeys {
  std::uint64_t epoch = 0;
  std::size_t threshold = 0;
  tdh2::PublicKey tdh2_key;                  // TDH2 committee key
  std::vector<GroupElement> pvss_keys;       // per-trustee PVSS keys, index i at i-1
  std::shared_ptr<const pvss::Setting> pvss_setting;  // filled in by publish_epoch
  std::uint64_t published_height = 0;
};

// Collateral check for an epoch: the most a colluding threshold of trustees
// could extract must be strictly below their potential loss (1 + a) c t.
bool collateral_check(std::uint64_t c, const Rational& a, std::uint64_t t, std::uint64_t max_extractable);

class Chain {
 public:
  explicit Chain(ChainConfig config);

  const ChainConfig& config() const { return config_; }
  std::uint64_t height() const { return height_; }
  std::uint64_t now_ms() const { return height_ * config_.block_time_ms; }

  // Genesis allocation; increases the total supply.
  void mint(const Address& to, std::uint64_t amount);
  std::uint64_t balance(const Address& a) const;

  // Starts a new epoch. The previous epoch's keys stay valid for
  // epoch_grace_blocks.
  void publish_epoch(EpochKeys keys);
  const EpochKeys& current_epoch() const;
  const EpochKeys* epoch_keys(std::uint64_t epoch) const;
  // True for the current epoch and for the previous one within its grace window.
  bool epoch_accepted(std::uint64_t epoch) const;

  // Locks trustee collateral for the current epoch.
  void post_collateral(std::uint32_t index, const Address& owner, std::uint64_t amount);
  std::uint64_t collateral(std::uint64_t epoch, std::uint32_t index) const;

  SubmitResult submit_tx(const WriteTx& tx);
  SubmitResult submit_bytes(ByteView envelope);
  Block advance_block();
  // Throws OrderingError unless the tx is Finalized and unrevealed, and
  // KeyRejectedError if h_k is present and does not match.
  ExecutionResult reveal_and_execute(const TxId& id, const aead::SymmetricKey& key);
  // Marks a finalized tx inexecutable (no key could be reconstructed, or the
  // sender committed a wrong h_k). The deposit is forfeited.
  void fail_tx(const TxId& id, const std::string& reason);
  DisputeResult file_dispute(const TxId& id, const Evidence& evidence, const Address& plaintiff, std::uint64_t stake);

  // What a mempool observer sees: serialized envelopes of pending txs.
  std::vector<Bytes> mempool_view() const;
  const TxRecord& tx(const TxId& id) const;
  bool has_tx(const TxId& id) const { return txs_.count(id) > 0; }
  std::optional<std::pair<aead::SymmetricKey, std::uint64_t>> stored_key(const TxId& id) const;

  // Fee accounting: balances + escrow + collateral + burned = supply.
  std::uint64_t supply() const { return supply_; }
  std::uint64_t total_balances() const;
  std::uint64_t escrowed() const { return escrow_; }
  std::uint64_t locked_collateral() const;
  std::uint64_t burned() const { return burned_; }
  bool conserved() const;

  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }
  void log(const std::string& tx, const std::string& event, const std::string& detail = {},
           std::optional<double> wall_ms = std::nullopt);

 private:
  TxRecord& record(const TxId& id);
  void transition(TxRecord& r, TxState s, const std::string& detail = {});
  ExecutionResult execute_inner(TxRecord& r, const InnerTx& inner);
  void settle(TxRecord& r, bool refund);

  ChainConfig config_;
  std::uint64_t height_ = 0;
  std::map<TxId, TxRecord> txs_;
  std::deque<TxId> mempool_;
  std::vector<TxId> inclusion_order_;
  std::map<std::uint64_t, std::vector<TxId>> finalize_at_;  // height -> txs
  std::vector<TxId> key_writes_;                             // stored in the next block
  std::map<Address, std::uint64_t> balances_;
  std::map<Address, std::set<std::uint64_t>> used_nonces_;
  std::map<std::uint64_t, EpochKeys> epochs_;
  std::uint64_t current_epoch_ = 0;
  std::optional<std::uint64_t> grace_until_;  // previous epoch accepted up to this height
  std::map<std::pair<std::uint64_t, std::uint32_t>, std::pair<Address, std::uint64_t>> collateral_;
  std::uint64_t supply_ = 0;
  std::uint64_t escrow_ = 0;
  std::uint64_t burned_ = 0;
  Trace trace_;
};

}  // namespace f3b::chain
