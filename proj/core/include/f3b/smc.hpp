#pragma once

// Secret-management committee: trustees that prepare decryption shares when a
// write transaction is included and release them once it is finalized, a
// designated aggregator that verifies shares and reconstructs keys in batches,
// and followers that accept the aggregator's keys through the h_k check.
//
// Smc wires these actors to a Chain and a Bus. Drive it by calling on_block
// with every block the chain produces.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "f3b/bus.hpp"
#include "f3b/chain.hpp"
#include "f3b/dkg.hpp"

namespace f3b::smc {

using ShareMsg = chain::Evidence;  // tdh2::Share or pvss::DecShare

std::uint32_t share_index(const ShareMsg& share);

enum class Behavior : std::uint8_t {
  kHonest,
  kCrashed,    // never prepares or releases anything
  kGarbage,    // releases well-formed shares with invalid proofs
  kEarlyLeak,  // hands its share to the adversary as soon as the tx is included
};

std::string_view to_string(Behavior b);
// "honest", "crashed", "garbage" or "leak"; throws DomainError otherwise.
Behavior parse_behavior(std::string_view text);

// Share release payload: u32 count | count x (32 tx id | u8 protocol | blob share)
Bytes encode_release(const std::vector<std::pair<chain::TxId, ShareMsg>>& shares);
std::vector<std::pair<chain::TxId, ShareMsg>> decode_release(ByteView payload);
// Refusal payload: u32 count | count x 32 tx id
Bytes encode_refusal(const std::vector<chain::TxId>& ids);
std::vector<chain::TxId> decode_refusal(ByteView payload);
// Key batch payload: u32 count | count x (32 tx id | 32 key)
Bytes encode_key_batch(const std::map<chain::TxId, aead::SymmetricKey>& keys);
std::map<chain::TxId, aead::SymmetricKey> decode_key_batch(ByteView payload);

class Trustee {
 public:
  Trustee(std::uint32_t index, std::uint32_t actor_id, Identity identity, Scalar tdh2_share, Scalar pvss_secret,
          Behavior behavior = Behavior::kHonest);

  std::uint32_t index() const { return index_; }
  std::uint32_t actor_id() const { return actor_id_; }
  const Identity& identity() const { return identity_; }
  GroupElement pvss_public() const { return base_pow(pvss_secret_); }
  Behavior behavior() const { return behavior_; }
  void set_behavior(Behavior b) { behavior_ = b; }

  // Verifies c_k (the ciphertext proof for TDH2, this trustee's deal entry for
  // PVSS) and caches a decryption share. Returns false when the tx is locally
  // inexecutable; no share is ever produced for it.
  bool on_tx_included(const chain::TxId& id, const chain::WriteTx& tx, const chain::EpochKeys& keys,
                      const Label& label, Rng& rng);
  // The share to release for a finalized tx, or nullopt for a refusal.
  std::optional<ShareMsg> on_tx_finalized(const chain::TxId& id, Rng& rng);
  // A scripted early leak; nullopt unless this trustee is kEarlyLeak.
  std::optional<ShareMsg> leak(const chain::TxId& id) const;

  bool has_share(const chain::TxId& id) const { return pending_.count(id) > 0; }
  bool refused(const chain::TxId& id) const { return refused_.count(id) > 0; }
  std::size_t pending() const { return pending_.size(); }

 private:
  std::uint32_t index_;
  std::uint32_t actor_id_;
  Identity identity_;
  Scalar tdh2_share_;
  Scalar pvss_secret_;
  Behavior behavior_;
  std::map<chain::TxId, ShareMsg> pending_;
  std::set<chain::TxId> refused_;
};

struct BatchItem {
  chain::TxId id{};
  const chain::WriteTx* tx = nullptr;
  std::uint64_t committee_epoch = 0;  // epoch whose keys the shares verify against
  std::vector<ShareMsg> shares;
};

struct ReconstructionBatch {
  std::vector<BatchItem> items;
};

struct BatchOutcome {
  std::map<chain::TxId, aead::SymmetricKey> keys;
  std::vector<chain::TxId> unreconstructable;
  std::uint64_t shares_verified = 0;
  std::uint64_t shares_rejected = 0;
  double compute_ms = 0;
};

// Verifies shares and interpolates keys. Shares of each tx are checked in
// index order until t valid ones are found; Lagrange coefficients are cached
// per index set.
class Aggregator {
 public:
  explicit Aggregator(Label label) : label_(std::move(label)) {}

  void add_epoch(const chain::EpochKeys& keys);
  bool knows_epoch(std::uint64_t epoch) const { return epochs_.count(epoch) > 0; }

  BatchOutcome reconstruct_keys(const ReconstructionBatch& batch);
  // Single-tx form; nullopt when fewer than t shares verify.
  std::optional<aead::SymmetricKey> reconstruct(const BatchItem& item, BatchOutcome* stats = nullptr);

  std::size_t lagrange_cache_size() const { return lagrange_.size(); }

 private:
  struct EpochMaterial {
    chain::EpochKeys keys;
    std::vector<std::shared_ptr<const FixedBaseTable>> h_tables;  // TDH2 verification keys
  };
  const std::vector<Scalar>& lambdas(const std::vector<std::uint32_t>& index_set);

  Label label_;
  std::map<std::uint64_t, EpochMaterial> epochs_;
  std::map<std::vector<std::uint32_t>, std::vector<Scalar>> lagrange_;
};

// A consensus node other than the aggregator. Keys for txs with h_k are
// accepted on a hash comparison; anything else is re-derived from the shares.
class Follower {
 public:
  explicit Follower(Aggregator& verifier) : verifier_(verifier) {}

  bool accept(const BatchItem& item, const aead::SymmetricKey& key);

  std::uint64_t fast_path() const { return fast_; }
  std::uint64_t full_path() const { return full_; }

 private:
  Aggregator& verifier_;
  std::uint64_t fast_ = 0;
  std::uint64_t full_ = 0;
};

struct SmcConfig {
  std::uint32_t n = 4;
  std::size_t t = 3;
  double hop_delay_ms = 100.0;
  std::size_t max_batch = 0;                 // txs per reconstruction round trip; 0 = whole block
  std::uint64_t collateral = 0;              // posted per trustee per epoch
  std::uint64_t epoch_length_blocks = 0;     // periodic reshare; 0 = never
  std::map<std::uint32_t, Behavior> behaviors;  // by trustee index
  dkg::Faults dkg_faults;
  bool followers_check = true;               // run one follower over every key batch
};

// Timing for one reconstruction round trip. Simulated and measured time are
// kept apart.
struct BatchReport {
  std::size_t txs = 0;
  std::size_t revealed = 0;
  std::size_t failed = 0;
  double simulated_ms = 0;    // trustee -> aggregator -> chain
  double release_ms = 0;      // slowest trustee packing and signing its release
  double reconstruct_ms = 0;  // aggregator: record checks, share checks, interpolation
  double execute_ms = 0;      // follower checks, decryption and execution
  double total_ms() const { return simulated_ms + release_ms + reconstruct_ms + execute_ms; }
  double compute_ms() const { return release_ms + reconstruct_ms + execute_ms; }
};

struct BlockReport {
  std::uint64_t height = 0;
  std::size_t included = 0;
  double share_prep_ms = 0;  // slowest trustee preparing shares for this block
  std::vector<BatchReport> batches;
};

struct ReshareReport {
  bool ok = false;
  std::string reason;
  std::uint64_t epoch = 0;
  dkg::RunStats stats;
};

class Smc {
 public:
  // Runs the DKG, draws PVSS keys, publishes epoch 1 and posts collateral.
  Smc(chain::Chain& chain, SmcConfig config, Rng& rng);

  BlockReport on_block(const chain::Block& block);

  // Reshares to the current roster with `replace` trustee indices swapped for
  // fresh trustees. On success the new epoch is published and trustees catch
  // up on in-flight TDH2 txs. On abort the epoch is extended.
  ReshareReport reshare(const std::set<std::uint32_t>& replace = {}, const dkg::Faults& faults = {});

  const SmcConfig& config() const { return config_; }
  std::uint64_t epoch() const { return epoch_; }
  const dkg::DkgOutput& dkg_output() const { return dkg_; }
  const dkg::RunStats& dkg_stats() const { return dkg_stats_; }
  Trustee& trustee(std::uint32_t index);
  std::vector<Trustee>& trustees() { return committees_.at(epoch_); }
  Aggregator& aggregator() { return aggregator_; }
  const Follower& follower() const { return follower_; }
  Bus& bus() { return bus_; }
  const Identity& trustee_owner(std::uint32_t index) const;

  // Confidentiality monitor: the most shares of a not-yet-finalized tx that
  // anyone (adversary or aggregator) has held at once, and how often that
  // reached the threshold.
  std::size_t max_early_shares() const { return max_early_shares_; }
  std::uint64_t early_assemblies() const { return early_assemblies_; }
  // Verified shares the adversary collected before finality, by tx.
  const std::map<chain::TxId, std::map<std::uint32_t, ShareMsg>>& leaked() const { return leaked_; }

 private:
  std::uint32_t new_actor(const Identity& id);
  void install_committee(std::uint64_t epoch, const dkg::DkgOutput& out);
  std::vector<Trustee>& committee_for(const chain::WriteTx& tx);
  double prepare(const chain::TxId& id, std::vector<Trustee>& committee, std::uint64_t committee_epoch);
  BatchReport run_batch(const std::vector<chain::TxId>& ids);
  void note_early(const chain::TxId& id, std::size_t count);

  chain::Chain& chain_;
  SmcConfig config_;
  Rng rng_;
  Bus bus_;
  Aggregator aggregator_;
  Aggregator follower_verifier_;
  Follower follower_;
  Identity aggregator_identity_;
  std::uint32_t aggregator_actor_ = 0;
  std::uint32_t next_actor_ = 1;
  dkg::DkgOutput dkg_;
  dkg::RunStats dkg_stats_;
  std::uint64_t epoch_ = 0;
  std::uint64_t next_reshare_height_ = 0;
  // Per roster id: identity, PVSS secret, owner account.
  struct Member {
    Identity identity;
    Scalar pvss_secret;
    std::uint32_t actor_id = 0;
  };
  std::map<dkg::TrusteeId, Member> members_;
  dkg::TrusteeId next_member_id_ = 0;
  std::map<std::uint64_t, std::vector<Trustee>> committees_;  // by epoch
  std::map<chain::TxId, std::uint64_t> prepared_by_;          // tx -> committee epoch that prepared it
  std::map<chain::TxId, std::map<std::uint32_t, ShareMsg>> leaked_;
  std::size_t max_early_shares_ = 0;
  std::uint64_t early_assemblies_ = 0;
};

}  // namespace f3b::smc
