#pragma once

// Sender side: encrypt a signed inner transaction and wrap it in a write
// transaction for either protocol. The envelope payer and the inner signer
// may differ, which lets a sender pay from a decoy address.

#include <cstdint>
#include <optional>

#include "f3b/chain.hpp"

namespace f3b::client {

// What a sender reads from chain metadata before encrypting.
struct TxContext {
  Label label{"f3b-sim-genesis"};
  std::uint64_t epoch = 0;
  std::uint64_t deposit_per_byte = 1;

  static TxContext current(const chain::Chain& chain);
};

// Signs the envelope and fills in the deposit for its final size.
chain::WriteTx seal_envelope(const Identity& payer, chain::Protocol protocol, std::uint64_t epoch, Bytes c_tx,
                             Bytes c_k, std::optional<Bytes32> h_k, std::uint64_t deposit_per_byte);

chain::WriteTx build_tdh2_tx(const Identity& payer, ByteView inner_tx, const tdh2::PublicKey& epoch_pk,
                             const TxContext& ctx, bool with_hk, Rng& rng);
// Encrypts under the chain's key for `epoch` (default: current). Throws
// RetriableError when that epoch is no longer accepted.
chain::WriteTx build_tdh2_tx(const Identity& payer, ByteView inner_tx, const chain::Chain& chain, bool with_hk,
                             Rng& rng, std::optional<std::uint64_t> epoch = std::nullopt);

// A PVSS deal and its key, dealt ahead of the transaction. Move-only and
// consumed by exactly one build_pvss_tx.
class PreparedDeal {
 public:
  PreparedDeal(PreparedDeal&& other) noexcept;
  PreparedDeal& operator=(PreparedDeal&& other) noexcept;
  PreparedDeal(const PreparedDeal&) = delete;
  PreparedDeal& operator=(const PreparedDeal&) = delete;

  bool consumed() const { return consumed_; }
  std::uint64_t epoch() const { return epoch_; }
  const Bytes& c_k() const { return c_k_; }
  const aead::SymmetricKey& key() const { return key_; }

 private:
  PreparedDeal() = default;
  friend PreparedDeal precompute_pvss(const pvss::Setting&, std::size_t, std::uint64_t, Rng&);
  friend chain::WriteTx build_pvss_tx(const Identity&, PreparedDeal&&, ByteView, const chain::EpochKeys&,
                                      const TxContext&, bool, Rng&);

  Bytes c_k_;
  aead::SymmetricKey key_;
  std::uint64_t epoch_ = 0;
  Bytes32 roster_digest_{};
  bool consumed_ = true;
};

// Digest of (label, t, trustee keys) that a prepared deal is bound to.
Bytes32 roster_digest(const Label& label, std::size_t t, std::span<const GroupElement> trustee_pks);

PreparedDeal precompute_pvss(const pvss::Setting& setting, std::size_t t, std::uint64_t epoch, Rng& rng);
// Deals to the chain's current roster and threshold.
PreparedDeal precompute_pvss(const chain::Chain& chain, Rng& rng);

// Throws SingleUseError for a consumed deal and StaleDealError if the roster
// behind `current` differs from the one the deal was made for.
chain::WriteTx build_pvss_tx(const Identity& payer, PreparedDeal&& deal, ByteView inner_tx,
                             const chain::EpochKeys& current, const TxContext& ctx, bool with_hk, Rng& rng);
chain::WriteTx build_pvss_tx(const Identity& payer, PreparedDeal&& deal, ByteView inner_tx,
                             const chain::Chain& chain, bool with_hk, Rng& rng);

}  // namespace f3b::client
