#include "f3b/client.hpp"

#include <sodium.h>

#include "sodium_init.hpp"

namespace f3b::client {

TxContext TxContext::current(const chain::Chain& chain) {
  return {chain.config().label, chain.current_epoch().epoch, chain.config().deposit_per_byte};
}

chain::WriteTx seal_envelope(const Identity& payer, chain::Protocol protocol, std::uint64_t epoch, Bytes c_tx,
                             Bytes c_k, std::optional<Bytes32> h_k, std::uint64_t deposit_per_byte) {
  chain::WriteTx tx;
  tx.protocol = protocol;
  tx.epoch = epoch;
  tx.c_tx = std::move(c_tx);
  tx.c_k = std::move(c_k);
  tx.h_k = h_k;
  tx.deposit_paid = deposit_per_byte * tx.storage_bytes();
  tx.sign(payer);
  return tx;
}

chain::WriteTx build_tdh2_tx(const Identity& payer, ByteView inner_tx, const tdh2::PublicKey& epoch_pk,
                             const TxContext& ctx, bool with_hk, Rng& rng) {
  const GroupElement k_point = GroupElement::random(rng);
  const auto key = aead::derive_key(k_point);
  Bytes c_tx = aead::seal(key, inner_tx, rng);
  Bytes c_k = tdh2::encrypt(epoch_pk, k_point, ctx.label, rng).serialize();
  std::optional<Bytes32> h_k;
  if (with_hk) h_k = aead::key_hash(key);
  return seal_envelope(payer, chain::Protocol::kTdh2, ctx.epoch, std::move(c_tx), std::move(c_k), h_k,
                       ctx.deposit_per_byte);
}

chain::WriteTx build_tdh2_tx(const Identity& payer, ByteView inner_tx, const chain::Chain& chain, bool with_hk,
                             Rng& rng, std::optional<std::uint64_t> epoch) {
  TxContext ctx = TxContext::current(chain);
  if (epoch) ctx.epoch = *epoch;
  const auto* keys = chain.epoch_keys(ctx.epoch);
  if (!keys || !chain.epoch_accepted(ctx.epoch)) {
    throw RetriableError("epoch " + std::to_string(ctx.epoch) + " key is no longer accepted");
  }
  return build_tdh2_tx(payer, inner_tx, keys->tdh2_key, ctx, with_hk, rng);
}

PreparedDeal::PreparedDeal(PreparedDeal&& other) noexcept
    : c_k_(std::move(other.c_k_)),
      key_(other.key_),
      epoch_(other.epoch_),
      roster_digest_(other.roster_digest_),
      consumed_(other.consumed_) {
  other.consumed_ = true;
  other.key_ = {};
}

PreparedDeal& PreparedDeal::operator=(PreparedDeal&& other) noexcept {
  if (this != &other) {
    c_k_ = std::move(other.c_k_);
    key_ = other.key_;
    epoch_ = other.epoch_;
    roster_digest_ = other.roster_digest_;
    consumed_ = other.consumed_;
    other.consumed_ = true;
    other.key_ = {};
  }
  return *this;
}

Bytes32 roster_digest(const Label& label, std::size_t t, std::span<const GroupElement> trustee_pks) {
  detail::ensure_sodium();
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 32);
  ByteWriter w;
  w.blob(label.bytes());
  w.u64(t);
  w.u32(static_cast<std::uint32_t>(trustee_pks.size()));
  crypto_generichash_update(&st, w.bytes().data(), w.bytes().size());
  for (const auto& pk : trustee_pks) {
    const auto enc = pk.encode();
    crypto_generichash_update(&st, enc.data(), enc.size());
  }
  Bytes32 out;
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

PreparedDeal precompute_pvss(const pvss::Setting& setting, std::size_t t, std::uint64_t epoch, Rng& rng) {
  auto dealt = pvss::deal(setting, t, rng);
  PreparedDeal out;
  out.c_k_ = dealt.deal.serialize();
  out.key_ = aead::derive_key(dealt.secret);
  out.epoch_ = epoch;
  out.roster_digest_ = roster_digest(setting.label(), t, setting.trustee_pks());
  out.consumed_ = false;
  return out;
}

PreparedDeal precompute_pvss(const chain::Chain& chain, Rng& rng) {
  const auto& keys = chain.current_epoch();
  if (!keys.pvss_setting) throw DomainError("current epoch has no PVSS roster");
  return precompute_pvss(*keys.pvss_setting, keys.threshold, keys.epoch, rng);
}

chain::WriteTx build_pvss_tx(const Identity& payer, PreparedDeal&& deal, ByteView inner_tx,
                             const chain::EpochKeys& current, const TxContext& ctx, bool with_hk, Rng& rng) {
  if (deal.consumed_) throw SingleUseError("prepared deal already used");
  PreparedDeal taken(std::move(deal));
  if (taken.epoch_ != current.epoch ||
      taken.roster_digest_ != roster_digest(ctx.label, current.threshold, current.pvss_keys)) {
    throw StaleDealError("roster changed since the deal was prepared");
  }
  Bytes c_tx = aead::seal(taken.key_, inner_tx, rng);
  std::optional<Bytes32> h_k;
  if (with_hk) h_k = aead::key_hash(taken.key_);
  return seal_envelope(payer, chain::Protocol::kPvss, taken.epoch_, std::move(c_tx), std::move(taken.c_k_), h_k,
                       ctx.deposit_per_byte);
}

chain::WriteTx build_pvss_tx(const Identity& payer, PreparedDeal&& deal, ByteView inner_tx,
                             const chain::Chain& chain, bool with_hk, Rng& rng) {
  if (deal.consumed()) throw SingleUseError("prepared deal already used");
  const auto* keys = chain.epoch_keys(deal.epoch());
  if (!keys || !chain.epoch_accepted(deal.epoch())) {
    throw StaleDealError("deal epoch " + std::to_string(deal.epoch()) + " is no longer accepted");
  }
  return build_pvss_tx(payer, std::move(deal), inner_tx, *keys, TxContext::current(chain), with_hk, rng);
}

}  // namespace f3b::client
