#include "f3b/chain.hpp"

#include <sodium.h>

#include <algorithm>
#include <charconv>

#include "sodium_init.hpp"

namespace f3b::chain {

namespace {

constexpr std::uint8_t kEnvelopeVersion = 1;

template <class T>
Bytes32 hash32(const T& bytes) {
  detail::ensure_sodium();
  Bytes32 out;
  crypto_generichash(out.data(), out.size(), bytes.data(), bytes.size(), nullptr, 0);
  return out;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw DomainError("not a number: " + std::string(s));
  return v;
}

}  // namespace

std::string_view to_string(Protocol p) { return p == Protocol::kTdh2 ? "tdh2" : "pvss"; }

Protocol parse_protocol(std::string_view text) {
  if (text == "tdh2") return Protocol::kTdh2;
  if (text == "pvss") return Protocol::kPvss;
  throw DomainError("unknown protocol: " + std::string(text));
}

Rational Rational::parse(std::string_view text) {
  Rational r;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    r.num = parse_u64(text.substr(0, slash));
    r.den = parse_u64(text.substr(slash + 1));
    if (r.den == 0) throw DomainError("zero denominator");
    return r;
  }
  auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    r.num = parse_u64(text);
    return r;
  }
  auto frac = text.substr(dot + 1);
  if (frac.size() > 18) throw DomainError("too many decimal places: " + std::string(text));
  r.den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) r.den *= 10;
  std::uint64_t whole = dot == 0 ? 0 : parse_u64(text.substr(0, dot));
  std::uint64_t part = frac.empty() ? 0 : parse_u64(frac);
  r.num = whole * r.den + part;
  return r;
}

std::uint64_t Rational::apply(std::uint64_t x) const {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * num / den);
}

void ChainConfig::validate() const {
  if (confirmations < 1) throw DomainError("confirmations must be at least 1");
  if (block_time_ms == 0) throw DomainError("block time must be positive");
  if (refund_fraction.den == 0 || refund_fraction.num > refund_fraction.den)
    throw DomainError("refund fraction must lie in [0, 1]");
  if (key_write_deadline_blocks < 1) throw DomainError("key write deadline must be at least one block");
}

std::string short_id(const TxId& id) { return to_hex(ByteView(id.data(), 8)); }

bool collateral_check(std::uint64_t c, const Rational& a, std::uint64_t t, std::uint64_t max_extractable) {
  using u128 = unsigned __int128;
  // max < (1 + num/den) c t  <=>  max * den < (den + num) c t
  const u128 lhs = static_cast<u128>(max_extractable) * a.den;
  const u128 rhs = (static_cast<u128>(a.den) + a.num) * c * t;
  return lhs < rhs;
}

// ---------------------------------------------------------------------------
// InnerTx

InnerTx InnerTx::make(const Identity& signer, const Address& to, std::uint64_t amount, std::uint64_t nonce,
                      Bytes call) {
  InnerTx tx;
  tx.signer = signer.public_key();
  tx.to = to;
  tx.amount = amount;
  tx.nonce = nonce;
  tx.call = std::move(call);
  tx.signature = signer.sign(tx.body());
  return tx;
}

Bytes InnerTx::body() const {
  ByteWriter w;
  w.raw(signer);
  w.raw(to);
  w.u64(amount);
  w.u64(nonce);
  w.blob(call);
  return std::move(w).take();
}

Bytes InnerTx::serialize() const {
  Bytes out = body();
  out.insert(out.end(), signature.begin(), signature.end());
  return out;
}

InnerTx InnerTx::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  InnerTx tx;
  tx.signer = r.fixed<kPublicKeyBytes>();
  tx.to = r.fixed<20>();
  tx.amount = r.u64();
  tx.nonce = r.u64();
  tx.call = r.blob();
  tx.signature = r.fixed<kSignatureBytes>();
  r.expect_done();
  return tx;
}

bool InnerTx::signature_valid() const { return verify_signature(signer, body(), signature); }

// ---------------------------------------------------------------------------
// WriteTx

Bytes WriteTx::body() const {
  ByteWriter w;
  w.u8(kEnvelopeVersion);
  w.u8(static_cast<std::uint8_t>(protocol));
  w.raw(sender);
  w.u64(epoch);
  w.blob(c_tx);
  w.blob(c_k);
  w.u8(h_k ? 1 : 0);
  if (h_k) w.raw(*h_k);
  w.u64(deposit_paid);
  return std::move(w).take();
}

Bytes WriteTx::serialize() const {
  Bytes out = body();
  out.insert(out.end(), signature.begin(), signature.end());
  return out;
}

WriteTx WriteTx::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  if (r.u8() != kEnvelopeVersion) throw DecodeError("unknown envelope version");
  WriteTx tx;
  auto p = r.u8();
  if (p != 1 && p != 2) throw DecodeError("unknown protocol tag");
  tx.protocol = static_cast<Protocol>(p);
  tx.sender = r.fixed<kPublicKeyBytes>();
  tx.epoch = r.u64();
  tx.c_tx = r.blob();
  tx.c_k = r.blob();
  auto has = r.u8();
  if (has > 1) throw DecodeError("bad h_k flag");
  if (has) tx.h_k = r.fixed<32>();
  tx.deposit_paid = r.u64();
  tx.signature = r.fixed<kSignatureBytes>();
  r.expect_done();
  return tx;
}

TxId WriteTx::id() const { return hash32(serialize()); }

void WriteTx::sign(const Identity& sender_identity) {
  sender = sender_identity.public_key();
  signature = sender_identity.sign(body());
}

bool WriteTx::signature_valid() const { return verify_signature(sender, body(), signature); }

std::string_view to_string(TxState s) {
  switch (s) {
    case TxState::kPending: return "Pending";
    case TxState::kIncluded: return "Included";
    case TxState::kFinalized: return "Finalized";
    case TxState::kRevealed: return "Revealed";
    case TxState::kExecuted: return "Executed";
    case TxState::kFailed: return "Failed";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kSlash: return "Slash";
    case Verdict::kNoSlash: return "NoSlash";
    case Verdict::kRejected: return "Rejected";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Chain

Chain::Chain(ChainConfig config) : config_(std::move(config)) { config_.validate(); }

void Chain::log(const std::string& tx, const std::string& event, const std::string& detail,
                std::optional<double> wall_ms) {
  trace_.add({tx, event, now_ms(), height_, detail, wall_ms});
}

void Chain::mint(const Address& to, std::uint64_t amount) {
  balances_[to] += amount;
  supply_ += amount;
}

std::uint64_t Chain::balance(const Address& a) const {
  auto it = balances_.find(a);
  return it == balances_.end() ? 0 : it->second;
}

void Chain::publish_epoch(EpochKeys keys) {
  if (!epochs_.empty() && keys.epoch <= current_epoch_) throw DomainError("epochs must increase");
  keys.published_height = height_;
  if (!keys.pvss_keys.empty() && !keys.pvss_setting) {
    keys.pvss_setting = std::make_shared<const pvss::Setting>(config_.label, keys.pvss_keys);
  }
  const bool had_epoch = !epochs_.empty();
  current_epoch_ = keys.epoch;
  log("-", "EpochPublished", "epoch=" + std::to_string(keys.epoch) + " n=" + std::to_string(keys.tdh2_key.n()));
  epochs_[keys.epoch] = std::move(keys);
  grace_until_.reset();
  if (had_epoch) grace_until_ = height_ + config_.epoch_grace_blocks;
}

const EpochKeys& Chain::current_epoch() const {
  if (epochs_.empty()) throw OrderingError("no epoch published");
  return epochs_.at(current_epoch_);
}

const EpochKeys* Chain::epoch_keys(std::uint64_t epoch) const {
  auto it = epochs_.find(epoch);
  return it == epochs_.end() ? nullptr : &it->second;
}

bool Chain::epoch_accepted(std::uint64_t epoch) const {
  if (epochs_.empty()) return false;
  if (epoch == current_epoch_) return true;
  if (!grace_until_ || height_ > *grace_until_) return false;
  auto it = epochs_.find(current_epoch_);
  return it != epochs_.begin() && std::prev(it)->first == epoch;
}

void Chain::post_collateral(std::uint32_t index, const Address& owner, std::uint64_t amount) {
  auto& bal = balances_[owner];
  if (bal < amount) throw DomainError("insufficient balance for collateral");
  bal -= amount;
  auto& slot = collateral_[{current_epoch().epoch, index}];
  slot.first = owner;
  slot.second += amount;
}

std::uint64_t Chain::collateral(std::uint64_t epoch, std::uint32_t index) const {
  auto it = collateral_.find({epoch, index});
  return it == collateral_.end() ? 0 : it->second.second;
}

SubmitResult Chain::submit_bytes(ByteView envelope) {
  WriteTx tx;
  try {
    tx = WriteTx::deserialize(envelope);
  } catch (const DecodeError& e) {
    log("-", "Rejected", std::string("malformed envelope: ") + e.what());
    return {false, {}, std::string("malformed envelope: ") + e.what(), false};
  }
  return submit_tx(tx);
}

SubmitResult Chain::submit_tx(const WriteTx& tx) {
  SubmitResult res;
  res.id = tx.id();
  auto reject = [&](std::string reason, bool retriable = false) {
    res.reason = std::move(reason);
    res.retriable = retriable;
    log(short_id(res.id), "Rejected", res.reason);
    return res;
  };
  if (!tx.signature_valid()) return reject("bad envelope signature");
  if (txs_.count(res.id)) return reject("duplicate transaction");
  const std::uint64_t deposit = config_.deposit_per_byte * tx.storage_bytes();
  if (tx.deposit_paid != deposit) return reject("deposit does not match storage size");
  if (!epoch_accepted(tx.epoch)) return reject("stale or unknown epoch key", true);
  const Address payer = address_of(tx.sender);
  const std::uint64_t cost = deposit + config_.execution_fee;
  auto& bal = balances_[payer];
  if (bal < cost) return reject("insufficient balance");
  bal -= cost;
  escrow_ += deposit;
  burned_ += config_.execution_fee;

  TxRecord r;
  r.id = res.id;
  r.tx = tx;
  r.escrow = deposit;
  auto [it, _] = txs_.emplace(res.id, std::move(r));
  mempool_.push_back(res.id);
  transition(it->second, TxState::kPending, "deposit=" + std::to_string(deposit));
  res.accepted = true;
  return res;
}

Block Chain::advance_block() {
  ++height_;
  Block b;
  b.height = height_;
  b.time_ms = now_ms();
  log("-", "Block", "txs=" + std::to_string(std::min(mempool_.size(), config_.block_capacity ? config_.block_capacity : mempool_.size())));

  for (const auto& id : key_writes_) {
    auto& r = record(id);
    r.key_height = height_;
    b.keys_recorded.push_back(id);
    log(short_id(id), "KeyStored");
  }
  key_writes_.clear();

  std::size_t take = config_.block_capacity ? std::min(config_.block_capacity, mempool_.size()) : mempool_.size();
  for (std::size_t k = 0; k < take; ++k) {
    TxId id = mempool_.front();
    mempool_.pop_front();
    auto& r = record(id);
    r.included_height = height_;
    finalize_at_[height_ + config_.confirmations].push_back(id);
    inclusion_order_.push_back(id);
    b.included.push_back(id);
    transition(r, TxState::kIncluded);
  }

  if (auto it = finalize_at_.find(height_); it != finalize_at_.end()) {
    for (const auto& id : it->second) {
      auto& r = record(id);
      r.finalized_height = height_;
      b.finalized.push_back(id);
      transition(r, TxState::kFinalized);
    }
    finalize_at_.erase(it);
  }
  return b;
}

void Chain::settle(TxRecord& r, bool refund) {
  const std::uint64_t back = refund ? config_.refund_fraction.apply(r.escrow) : 0;
  escrow_ -= r.escrow;
  balances_[address_of(r.tx.sender)] += back;
  burned_ += r.escrow - back;
  r.escrow = 0;
  if (r.result) r.result->refund = back;
}

ExecutionResult Chain::execute_inner(TxRecord& r, const InnerTx& inner) {
  ExecutionResult res;
  res.inner = inner;
  const Address from = address_of(inner.signer);
  auto& nonces = used_nonces_[from];
  if (nonces.count(inner.nonce)) {
    res.status = ExecStatus::kReverted;
    res.reason = "nonce already used";
  } else if (balance(from) < inner.amount) {
    nonces.insert(inner.nonce);
    res.status = ExecStatus::kReverted;
    res.reason = "insufficient funds";
  } else {
    nonces.insert(inner.nonce);
    balances_[from] -= inner.amount;
    balances_[inner.to] += inner.amount;
    res.status = ExecStatus::kSuccess;
  }
  (void)r;
  return res;
}

ExecutionResult Chain::reveal_and_execute(const TxId& id, const aead::SymmetricKey& key) {
  auto& r = record(id);
  if (r.state != TxState::kFinalized) {
    throw OrderingError("reveal requires a finalized, unrevealed transaction (state " +
                        std::string(to_string(r.state)) + ")");
  }
  if (r.tx.h_k && aead::key_hash(key) != *r.tx.h_k) {
    log(short_id(id), "KeyRejected", "h_k mismatch");
    throw KeyRejectedError("revealed key does not match h_k");
  }
  r.key = key;
  transition(r, TxState::kRevealed, r.tx.h_k ? "h_k verified" : "");
  if (height_ + 1 <= r.finalized_height + config_.key_write_deadline_blocks) {
    key_writes_.push_back(id);
  } else {
    log(short_id(id), "KeyDeadlineMissed");
  }

  ExecutionResult res;
  Bytes plain;
  try {
    plain = aead::open(key, r.tx.c_tx);
  } catch (const AuthError&) {
    res.status = ExecStatus::kFailed;
    res.reason = "authentication failed";
    r.result = res;
    settle(r, false);
    transition(r, TxState::kFailed, res.reason);
    return *r.result;
  }
  log(short_id(id), "Decrypted", "bytes=" + std::to_string(plain.size()));
  try {
    auto inner = InnerTx::deserialize(plain);
    if (!inner.signature_valid()) throw DecodeError("bad inner signature");
    res = execute_inner(r, inner);
  } catch (const DecodeError& e) {
    res.status = ExecStatus::kFailed;
    res.reason = std::string("inexecutable: ") + e.what();
  }
  r.result = res;
  const bool ok = res.status != ExecStatus::kFailed;
  settle(r, ok);
  if (ok) {
    std::string detail = "signer=" + to_hex(ByteView(res.inner->signer.data(), 8)) +
                         " nonce=" + std::to_string(res.inner->nonce) +
                         (res.status == ExecStatus::kSuccess ? " status=success" : " status=reverted:" + res.reason) +
                         " refund=" + std::to_string(r.result->refund);
    transition(r, TxState::kExecuted, detail);
  } else {
    transition(r, TxState::kFailed, res.reason);
  }
  return *r.result;
}

void Chain::fail_tx(const TxId& id, const std::string& reason) {
  auto& r = record(id);
  if (r.state != TxState::kFinalized) throw OrderingError("only finalized transactions can be failed");
  ExecutionResult res;
  res.status = ExecStatus::kFailed;
  res.reason = reason;
  r.result = res;
  settle(r, false);
  transition(r, TxState::kFailed, reason);
}

DisputeResult Chain::file_dispute(const TxId& id, const Evidence& evidence, const Address& plaintiff,
                                  std::uint64_t stake) {
  DisputeResult out;
  auto it = txs_.find(id);
  if (it == txs_.end()) {
    out.reason = "unknown transaction";
    log("-", "Dispute", "verdict=Rejected reason=unknown transaction");
    return out;
  }
  auto& r = it->second;
  if (balance(plaintiff) < stake) {
    out.reason = "plaintiff cannot cover the stake";
    log(short_id(id), "Dispute", "verdict=Rejected reason=" + out.reason);
    return out;
  }
  balances_[plaintiff] -= stake;

  const EpochKeys* keys = epoch_keys(r.tx.epoch);
  bool valid = false;
  try {
    if (const auto* share = std::get_if<tdh2::Share>(&evidence)) {
      out.defendant = share->index;
      if (r.tx.protocol == Protocol::kTdh2 && keys) {
        auto ct = tdh2::Ciphertext::deserialize(r.tx.c_k);
        valid = tdh2::verify_share(ct, *share, keys->tdh2_key.verification_key(share->index));
      }
    } else {
      const auto& dec = std::get<pvss::DecShare>(evidence);
      out.defendant = dec.index;
      if (r.tx.protocol == Protocol::kPvss && keys && dec.index >= 1 && dec.index <= keys->pvss_keys.size()) {
        auto deal = pvss::Deal::deserialize(r.tx.c_k);
        valid = pvss::verify_dec_share(keys->pvss_setting->pk_table(dec.index), deal.share_for(dec.index).s_hat, dec);
      }
    }
  } catch (const Error&) {
    valid = false;
  }
  const bool before_reveal =
      r.state == TxState::kPending || r.state == TxState::kIncluded || r.state == TxState::kFinalized;

  if (valid && before_reveal) {
    auto slot = collateral_.find({r.tx.epoch, out.defendant});
    std::uint64_t seized = 0;
    if (slot != collateral_.end()) {
      seized = slot->second.second;
      slot->second.second = 0;
    }
    balances_[plaintiff] += stake + seized;
    out.verdict = Verdict::kSlash;
    out.transferred = seized;
    out.reason = "valid share before reveal";
  } else {
    burned_ += stake;
    out.verdict = Verdict::kNoSlash;
    out.reason = !valid ? "share does not verify" : "transaction already revealed";
  }
  log(short_id(id), "Dispute",
      "verdict=" + std::string(to_string(out.verdict)) + " defendant=" + std::to_string(out.defendant) +
          " reason=" + out.reason);
  return out;
}

std::vector<Bytes> Chain::mempool_view() const {
  std::vector<Bytes> out;
  for (const auto& id : mempool_) out.push_back(txs_.at(id).tx.serialize());
  return out;
}

const TxRecord& Chain::tx(const TxId& id) const {
  auto it = txs_.find(id);
  if (it == txs_.end()) throw DomainError("unknown transaction");
  return it->second;
}

TxRecord& Chain::record(const TxId& id) {
  auto it = txs_.find(id);
  if (it == txs_.end()) throw DomainError("unknown transaction");
  return it->second;
}

std::optional<std::pair<aead::SymmetricKey, std::uint64_t>> Chain::stored_key(const TxId& id) const {
  const auto& r = tx(id);
  if (!r.key || !r.key_height) return std::nullopt;
  return std::make_pair(*r.key, *r.key_height);
}

std::uint64_t Chain::total_balances() const {
  std::uint64_t s = 0;
  for (const auto& [a, b] : balances_) s += b;
  return s;
}

std::uint64_t Chain::locked_collateral() const {
  std::uint64_t s = 0;
  for (const auto& [k, v] : collateral_) s += v.second;
  return s;
}

bool Chain::conserved() const { return total_balances() + escrow_ + locked_collateral() + burned_ == supply_; }

void Chain::transition(TxRecord& r, TxState s, const std::string& detail) {
  if (!r.history.empty() && static_cast<int>(s) <= static_cast<int>(r.state) && s != TxState::kFailed) {
    throw OrderingError("non-monotone lifecycle transition");
  }
  r.state = s;
  r.history.push_back({s, now_ms(), height_});
  log(short_id(r.id), std::string(to_string(s)), detail);
}

}  // namespace f3b::chain
