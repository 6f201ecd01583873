#include "f3b/smc.hpp"

#include <algorithm>
#include <chrono>

namespace f3b::smc {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr std::uint8_t kTagTdh2 = 1;
constexpr std::uint8_t kTagPvss = 2;

}  // namespace

std::uint32_t share_index(const ShareMsg& share) {
  return std::visit([](const auto& s) { return s.index; }, share);
}

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::kHonest: return "honest";
    case Behavior::kCrashed: return "crashed";
    case Behavior::kGarbage: return "garbage";
    case Behavior::kEarlyLeak: return "leak";
  }
  return "?";
}

Behavior parse_behavior(std::string_view text) {
  for (auto b : {Behavior::kHonest, Behavior::kCrashed, Behavior::kGarbage, Behavior::kEarlyLeak}) {
    if (to_string(b) == text) return b;
  }
  throw DomainError("unknown trustee behaviour: " + std::string(text));
}

Bytes encode_release(const std::vector<std::pair<chain::TxId, ShareMsg>>& shares) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(shares.size()));
  for (const auto& [id, share] : shares) {
    w.raw(id);
    if (const auto* s = std::get_if<tdh2::Share>(&share)) {
      w.u8(kTagTdh2);
      w.blob(s->serialize());
    } else {
      w.u8(kTagPvss);
      w.blob(std::get<pvss::DecShare>(share).serialize());
    }
  }
  return std::move(w).take();
}

std::vector<std::pair<chain::TxId, ShareMsg>> decode_release(ByteView payload) {
  ByteReader r(payload);
  const std::uint32_t count = r.u32();
  if (count > r.remaining()) throw DecodeError("release count exceeds payload");
  std::vector<std::pair<chain::TxId, ShareMsg>> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto id = r.fixed<32>();
    const auto tag = r.u8();
    const Bytes body = r.blob();
    if (tag == kTagTdh2) {
      out.emplace_back(id, tdh2::Share::deserialize(body));
    } else if (tag == kTagPvss) {
      out.emplace_back(id, pvss::DecShare::deserialize(body));
    } else {
      throw DecodeError("unknown share tag");
    }
  }
  r.expect_done();
  return out;
}

Bytes encode_refusal(const std::vector<chain::TxId>& ids) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (const auto& id : ids) w.raw(id);
  return std::move(w).take();
}

std::vector<chain::TxId> decode_refusal(ByteView payload) {
  ByteReader r(payload);
  const std::uint32_t count = r.u32();
  if (static_cast<std::uint64_t>(count) * 32 != r.remaining()) throw DecodeError("refusal length mismatch");
  std::vector<chain::TxId> out(count);
  for (auto& id : out) id = r.fixed<32>();
  return out;
}

Bytes encode_key_batch(const std::map<chain::TxId, aead::SymmetricKey>& keys) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(keys.size()));
  for (const auto& [id, key] : keys) {
    w.raw(id);
    w.raw(key.bytes());
  }
  return std::move(w).take();
}

std::map<chain::TxId, aead::SymmetricKey> decode_key_batch(ByteView payload) {
  ByteReader r(payload);
  const std::uint32_t count = r.u32();
  if (static_cast<std::uint64_t>(count) * 64 != r.remaining()) throw DecodeError("key batch length mismatch");
  std::map<chain::TxId, aead::SymmetricKey> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto id = r.fixed<32>();
    out.emplace(id, aead::SymmetricKey(r.fixed<32>()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trustee

Trustee::Trustee(std::uint32_t index, std::uint32_t actor_id, Identity identity, Scalar tdh2_share,
                 Scalar pvss_secret, Behavior behavior)
    : index_(index),
      actor_id_(actor_id),
      identity_(std::move(identity)),
      tdh2_share_(tdh2_share),
      pvss_secret_(pvss_secret),
      behavior_(behavior) {}

bool Trustee::on_tx_included(const chain::TxId& id, const chain::WriteTx& tx, const chain::EpochKeys& keys,
                             const Label& label, Rng& rng) {
  if (behavior_ == Behavior::kCrashed) return false;
  try {
    if (tx.protocol == chain::Protocol::kTdh2) {
      const auto ct = tdh2::Ciphertext::deserialize(tx.c_k);
      pending_.insert_or_assign(id, tdh2::create_share(tdh2_share_, index_, ct, label, rng));
    } else {
      if (!keys.pvss_setting) throw RefusalError("epoch has no PVSS roster");
      const auto deal = pvss::Deal::deserialize(tx.c_k);
      if (!pvss::verify_deal_share(deal, index_, *keys.pvss_setting)) throw RefusalError("deal share does not verify");
      pending_.insert_or_assign(id, pvss::decrypt_share(pvss_secret_, index_, deal.share_for(index_).s_hat, rng));
    }
    return true;
  } catch (const Error&) {
    refused_.insert(id);
    return false;
  }
}

std::optional<ShareMsg> Trustee::on_tx_finalized(const chain::TxId& id, Rng& rng) {
  if (behavior_ == Behavior::kCrashed) return std::nullopt;
  auto it = pending_.find(id);
  if (it == pending_.end()) return std::nullopt;
  ShareMsg out = std::move(it->second);
  pending_.erase(it);
  if (behavior_ == Behavior::kGarbage) {
    if (std::holds_alternative<tdh2::Share>(out)) {
      out = tdh2::Share{index_, GroupElement::random(rng), Scalar::random(rng), Scalar::random(rng)};
    } else {
      out = pvss::DecShare{index_, GroupElement::random(rng), {Scalar::random(rng), Scalar::random(rng)}};
    }
  }
  return out;
}

std::optional<ShareMsg> Trustee::leak(const chain::TxId& id) const {
  if (behavior_ != Behavior::kEarlyLeak) return std::nullopt;
  auto it = pending_.find(id);
  if (it == pending_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Aggregator

void Aggregator::add_epoch(const chain::EpochKeys& keys) {
  EpochMaterial m;
  m.keys = keys;
  m.h_tables.reserve(keys.tdh2_key.n());
  for (const auto& h : keys.tdh2_key.verification_keys) m.h_tables.push_back(std::make_shared<const FixedBaseTable>(h));
  epochs_.insert_or_assign(keys.epoch, std::move(m));
}

const std::vector<Scalar>& Aggregator::lambdas(const std::vector<std::uint32_t>& index_set) {
  auto it = lagrange_.find(index_set);
  if (it == lagrange_.end()) it = lagrange_.emplace(index_set, lagrange_coefficients(index_set)).first;
  return it->second;
}

std::optional<aead::SymmetricKey> Aggregator::reconstruct(const BatchItem& item, BatchOutcome* stats) {
  auto ep = epochs_.find(item.committee_epoch);
  if (ep == epochs_.end() || item.tx == nullptr) return std::nullopt;
  const auto& keys = ep->second.keys;
  const std::size_t t = keys.threshold;
  const std::uint32_t n = static_cast<std::uint32_t>(keys.tdh2_key.n());

  std::vector<const ShareMsg*> ordered;
  ordered.reserve(item.shares.size());
  for (const auto& s : item.shares) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ShareMsg* a, const ShareMsg* b) { return share_index(*a) < share_index(*b); });

  std::vector<std::uint32_t> used;
  std::uint64_t verified = 0, rejected = 0;
  auto count = [&](bool ok) { ok ? ++verified : ++rejected; return ok; };
  std::optional<aead::SymmetricKey> key;

  try {
    if (item.tx->protocol == chain::Protocol::kTdh2) {
      const auto ct = tdh2::Ciphertext::deserialize(item.tx->c_k);
      std::vector<tdh2::Share> good;
      for (const auto* m : ordered) {
        if (good.size() == t) break;
        const auto* s = std::get_if<tdh2::Share>(m);
        if (!s || s->index == 0 || s->index > n || (!used.empty() && used.back() == s->index)) continue;
        if (!count(tdh2::verify_share(ct, *s, *ep->second.h_tables[s->index - 1]))) continue;
        good.push_back(*s);
        used.push_back(s->index);
      }
      if (good.size() == t) key = aead::derive_key(tdh2::combine(ct, good, lambdas(used)));
    } else if (keys.pvss_setting) {
      const auto& setting = *keys.pvss_setting;
      std::vector<pvss::DecShare> good;
      for (const auto* m : ordered) {
        if (good.size() == t) break;
        const auto* s = std::get_if<pvss::DecShare>(m);
        if (!s || s->index == 0 || s->index > setting.n() || (!used.empty() && used.back() == s->index)) continue;
        const auto s_hat = pvss::encrypted_share_at(item.tx->c_k, s->index);
        if (!count(pvss::verify_dec_share(setting.pk_table(s->index), s_hat, *s))) continue;
        good.push_back(*s);
        used.push_back(s->index);
      }
      if (good.size() == t) key = aead::derive_key(pvss::reconstruct(good, lambdas(used)));
    }
  } catch (const Error&) {
    key.reset();
  }
  if (stats) {
    stats->shares_verified += verified;
    stats->shares_rejected += rejected;
  }
  return key;
}

BatchOutcome Aggregator::reconstruct_keys(const ReconstructionBatch& batch) {
  const auto start = Clock::now();
  BatchOutcome out;
  for (const auto& item : batch.items) {
    if (auto key = reconstruct(item, &out)) {
      out.keys.emplace(item.id, *key);
    } else {
      out.unreconstructable.push_back(item.id);
    }
  }
  std::sort(out.unreconstructable.begin(), out.unreconstructable.end());
  out.compute_ms = since(start);
  return out;
}

bool Follower::accept(const BatchItem& item, const aead::SymmetricKey& key) {
  if (item.tx && item.tx->h_k) {
    ++fast_;
    if (aead::key_hash(key) == *item.tx->h_k) return true;
  }
  ++full_;
  auto recomputed = verifier_.reconstruct(item);
  return recomputed && *recomputed == key;
}

// ---------------------------------------------------------------------------
// Smc

Smc::Smc(chain::Chain& chain, SmcConfig config, Rng& rng)
    : chain_(chain),
      config_(std::move(config)),
      rng_(rng.fork()),
      bus_(config_.hop_delay_ms),
      aggregator_(chain.config().label),
      follower_verifier_(chain.config().label),
      follower_(follower_verifier_),
      aggregator_identity_(Identity::generate(rng_)) {
  if (config_.t < 1 || config_.t > config_.n) throw DomainError("SMC threshold outside 1..n");
  aggregator_actor_ = new_actor(aggregator_identity_);

  dkg::DkgOptions opts;
  opts.faults = config_.dkg_faults;
  opts.hop_delay_ms = config_.hop_delay_ms;
  opts.epoch = 1;
  for (std::uint32_t i = 1; i <= config_.n; ++i) opts.roster.push_back(++next_member_id_);
  for (auto id : opts.roster) {
    Member m{Identity::generate(rng_), Scalar::random(rng_), 0};
    m.actor_id = new_actor(m.identity);
    members_.emplace(id, std::move(m));
  }
  auto result = dkg::run_dkg(config_.n, config_.t, rng_, opts);
  dkg_ = std::move(result.output);
  dkg_stats_ = result.stats;
  install_committee(dkg_.epoch, dkg_);
  if (config_.epoch_length_blocks) next_reshare_height_ = chain_.height() + config_.epoch_length_blocks;
}

std::uint32_t Smc::new_actor(const Identity& id) {
  const std::uint32_t actor = next_actor_++;
  bus_.register_actor(actor, id.public_key());
  return actor;
}

Trustee& Smc::trustee(std::uint32_t index) {
  auto& c = trustees();
  if (index == 0 || index > c.size()) throw DomainError("trustee index out of range");
  return c[index - 1];
}

const Identity& Smc::trustee_owner(std::uint32_t index) const {
  if (index == 0 || index > dkg_.roster.size()) throw DomainError("trustee index out of range");
  return members_.at(dkg_.roster[index - 1]).identity;
}

void Smc::install_committee(std::uint64_t epoch, const dkg::DkgOutput& out) {
  std::vector<Trustee> committee;
  chain::EpochKeys keys;
  keys.epoch = epoch;
  keys.threshold = out.threshold;
  keys.tdh2_key = out.public_key;
  for (std::uint32_t i = 1; i <= out.n(); ++i) {
    const auto& m = members_.at(out.roster[i - 1]);
    Behavior b = Behavior::kHonest;
    if (auto it = config_.behaviors.find(i); it != config_.behaviors.end()) b = it->second;
    auto share = out.secret_shares.find(i);
    if (share == out.secret_shares.end()) b = Behavior::kCrashed;
    committee.emplace_back(i, m.actor_id, m.identity, share == out.secret_shares.end() ? Scalar() : share->second,
                           m.pvss_secret, b);
    keys.pvss_keys.push_back(base_pow(m.pvss_secret));
  }
  committees_.insert_or_assign(epoch, std::move(committee));
  epoch_ = epoch;
  chain_.publish_epoch(std::move(keys));
  aggregator_.add_epoch(chain_.current_epoch());
  follower_verifier_.add_epoch(chain_.current_epoch());
  if (config_.collateral) {
    for (std::uint32_t i = 1; i <= out.n(); ++i) {
      const auto owner = members_.at(out.roster[i - 1]).identity.address();
      chain_.mint(owner, config_.collateral);
      chain_.post_collateral(i, owner, config_.collateral);
    }
  }
}

std::vector<Trustee>& Smc::committee_for(const chain::WriteTx& tx) {
  if (tx.protocol == chain::Protocol::kPvss) {
    if (auto it = committees_.find(tx.epoch); it != committees_.end()) return it->second;
  }
  return committees_.at(epoch_);
}

void Smc::note_early(const chain::TxId& id, std::size_t count) {
  max_early_shares_ = std::max(max_early_shares_, count);
  if (count >= dkg_.threshold) {
    ++early_assemblies_;
    chain_.log(chain::short_id(id), "EarlyAssembly", "shares=" + std::to_string(count));
  }
}

double Smc::prepare(const chain::TxId& id, std::vector<Trustee>& committee, std::uint64_t committee_epoch) {
  const auto& rec = chain_.tx(id);
  const auto* keys = chain_.epoch_keys(committee_epoch);
  double slowest = 0;
  std::size_t ready = 0;
  for (auto& tr : committee) {
    const auto start = Clock::now();
    if (tr.on_tx_included(id, rec.tx, *keys, chain_.config().label, rng_)) ++ready;
    slowest = std::max(slowest, since(start));
    if (auto leaked = tr.leak(id)) {
      auto& pool = leaked_[id];
      pool.emplace(tr.index(), *leaked);
      chain_.log(chain::short_id(id), "ShareLeaked", "trustee=" + std::to_string(tr.index()));
      if (rec.state != chain::TxState::kFinalized) note_early(id, pool.size());
    }
  }
  prepared_by_[id] = committee_epoch;
  chain_.log(chain::short_id(id), "SharesPrepared",
             "epoch=" + std::to_string(committee_epoch) + " ready=" + std::to_string(ready) + "/" +
                 std::to_string(committee.size()));
  return slowest;
}

BlockReport Smc::on_block(const chain::Block& block) {
  BlockReport report;
  report.height = block.height;
  report.included = block.included.size();
  for (const auto& id : block.included) {
    const auto& tx = chain_.tx(id).tx;
    auto& committee = committee_for(tx);
    const std::uint64_t ep = &committee == &committees_.at(epoch_) ? epoch_ : tx.epoch;
    report.share_prep_ms = std::max(report.share_prep_ms, prepare(id, committee, ep));
  }
  if (!block.finalized.empty()) {
    const std::size_t step = config_.max_batch ? config_.max_batch : block.finalized.size();
    for (std::size_t off = 0; off < block.finalized.size(); off += step) {
      const auto end = std::min(block.finalized.size(), off + step);
      std::vector<chain::TxId> ids(block.finalized.begin() + off, block.finalized.begin() + end);
      report.batches.push_back(run_batch(ids));
    }
  }
  if (config_.epoch_length_blocks && chain_.height() >= next_reshare_height_) {
    reshare();
    next_reshare_height_ = chain_.height() + config_.epoch_length_blocks;
  }
  return report;
}

BatchReport Smc::run_batch(const std::vector<chain::TxId>& ids) {
  BatchReport report;
  report.txs = ids.size();
  const double bus_start = bus_.now_ms();

  // Which committee serves each tx.
  std::map<std::uint64_t, std::vector<chain::TxId>> by_committee;
  for (const auto& id : ids) {
    auto it = prepared_by_.find(id);
    by_committee[it == prepared_by_.end() ? epoch_ : it->second].push_back(id);
  }

  // Trustees release at the finality instant, one signed record each.
  for (auto& [ep, group] : by_committee) {
    for (auto& tr : committees_.at(ep)) {
      if (tr.behavior() == Behavior::kCrashed) continue;
      const auto start = Clock::now();
      std::vector<std::pair<chain::TxId, ShareMsg>> shares;
      std::vector<chain::TxId> refusals;
      for (const auto& id : group) {
        if (auto s = tr.on_tx_finalized(id, rng_)) {
          shares.emplace_back(id, std::move(*s));
        } else {
          refusals.push_back(id);
        }
      }
      if (!shares.empty()) {
        Record rec{MessageType::kShareRelease, tr.actor_id(), aggregator_actor_, ep, encode_release(shares), {}};
        rec.sign(tr.identity());
        bus_.send(rec);
      }
      if (!refusals.empty()) {
        Record rec{MessageType::kRefusal, tr.actor_id(), aggregator_actor_, ep, encode_refusal(refusals), {}};
        rec.sign(tr.identity());
        bus_.send(rec);
      }
      report.release_ms = std::max(report.release_ms, since(start));
    }
  }

  // Aggregator: collect, verify, interpolate, publish one key batch.
  const auto agg_start = Clock::now();
  std::map<std::uint32_t, std::pair<std::uint64_t, std::uint32_t>> actors;  // actor -> (epoch, index)
  for (const auto& [ep, group] : by_committee) {
    for (const auto& tr : committees_.at(ep)) actors[tr.actor_id()] = {ep, tr.index()};
  }
  std::map<chain::TxId, BatchItem> items;
  for (const auto& id : ids) {
    BatchItem item;
    item.id = id;
    item.tx = &chain_.tx(id).tx;
    auto it = prepared_by_.find(id);
    item.committee_epoch = it == prepared_by_.end() ? epoch_ : it->second;
    items.emplace(id, std::move(item));
  }
  std::uint64_t refusals = 0;
  for (const auto& rec : bus_.deliver()) {
    auto who = actors.find(rec.from);
    if (who == actors.end() || who->second.first != rec.epoch) continue;
    if (rec.type == MessageType::kRefusal) {
      try {
        refusals += decode_refusal(rec.payload).size();
      } catch (const DecodeError&) {
      }
      continue;
    }
    if (rec.type != MessageType::kShareRelease) continue;
    std::vector<std::pair<chain::TxId, ShareMsg>> shares;
    try {
      shares = decode_release(rec.payload);
    } catch (const DecodeError&) {
      continue;
    }
    for (auto& [id, share] : shares) {
      auto it = items.find(id);
      // A trustee may only speak for its own index.
      if (it == items.end() || share_index(share) != who->second.second ||
          it->second.committee_epoch != rec.epoch) {
        continue;
      }
      it->second.shares.push_back(std::move(share));
    }
  }
  ReconstructionBatch batch;
  for (auto& [id, item] : items) {
    if (chain_.tx(id).state != chain::TxState::kFinalized) note_early(id, item.shares.size());
    batch.items.push_back(std::move(item));
  }
  auto outcome = aggregator_.reconstruct_keys(batch);
  {
    Record rec{MessageType::kKeyBatch, aggregator_actor_, kBroadcast, epoch_, encode_key_batch(outcome.keys), {}};
    rec.sign(aggregator_identity_);
    bus_.send(rec);
  }
  report.reconstruct_ms = since(agg_start);
  chain_.log("-", "KeyBatch",
             "txs=" + std::to_string(ids.size()) + " keys=" + std::to_string(outcome.keys.size()) +
                 " verified=" + std::to_string(outcome.shares_verified) +
                 " rejected=" + std::to_string(outcome.shares_rejected) + " refusals=" + std::to_string(refusals),
             report.reconstruct_ms);

  // Consensus side: followers check keys, the chain decrypts and executes.
  const auto exec_start = Clock::now();
  std::map<chain::TxId, aead::SymmetricKey> keys;
  for (const auto& rec : bus_.deliver()) {
    if (rec.type != MessageType::kKeyBatch || rec.from != aggregator_actor_) continue;
    keys = decode_key_batch(rec.payload);
  }
  for (const auto& item : batch.items) {
    auto k = keys.find(item.id);
    if (k == keys.end()) {
      chain_.fail_tx(item.id, "fewer than t valid shares");
      ++report.failed;
      continue;
    }
    if (config_.followers_check && !follower_.accept(item, k->second)) {
      chain_.log(chain::short_id(item.id), "FollowerRejected");
      chain_.fail_tx(item.id, "key rejected by followers");
      ++report.failed;
      continue;
    }
    try {
      const auto res = chain_.reveal_and_execute(item.id, k->second);
      res.status == chain::ExecStatus::kFailed ? ++report.failed : ++report.revealed;
    } catch (const KeyRejectedError&) {
      chain_.fail_tx(item.id, "key does not match h_k");
      ++report.failed;
    }
  }
  for (const auto& id : ids) {
    prepared_by_.erase(id);
    leaked_.erase(id);
  }
  report.execute_ms = since(exec_start);
  report.simulated_ms = bus_.now_ms() - bus_start;
  return report;
}

ReshareReport Smc::reshare(const std::set<std::uint32_t>& replace, const dkg::Faults& faults) {
  ReshareReport report;
  std::vector<dkg::TrusteeId> roster = dkg_.roster;
  for (auto idx : replace) {
    if (idx == 0 || idx > roster.size()) throw DomainError("replacement index out of range");
    const auto id = ++next_member_id_;
    Member m{Identity::generate(rng_), Scalar::random(rng_), 0};
    m.actor_id = new_actor(m.identity);
    members_.emplace(id, std::move(m));
    roster[idx - 1] = id;
  }
  dkg::ReshareOptions opts;
  opts.faults = faults;
  opts.hop_delay_ms = config_.hop_delay_ms;
  try {
    auto result = dkg::reshare(dkg_, roster, config_.t, rng_, opts);
    report.stats = result.stats;
    dkg_ = std::move(result.output);
  } catch (const AbortError& e) {
    report.reason = e.what();
    report.epoch = epoch_;
    chain_.log("-", "ReshareAborted", "epoch=" + std::to_string(epoch_) + " extended");
    return report;
  }
  install_committee(dkg_.epoch, dkg_);
  report.ok = true;
  report.epoch = epoch_;
  chain_.log("-", "Reshared",
             "epoch=" + std::to_string(epoch_) + " replaced=" + std::to_string(replace.size()));

  // The new committee picks up TDH2 txs that are in flight.
  std::vector<chain::TxId> in_flight;
  for (const auto& [id, ep] : prepared_by_) {
    if (ep != epoch_ && chain_.tx(id).tx.protocol == chain::Protocol::kTdh2) in_flight.push_back(id);
  }
  for (const auto& id : in_flight) prepare(id, committees_.at(epoch_), epoch_);
  return report;
}

}  // namespace f3b::smc
