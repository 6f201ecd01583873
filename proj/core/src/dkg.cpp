#include "f3b/dkg.hpp"

#include <algorithm>
#include <chrono>
#include <optional>

#include "f3b/bus.hpp"
#include "f3b/identity.hpp"
#include "f3b/pvss.hpp"
#include "f3b/sss.hpp"

namespace f3b::dkg {

namespace {

struct Dealer {
  std::uint32_t index;
  std::uint32_t actor;
  Polynomial poly;
};

struct Recipient {
  std::uint32_t index;
  std::uint32_t actor;
};

struct Kinds {
  MessageType deal, complaint, justification;
};

struct SharingOutcome {
  std::map<std::uint32_t, std::vector<GroupElement>> commitments;    // by dealer
  std::map<std::uint32_t, std::map<std::uint32_t, Scalar>> shares;   // recipient -> dealer -> share
  std::set<std::uint32_t> valid;                                      // dealt and survived complaints
  std::set<std::uint32_t> excluded;
};

Bytes encode_commitments(const std::vector<GroupElement>& c) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(c.size()));
  for (const auto& e : c) w.raw(e.encode());
  return std::move(w).take();
}

std::vector<GroupElement> decode_commitments(ByteView bytes) {
  ByteReader r(bytes);
  auto t = r.u32();
  if (t == 0 || t > r.remaining() / 32) throw DecodeError("bad commitment count");
  std::vector<GroupElement> out;
  for (std::uint32_t j = 0; j < t; ++j) out.push_back(GroupElement::decode(r.raw(32)));
  r.expect_done();
  return out;
}

bool share_matches(const std::vector<GroupElement>& commitments, std::uint32_t index, const Scalar& share) {
  return base_pow(share) == pvss::commitment_at(commitments, index);
}

// One complete sharing phase: deal, complain, justify.
SharingOutcome run_sharing(const std::vector<Dealer>& dealers, const std::vector<Recipient>& recipients,
                           const Faults& faults, const std::set<std::uint32_t>& crashed_recipients,
                           const std::map<std::uint32_t, Identity>& identities, Bus& bus, Kinds kinds,
                           std::uint64_t epoch) {
  std::map<std::uint32_t, std::uint32_t> dealer_of_actor, recipient_of_actor;
  for (const auto& d : dealers) dealer_of_actor[d.actor] = d.index;
  for (const auto& r : recipients) recipient_of_actor[r.actor] = r.index;
  std::map<std::uint32_t, const Dealer*> dealer_by_index;
  for (const auto& d : dealers) dealer_by_index[d.index] = &d;

  auto send = [&](std::uint32_t actor, MessageType type, std::uint32_t to, Bytes payload) {
    Record rec{type, actor, to, epoch, std::move(payload), {}};
    rec.sign(identities.at(actor));
    bus.send(rec);
  };

  // Round 1: commitments and private shares.
  for (const auto& d : dealers) {
    if (faults.crashed.count(d.index)) continue;
    std::vector<GroupElement> commitments;
    commitments.reserve(d.poly.threshold());
    for (const auto& a : d.poly.coefficients) commitments.push_back(base_pow(a));
    send(d.actor, kinds.deal, kBroadcast, encode_commitments(commitments));
    auto corrupt = faults.corrupt_shares.find(d.index);
    for (const auto& r : recipients) {
      Scalar s = eval(d.poly, r.index).value;
      if (corrupt != faults.corrupt_shares.end() && corrupt->second.count(r.index)) s = s + Scalar::one();
      send(d.actor, kinds.deal, r.actor, Bytes(s.bytes().begin(), s.bytes().end()));
    }
  }

  SharingOutcome out;
  std::map<std::uint32_t, std::map<std::uint32_t, Scalar>> inbox;  // recipient -> dealer -> share
  for (auto& rec : bus.deliver()) {
    auto d = dealer_of_actor.find(rec.from);
    if (d == dealer_of_actor.end() || rec.type != kinds.deal) continue;
    try {
      if (rec.to == kBroadcast) {
        auto c = decode_commitments(rec.payload);
        if (c.size() == dealer_by_index.at(d->second)->poly.threshold()) out.commitments[d->second] = std::move(c);
      } else if (auto r = recipient_of_actor.find(rec.to); r != recipient_of_actor.end()) {
        inbox[r->second][d->second] = Scalar::from_bytes(rec.payload);
      }
    } catch (const DecodeError&) {
    }
  }

  // Round 2: complaints.
  std::map<std::uint32_t, std::set<std::uint32_t>> accusations;  // dealer -> complainers
  for (const auto& r : recipients) {
    if (crashed_recipients.count(r.index)) continue;
    std::vector<std::uint32_t> accused;
    for (const auto& [dealer, commitments] : out.commitments) {
      bool ok = false;
      if (auto it = inbox[r.index].find(dealer); it != inbox[r.index].end()) {
        ok = share_matches(commitments, r.index, it->second);
        if (ok) out.shares[r.index][dealer] = it->second;
      }
      if (!ok || faults.false_accusers.count(r.index)) accused.push_back(dealer);
    }
    if (accused.empty()) continue;
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(accused.size()));
    for (auto a : accused) w.u32(a);
    send(r.actor, kinds.complaint, kBroadcast, std::move(w).take());
  }
  for (auto& rec : bus.deliver()) {
    auto r = recipient_of_actor.find(rec.from);
    if (r == recipient_of_actor.end() || rec.type != kinds.complaint) continue;
    try {
      ByteReader br(rec.payload);
      auto count = br.u32();
      for (std::uint32_t k = 0; k < count; ++k) {
        auto dealer = br.u32();
        if (out.commitments.count(dealer)) accusations[dealer].insert(r->second);
      }
    } catch (const DecodeError&) {
    }
  }

  // Round 3: accused dealers publish the disputed shares.
  if (!accusations.empty()) {
    for (const auto& [dealer, complainers] : accusations) {
      if (faults.crashed.count(dealer)) continue;
      const Dealer& d = *dealer_by_index.at(dealer);
      auto corrupt = faults.corrupt_shares.find(dealer);
      ByteWriter w;
      w.u32(static_cast<std::uint32_t>(complainers.size()));
      for (auto r : complainers) {
        Scalar s = eval(d.poly, r).value;
        if (corrupt != faults.corrupt_shares.end() && corrupt->second.count(r)) s = s + Scalar::one();
        w.u32(r);
        w.raw(s.bytes());
      }
      send(d.actor, kinds.justification, kBroadcast, std::move(w).take());
    }
    std::map<std::uint32_t, std::map<std::uint32_t, Scalar>> published;  // dealer -> recipient -> share
    for (auto& rec : bus.deliver()) {
      auto d = dealer_of_actor.find(rec.from);
      if (d == dealer_of_actor.end() || rec.type != kinds.justification) continue;
      try {
        ByteReader br(rec.payload);
        auto count = br.u32();
        for (std::uint32_t k = 0; k < count; ++k) {
          auto r = br.u32();
          published[d->second][r] = Scalar::from_bytes(br.raw(32));
        }
      } catch (const DecodeError&) {
      }
    }
    for (const auto& [dealer, complainers] : accusations) {
      bool cleared = true;
      for (auto r : complainers) {
        auto it = published[dealer].find(r);
        if (it == published[dealer].end() || !share_matches(out.commitments.at(dealer), r, it->second)) {
          cleared = false;
          break;
        }
      }
      if (!cleared) {
        out.excluded.insert(dealer);
        continue;
      }
      for (auto r : complainers) out.shares[r][dealer] = published[dealer][r];
    }
  }

  for (const auto& [dealer, c] : out.commitments) {
    if (!out.excluded.count(dealer)) out.valid.insert(dealer);
  }
  for (const auto& d : dealers) {
    if (!out.commitments.count(d.index)) out.excluded.insert(d.index);
  }
  return out;
}

// Aggregate commitments prod_d C_{d,k}^{w_d} for every coefficient k.
std::vector<GroupElement> aggregate(const std::map<std::uint32_t, std::vector<GroupElement>>& commitments,
                                    const std::vector<std::uint32_t>& dealers,
                                    const std::optional<std::vector<Scalar>>& weights, std::size_t t) {
  std::vector<GroupElement> out(t);
  for (std::size_t k = 0; k < t; ++k) {
    std::vector<GroupElement> bases;
    for (auto d : dealers) bases.push_back(commitments.at(d)[k]);
    if (weights) {
      out[k] = multi_pow(bases, *weights);
    } else {
      GroupElement acc;
      for (const auto& b : bases) acc = acc * b;
      out[k] = acc;
    }
  }
  return out;
}

std::vector<GroupElement> verification_keys(const std::vector<GroupElement>& aggregated, std::uint32_t n) {
  std::vector<GroupElement> out;
  out.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) out.push_back(pvss::commitment_at(aggregated, i));
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

void fill_stats(RunStats& stats, const Bus& bus) {
  stats.rounds = bus.stats().hops;
  stats.simulated_ms = bus.now_ms();
  stats.records = bus.stats().records;
  stats.bytes = bus.stats().bytes;
}

constexpr std::uint32_t kNewActorBase = 1u << 20;

}  // namespace

DkgResult run_dkg(std::uint32_t n, std::size_t t, Rng& rng, const DkgOptions& options) {
  if (t < 1 || t > n) throw DomainError("dkg requires 1 <= t <= n");
  if (!options.roster.empty() && options.roster.size() != n) throw DomainError("roster size must equal n");
  const auto start = std::chrono::steady_clock::now();

  Bus bus(options.hop_delay_ms);
  std::map<std::uint32_t, Identity> identities;
  std::vector<Dealer> dealers;
  std::vector<Recipient> recipients;
  for (std::uint32_t i = 1; i <= n; ++i) {
    identities.emplace(i, Identity::generate(rng));
    bus.register_actor(i, identities.at(i).public_key());
    dealers.push_back({i, i, sample_polynomial(t, std::nullopt, rng)});
    recipients.push_back({i, i});
  }
  auto outcome = run_sharing(dealers, recipients, options.faults, options.faults.crashed, identities, bus,
                             {MessageType::kDkgDeal, MessageType::kDkgComplaint, MessageType::kDkgJustification},
                             options.epoch);
  if (outcome.valid.size() < t) {
    throw AbortError("dkg: only " + std::to_string(outcome.valid.size()) + " qualified dealers, need " +
                     std::to_string(t));
  }
  std::vector<std::uint32_t> qual(outcome.valid.begin(), outcome.valid.end());
  auto agg = aggregate(outcome.commitments, qual, std::nullopt, t);

  DkgResult result;
  auto& out = result.output;
  out.threshold = t;
  out.epoch = options.epoch;
  if (options.roster.empty()) {
    for (std::uint32_t i = 1; i <= n; ++i) out.roster.push_back(i);
  } else {
    out.roster = options.roster;
  }
  out.public_key.pk = agg[0];
  out.public_key.verification_keys = verification_keys(agg, n);
  for (std::uint32_t i = 1; i <= n; ++i) {
    if (options.faults.crashed.count(i)) continue;
    Scalar sk;
    for (auto d : qual) sk += outcome.shares[i].at(d);
    if (base_pow(sk) != out.public_key.verification_keys[i - 1]) throw AbortError("dkg: share inconsistent with commitments");
    out.secret_shares[i] = sk;
  }
  result.stats.qualified = qual;
  result.stats.excluded.assign(outcome.excluded.begin(), outcome.excluded.end());
  fill_stats(result.stats, bus);
  result.stats.compute_ms = elapsed_ms(start);
  return result;
}

DkgResult reshare(const DkgOutput& old, const std::vector<TrusteeId>& new_roster, std::size_t t_new, Rng& rng,
                  const ReshareOptions& options) {
  const auto n_new = static_cast<std::uint32_t>(new_roster.size());
  if (t_new < 1 || t_new > n_new) throw DomainError("reshare requires 1 <= t_new <= |new_roster|");
  const auto start = std::chrono::steady_clock::now();

  Bus bus(options.hop_delay_ms);
  std::map<std::uint32_t, Identity> identities;
  std::vector<Dealer> dealers;
  std::vector<Recipient> recipients;
  for (const auto& [i, sk] : old.secret_shares) {
    identities.emplace(i, Identity::generate(rng));
    bus.register_actor(i, identities.at(i).public_key());
    dealers.push_back({i, i, sample_polynomial(t_new, sk, rng)});
  }
  for (std::uint32_t j = 1; j <= n_new; ++j) {
    const std::uint32_t actor = kNewActorBase + j;
    identities.emplace(actor, Identity::generate(rng));
    bus.register_actor(actor, identities.at(actor).public_key());
    recipients.push_back({j, actor});
  }
  auto outcome = run_sharing(dealers, recipients, options.faults, {}, identities, bus,
                             {MessageType::kReshareDeal, MessageType::kReshareComplaint,
                              MessageType::kReshareJustification},
                             old.epoch + 1);

  // A sub-sharing must start from the dealer's published verification key.
  std::vector<std::uint32_t> usable;
  std::vector<std::uint32_t> excluded(outcome.excluded.begin(), outcome.excluded.end());
  for (auto i : outcome.valid) {
    if (outcome.commitments.at(i)[0] == old.public_key.verification_key(i)) {
      usable.push_back(i);
    } else {
      excluded.push_back(i);
    }
  }
  if (usable.size() < old.threshold) {
    throw AbortError("reshare: only " + std::to_string(usable.size()) + " old trustees contributed, need " +
                     std::to_string(old.threshold));
  }
  std::vector<std::uint32_t> qual(usable.begin(), usable.begin() + static_cast<std::ptrdiff_t>(old.threshold));
  auto lambdas = lagrange_coefficients(qual);
  auto agg = aggregate(outcome.commitments, qual, lambdas, t_new);
  if (agg[0] != old.public_key.pk) throw AbortError("reshare: public key changed");

  DkgResult result;
  auto& out = result.output;
  out.threshold = t_new;
  out.epoch = old.epoch + 1;
  out.roster = new_roster;
  out.public_key.pk = old.public_key.pk;
  out.public_key.verification_keys = verification_keys(agg, n_new);
  for (std::uint32_t j = 1; j <= n_new; ++j) {
    Scalar sk;
    for (std::size_t k = 0; k < qual.size(); ++k) sk += lambdas[k] * outcome.shares[j].at(qual[k]);
    if (base_pow(sk) != out.public_key.verification_keys[j - 1]) throw AbortError("reshare: share inconsistent with commitments");
    out.secret_shares[j] = sk;
  }
  result.stats.qualified = qual;
  std::sort(excluded.begin(), excluded.end());
  result.stats.excluded = excluded;
  fill_stats(result.stats, bus);
  result.stats.compute_ms = elapsed_ms(start);
  return result;
}

}  // namespace f3b::dkg
