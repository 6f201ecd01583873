#include "f3b/scenario.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "f3b/client.hpp"

namespace f3b::scenario {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

template <class T>
T number(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw DomainError("bad value for " + std::string(key) + ": " + std::string(v));
  }
  return out;
}

bool boolean(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DomainError("bad value for " + std::string(key) + ": " + std::string(v));
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(std::string_view text) {
  ScenarioConfig c;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DomainError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto v = trim(line.substr(eq + 1));
    if (key == "n") c.n = number<std::uint32_t>(key, v);
    else if (key == "t") c.t = number<std::size_t>(key, v);
    else if (key == "m") c.m = number<std::uint32_t>(key, v);
    else if (key == "block_time_ms") c.block_time_ms = number<std::uint64_t>(key, v);
    else if (key == "protocol") c.protocol = chain::parse_protocol(v);
    else if (key == "batch") {
      c.batch.clear();
      for (auto b : split(v, ',')) c.batch.push_back(number<std::size_t>(key, b));
    } else if (key == "seed") c.seed = number<std::uint64_t>(key, v);
    else if (key == "with_hk") c.with_hk = boolean(key, v);
    else if (key == "hop_delay_ms") c.hop_delay_ms = number<double>(key, v);
    else if (key == "deposit_per_byte") c.deposit_per_byte = number<std::uint64_t>(key, v);
    else if (key == "refund_fraction") c.refund_fraction = chain::Rational::parse(v);
    else if (key == "execution_fee") c.execution_fee = number<std::uint64_t>(key, v);
    else if (key == "key_deadline_blocks") c.key_deadline_blocks = number<std::uint32_t>(key, v);
    else if (key == "block_capacity") c.block_capacity = number<std::size_t>(key, v);
    else if (key == "max_batch") c.max_batch = number<std::size_t>(key, v);
    else if (key == "collateral") c.collateral = number<std::uint64_t>(key, v);
    else if (key == "dispute_stake") c.dispute_stake = number<std::uint64_t>(key, v);
    else if (key == "disputes") c.disputes = boolean(key, v);
    else if (key == "reshare_at") c.reshare_at = number<std::uint64_t>(key, v);
    else if (key == "replace") c.replace = number<std::uint32_t>(key, v);
    else if (key == "grace_blocks") c.grace_blocks = number<std::uint64_t>(key, v);
    else if (key == "label") c.label = std::string(v);
    else if (key == "faults") {
      c.faults.clear();
      if (v.empty() || v == "none") continue;
      for (auto item : split(v, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw DomainError("fault entries look like index:behaviour");
        c.faults[number<std::uint32_t>(key, trim(item.substr(0, colon)))] =
            smc::parse_behavior(trim(item.substr(colon + 1)));
      }
    } else {
      throw DomainError("unknown scenario key: " + std::string(key));
    }
  }
  if (c.n == 0) throw DomainError("n must be positive");
  if (c.threshold() > c.n) throw DomainError("t must not exceed n");
  for (const auto& [idx, b] : c.faults) {
    if (idx == 0 || idx > c.n) throw DomainError("fault index out of range");
  }
  if (c.replace > c.n) throw DomainError("replace must not exceed n");
  return c;
}

std::string ScenarioConfig::to_text() const {
  std::ostringstream o;
  o << "n = " << n << "\nt = " << threshold() << "\nm = " << m << "\nblock_time_ms = " << block_time_ms
    << "\nprotocol = " << chain::to_string(protocol) << "\nbatch = ";
  for (std::size_t i = 0; i < batch.size(); ++i) o << (i ? ", " : "") << batch[i];
  o << "\nseed = " << seed << "\nwith_hk = " << (with_hk ? "true" : "false") << "\nhop_delay_ms = " << hop_delay_ms
    << "\ndeposit_per_byte = " << deposit_per_byte << "\nrefund_fraction = " << refund_fraction.num << "/"
    << refund_fraction.den << "\nexecution_fee = " << execution_fee << "\nkey_deadline_blocks = " << key_deadline_blocks
    << "\nblock_capacity = " << block_capacity << "\nmax_batch = " << max_batch << "\ncollateral = " << collateral
    << "\ndispute_stake = " << dispute_stake << "\ndisputes = " << (disputes ? "true" : "false")
    << "\nreshare_at = " << reshare_at << "\nreplace = " << replace << "\ngrace_blocks = " << grace_blocks
    << "\nlabel = " << label << "\nfaults = ";
  if (faults.empty()) o << "none";
  bool first = true;
  for (const auto& [idx, b] : faults) {
    o << (first ? "" : ", ") << idx << ":" << smc::to_string(b);
    first = false;
  }
  o << "\n";
  return o.str();
}

chain::ChainConfig ScenarioConfig::chain_config() const {
  chain::ChainConfig cc;
  cc.block_time_ms = block_time_ms;
  cc.confirmations = m;
  cc.label = Label(label);
  cc.deposit_per_byte = deposit_per_byte;
  cc.refund_fraction = refund_fraction;
  cc.key_write_deadline_blocks = key_deadline_blocks;
  cc.execution_fee = execution_fee;
  cc.block_capacity = block_capacity;
  cc.epoch_grace_blocks = grace_blocks;
  return cc;
}

smc::SmcConfig ScenarioConfig::smc_config() const {
  smc::SmcConfig sc;
  sc.n = n;
  sc.t = threshold();
  sc.hop_delay_ms = hop_delay_ms;
  sc.max_batch = max_batch;
  sc.collateral = collateral;
  sc.behaviors = faults;
  return sc;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  Rng rng(config.seed);
  chain::Chain chain(config.chain_config());
  smc::Smc committee(chain, config.smc_config(), rng);
  ScenarioResult result;
  result.threshold = config.threshold();

  constexpr std::size_t kUsers = 4;
  std::vector<Identity> users;
  for (std::size_t i = 0; i < kUsers; ++i) {
    users.push_back(Identity::generate(rng));
    chain.mint(users.back().address(), 1'000'000'000);
  }
  const Identity watcher = Identity::generate(rng);
  chain.mint(watcher.address(), 1'000'000'000);
  std::vector<std::uint64_t> nonces(kUsers, 0);
  std::set<chain::TxId> disputed;
  std::vector<chain::TxId> ids;

  auto step = [&] {
    auto block = chain.advance_block();
    result.blocks.push_back(committee.on_block(block));
    if (config.reshare_at && block.height == config.reshare_at) {
      std::set<std::uint32_t> replace;
      for (std::uint32_t i = 1; i <= config.replace; ++i) replace.insert(i);
      committee.reshare(replace);
    }
    if (config.disputes) {
      const std::uint64_t stake = config.dispute_stake ? config.dispute_stake : config.collateral;
      for (const auto& [id, shares] : committee.leaked()) {
        if (shares.empty() || !disputed.insert(id).second) continue;
        auto verdict = chain.file_dispute(id, shares.begin()->second, watcher.address(), stake);
        if (verdict.verdict == chain::Verdict::kSlash) ++result.slashed;
      }
    }
    result.conserved = result.conserved && chain.conserved();
  };

  for (std::size_t b : config.batch) {
    for (std::size_t k = 0; k < b; ++k) {
      const std::size_t from = rng.uniform(kUsers);
      const std::size_t to = (from + 1 + rng.uniform(kUsers - 1)) % kUsers;
      const auto inner =
          chain::InnerTx::make(users[from], users[to].address(), 1 + rng.uniform(1000), nonces[from]++).serialize();
      chain::WriteTx tx;
      if (config.protocol == chain::Protocol::kTdh2) {
        tx = client::build_tdh2_tx(users[from], inner, chain, config.with_hk, rng);
      } else {
        tx = client::build_pvss_tx(users[from], client::precompute_pvss(chain, rng), inner, chain, config.with_hk, rng);
      }
      auto r = chain.submit_tx(tx);
      ++result.submitted;
      if (r.accepted) {
        ids.push_back(r.id);
      } else {
        ++result.rejected;
      }
    }
    step();
  }
  // Run until every accepted tx is settled and its key is on chain.
  auto settled = [&] {
    for (const auto& id : ids) {
      const auto& rec = chain.tx(id);
      if (rec.state != chain::TxState::kExecuted && rec.state != chain::TxState::kFailed) return false;
    }
    return true;
  };
  std::uint64_t guard = 0;
  while (!settled() && guard++ < 100000) step();
  for (std::uint32_t i = 0; i < config.key_deadline_blocks; ++i) step();

  for (const auto& id : ids) {
    const auto& rec = chain.tx(id);
    if (rec.state == chain::TxState::kExecuted) {
      ++result.executed;
      if (rec.result && rec.result->status == chain::ExecStatus::kReverted) ++result.reverted;
    } else {
      ++result.failed;
    }
  }
  result.early_assemblies = committee.early_assemblies();
  result.max_early_shares = committee.max_early_shares();
  result.final_height = chain.height();
  result.trace = chain.trace();
  return result;
}

}  // namespace f3b::scenario
