#pragma once

// Scenario files and the end-to-end simulation driver.
//
// A scenario file is a list of `key = value` lines; `#` starts a comment.
//
//   n = 7
//   t = 4                  # default floor(n/2) + 1
//   m = 8
//   block_time_ms = 12000
//   protocol = pvss        # tdh2 | pvss
//   batch = 1, 4, 16       # txs submitted together, one block per entry
//   faults = 2:leak, 5:garbage, 6:crashed
//   seed = 42
//
// Other keys: with_hk, hop_delay_ms, deposit_per_byte, refund_fraction,
// execution_fee, key_deadline_blocks, block_capacity, max_batch, collateral,
// dispute_stake, disputes, reshare_at, replace, grace_blocks, label.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "f3b/chain.hpp"
#include "f3b/smc.hpp"

namespace f3b::scenario {

struct ScenarioConfig {
  std::uint32_t n = 4;
  std::size_t t = 0;  // 0 selects floor(n/2) + 1
  std::uint32_t m = 64;
  std::uint64_t block_time_ms = 12000;
  chain::Protocol protocol = chain::Protocol::kTdh2;
  std::vector<std::size_t> batch{1};
  std::uint64_t seed = 1;
  bool with_hk = true;
  double hop_delay_ms = 100.0;
  std::uint64_t deposit_per_byte = 1;
  chain::Rational refund_fraction{9, 10};
  std::uint64_t execution_fee = 0;
  std::uint32_t key_deadline_blocks = 2;
  std::size_t block_capacity = 0;
  std::size_t max_batch = 0;
  std::uint64_t collateral = 0;
  std::uint64_t dispute_stake = 0;  // 0 means equal to the collateral
  bool disputes = false;            // a watcher files disputes with leaked shares
  std::uint64_t reshare_at = 0;     // block height of a one-off reshare; 0 = none
  std::uint32_t replace = 0;        // trustees replaced by that reshare
  std::uint64_t grace_blocks = 32;
  std::string label = "f3b-sim-genesis";
  std::map<std::uint32_t, smc::Behavior> faults;

  std::size_t threshold() const { return t ? t : n / 2 + 1; }
  // Throws DomainError on unknown keys or bad values.
  static ScenarioConfig parse(std::string_view text);
  std::string to_text() const;
  chain::ChainConfig chain_config() const;
  smc::SmcConfig smc_config() const;
};

struct ScenarioResult {
  Trace trace;
  std::vector<smc::BlockReport> blocks;
  std::size_t submitted = 0;
  std::size_t rejected = 0;
  std::size_t executed = 0;  // Executed, successful or reverted
  std::size_t reverted = 0;
  std::size_t failed = 0;
  std::size_t slashed = 0;
  std::size_t early_assemblies = 0;
  std::size_t max_early_shares = 0;
  std::size_t threshold = 0;
  bool conserved = true;  // held after every block
  std::uint64_t final_height = 0;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace f3b::scenario
