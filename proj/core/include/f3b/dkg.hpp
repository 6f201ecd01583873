#pragma once

// Joint-Feldman distributed key generation and verifiable resharing for the
// TDH2 committee key, run over the simulated bus.
//
// Both protocols use the same three synchronous rounds:
//   1. every dealer broadcasts Feldman commitments and sends each recipient
//      its share privately;
//   2. recipients broadcast complaints against dealers whose share did not
//      match the commitments (or never arrived);
//   3. accused dealers publish the disputed shares. A dealer is excluded if
//      any published share fails the commitment check.
// Round 3 is skipped when nobody complained.

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "f3b/group.hpp"
#include "f3b/tdh2.hpp"

namespace f3b::dkg {

using TrusteeId = std::uint64_t;

struct DkgOutput {
  tdh2::PublicKey public_key;
  // Held per trustee in the simulator; only live trustees have an entry.
  std::map<std::uint32_t, Scalar> secret_shares;
  std::vector<TrusteeId> roster;  // index i belongs to roster[i - 1]
  std::size_t threshold = 0;
  std::uint64_t epoch = 0;

  std::uint32_t n() const { return static_cast<std::uint32_t>(roster.size()); }
};

// Scripted misbehaviour, by participant index. For resharing, dealer
// indices are old indices and recipient indices are new ones.
struct Faults {
  std::set<std::uint32_t> crashed;  // send nothing at all
  // dealer -> recipients that receive a share inconsistent with the
  // commitments. Such a dealer also publishes the bad share when accused.
  std::map<std::uint32_t, std::set<std::uint32_t>> corrupt_shares;
  // Recipients that complain about every dealer.
  std::set<std::uint32_t> false_accusers;
};

struct RunStats {
  double simulated_ms = 0;  // bus hops x delay
  double compute_ms = 0;    // measured wall clock
  std::uint64_t rounds = 0;
  std::uint64_t records = 0;
  std::uint64_t bytes = 0;
  std::vector<std::uint32_t> qualified;  // dealers whose contribution was used
  std::vector<std::uint32_t> excluded;

  double total_ms() const { return simulated_ms + compute_ms; }
};

struct DkgResult {
  DkgOutput output;
  RunStats stats;
};

struct DkgOptions {
  Faults faults;
  double hop_delay_ms = 100.0;
  std::uint64_t epoch = 0;
  std::vector<TrusteeId> roster;  // defaults to 1..n
};

// Throws DomainError unless 1 <= t <= n and AbortError if fewer than t
// dealers survive the complaint round.
DkgResult run_dkg(std::uint32_t n, std::size_t t, Rng& rng, const DkgOptions& options = {});

struct ReshareOptions {
  Faults faults;
  double hop_delay_ms = 100.0;
};

// Moves the shared key to `new_roster` with threshold t_new. The public key
// is unchanged; the qualified set is the lowest old.threshold indices among
// old trustees that are live and passed verification. Throws AbortError if
// fewer than old.threshold old trustees contribute.
DkgResult reshare(const DkgOutput& old, const std::vector<TrusteeId>& new_roster, std::size_t t_new, Rng& rng,
                  const ReshareOptions& options = {});

}  // namespace f3b::dkg
