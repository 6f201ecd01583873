#pragma once

// Event trace of a simulation run, written as newline-delimited JSON:
//
//   {"tx":"<hex id>","event":"Included","sim_time_ms":12000,"block_height":1,"detail":"..."}
//
// Wall-clock measurements go in "wall_ms" and are the only field that may
// differ between two runs with the same seed.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace f3b {

struct TraceEvent {
  std::string tx;  // hex tx id, or "-" for events not tied to a transaction
  std::string event;
  std::uint64_t sim_time_ms = 0;
  std::uint64_t block_height = 0;
  std::string detail;
  std::optional<double> wall_ms;

  // NDJSON line without the trailing newline. `with_wall` drops wall_ms when false.
  std::string to_json(bool with_wall = true) const;
};

class Trace {
 public:
  void add(TraceEvent e) { events_.push_back(std::move(e)); }
  const std::vector<TraceEvent>& events() const { return events_; }
  void write_ndjson(std::ostream& out, bool with_wall = true) const;
  // Canonical form used for determinism comparisons.
  std::string deterministic_text() const;

 private:
  std::vector<TraceEvent> events_;
};

}  // namespace f3b
