#pragma once

// Desk-scale experiment harness. Every experiment returns a BenchReport:
// a typed table plus parameters and free-form notes, serializable as CSV or
// JSON under a versioned schema.
//
// Simulated time (block intervals, bus hops) and measured wall-clock time
// (crypto, execution) are reported in separate columns; they are combined
// only in the derived total and overhead columns.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "f3b/chain.hpp"

namespace f3b::bench {

inline constexpr const char* kSchema = "f3b-bench/1";

using Cell = std::variant<std::int64_t, double, std::string>;

struct Stat {
  double median = 0;
  double min = 0;
  double max = 0;
};
// Median of the samples (mean of the middle two for even counts), with the
// extremes. All zero for an empty input.
Stat summarize(std::vector<double> samples);

struct BenchReport {
  std::string kind;
  std::map<std::string, std::string> params;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;

  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;  // throws DomainError if absent
  double number(std::size_t row, const std::string& name) const;
  std::string text(std::size_t row, const std::string& name) const;

  // CSV: one "# schema=... kind=..." comment line, a header, then rows.
  std::string to_csv() const;
  // JSON: {"schema","kind","params","columns","rows":[{column: value}],"notes"}
  std::string to_json() const;
};

struct CommonOptions {
  std::uint32_t m = 64;
  std::uint64_t block_time_ms = 12000;
  double hop_delay_ms = 100.0;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t t = 0;  // 0 selects floor(n/2) + 1
  bool with_hk = true;

  std::size_t threshold(std::uint32_t n) const { return t ? t : n / 2 + 1; }
  double finality_ms() const { return static_cast<double>(m) * static_cast<double>(block_time_ms); }
};

// Per n: share preparation (slowest trustee), key reconstruction, decryption
// and execution, the sender's PVSS dealing, L_r and overhead L_r / (m L_b).
// Also adds the overhead for m in {8, 16, 32, 64, 128} at the largest n.
BenchReport bench_latency(const std::vector<std::uint32_t>& n_values, chain::Protocol protocol,
                          const CommonOptions& options);

// Overhead of latency L_r (ms) at confirmation depth m, in percent.
double overhead_percent(double l_r_ms, std::uint32_t m, std::uint64_t block_time_ms);

// Per batch size: one round trip reconstructing that many keys, its latency
// and the resulting tx/s.
BenchReport bench_throughput(const std::vector<std::size_t>& batch_sizes, chain::Protocol protocol, std::uint32_t n,
                             const CommonOptions& options);

// Serialized c_k and envelope sizes per n, with the exact affine fit for PVSS.
BenchReport measure_storage(const std::vector<std::uint32_t>& n_values, chain::Protocol protocol,
                            const CommonOptions& options);

// DKG and the three resharing scenarios per n.
BenchReport bench_reconfig(const std::vector<std::uint32_t>& n_values, const std::vector<std::string>& scenarios,
                           const CommonOptions& options);

// End-to-end latency of the baseline, commit-and-reveal, a three-transaction
// commit scheme and this design (m L_b + L_r).
BenchReport compare_designs(std::uint32_t m, std::uint64_t block_time_ms, double l_r_ms);

}  // namespace f3b::bench
