// f3b: experiment and scenario driver.
//
//   f3b latency    --n 8,16,32,64,128 --protocol tdh2 --trials 10
//   f3b throughput --n 128 --batch 1,2,4,...,2048
//   f3b storage    --protocol pvss
//   f3b reconfig   --n 8,16,32
//   f3b compare    --m 64 --block-time-ms 12000 --lr-ms 150
//   f3b scenario   scenarios/honest_tdh2.conf --trace trace.ndjson

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "f3b/bench.hpp"
#include "f3b/errors.hpp"
#include "f3b/scenario.hpp"

namespace {

struct Flags {
  std::vector<std::uint32_t> n;
  std::size_t t = 0;
  std::uint32_t m = 64;
  std::uint64_t block_time_ms = 12000;
  std::string protocol = "tdh2";
  std::vector<std::size_t> batch;
  std::uint64_t seed = 1;
  std::string out = "csv";
  std::size_t trials = 10;
  double hop_delay_ms = 100.0;
  bool no_hk = false;
  std::string output;

  f3b::bench::CommonOptions common() const {
    f3b::bench::CommonOptions o;
    o.m = m;
    o.block_time_ms = block_time_ms;
    o.hop_delay_ms = hop_delay_ms;
    o.trials = trials;
    o.seed = seed;
    o.t = t;
    o.with_hk = !no_hk;
    return o;
  }
  std::vector<std::uint32_t> n_or(std::vector<std::uint32_t> fallback) const { return n.empty() ? fallback : n; }
};

void add_common(CLI::App* sub, Flags& f, bool with_batch) {
  sub->add_option("--n", f.n, "committee sizes, comma separated")->delimiter(',');
  sub->add_option("--t", f.t, "threshold (default floor(n/2)+1)");
  sub->add_option("--m", f.m, "confirmation depth")->check(CLI::PositiveNumber);
  sub->add_option("--block-time-ms", f.block_time_ms, "block interval L_b in ms")->check(CLI::PositiveNumber);
  sub->add_option("--protocol", f.protocol, "tdh2 or pvss")->check(CLI::IsMember({"tdh2", "pvss"}));
  if (with_batch) sub->add_option("--batch", f.batch, "batch sizes, comma separated")->delimiter(',');
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--out", f.out, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--trials", f.trials, "trials per point (median reported)")->check(CLI::PositiveNumber);
  sub->add_option("--hop-delay-ms", f.hop_delay_ms, "simulated bus hop delay");
  sub->add_flag("--no-hk", f.no_hk, "omit h_k from transactions");
  sub->add_option("-o,--output", f.output, "write the report here instead of stdout");
}

int emit(const f3b::bench::BenchReport& rep, const Flags& f) {
  const std::string text = f.out == "json" ? rep.to_json() + "\n" : rep.to_csv();
  if (f.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(f.output);
    if (!file) throw f3b::Error("cannot write " + f.output);
    file << text;
  }
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw f3b::Error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"F3B front-running protection simulator and benchmarks"};
  app.require_subcommand(1);
  Flags f;

  auto* latency = app.add_subcommand("latency", "post-finality latency breakdown and overhead per n");
  add_common(latency, f, false);

  auto* throughput = app.add_subcommand("throughput", "batched key reconstruction throughput");
  add_common(throughput, f, true);

  auto* storage = app.add_subcommand("storage", "serialized c_k and envelope sizes");
  add_common(storage, f, false);

  auto* reconfig = app.add_subcommand("reconfig", "DKG and resharing cost");
  add_common(reconfig, f, false);
  std::vector<std::string> scenarios{"full-dkg", "reshare-same", "reshare-one", "reshare-quarter"};
  reconfig->add_option("--scenarios", scenarios, "subset of full-dkg,reshare-same,reshare-one,reshare-quarter")
      ->delimiter(',');

  auto* compare = app.add_subcommand("compare", "end-to-end latency against sequential designs");
  add_common(compare, f, false);
  double lr_ms = -1;
  compare->add_option("--lr-ms", lr_ms, "L_r in ms; measured at the largest --n when omitted");

  auto* scenario = app.add_subcommand("scenario", "run a scenario file and write its event trace as NDJSON");
  std::string config_path, trace_path;
  bool no_wall = false;
  std::optional<std::uint64_t> scenario_seed;
  scenario->add_option("config", config_path, "scenario file (key = value lines)")->required();
  scenario->add_option("--trace", trace_path, "trace output file (default stdout)");
  scenario->add_option("--seed", scenario_seed, "override the file's seed");
  scenario->add_flag("--no-wall", no_wall, "drop wall-clock fields from the trace");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto protocol = f3b::chain::parse_protocol(f.protocol);
    const auto opts = f.common();
    if (latency->parsed()) return emit(f3b::bench::bench_latency(f.n_or({8, 16, 32, 64, 128}), protocol, opts), f);
    if (throughput->parsed()) {
      std::vector<std::size_t> batches = f.batch;
      if (batches.empty()) {
        for (std::size_t b = 1; b <= 2048; b *= 2) batches.push_back(b);
      }
      return emit(f3b::bench::bench_throughput(batches, protocol, f.n_or({128}).front(), opts), f);
    }
    if (storage->parsed()) return emit(f3b::bench::measure_storage(f.n_or({8, 16, 32, 64, 128}), protocol, opts), f);
    if (reconfig->parsed()) return emit(f3b::bench::bench_reconfig(f.n_or({8, 16, 32}), scenarios, opts), f);
    if (compare->parsed()) {
      if (lr_ms < 0) {
        auto lat = f3b::bench::bench_latency({f.n_or({128}).back()}, protocol, opts);
        lr_ms = lat.number(0, "l_r_ms");
      }
      return emit(f3b::bench::compare_designs(f.m, f.block_time_ms, lr_ms), f);
    }
    if (scenario->parsed()) {
      auto cfg = f3b::scenario::ScenarioConfig::parse(read_file(config_path));
      if (scenario_seed) cfg.seed = *scenario_seed;
      const auto result = f3b::scenario::run_scenario(cfg);
      if (trace_path.empty()) {
        result.trace.write_ndjson(std::cout, !no_wall);
      } else {
        std::ofstream out(trace_path);
        if (!out) throw f3b::Error("cannot write " + trace_path);
        result.trace.write_ndjson(out, !no_wall);
      }
      std::cerr << "submitted=" << result.submitted << " rejected=" << result.rejected
                << " executed=" << result.executed << " reverted=" << result.reverted << " failed=" << result.failed
                << " slashed=" << result.slashed << " max_early_shares=" << result.max_early_shares << "/"
                << result.threshold << " conserved=" << (result.conserved ? "yes" : "no")
                << " height=" << result.final_height << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "f3b: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
