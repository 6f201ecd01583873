#include "f3b/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "f3b/errors.hpp"

namespace f3b::bench {
namespace {

TEST(Bench, Summarize) {
  auto s = summarize({5, 1, 3});
  EXPECT_EQ(s.median, 3);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 5);
  EXPECT_EQ(summarize({4, 1, 2, 3}).median, 2.5);
  EXPECT_EQ(summarize({}).median, 0);
}

TEST(Bench, OverheadFormula) {
  EXPECT_DOUBLE_EQ(overhead_percent(768, 64, 12000), 0.1);
  EXPECT_DOUBLE_EQ(overhead_percent(200, 8, 12000) * 8, overhead_percent(200, 64, 12000) * 64);
}

TEST(Bench, CompareDesigns) {
  auto r = compare_designs(64, 12000, 200);
  EXPECT_EQ(r.number(0, "latency_s"), 768);
  EXPECT_EQ(r.number(1, "latency_s"), 1536);
  EXPECT_EQ(r.number(2, "latency_s"), 2304);
  EXPECT_DOUBLE_EQ(r.number(3, "latency_s"), 768.2);
  EXPECT_LT(r.number(3, "overhead_pct"), r.number(1, "overhead_pct"));
}

TEST(Bench, CsvAndJson) {
  BenchReport r;
  r.kind = "demo";
  r.params["n"] = "4";
  r.columns = {"name", "count", "value"};
  r.add_row({std::string("a,b"), std::int64_t{3}, 0.5});
  EXPECT_THROW(r.add_row({std::int64_t{1}}), DomainError);
  EXPECT_EQ(r.to_csv(), "# schema=f3b-bench/1 kind=demo n=4\nname,count,value\n\"a,b\",3,0.5\n");
  const auto j = r.to_json();
  EXPECT_NE(j.find("\"schema\": \"f3b-bench/1\""), std::string::npos);
  EXPECT_NE(j.find("\"count\": 3"), std::string::npos);
  EXPECT_EQ(r.text(0, "name"), "a,b");
  EXPECT_THROW(r.number(0, "name"), DomainError);
  EXPECT_THROW(r.column("missing"), DomainError);
}

TEST(Bench, StorageFit) {
  CommonOptions o;
  auto tdh = measure_storage({8, 128}, chain::Protocol::kTdh2, o);
  EXPECT_EQ(tdh.number(0, "c_k_bytes"), 160);
  EXPECT_EQ(tdh.number(1, "c_k_bytes"), 160);
  auto pv = measure_storage({8, 16, 128}, chain::Protocol::kPvss, o);
  for (std::size_t r = 0; r < pv.rows.size(); ++r) {
    EXPECT_EQ(pv.number(r, "residual"), 0);
    const double n = pv.number(r, "n");
    EXPECT_EQ(pv.number(r, "c_k_bytes"), 100 * n + 32 * (std::floor(n / 2) + 1) + 8);
  }
  EXPECT_EQ(pv.number(2, "reference_bytes"), 12432);
}

TEST(Bench, LatencyRowsAreConsistent) {
  CommonOptions o;
  o.trials = 2;
  o.m = 4;
  o.block_time_ms = 1000;
  auto r = bench_latency({4}, chain::Protocol::kTdh2, o);
  ASSERT_EQ(r.rows.size(), 6u);
  EXPECT_EQ(r.number(0, "simulated_ms"), 200);
  EXPECT_EQ(r.number(0, "revealed_at_finality"), 1);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.number(i, "overhead_pct"),
                     100 * r.number(i, "l_r_ms") / (r.number(i, "m") * 1000));
  }
}

TEST(Bench, ThroughputSmallCommittee) {
  CommonOptions o;
  o.trials = 1;
  auto r = bench_throughput({1, 8}, chain::Protocol::kPvss, 4, o);
  EXPECT_EQ(r.number(0, "keys"), 1);
  EXPECT_EQ(r.number(1, "keys"), 8);
  EXPECT_GT(r.number(1, "throughput_tps"), r.number(0, "throughput_tps"));
}

TEST(Bench, ReconfigScenarios) {
  CommonOptions o;
  o.trials = 1;
  auto r = bench_reconfig({8}, {"full-dkg", "reshare-same", "reshare-one", "reshare-quarter"}, o);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.number(3, "replaced"), 2);
  EXPECT_THROW(bench_reconfig({8}, {"bogus"}, o), DomainError);
}

}  // namespace
}  // namespace f3b::bench
