#include <gtest/gtest.h>

#include <fstream>

#include "apps.hpp"
#include "params.hpp"
#include "report.hpp"
#include "selftest.hpp"
#include "ufhe/arith.hpp"
#include "ufhe/error.hpp"

#ifndef UFHE_DATA_DIR
#error "UFHE_DATA_DIR must point at the data directory"
#endif

namespace ufhe::app {
namespace {

struct PaperRow {
  const char* name;
  u64 p, m, n;
  std::size_t bd, bl;
  int blog_q;
  std::size_t ud, ul;
  int ulog_q;
};

// Parameter table as printed: (p m N), then (d l) and log Q for each circuit.
constexpr PaperRow kPaper[] = {
    {"p1", 3, 34511, 34510, 6, 7, 324, 16, 4, 472},   {"p2", 5, 19531, 19530, 7, 4, 324, 7, 6, 354},
    {"p3", 7, 20197, 19116, 6, 4, 354, 8, 4, 406},    {"p4", 11, 15797, 15796, 5, 4, 342, 5, 5, 378},
    {"p5", 13, 30941, 30940, 5, 4, 354, 4, 6, 378},   {"p6", 17, 41761, 41760, 4, 4, 413, 7, 3, 472},
    {"p7", 19, 29989, 29988, 4, 4, 378, 5, 4, 385},   {"p8", 23, 37745, 30192, 5, 3, 413, 9, 2, 456},
    {"p9", 29, 18157, 17820, 5, 3, 360, 6, 3, 413},   {"p10", 31, 52053, 34700, 5, 3, 512, 4, 4, 512},
};

TEST(ParamSets, PaperRowsMatchTable) {
  for (const auto& row : kPaper) {
    EXPECT_EQ(arith::euler_phi(row.m), row.n) << row.name;
    const auto& b = find_param_set(std::string(row.name) + "-B");
    const auto& u = find_param_set(std::string(row.name) + "-U");
    EXPECT_EQ(b.source, Source::paper);
    EXPECT_EQ(b.p, row.p);
    EXPECT_EQ(b.m, row.m);
    EXPECT_EQ(b.table_d, row.bd);
    EXPECT_EQ(b.table_l, row.bl);
    EXPECT_EQ(b.table_log_q, row.blog_q);
    EXPECT_EQ(u.table_d, row.ud);
    EXPECT_EQ(u.table_l, row.ul);
    EXPECT_EQ(u.table_log_q, row.ulog_q);
    EXPECT_EQ(b.circuit, bgv::Circuit::bivariate);
    EXPECT_EQ(u.circuit, bgv::Circuit::univariate);
    // Ring slot structure times slot degree recovers N.
    EXPECT_EQ(b.d * b.l, row.n);
    EXPECT_GE(static_cast<int>((b.levels + 1) * 59), row.blog_q);
  }
}

TEST(ParamSets, AllBuiltinsValidate) {
  for (const auto& ps : builtin_param_sets()) {
    const auto v = validate(ps);
    EXPECT_TRUE(v.ok) << ps.name << ": " << (v.problems.empty() ? "" : v.problems.front());
  }
}

TEST(ParamSets, ShippedDataMatchesBuiltins) {
  const auto sets = load_param_sets(std::string(UFHE_DATA_DIR) + "/param_sets.json");
  const auto& builtin = builtin_param_sets();
  ASSERT_EQ(sets.size(), builtin.size());
  for (std::size_t i = 0; i < sets.size(); ++i) EXPECT_EQ(to_json(sets[i]), to_json(builtin[i]));
}

TEST(ParamSets, ValidationFindsProblems) {
  ParamSet ps = find_param_set("toy-p3-m91");
  ps.l = 13;
  EXPECT_FALSE(validate(ps).ok);
  ps = find_param_set("toy-p3-m91");
  ps.m = 93;  // 3 | 93
  EXPECT_FALSE(validate(ps).ok);
  ps.p = 4;
  EXPECT_FALSE(validate(ps).ok);
  EXPECT_THROW(param_set_from_json(nlohmann::json{{"name", "x"}}), Error);
  EXPECT_THROW(find_param_set("no-such-set"), Error);
  EXPECT_THROW(parse_circuit("trivariate"), Error);
}

TEST(ParamSets, JsonRoundTrip) {
  for (const auto& ps : builtin_param_sets()) EXPECT_EQ(to_json(param_set_from_json(to_json(ps))), to_json(ps));
}

TEST(ParamSets, RegisteredSetsShadowBuiltins) {
  ParamSet ps = find_param_set("toy-p3-m91");
  ps.levels = 7;
  ps.name = "toy-p3-m91-custom";
  register_param_sets({ps});
  EXPECT_EQ(find_param_set("toy-p3-m91-custom").levels, 7u);
}

TEST(ParamSets, MemoryLimitRefusesLargeSets) {
  RunOptions run;
  run.memory_limit_mb = 1024;
  ASSERT_GT(estimated_key_bytes(find_param_set("p1-B")) / (1024.0 * 1024.0), run.memory_limit_mb);
  try {
    Session::open(find_param_set("p1-B"), run);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::capacity_exceeded);
  }
}

TEST(Report, WallStats) {
  const auto w = wall_stats({4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(w.mean_ms, 2.5);
  EXPECT_DOUBLE_EQ(w.median_ms, 2.5);
  EXPECT_NEAR(w.stddev_ms, 1.2909944, 1e-6);
  EXPECT_DOUBLE_EQ(wall_stats({5}).median_ms, 5);
}

TEST(Report, StableFieldsDropTimings) {
  Report r;
  r.wall = wall_stats({1, 2});
  r.extra = {{"helper_ms", 3.0}, {"bits", 8}};
  const auto j = stable_fields(to_json(r));
  EXPECT_FALSE(j.contains("wall_clock"));
  EXPECT_FALSE(j.contains("timing_breakdown"));
  EXPECT_FALSE(j["extra"].contains("helper_ms"));
  EXPECT_EQ(j["extra"]["bits"], 8);
  EXPECT_EQ(j["status"], "failed");
}

TEST(Bench, DeterministicRunsAgree) {
  BenchOptions opt;
  opt.reps = 2;
  opt.pairs = 2;
  RunOptions run;
  run.seed = 11;
  run.deterministic = true;
  const auto a = to_json(bench_compare(opt, run));
  const auto b = to_json(bench_compare(opt, run));
  EXPECT_EQ(a["status"], "verified");
  EXPECT_EQ(stable_fields(a), stable_fields(b));
  EXPECT_EQ(a["extra"]["plan_builds"], a["extra"]["plan_keys"]);
  run.workers = 2;
  const auto c = to_json(bench_compare(opt, run));
  EXPECT_EQ(c["verification"], a["verification"]);
  EXPECT_EQ(c["op_counts"], a["op_counts"]);
}

TEST(Selftest, PassesAndDetectsFaults) {
  EXPECT_TRUE(all_passed(run_selftest({})));
  SelftestOptions bad;
  bad.inject_plan_fault = true;
  const auto suites = run_selftest(bad);
  EXPECT_FALSE(all_passed(suites));
  for (const auto& s : suites) EXPECT_EQ(s.name == "transform" ? 0u : s.failed, 0u) << s.name;
}

}  // namespace
}  // namespace ufhe::app
