#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "apps.hpp"
#include "params.hpp"
#include "report.hpp"
#include "selftest.hpp"
#include "ufhe/error.hpp"

namespace {

using nlohmann::json;
using namespace ufhe;
using namespace ufhe::app;

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::config, "cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    raise(Errc::config, "config file '" + path + "': " + e.what());
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.is_object() && j.contains(key)) out = j.at(key).get<T>();
}

bool parse_switch(const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  raise(Errc::config, "expected on or off, got '" + s + "'");
}

int emit(const Report& r, const std::string& json_path) {
  const json j = to_json(r);
  if (!json_path.empty()) write_json(json_path, j);
  std::cout << j.dump(2) << "\n";
  if (!r.verified) std::cerr << "verification failed: " << r.failures << " of " << r.checks << " checks\n";
  return r.verified ? 0 : kExitFailed;
}

int list_params(bool as_json) {
  const auto& sets = builtin_param_sets();
  if (as_json) {
    json arr = json::array();
    for (const auto& ps : sets) arr.push_back(to_json(ps));
    std::cout << arr.dump(2) << "\n";
    return 0;
  }
  std::cout << std::left << std::setw(16) << "name" << std::setw(5) << "p" << std::setw(8) << "m" << std::setw(12)
            << "circuit" << std::setw(5) << "d" << std::setw(6) << "l" << std::setw(8) << "levels" << "source\n";
  for (const auto& ps : sets)
    std::cout << std::setw(16) << ps.name << std::setw(5) << ps.p << std::setw(8) << ps.m << std::setw(12)
              << circuit_name(ps.circuit) << std::setw(5) << ps.d << std::setw(6) << ps.l << std::setw(8)
              << ps.levels << source_name(ps.source) << "\n";
  return 0;
}

int validate_params(const std::string& path) {
  const auto sets = load_param_sets(path);
  bool ok = true;
  for (const auto& ps : sets) {
    const auto v = validate(ps);
    std::cout << (v.ok ? "OK   " : "FAIL ") << ps.name << " d=" << v.ring_d << " l=" << v.ring_l << "\n";
    for (const auto& problem : v.problems) std::cout << "     " << problem << "\n";
    ok &= v.ok;
  }
  std::cout << sets.size() << " sets, " << (ok ? "all valid" : "invalid sets found") << "\n";
  return ok ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Word-wise comparison over BGV: self-tests, parameter sets, benchmarks and applications"};
  cli.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool deterministic = false;
  double memory_limit_mb = 2048;
  cli.add_option("--config", config_path, "JSON config with params, bench, apps, seed, workers, deterministic");
  auto* seed_opt = cli.add_option("--seed", seed, "Seed for keys, encryption and inputs");
  auto* workers_opt = cli.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
  auto* det_opt = cli.add_flag("--deterministic", deterministic, "Serialize scheduling for reproducible reports");
  cli.add_option("--memory-limit-mb", memory_limit_mb, "Refuse parameter sets whose keys exceed this size");

  auto* selftest = cli.add_subcommand("selftest", "Run the invariant suites at toy scale");
  bool inject_fault = false;
  std::string selftest_json;
  selftest->add_flag("--inject-fault", inject_fault, "Corrupt a transform plan table before testing");
  selftest->add_option("--json", selftest_json, "Write per-suite results to this path");

  auto* params = cli.add_subcommand("params", "Parameter sets");
  params->require_subcommand(1);
  auto* plist = params->add_subcommand("list", "List builtin parameter sets");
  bool list_json = false;
  plist->add_flag("--json", list_json, "Print as JSON");
  auto* pvalidate = params->add_subcommand("validate", "Validate parameter sets from a JSON file");
  std::string validate_path;
  pvalidate->add_option("file", validate_path, "JSON file")->required();

  auto* bench = cli.add_subcommand("bench", "Microbenchmarks");
  bench->require_subcommand(1);
  auto* bcompare = bench->add_subcommand("compare", "End-to-end encrypted integer comparison");
  BenchOptions bopt;
  std::string bench_circuit, bench_json;
  auto* bparam = bcompare->add_option("--param", bopt.param, "Parameter set name");
  auto* bcirc = bcompare->add_option("--circuit", bench_circuit, "bivariate or univariate");
  auto* breps = bcompare->add_option("--reps", bopt.reps, "Repetitions")->check(CLI::PositiveNumber);
  auto* bbits = bcompare->add_option("--bits", bopt.bits, "Integer width")->check(CLI::Range(1, 64));
  auto* bpairs = bcompare->add_option("--pairs", bopt.pairs, "Ciphertext pairs per repetition");
  bcompare->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
  bcompare->add_option("--json", bench_json, "Write the report to this path");

  auto* app = cli.add_subcommand("app", "Applications verified against plaintext oracles");
  std::string app_name, app_json, query_name_s = "add", compaction_s = "on", nonblocking_s = "on";
  AppOptions aopt;
  app->add_option("name", app_name, "sort, min or private-query")
      ->required()
      ->check(CLI::IsMember({"sort", "min", "private-query"}));
  auto* an = app->add_option("--n", aopt.n, "Number of integers")->check(CLI::PositiveNumber);
  auto* abits = app->add_option("--bits", aopt.bits, "Integer width")->check(CLI::Range(1, 64));
  auto* aquery = app->add_option("--query", query_name_s, "add, mult or power")
                     ->check(CLI::IsMember({"add", "mult", "power"}));
  auto* aop2 = app->add_option("--op2", aopt.op2, "Second operand of the query");
  auto* acomp = app->add_option("--compaction", compaction_s, "on or off");
  auto* anb = app->add_option("--nonblocking", nonblocking_s, "on or off");
  auto* aparam = app->add_option("--param", aopt.param, "Parameter set name");
  auto* areps = app->add_option("--reps", aopt.reps, "Repetitions")->check(CLI::PositiveNumber);
  app->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
  app->add_option("--json", app_json, "Write the report to this path");

  CLI11_PARSE(cli, argc, argv);

  try {
    json cfg = json::object();
    if (!config_path.empty()) cfg = load_config(config_path);
    RunOptions run;
    take(cfg, "seed", run.seed);
    take(cfg, "workers", run.workers);
    take(cfg, "deterministic", run.deterministic);
    if (const char* env = std::getenv("UFHE_SEED"); env != nullptr && *env != '\0') {
      try {
        run.seed = std::stoull(env);
      } catch (const std::exception&) {
        raise(Errc::config, std::string("UFHE_SEED is not an integer: ") + env);
      }
    }
    if (*seed_opt) run.seed = seed;
    const bool workers_given = *workers_opt || bcompare->count("--workers") > 0 || app->count("--workers") > 0;
    if (workers_given) run.workers = workers;
    if (*det_opt) run.deterministic = deterministic;
    run.memory_limit_mb = memory_limit_mb;
    if (cfg.contains("params")) {
      const auto& p = cfg.at("params");
      register_param_sets(p.is_string() ? load_param_sets(p.get<std::string>()) : param_sets_from_json(p));
    }

    if (*selftest) {
      SelftestOptions sopt;
      sopt.inject_plan_fault = inject_fault;
      sopt.seed = run.seed;
      const auto suites = run_selftest(sopt);
      for (const auto& s : suites)
        std::cout << std::left << std::setw(10) << s.name << " passed " << s.passed << " failed " << s.failed << "\n";
      const bool ok = all_passed(suites);
      std::cout << (ok ? "selftest passed" : "selftest FAILED") << "\n";
      if (!selftest_json.empty()) write_json(selftest_json, {{"suites", to_json(suites)}, {"passed", ok}});
      return ok ? 0 : kExitFailed;
    }

    if (*plist) return list_params(list_json);
    if (*pvalidate) return validate_params(validate_path);

    if (*bcompare) {
      const json b = cfg.value("bench", json::object());
      if (!*bparam) take(b, "param", bopt.param);
      if (!*breps) take(b, "reps", bopt.reps);
      if (!*bbits) take(b, "bits", bopt.bits);
      if (!*bpairs) take(b, "pairs", bopt.pairs);
      if (!*bcirc) take(b, "circuit", bench_circuit);
      if (!bench_circuit.empty()) bopt.circuit = parse_circuit(bench_circuit);
      return emit(bench_compare(bopt, run), bench_json);
    }

    if (*app) {
      const json apps = cfg.value("apps", json::object());
      const json a = apps.value(app_name, json::object());
      if (!*an) take(a, "n", aopt.n);
      if (!*abits) take(a, "bits", aopt.bits);
      if (!*aop2) take(a, "op2", aopt.op2);
      if (!*aparam) take(a, "param", aopt.param);
      if (!*areps) take(a, "reps", aopt.reps);
      if (!*aquery) take(a, "query", query_name_s);
      if (!*acomp && a.contains("compaction")) compaction_s = a.at("compaction").get<bool>() ? "on" : "off";
      if (!*anb && a.contains("nonblocking")) nonblocking_s = a.at("nonblocking").get<bool>() ? "on" : "off";
      aopt.query = parse_query(query_name_s);
      aopt.compaction = parse_switch(compaction_s);
      aopt.nonblocking = parse_switch(nonblocking_s);
      if (app_name == "sort") return emit(app_sort(aopt, run), app_json);
      if (app_name == "min") return emit(app_min(aopt, run), app_json);
      return emit(app_private_query(aopt, run), app_json);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == Errc::out_of_levels || e.code() == Errc::noise_budget_exhausted)
      std::cerr << "hint: the circuit is deeper than the parameter set allows; raise its levels or pick a set "
                   "with more levels (see `ufhe params list`)\n";
    if (e.code() == Errc::config) std::cerr << cli.help();
    return e.code() == Errc::config ? kExitUsage : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return 0;
}
