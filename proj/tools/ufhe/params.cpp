#include "params.hpp"

#include <bit>
#include <cmath>
#include <deque>
#include <fstream>

#include "ufhe/arith.hpp"
#include "ufhe/error.hpp"
#include "ufhe/plainspace.hpp"

namespace ufhe::app {

namespace {

using bgv::Circuit;

ParamSet derived(std::string name, u64 p, u64 m, Circuit c, std::size_t d, std::size_t l, std::size_t levels,
                 std::string note) {
  ParamSet ps;
  ps.name = std::move(name);
  ps.p = p;
  ps.m = m;
  ps.circuit = c;
  ps.d = d;
  ps.l = l;
  ps.levels = levels;
  ps.source = Source::derived;
  ps.note = std::move(note);
  return ps;
}

ParamSet paper(std::string name, u64 p, u64 m, Circuit c, std::size_t td, std::size_t tl, int log_q, int lambda,
               std::size_t ints) {
  ParamSet ps;
  ps.name = std::move(name);
  ps.p = p;
  ps.m = m;
  ps.circuit = c;
  ps.source = Source::paper;
  ps.table_d = td;
  ps.table_l = tl;
  ps.table_log_q = log_q;
  ps.lambda = lambda;
  ps.table_ints = ints;
  ps.levels = static_cast<std::size_t>((log_q + ps.prime_bits - 1) / ps.prime_bits) - 1;
  const u64 ord = arith::multiplicative_order(p % m, m);
  ps.d = ord;
  ps.l = arith::euler_phi(m) / ord;
  return ps;
}

std::vector<ParamSet> make_builtins() {
  std::vector<ParamSet> v;
  v.push_back(derived("toy-p3-m91", 3, 91, Circuit::bivariate, 6, 12, 5, "homomorphism checks and default bench"));
  v.push_back(derived("digit-p3", 3, 91, Circuit::bivariate, 6, 12, 6, "digit truth tables"));
  v.push_back(derived("digit-p5", 5, 31, Circuit::bivariate, 3, 10, 8, "digit truth tables"));
  v.push_back(derived("digit-p7", 7, 171, Circuit::bivariate, 3, 36, 10, "digit truth tables"));
  v.push_back(derived("digit-p11", 11, 133, Circuit::bivariate, 3, 36, 14, "digit truth tables"));
  v.push_back(derived("digit-p13", 13, 183, Circuit::bivariate, 3, 40, 16, "digit truth tables"));
  v.push_back(derived("cmp-p3-m121", 3, 121, Circuit::bivariate, 5, 22, 10, "6-bit and 32-bit comparison"));
  v.push_back(derived("min-p3-m121", 3, 121, Circuit::bivariate, 5, 22, 36, "min of 16 16-bit integers"));
  v.push_back(derived("sort-p17-m307", 17, 307, Circuit::univariate, 3, 102, 16, "sort of 16 8-bit integers"));
  v.push_back(derived("query-p3-m757", 3, 757, Circuit::bivariate, 9, 84, 14, "private query"));
  // Table 3 rows: (p m) per pair, circuit, (d l), log Q, lambda, integers per ciphertext.
  struct Row {
    const char* name;
    u64 p, m;
    std::size_t bd, bl;
    int bq, blam;
    std::size_t bints;
    std::size_t ud, ul;
    int uq, ulam;
    std::size_t uints;
  };
  const Row rows[] = {
      {"p1", 3, 34511, 6, 7, 324, 298, 290, 16, 4, 472, 189, 507},
      {"p2", 5, 19531, 7, 4, 324, 155, 697, 7, 6, 354, 141, 465},
      {"p3", 7, 20197, 6, 4, 354, 137, 531, 8, 4, 406, 110, 531},
      {"p4", 11, 15797, 5, 4, 342, 162, 359, 5, 5, 378, 145, 287},
      {"p5", 13, 30941, 5, 4, 354, 338, 1547, 4, 6, 378, 313, 1031},
      {"p6", 17, 41761, 4, 4, 413, 402, 1305, 7, 3, 472, 344, 1740},
      {"p7", 19, 29989, 4, 4, 378, 302, 833, 5, 4, 385, 296, 833},
      {"p8", 23, 37745, 5, 3, 413, 275, 838, 9, 2, 456, 245, 1258},
      {"p9", 29, 18157, 5, 3, 360, 175, 990, 6, 3, 413, 150, 990},
      {"p10", 31, 52053, 5, 3, 512, 252, 2313, 4, 4, 512, 252, 1735},
  };
  for (const auto& r : rows) {
    v.push_back(paper(std::string(r.name) + "-B", r.p, r.m, Circuit::bivariate, r.bd, r.bl, r.bq, r.blam, r.bints));
    v.push_back(paper(std::string(r.name) + "-U", r.p, r.m, Circuit::univariate, r.ud, r.ul, r.uq, r.ulam, r.uints));
  }
  return v;
}

}  // namespace

std::string_view source_name(Source s) noexcept { return s == Source::paper ? "paper" : "derived"; }

std::string_view circuit_name(bgv::Circuit c) noexcept {
  return c == bgv::Circuit::bivariate ? "bivariate" : "univariate";
}

bgv::Circuit parse_circuit(const std::string& s) {
  if (s == "bivariate" || s == "B") return bgv::Circuit::bivariate;
  if (s == "univariate" || s == "U") return bgv::Circuit::univariate;
  raise(Errc::config, "unknown circuit '" + s + "' (expected bivariate or univariate)");
}

const std::vector<ParamSet>& builtin_param_sets() {
  static const std::vector<ParamSet> sets = make_builtins();
  return sets;
}

const ParamSet* find_param_set(const std::vector<ParamSet>& sets, const std::string& name) {
  for (const auto& ps : sets)
    if (ps.name == name) return &ps;
  return nullptr;
}

namespace {

std::deque<ParamSet>& extra_sets() {
  static std::deque<ParamSet> sets;
  return sets;
}

}  // namespace

void register_param_sets(const std::vector<ParamSet>& sets) {
  for (const auto& ps : sets) extra_sets().push_front(ps);
}

const ParamSet& find_param_set(const std::string& name) {
  for (const auto& ps : extra_sets())
    if (ps.name == name) return ps;
  if (const auto* ps = find_param_set(builtin_param_sets(), name)) return *ps;
  raise(Errc::config, "unknown parameter set '" + name + "'");
}

nlohmann::json to_json(const ParamSet& ps) {
  nlohmann::json j{{"name", ps.name},
                   {"p", ps.p},
                   {"m", ps.m},
                   {"circuit", circuit_name(ps.circuit)},
                   {"d", ps.d},
                   {"l", ps.l},
                   {"prime_bits", ps.prime_bits},
                   {"levels", ps.levels},
                   {"lambda", ps.lambda},
                   {"source", source_name(ps.source)}};
  if (ps.source == Source::paper) {
    j["table_d"] = ps.table_d;
    j["table_l"] = ps.table_l;
    j["table_log_q"] = ps.table_log_q;
    j["table_ints"] = ps.table_ints;
  }
  if (!ps.note.empty()) j["note"] = ps.note;
  return j;
}

ParamSet param_set_from_json(const nlohmann::json& j) {
  try {
    ParamSet ps;
    ps.name = j.at("name").get<std::string>();
    ps.p = j.at("p").get<u64>();
    ps.m = j.at("m").get<u64>();
    ps.circuit = parse_circuit(j.value("circuit", std::string("bivariate")));
    ps.d = j.value("d", std::size_t{0});
    ps.l = j.value("l", std::size_t{0});
    ps.prime_bits = j.value("prime_bits", 59);
    ps.levels = j.at("levels").get<std::size_t>();
    ps.lambda = j.value("lambda", 0);
    const auto src = j.value("source", std::string("derived"));
    if (src != "paper" && src != "derived") raise(Errc::config, "source must be paper or derived");
    ps.source = src == "paper" ? Source::paper : Source::derived;
    ps.table_d = j.value("table_d", std::size_t{0});
    ps.table_l = j.value("table_l", std::size_t{0});
    ps.table_log_q = j.value("table_log_q", 0);
    ps.table_ints = j.value("table_ints", std::size_t{0});
    ps.note = j.value("note", std::string());
    return ps;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::config, std::string("bad parameter set: ") + e.what());
  }
}

std::vector<ParamSet> param_sets_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = j.is_object() ? j.at("params") : j;
  if (!arr.is_array()) raise(Errc::config, "expected an array of parameter sets");
  std::vector<ParamSet> out;
  for (const auto& e : arr) out.push_back(param_set_from_json(e));
  return out;
}

std::vector<ParamSet> load_param_sets(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::config, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::config, path + ": " + e.what());
  }
  return param_sets_from_json(j);
}

Validation validate(const ParamSet& ps) {
  Validation v;
  const auto fail = [&](std::string msg) {
    v.ok = false;
    v.problems.push_back(std::move(msg));
  };
  if (ps.p < 3 || !arith::is_prime(ps.p)) fail("p must be an odd prime");
  if (ps.m < 3 || ps.m % 2 == 0) fail("m must be odd and at least 3");
  if (ps.prime_bits < 20 || ps.prime_bits > 62) fail("prime_bits must lie in [20, 62]");
  if (ps.levels == 0) fail("levels must be positive");
  if (!v.ok) return v;
  if (arith::gcd(ps.p, ps.m) != 1) {
    fail("p divides m");
    return v;
  }
  const u64 ord = arith::multiplicative_order(ps.p % ps.m, ps.m);
  v.ring_d = ord;
  v.ring_l = arith::euler_phi(ps.m) / ord;
  if (ps.source == Source::derived) {
    const auto alg = plain::SlotAlgebra::build(ps.p, ps.m);
    v.ring_d = alg.d();
    v.ring_l = alg.l();
  }
  if (ps.d != v.ring_d || ps.l != v.ring_l)
    fail("(d, l) = (" + std::to_string(ps.d) + ", " + std::to_string(ps.l) + ") but the ring gives (" +
         std::to_string(v.ring_d) + ", " + std::to_string(v.ring_l) + ")");
  return v;
}

bgv::ParamsSpec to_spec(const ParamSet& ps) {
  bgv::ParamsSpec s;
  s.p = ps.p;
  s.m = ps.m;
  s.levels = ps.levels;
  s.prime_bits = ps.prime_bits;
  s.circuit = ps.circuit;
  return s;
}

double estimated_key_bytes(const ParamSet& ps) {
  const double n = static_cast<double>(arith::euler_phi(ps.m));
  const double primes = static_cast<double>(ps.levels + 1);
  const double digits = std::ceil(static_cast<double>(ps.prime_bits) / 16.0);
  const double per_key = primes * digits * 2.0 * primes * n * 8.0;
  const double galois = ps.l > 1 ? 2.0 * std::bit_width(ps.l - 1) : 0.0;
  return per_key * (1.0 + galois);
}

}  // namespace ufhe::app
