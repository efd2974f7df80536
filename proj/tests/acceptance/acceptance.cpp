#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "apps.hpp"
#include "params.hpp"
#include "ufhe/arith.hpp"
#include "ufhe/bgv.hpp"
#include "ufhe/compare.hpp"
#include "ufhe/error.hpp"
#include "ufhe/executor.hpp"
#include "ufhe/pipeline.hpp"
#include "ufhe/ring.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/slotmgr.hpp"
#include "ufhe/transform.hpp"

namespace {

using namespace ufhe;
using Clock = std::chrono::steady_clock;

// Tolerances and limits.
constexpr double kTransformLimitS = 120;
constexpr double kHomomorphismLimitS = 300;
constexpr double kAppLimitS = 600;
constexpr double kScalingMaxRatio = 0.6;
constexpr double kOverlapMaxRatio = 0.8;
constexpr double kMinJobMs = 50;
constexpr double kMinLegMs = 100;
constexpr std::size_t kTimingRuns = 10;
constexpr int kUnattainable = 77;

struct Outcome {
  bool pass = false;
  std::string detail;
  // The failure has a documented cause outside the implementation's control.
  bool unattainable = false;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }
double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : (v[k / 2 - 1] + v[k / 2]) / 2;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<u64> random_vec(std::size_t n, u64 bound, Prng& rng) {
  std::vector<u64> v(n);
  for (auto& x : v) x = rng.uniform(bound);
  return v;
}

struct Session {
  transform::PlanCache cache;
  bgv::ContextPtr ctx;
  bgv::KeySet keys;

  explicit Session(const std::string& param, std::uint64_t seed = 1) {
    ctx = bgv::Context::create(app::to_spec(app::find_param_set(param)), cache);
    keys = bgv::keygen(ctx, seed);
  }
  bgv::Ciphertext enc(std::span<const u64> v, std::uint64_t seed) const {
    return bgv::encrypt(bgv::encode(ctx, v), keys.pk, ctx, seed);
  }
  std::vector<u64> dec(const bgv::Ciphertext& ct) const { return bgv::decrypt_slots(ct, keys.sk, ctx); }
  cmp::Evaluator evaluator(cmp::OpCounter* c = nullptr) const { return {ctx, keys.relin, keys.galois, c}; }
};

// ---- 1. Transform exactness

std::vector<u64> schoolbook_mod_phi(const std::vector<u64>& a, const std::vector<u64>& b,
                                    const std::vector<u64>& phi, const arith::Modulus& q) {
  const std::size_t n = phi.size() - 1;
  std::vector<u64> prod(2 * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) prod[i + j] = arith::add_mod(prod[i + j], arith::mul_mod(a[i], b[j], q), q);
  for (std::size_t k = 2 * n - 1; k >= n; --k) {
    const u64 c = prod[k];
    for (std::size_t i = 0; i <= n && c != 0; ++i)
      prod[k - n + i] = arith::sub_mod(prod[k - n + i], arith::mul_mod(c, phi[i], q), q);
  }
  prod.resize(n);
  return prod;
}

constexpr std::pair<u64, u64> kTransformRings[] = {{3, 91}, {5, 31}, {7, 61}, {17, 257}};

Outcome transform_exactness() {
  const auto t0 = Clock::now();
  std::size_t checks = 0, failures = 0;
  for (const auto& [p, m] : kTransformRings) {
    const auto basis = arith::gen_ntt_primes(m, transform::next_pow2(2 * m - 1), 59, 3, p);
    for (const auto& q : basis.primes()) {
      const transform::BluesteinPlan plan(m, q);
      Prng rng(q.value() ^ m);
      for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_vec(plan.n(), q.value(), rng), b = random_vec(plan.n(), q.value(), rng);
        auto ea = transform::to_eval(a, plan);
        const auto eb = transform::to_eval(b, plan);
        checks += 2;
        if (transform::from_eval(ea, plan) != a) ++failures;
        for (std::size_t i = 0; i < ea.size(); ++i) ea[i] = arith::mul_mod(ea[i], eb[i], q);
        if (transform::from_eval(ea, plan) != schoolbook_mod_phi(a, b, plan.phi_m(), q)) ++failures;
      }
    }
  }
  const double s = seconds_since(t0);
  return {failures == 0 && s < kTransformLimitS,
          fmt("%zu round-trip and product checks over 4 rings x 3 primes, %zu mismatches, %.1f s (limit %.0f s)",
              checks, failures, s, kTransformLimitS)};
}

// ---- 2. Branch-removal equivalence

Outcome filter_equivalence() {
  std::size_t checks = 0, failures = 0;
  for (const auto& [p, m] : kTransformRings) {
    const auto basis = arith::gen_ntt_primes(m, transform::next_pow2(2 * m - 1), 59, 1, p);
    const transform::BluesteinPlan plan(m, basis[0]);
    Prng rng(m);
    for (int i = 0; i < 1000; ++i) {
      const auto v = random_vec(m, basis[0].value(), rng);
      ++checks;
      if (transform::zmstar_filter(v, plan) != transform::zmstar_filter_reference(v, plan)) ++failures;
    }
  }
  return {failures == 0, fmt("%zu random inputs over 4 values of m, %zu mismatches", checks, failures)};
}

// ---- 3. Plan reuse

Outcome plan_reuse() {
  app::BenchOptions opt;
  opt.reps = 3;
  app::RunOptions run;
  const auto report = app::to_json(app::bench_compare(opt, run));
  const std::size_t builds = report["extra"]["plan_builds"], keys = report["extra"]["plan_keys"];

  transform::PlanCache cache;
  std::size_t mismatches = 0;
  for (const auto& [p, m] : kTransformRings) {
    const auto basis = arith::gen_ntt_primes(m, transform::next_pow2(2 * m - 1), 59, 2, p);
    for (const auto& q : basis.primes()) {
      const auto cached = cache.get(m, q);
      cache.get(m, q);
      const transform::BluesteinPlan fresh(m, q);
      Prng rng(q.value());
      for (int i = 0; i < 20; ++i) {
        const auto a = random_vec(fresh.n(), q.value(), rng);
        if (transform::to_eval(a, *cached) != transform::to_eval(a, fresh)) ++mismatches;
        if (transform::from_eval(a, *cached) != transform::from_eval(a, fresh)) ++mismatches;
      }
      if (cache.build_count(m, q.value()) != 1) ++mismatches;
    }
  }
  const bool ok = builds == keys && report["status"] == "verified" && mismatches == 0;
  return {ok, fmt("bench run built %zu plans for %zu (m, q) keys; cached vs fresh plans: %zu mismatches", builds, keys,
                  mismatches)};
}

// ---- 4. Layout staging

Outcome staging() {
  std::size_t checks = 0, failures = 0;
  for (const std::size_t levels : {2u, 5u, 10u}) {
    transform::PlanCache cache;
    const auto ring = std::make_shared<const ring::RingContext>(
        91, arith::gen_ntt_primes(91, 256, 59, levels + 1, 3), cache);
    Prng rng(levels);
    for (int i = 0; i < 100; ++i) {
      const auto a = ring::sample(ring::SampleKind::uniform, ring, levels + 1, rng);
      const auto b = ring::sample(ring::SampleKind::uniform, ring, levels + 1, rng);
      for (const auto op : {ring::ElementOp::add, ring::ElementOp::sub, ring::ElementOp::mul}) {
        ++checks;
        if (ring::elementwise(op, a, b) != ring::elementwise_reference(op, a, b)) ++failures;
      }
    }
  }
  return {failures == 0, fmt("%zu fused kernel calls for L in {2,5,10}, %zu mismatches", checks, failures)};
}

// ---- 5. BGV homomorphism

struct Expr {
  bgv::Ciphertext ct;
  std::vector<u64> plain;
};

Expr random_expr(int depth, const Session& s, cmp::Evaluator& ev, Prng& rng, std::size_t& mults) {
  const std::size_t l = s.ctx->l();
  const u64 p = s.ctx->p();
  if (depth == 0 || rng.uniform(4) == 0) {
    auto v = random_vec(l, p, rng);
    return {s.enc(v, rng.next()), std::move(v)};
  }
  const auto kind = rng.uniform(3);
  Expr a = random_expr(depth - 1, s, ev, rng, mults);
  if (kind == 2) {
    const auto k = static_cast<std::int64_t>(rng.uniform(2 * l)) - static_cast<std::int64_t>(l);
    std::vector<u64> out(l);
    for (std::size_t i = 0; i < l; ++i)
      out[i] = a.plain[static_cast<std::size_t>(((static_cast<std::int64_t>(i) + k) % static_cast<std::int64_t>(l) +
                                                 static_cast<std::int64_t>(l)) %
                                                static_cast<std::int64_t>(l))];
    return {ev.rotate(a.ct, k, cmp::Phase::other), std::move(out)};
  }
  Expr b = random_expr(depth - 1, s, ev, rng, mults);
  std::vector<u64> out(l);
  for (std::size_t i = 0; i < l; ++i) out[i] = kind == 0 ? (a.plain[i] + b.plain[i]) % p : a.plain[i] * b.plain[i] % p;
  if (kind == 0) return {ev.add(a.ct, b.ct, cmp::Phase::other), std::move(out)};
  ++mults;
  return {ev.mul(a.ct, b.ct, cmp::Phase::other), std::move(out)};
}

Outcome homomorphism() {
  const auto t0 = Clock::now();
  Session s("toy-p3-m91");
  auto ev = s.evaluator();
  Prng rng(5);
  std::size_t failures = 0, mults = 0;
  std::string first_error;
  for (int tree = 0; tree < 100; ++tree) {
    try {
      const Expr e = random_expr(static_cast<int>(s.ctx->levels()), s, ev, rng, mults);
      if (s.dec(e.ct) != e.plain) ++failures;
    } catch (const std::exception& ex) {
      ++failures;
      if (first_error.empty()) first_error = ex.what();
    }
  }
  const double sec = seconds_since(t0);
  return {failures == 0 && sec < kHomomorphismLimitS,
          fmt("100 random add/mul/rotate trees of depth <= %zu (%zu products), %zu failures%s%s, %.1f s", s.ctx->levels(),
              mults, failures, first_error.empty() ? "" : ": ", first_error.c_str(), sec)};
}

// ---- 6 and 8. Digit circuits and multiplication budgets

struct DigitRun {
  std::size_t checks = 0, failures = 0;
};

constexpr std::pair<u64, const char*> kDigitSets[] = {
    {3, "digit-p3"}, {5, "digit-p5"}, {7, "digit-p7"}, {11, "digit-p11"}, {13, "digit-p13"}};

// Exhaustive EQ and LT over the circuit's alphabet, batched into slots.
DigitRun digit_tables(const Session& s, cmp::CircuitKind kind, cmp::OpCounter& counter) {
  const u64 p = s.ctx->p();
  const auto circuit = cmp::DigitCircuit::build(p, kind);
  const u64 a = kind == cmp::CircuitKind::bivariate ? p : (p + 1) / 2;
  std::vector<std::pair<u64, u64>> pairs;
  for (u64 x = 0; x < a; ++x)
    for (u64 y = 0; y < a; ++y) pairs.emplace_back(x, y);
  const std::size_t l = s.ctx->l();
  DigitRun r;
  for (std::size_t off = 0; off < pairs.size(); off += l) {
    const std::size_t cnt = std::min(l, pairs.size() - off);
    std::vector<u64> xs(cnt), ys(cnt);
    for (std::size_t i = 0; i < cnt; ++i) xs[i] = pairs[off + i].first, ys[i] = pairs[off + i].second;
    const auto cx = s.enc(xs, off * 2 + 1), cy = s.enc(ys, off * 2 + 2);
    auto ev = s.evaluator(&counter);
    const auto both = cmp::lt_eq_digit(cx, cy, circuit, ev);
    const auto lt_only = cmp::lt_digit(cx, cy, circuit, ev);
    const auto eq_only = cmp::eq_digit(cx, cy, ev);
    const auto lt = s.dec(both.lt), eq = s.dec(both.eq), lt2 = s.dec(lt_only), eq2 = s.dec(eq_only);
    for (std::size_t i = 0; i < cnt; ++i) {
      const u64 want_lt = xs[i] < ys[i] ? 1 : 0, want_eq = xs[i] == ys[i] ? 1 : 0;
      r.checks += 4;
      r.failures += (lt[i] != want_lt) + (eq[i] != want_eq) + (lt2[i] != want_lt) + (eq2[i] != want_eq);
    }
  }
  return r;
}

Outcome digit_circuits() {
  std::size_t checks = 0, failures = 0;
  std::string per_p;
  for (const auto& [p, name] : kDigitSets) {
    Session s(name);
    cmp::OpCounter counter;
    for (const auto kind : {cmp::CircuitKind::bivariate, cmp::CircuitKind::univariate}) {
      const auto r = digit_tables(s, kind, counter);
      checks += r.checks;
      failures += r.failures;
    }
    per_p += fmt(" p=%llu", static_cast<unsigned long long>(p));
  }
  return {failures == 0, fmt("EQ, bivariate LT and univariate LT exhaustive for%s: %zu checks, %zu mismatches",
                             per_p.c_str(), checks, failures)};
}

unsigned ceil_log2(u64 x) { return x <= 1 ? 0 : static_cast<unsigned>(std::bit_width(x - 1)); }

Outcome mult_budgets() {
  std::vector<std::string> violations;
  bool all_unattainable = true;
  std::string table;
  std::size_t jobs = 0;
  const auto check = [&](u64 p, cmp::CircuitKind kind, const cmp::OpCounter& c) {
    const auto circuit = cmp::DigitCircuit::build(p, kind);
    const u64 used = c.max_digit_job(kind), budget = circuit.nonscalar_mult_budget(), ref = circuit.reference_cost();
    jobs += c.digit_jobs(kind);
    const bool biv = kind == cmp::CircuitKind::bivariate;
    table += fmt(" %s%llu=%llu/%llu", biv ? "B" : "U", static_cast<unsigned long long>(p),
                 static_cast<unsigned long long>(used), static_cast<unsigned long long>(budget));
    if (used <= budget && used <= ref) return;
    // Products of degree-1 inputs reach degree 2^k after k multiplications, so a circuit of total
    // degree D needs at least ceil(log2 D) of them.
    std::size_t degree = 0;
    if (biv) {
      const auto& c2 = circuit.lt_bivar_coeffs();
      for (std::size_t i = 0; i < c2.size(); ++i)
        for (std::size_t j = 0; j < c2[i].size(); ++j)
          if (c2[i][j] != 0) degree = std::max(degree, i + j);
    } else {
      degree = circuit.lt_univar_coeffs().size() - 1;
    }
    const unsigned lower = ceil_log2(degree);
    const bool impossible = used <= ref && budget < lower;
    all_unattainable &= impossible;
    violations.push_back(fmt("%s p=%llu used %llu > budget %llu%s", biv ? "bivariate" : "univariate",
                             static_cast<unsigned long long>(p), static_cast<unsigned long long>(used),
                             static_cast<unsigned long long>(budget),
                             impossible ? fmt(" (LT has degree %zu, so any circuit needs >= %u)", degree, lower).c_str()
                                        : ""));
  };
  for (const auto& [p, name] : kDigitSets) {
    Session s(name);
    cmp::OpCounter counter;
    for (const auto kind : {cmp::CircuitKind::bivariate, cmp::CircuitKind::univariate}) {
      digit_tables(s, kind, counter);
      check(p, kind, counter);
    }
  }
  // Integer comparisons record their digit jobs through the same counter.
  {
    Session s("sort-p17-m307");
    cmp::OpCounter counter;
    const auto setup = cmp::CompareSetup::make(s.ctx, cmp::CircuitKind::univariate, 8);
    auto ev = s.evaluator(&counter);
    Prng rng(8);
    cmp::compare_ints(s.enc(cmp::pack_ints(random_vec(setup.layout.blocks, 256, rng), setup.layout), 1),
                      s.enc(cmp::pack_ints(random_vec(setup.layout.blocks, 256, rng), setup.layout), 2), setup, ev);
    check(17, cmp::CircuitKind::univariate, counter);
  }
  std::string detail = fmt("%zu digit jobs, max used/budget:%s", jobs, table.c_str());
  for (const auto& v : violations) detail += "; " + v;
  return {violations.empty(), detail, !violations.empty() && all_unattainable};
}

// ---- 7. Integer comparison

Outcome integer_comparison() {
  std::size_t checks = 0, failures = 0;
  exec::SequentialExecutor ex;
  const auto run = [&](const Session& s, const cmp::CompareSetup& setup, const std::vector<u64>& a,
                       const std::vector<u64>& b) {
    const std::size_t B = setup.layout.blocks;
    std::vector<bgv::Ciphertext> ca, cb;
    std::vector<std::size_t> offs;
    for (std::size_t off = 0; off < a.size(); off += B) {
      const std::size_t cnt = std::min(B, a.size() - off);
      ca.push_back(s.enc(cmp::pack_ints(std::span(a).subspan(off, cnt), setup.layout), 2 * off + 1));
      cb.push_back(s.enc(cmp::pack_ints(std::span(b).subspan(off, cnt), setup.layout), 2 * off + 2));
      offs.push_back(off);
    }
    auto ev = s.evaluator();
    const auto res = cmp::compare_ints(ca, cb, setup, ev, ex);
    for (std::size_t k = 0; k < res.size(); ++k) {
      const std::size_t off = offs[k], cnt = std::min(B, a.size() - off);
      const auto lt = cmp::head_values(s.dec(res[k].lt), setup.layout, cnt);
      const auto eq = cmp::head_values(s.dec(res[k].eq), setup.layout, cnt);
      for (std::size_t i = 0; i < cnt; ++i) {
        checks += 2;
        failures += (lt[i] != (a[off + i] < b[off + i] ? 1u : 0u)) + (eq[i] != (a[off + i] == b[off + i] ? 1u : 0u));
      }
    }
  };
  Session s("cmp-p3-m121");
  {
    const auto setup = cmp::CompareSetup::make(s.ctx, cmp::CircuitKind::bivariate, 6);
    std::vector<u64> a, b;
    for (u64 x = 0; x < 64; ++x)
      for (u64 y = 0; y < 64; ++y) a.push_back(x), b.push_back(y);
    run(s, setup, a, b);
  }
  const std::size_t six_bit = checks / 2;
  {
    const auto setup = cmp::CompareSetup::make(s.ctx, cmp::CircuitKind::bivariate, 32);
    Prng rng(7);
    std::vector<u64> a = random_vec(1000, u64{1} << 32, rng), b = random_vec(1000, u64{1} << 32, rng);
    for (std::size_t i = 0; i < 1000; i += 10) b[i] = a[i];
    for (std::size_t i = 5; i < 1000; i += 10) b[i] = a[i] ^ 1;  // differ only in the lowest bit
    run(s, setup, a, b);
  }
  return {failures == 0, fmt("%zu exhaustive 6-bit pairs and 1000 random 32-bit pairs (LT and EQ), %zu mismatches",
                             six_bit, failures)};
}

// ---- 9. Applications

Outcome applications() {
  app::RunOptions run;
  std::vector<std::string> parts;
  bool ok = true;
  const auto one = [&](const std::string& label, const std::function<app::Report()>& f) {
    const auto t0 = Clock::now();
    try {
      const auto r = f();
      const double s = seconds_since(t0);
      const bool pass = r.verified && s < kAppLimitS;
      ok &= pass;
      parts.push_back(fmt("%s %s %.1fs", label.c_str(), r.verified ? "ok" : "WRONG", s));
    } catch (const std::exception& e) {
      ok = false;
      parts.push_back(label + " error: " + e.what());
    }
  };
  app::AppOptions sort;
  sort.n = 16;
  sort.bits = 8;
  one("sort(16x8b)", [&] { return app::app_sort(sort, run); });
  app::AppOptions mn;
  mn.n = 16;
  mn.bits = 16;
  one("min(16x16b)", [&] { return app::app_min(mn, run); });
  for (const auto q : {pipe::Query::add, pipe::Query::mult, pipe::Query::power})
    for (const u64 op2 : {64ULL, 1024ULL}) {
      app::AppOptions o;
      o.query = q;
      o.op2 = op2;
      one(fmt("query(%s,%llu)", std::string(app::query_name(q)).c_str(), static_cast<unsigned long long>(op2)),
          [&] { return app::app_private_query(o, run); });
    }
  std::string detail;
  for (const auto& p : parts) detail += (detail.empty() ? "" : ", ") + p;
  return {ok, detail};
}

// ---- 10. Slot compaction

Outcome compaction() {
  std::size_t failures = 0;
  std::string notes;
  // Four ciphertexts, each using every fourth slot.
  {
    Session s("toy-p3-m91");
    const std::size_t l = s.ctx->l();
    std::vector<bgv::Ciphertext> cts;
    std::vector<u64> values;
    Prng rng(10);
    for (std::size_t c = 0; c < 4; ++c) {
      std::vector<u64> v(l, 0);
      for (std::size_t i = 0; i < l; i += 4) values.push_back(v[i] = rng.uniform(3));
      cts.push_back(bgv::encrypt(bgv::encode(s.ctx, v, slots::strided(l, 4, 0)), s.keys.pk, s.ctx, 100 + c));
    }
    slots::CompactionReport report;
    const auto out = slots::compact(cts, s.ctx, s.keys.galois, report);
    auto got = out.size() == 1 ? s.dec(out[0]) : std::vector<u64>{};
    auto want = values;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (out.size() != 1 || got != want) ++failures;
    notes = fmt("4 ciphertexts at %.0f%% -> %zu at %.0f%%", 100 * report.utilization_before, out.size(),
                100 * report.utilization_after);
  }
  // Random masks: plan-level minimum and multiset preservation, encrypted for a subset.
  std::size_t trials = 0, encrypted = 0;
  {
    Session s("cmp-p3-m121");
    const std::size_t l = s.ctx->l();
    Prng rng(11);
    for (int t = 0; t < 200; ++t) {
      const std::size_t count = 2 + rng.uniform(5);
      std::vector<slots::SlotUsage> us;
      std::vector<std::vector<u64>> vals;
      std::size_t useful = 0;
      for (std::size_t c = 0; c < count; ++c) {
        slots::SlotUsage u{std::vector<std::uint8_t>(l, 0), slots::OpTag::declare};
        std::vector<u64> v(l, 0);
        const u64 density = 2 + rng.uniform(4);
        for (std::size_t i = 0; i < l; ++i)
          if (rng.uniform(density) == 0) u.mask[i] = 1, v[i] = rng.uniform(3);
        useful += u.used();
        us.push_back(u);
        vals.push_back(v);
      }
      const auto plan = slots::plan_compaction(us);
      ++trials;
      std::vector<u64> src, dst;
      for (const auto& m : plan.moves) src.push_back(vals[m.src_ct][m.src_slot]);
      if (plan.dst_count != std::min(count, (useful + l - 1) / l) || plan.moves.size() != useful) ++failures;
      if (t % 20 != 0) continue;
      std::vector<bgv::Ciphertext> cts;
      for (std::size_t c = 0; c < count; ++c)
        cts.push_back(bgv::encrypt(bgv::encode(s.ctx, vals[c], us[c]), s.keys.pk, s.ctx, 1000 * t + c));
      const auto out = slots::apply_compaction(cts, plan, s.ctx, s.keys.galois);
      std::vector<std::vector<u64>> dec;
      for (const auto& ct : out) dec.push_back(s.dec(ct));
      for (const auto& m : plan.moves) dst.push_back(dec[m.dst_ct][m.dst_slot]);
      if (dst != src) ++failures;
      std::sort(src.begin(), src.end());
      std::sort(dst.begin(), dst.end());
      if (dst != src) ++failures;
      ++encrypted;
    }
  }
  return {failures == 0, notes + fmt("; %zu random mask sets (%zu applied under encryption), %zu failures", trials,
                                     encrypted, failures)};
}

// ---- 11. Parallel scaling

Outcome parallel_scaling() {
  Session s("digit-p13");
  const auto circuit = cmp::DigitCircuit::build(13, cmp::CircuitKind::bivariate);
  constexpr std::size_t kJobs = 8;
  Prng rng(12);
  std::vector<bgv::Ciphertext> xs, ys;
  for (std::size_t i = 0; i < kJobs; ++i) {
    xs.push_back(s.enc(random_vec(s.ctx->l(), 13, rng), 2 * i + 1));
    ys.push_back(s.enc(random_vec(s.ctx->l(), 13, rng), 2 * i + 2));
  }
  auto ev = s.evaluator();
  std::vector<double> job_ms;
  const auto batch = [&](exec::Executor& ex) {
    const auto t0 = Clock::now();
    ex.run(kJobs, [&](std::size_t i) {
      auto job = ev.fork();
      const auto jt = Clock::now();
      cmp::lt_eq_digit(xs[i], ys[i], circuit, job);
      if (ex.workers() == 1) job_ms.push_back(ms_since(jt));
    });
    return ms_since(t0);
  };
  exec::SequentialExecutor one;
  exec::PoolExecutor eight(8);
  std::vector<double> t1, t8;
  for (std::size_t r = 0; r < kTimingRuns; ++r) {
    t1.push_back(batch(one));
    t8.push_back(batch(eight));
  }
  const double m1 = median(t1), m8 = median(t8), job = median(job_ms), ratio = m8 / m1;
  const unsigned cores = std::thread::hardware_concurrency();
  const bool ok = job >= kMinJobMs && ratio <= kScalingMaxRatio;
  return {ok,
          fmt("%zu digit jobs of median %.0f ms; median wall 1 worker %.0f ms, 8 workers %.0f ms, ratio %.2f (need <= "
              "%.2f); %u hardware threads",
              kJobs, job, m1, m8, ratio, kScalingMaxRatio, cores),
          !ok && job >= kMinJobMs && cores < 8};
}

// ---- 12. Non-blocking overlap

Outcome nonblocking_overlap() {
  app::RunOptions run;
  run.workers = 2;
  const auto& ps = app::find_param_set("query-p3-m757");
  auto session = app::Session::open(ps, run);
  const auto& ctx = session->ctx;
  const auto setup = cmp::CompareSetup::make(ctx, cmp::CircuitKind::bivariate, 2);  // three tags
  Prng rng(13);
  const auto data = random_vec(ctx->l(), 3, rng), op1 = random_vec(ctx->l(), 3, rng);
  const auto cq = bgv::encrypt(bgv::encode(ctx, pipe::encode_query(pipe::Query::power, setup)), session->keys.pk, ctx, 1);
  const auto cd = bgv::encrypt(bgv::encode(ctx, data), session->keys.pk, ctx, 2);
  const auto co = bgv::encrypt(bgv::encode(ctx, op1), session->keys.pk, ctx, 3);
  const cmp::Evaluator ev(ctx, session->keys.relin, session->keys.galois);
  exec::PoolExecutor pool(2);
  std::vector<double> on, off, helper, main_leg;
  std::vector<u64> first_on, first_off;
  bool identical = true;
  for (std::size_t r = 0; r < kTimingRuns; ++r) {
    for (const bool nb : {true, false}) {
      const auto t0 = Clock::now();
      const auto res = pipe::private_query(cq, co, 1024, cd, setup, ev, pool, nb);
      (nb ? on : off).push_back(ms_since(t0));
      if (!nb) helper.push_back(res.timing.helper_ms), main_leg.push_back(res.timing.main_ms);
      const auto d = bgv::decrypt_slots(res.ct, session->keys.sk, ctx);
      auto& first = nb ? first_on : first_off;
      if (first.empty()) first = d;
      identical &= d == first;
    }
  }
  identical &= first_on == first_off;
  const double mon = median(on), moff = median(off), ratio = mon / moff;
  const double h = median(helper), m = median(main_leg);
  const unsigned cores = std::thread::hardware_concurrency();
  const bool legs = h > kMinLegMs && m > kMinLegMs;
  const bool ok = identical && legs && ratio <= kOverlapMaxRatio;
  return {ok,
          fmt("legs %.0f ms and %.0f ms; median wall blocking %.0f ms, non-blocking %.0f ms, ratio %.2f (need <= %.2f); "
              "decryptions %s; %u hardware threads",
              h, m, moff, mon, ratio, kOverlapMaxRatio, identical ? "identical" : "DIFFER", cores),
          !ok && identical && legs && cores < 2};
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> c{
      {1, {"transform exactness", transform_exactness}},
      {2, {"branch-removal equivalence", filter_equivalence}},
      {3, {"plan reuse", plan_reuse}},
      {4, {"layout staging", staging}},
      {5, {"BGV homomorphism", homomorphism}},
      {6, {"digit circuits", digit_circuits}},
      {7, {"integer comparison", integer_comparison}},
      {8, {"mult-count budgets", mult_budgets}},
      {9, {"applications", applications}},
      {10, {"slot compaction", compaction}},
      {11, {"parallel scaling", parallel_scaling}},
      {12, {"non-blocking overlap", nonblocking_overlap}},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Acceptance criteria; one PASS/FAIL line each"};
  std::vector<int> selected;
  cli.add_option("--criterion", selected, "Criterion number (repeatable); all when omitted")
      ->check(CLI::Range(1, 12));
  CLI11_PARSE(cli, argc, argv);
  if (selected.empty())
    for (const auto& [n, c] : criteria()) selected.push_back(n);

  bool all_pass = true, only_unattainable = true;
  for (const int n : selected) {
    const auto& [name, fn] = criteria().at(n);
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << o.detail
              << fmt(" [%.1f s]", seconds_since(t0)) << (o.unattainable ? " [unattainable here, see ledger]" : "")
              << std::endl;
    all_pass &= o.pass;
    if (!o.pass) only_unattainable &= o.unattainable;
  }
  if (all_pass) return 0;
  return only_unattainable ? kUnattainable : 1;
}
