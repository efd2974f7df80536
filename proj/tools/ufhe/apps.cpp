#include "apps.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "ufhe/compare.hpp"
#include "ufhe/error.hpp"
#include "ufhe/executor.hpp"
#include "ufhe/metrics.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/slotmgr.hpp"

namespace ufhe::app {

namespace {

using Clock = std::chrono::steady_clock;
using bgv::Ciphertext;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

cmp::CircuitKind kind_of(bgv::Circuit c) { return cmp::circuit_from_bgv(c); }

exec::WorkspaceShape shape_of(const bgv::ContextPtr& ctx) {
  const auto& plan = ctx->ring()->plan(0);
  return {ctx->max_primes(), ctx->n(), 2 * plan.scratch_size()};
}

std::vector<u64> random_ints(std::size_t count, unsigned bits, Prng& rng) {
  std::vector<u64> v(count);
  for (auto& x : v) x = bits >= 64 ? rng.next() : rng.uniform(u64{1} << bits);
  return v;
}

std::vector<u64> distinct_ints(std::size_t count, unsigned bits, Prng& rng) {
  if (bits < 64 && count > (u64{1} << bits)) raise(Errc::config, "not enough distinct values for that width");
  std::set<u64> seen;
  std::vector<u64> v;
  while (v.size() < count) {
    const u64 x = bits >= 64 ? rng.next() : rng.uniform(u64{1} << bits);
    if (seen.insert(x).second) v.push_back(x);
  }
  return v;
}

const ParamSet& param_or(const std::string& name, const char* fallback) {
  return find_param_set(name.empty() ? std::string(fallback) : name);
}

// Whole blocks move to whole blocks; returns the destination block of each source block 0.
bool plan_keeps_blocks(const slots::CompactionPlan& plan, std::size_t width) {
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> where;
  for (const auto& mv : plan.moves) {
    const auto src = std::make_pair(mv.src_ct, mv.src_slot / width);
    const auto off = mv.src_slot % width;
    if (mv.dst_slot % width != off) return false;
    const auto dst = std::make_pair(mv.dst_ct, mv.dst_slot / width);
    const auto [it, fresh] = where.emplace(src, dst);
    if (!fresh && it->second != dst) return false;
  }
  return true;
}

void fill_report_common(Report& r, const ParamSet& ps, const RunOptions& run, const std::string& cmd) {
  r.command = cmd;
  r.param_set = ps.name;
  r.circuit = std::string(circuit_name(ps.circuit));
  r.seed = run.seed;
  r.workers = run.workers;
  r.deterministic = run.deterministic;
}

}  // namespace

std::unique_ptr<Session> Session::open(const ParamSet& ps, const RunOptions& run) {
  const double mb = estimated_key_bytes(ps) / (1024.0 * 1024.0);
  if (mb > run.memory_limit_mb)
    raise(Errc::capacity_exceeded, "parameter set " + ps.name + " needs about " + std::to_string(static_cast<long>(mb)) +
                                       " MB of key material, above the " +
                                       std::to_string(static_cast<long>(run.memory_limit_mb)) +
                                       " MB limit (raise it with --memory-limit-mb)");
  auto s = std::make_unique<Session>();
  s->params = ps;
  s->ctx = bgv::Context::create(to_spec(ps), s->cache);
  s->keys = bgv::keygen(s->ctx, run.seed);
  return s;
}

unsigned supported_bits(unsigned bits, u64 p, std::size_t l, plain::Alphabet alphabet) {
  for (unsigned b = bits; b > 0; --b)
    if (plain::digits_for_bits(b, p, alphabet) <= l) return b;
  return 0;
}

unsigned depth_supported_bits(unsigned bits, const Session& s, cmp::CircuitKind kind) {
  const auto& ctx = s.ctx;
  cmp::Evaluator ev(ctx, s.keys.relin, s.keys.galois);
  std::size_t failed_digits = 0;
  for (unsigned b = bits; b > 0; --b) {
    const auto setup = cmp::CompareSetup::make(ctx, kind, b);
    if (setup.layout.digits == failed_digits) continue;
    // Tracked noise depends on the plaintext norm, so the trial uses random integers.
    Prng rng(0x7e57ULL + b);
    const auto x = random_ints(setup.layout.blocks, b, rng), y = random_ints(setup.layout.blocks, b, rng);
    const auto cx = bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(x, setup.layout)), s.keys.pk, ctx, rng.next());
    const auto cy = bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(y, setup.layout)), s.keys.pk, ctx, rng.next());
    try {
      const auto r = cmp::compare_ints(cx, cy, setup, ev);
      const auto lt = cmp::head_values(bgv::decrypt_slots(r.lt, s.keys.sk, ctx), setup.layout, 1);
      if (lt[0] == (x[0] < y[0] ? 1u : 0u)) return b;
    } catch (const Error& e) {
      if (e.code() != Errc::out_of_levels && e.code() != Errc::noise_budget_exhausted) throw;
    }
    failed_digits = setup.layout.digits;
  }
  return 0;
}

Report bench_compare(const BenchOptions& opt, const RunOptions& run) {
  ParamSet ps = find_param_set(opt.param);
  if (opt.circuit) ps.circuit = *opt.circuit;
  if (opt.reps == 0) raise(Errc::config, "reps must be positive");
  auto session = Session::open(ps, run);
  const auto& ctx = session->ctx;
  const auto kind = kind_of(ps.circuit);
  const auto alphabet = kind == cmp::CircuitKind::bivariate ? plain::Alphabet::full : plain::Alphabet::half;
  const unsigned slot_bits = supported_bits(opt.bits, ps.p, ctx->l(), alphabet);
  if (slot_bits == 0)
    raise(Errc::capacity_exceeded, "no integer width fits into " + std::to_string(ctx->l()) + " slots");
  const unsigned bits = depth_supported_bits(slot_bits, *session, kind);
  if (bits == 0) raise(Errc::out_of_levels, "no integer width fits into " + std::to_string(ps.levels) + " levels");
  const auto setup = cmp::CompareSetup::make(ctx, kind, bits);
  const std::size_t pairs = opt.pairs != 0 ? opt.pairs : std::max<std::size_t>(8, run.workers);
  auto ex = exec::make_executor(run.workers, shape_of(ctx));
  cmp::OpCounter counter;
  cmp::Evaluator ev(ctx, session->keys.relin, session->keys.galois, &counter);

  Report r;
  fill_report_common(r, ps, run, "bench compare");
  r.reps = opt.reps;
  const auto before = metrics::snapshot();
  const auto t_all = Clock::now();
  std::vector<double> samples, compare_ms;
  std::size_t checks = 0, failures = 0;
  const std::size_t per_ct = setup.layout.blocks;
  Prng root(run.seed);
  for (std::size_t rep = 0; rep < opt.reps; ++rep) {
    Prng rng = root.split(rep + 1);
    std::vector<std::vector<u64>> a(pairs), b(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
      a[i] = random_ints(per_ct, bits, rng);
      b[i] = random_ints(per_ct, bits, rng);
      for (std::size_t j = 0; j < per_ct; j += 4) b[i][j] = a[i][j];  // exercise equality
    }
    const auto t0 = Clock::now();
    std::vector<Ciphertext> ca(pairs), cb(pairs);
    ex->run(pairs, [&](std::size_t i) {
      ca[i] = bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(a[i], setup.layout)), session->keys.pk, ctx,
                           splitmix64(run.seed ^ (rep << 20) ^ (2 * i + 1)));
      cb[i] = bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(b[i], setup.layout)), session->keys.pk, ctx,
                           splitmix64(run.seed ^ (rep << 20) ^ (2 * i + 2)));
    });
    const auto tc = Clock::now();
    const auto res = cmp::compare_ints(ca, cb, setup, ev, *ex);
    compare_ms.push_back(ms_since(tc));
    std::vector<std::vector<u64>> lt(pairs), eq(pairs);
    ex->run(pairs, [&](std::size_t i) {
      lt[i] = cmp::head_values(bgv::decrypt_slots(res[i].lt, session->keys.sk, ctx), setup.layout, per_ct);
      eq[i] = cmp::head_values(bgv::decrypt_slots(res[i].eq, session->keys.sk, ctx), setup.layout, per_ct);
    });
    for (std::size_t i = 0; i < pairs; ++i)
      for (std::size_t j = 0; j < per_ct; ++j) {
        ++checks;
        if (lt[i][j] != (a[i][j] < b[i][j] ? 1u : 0u) || eq[i][j] != (a[i][j] == b[i][j] ? 1u : 0u)) ++failures;
      }
    samples.push_back(ms_since(t0));
  }
  r.total_ms = ms_since(t_all);
  r.components = metrics::snapshot() - before;
  r.wall = wall_stats(samples);
  r.op_counts = op_counts_json(counter);
  r.checks = checks;
  r.failures = failures;
  r.verified = failures == 0;
  r.ciphertexts_before = r.ciphertexts_after = 2 * pairs;
  r.utilization_before = r.utilization_after =
      static_cast<double>(per_ct * setup.layout.width) / static_cast<double>(ctx->l());
  const auto cw = wall_stats(compare_ms);
  r.extra = {{"bits_requested", opt.bits},
             {"bits_slot_limit", slot_bits},
             {"bits", bits},
             {"digits", setup.layout.digits},
             {"integers_per_ciphertext", per_ct},
             {"pairs_per_rep", pairs},
             {"compare_median_ms", cw.median_ms},
             {"per_integer_ms", r.wall.median_ms / static_cast<double>(pairs * per_ct)},
             {"plan_builds", session->cache.build_count()},
             {"plan_keys", session->cache.size()},
             {"digit_mult_budget", setup.circuit.nonscalar_mult_budget()},
             {"reference_cost", setup.circuit.reference_cost()},
             {"security_estimate", ctx->security_estimate()}};
  return r;
}

Report app_sort(const AppOptions& opt, const RunOptions& run) {
  const ParamSet& ps = param_or(opt.param, "sort-p17-m307");
  const unsigned bits = opt.bits != 0 ? opt.bits : 8;
  auto session = Session::open(ps, run);
  const auto& ctx = session->ctx;
  const auto setup = cmp::CompareSetup::make(ctx, kind_of(ps.circuit), bits);
  const auto& L = setup.layout;
  auto ex = exec::make_executor(run.workers, shape_of(ctx));
  cmp::OpCounter counter;
  cmp::Evaluator ev(ctx, session->keys.relin, session->keys.galois, &counter);
  Prng rng(run.seed);
  const auto values = distinct_ints(opt.n, bits, rng);

  Report r;
  fill_report_common(r, ps, run, "app sort");
  r.reps = 1;
  const auto before = metrics::snapshot();
  const auto t0 = Clock::now();
  Ciphertext packed;
  bool compacted = false;
  std::string reason = "compaction off";
  if (opt.compaction) {
    // One integer per ciphertext, as produced by an upstream per-item computation.
    std::vector<Ciphertext> sparse;
    for (std::size_t i = 0; i < opt.n; ++i) {
      const std::vector<u64> one{values[i]};
      sparse.push_back(bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(one, L), slots::SlotUsage::first(ctx->l(), L.width)),
                                    session->keys.pk, ctx, splitmix64(run.seed + i + 1)));
    }
    std::vector<slots::SlotUsage> usages;
    for (const auto& ct : sparse) usages.push_back(ct.usage);
    const auto plan = slots::plan_compaction(usages);
    const bool fits = plan.dst_count == 1 && plan_keeps_blocks(plan, L.width) &&
                      std::all_of(plan.moves.begin(), plan.moves.end(),
                                  [&](const slots::Move& mv) { return mv.dst_slot < opt.n * L.width; });
    r.ciphertexts_before = sparse.size();
    r.utilization_before = usages.front().utilization();
    if (fits) {
      slots::CompactionReport rep;
      auto out = slots::compact(sparse, ctx, session->keys.galois, rep);
      reason = rep.reason;
      if (rep.applied) {
        packed = out.front();
        compacted = true;
      }
    } else {
      reason = "plan does not keep whole blocks inside the first n blocks";
    }
  }
  if (!compacted) {
    packed = bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(values, L), slots::SlotUsage::first(ctx->l(), opt.n * L.width)),
                          session->keys.pk, ctx, splitmix64(run.seed));
    if (!opt.compaction) {
      r.ciphertexts_before = 1;
      r.utilization_before = packed.usage.utilization();
    }
  }
  // Compaction may permute blocks; remember which value sits in each block for the oracle.
  std::vector<u64> input = cmp::unpack_ints(bgv::decrypt_slots(packed, session->keys.sk, ctx), L, opt.n);
  const Ciphertext sorted = cmp::sort_rank(packed, opt.n, setup, ev, *ex);
  const auto got = cmp::unpack_ints(bgv::decrypt_slots(sorted, session->keys.sk, ctx), L, opt.n);
  r.total_ms = ms_since(t0);
  r.components = metrics::snapshot() - before;
  r.wall = wall_stats({r.total_ms});

  auto expect = values;
  std::sort(expect.begin(), expect.end());
  std::sort(input.begin(), input.end());
  r.checks = opt.n + 1;
  r.failures = (input != expect ? 1 : 0);
  for (std::size_t i = 0; i < opt.n; ++i) r.failures += got[i] != expect[i];
  r.verified = r.failures == 0;
  r.ciphertexts_after = 1;
  r.utilization_after = packed.usage.utilization();
  r.op_counts = op_counts_json(counter);
  r.compaction = {{"requested", opt.compaction}, {"applied", compacted}, {"reason", compacted ? "" : reason}};
  r.extra = {{"n", opt.n}, {"bits", bits}, {"input", values}, {"output", got},
             {"noise_budget_bits", bgv::noise_budget(sorted, ctx)}, {"levels_left", sorted.level()}};
  return r;
}

Report app_min(const AppOptions& opt, const RunOptions& run) {
  const ParamSet& ps = param_or(opt.param, "min-p3-m121");
  const unsigned bits = opt.bits != 0 ? opt.bits : 16;
  auto session = Session::open(ps, run);
  const auto& ctx = session->ctx;
  const auto setup = cmp::CompareSetup::make(ctx, kind_of(ps.circuit), bits);
  const auto& L = setup.layout;
  auto ex = exec::make_executor(run.workers, shape_of(ctx));
  cmp::OpCounter counter;
  cmp::Evaluator ev(ctx, session->keys.relin, session->keys.galois, &counter);
  Prng rng(run.seed);
  const auto values = random_ints(opt.n, bits, rng);
  const u64 sentinel = L.max_value();

  Report r;
  fill_report_common(r, ps, run, "app min");
  r.reps = 1;
  const auto before = metrics::snapshot();
  const auto t0 = Clock::now();
  // One integer per ciphertext in block 0, sentinels elsewhere.
  std::vector<Ciphertext> items;
  for (std::size_t i = 0; i < opt.n; ++i) {
    std::vector<u64> slots_v = cmp::pack_ints(std::vector<u64>{values[i]}, L, sentinel);
    items.push_back(bgv::encrypt(bgv::encode(ctx, slots_v, slots::SlotUsage::first(ctx->l(), L.width)),
                                 session->keys.pk, ctx, splitmix64(run.seed + i + 1)));
  }
  r.ciphertexts_before = items.size();
  r.utilization_before = items.front().usage.utilization();
  bool compacted = false;
  std::string reason = "compaction off";
  if (opt.compaction) {
    std::vector<slots::SlotUsage> usages;
    for (const auto& ct : items) usages.push_back(ct.usage);
    const auto plan = slots::plan_compaction(usages);
    if (!plan_keeps_blocks(plan, L.width)) {
      reason = "plan splits integer blocks";
    } else {
      slots::CompactionReport rep;
      auto out = slots::compact(items, ctx, session->keys.galois, rep);
      reason = rep.reason;
      if (rep.applied) {
        // Unused blocks of the packed ciphertexts hold zeros; give them the sentinel.
        for (auto& ct : out) {
          std::vector<u64> fill(ctx->l(), 0);
          bool any = false;
          for (std::size_t b = 0; b < L.blocks; ++b) {
            if (ct.usage.mask[b * L.width] != 0) continue;
            const auto d = plain::int_to_digits(sentinel, L.p, L.digits, L.alphabet);
            std::copy(d.digits.begin(), d.digits.end(), fill.begin() + static_cast<std::ptrdiff_t>(b * L.width));
            any = true;
          }
          if (any) ct = bgv::he_add_plain(ct, bgv::encode(ctx, fill, ct.usage), ctx);
        }
        items = std::move(out);
        compacted = true;
      }
    }
  }
  r.ciphertexts_after = items.size();
  double util = 0;
  for (const auto& ct : items) util += ct.usage.utilization();
  r.utilization_after = util / static_cast<double>(items.size());
  const Ciphertext best = cmp::min_tournament(items, setup, ev, *ex);
  const u64 got = cmp::unpack_ints(bgv::decrypt_slots(best, session->keys.sk, ctx), L, 1).front();
  r.total_ms = ms_since(t0);
  r.components = metrics::snapshot() - before;
  r.wall = wall_stats({r.total_ms});
  const u64 expect = *std::min_element(values.begin(), values.end());
  r.checks = 1;
  r.failures = got == expect ? 0 : 1;
  r.verified = r.failures == 0;
  r.op_counts = op_counts_json(counter);
  r.compaction = {{"requested", opt.compaction}, {"applied", compacted}, {"reason", compacted ? "" : reason}};
  r.extra = {{"n", opt.n}, {"bits", bits}, {"input", values}, {"minimum", got}, {"expected", expect},
             {"noise_budget_bits", bgv::noise_budget(best, ctx)}, {"levels_left", best.level()}};
  return r;
}

pipe::Query parse_query(const std::string& s) {
  if (s == "add") return pipe::Query::add;
  if (s == "mult") return pipe::Query::mult;
  if (s == "power") return pipe::Query::power;
  raise(Errc::config, "unknown query '" + s + "' (expected add, mult or power)");
}

std::string_view query_name(pipe::Query q) noexcept {
  switch (q) {
    case pipe::Query::add: return "add";
    case pipe::Query::mult: return "mult";
    case pipe::Query::power: return "power";
  }
  return "";
}

Report app_private_query(const AppOptions& opt, const RunOptions& run) {
  const ParamSet& ps = param_or(opt.param, "query-p3-m757");
  const unsigned bits = opt.bits != 0 ? opt.bits : 8;
  if (opt.reps == 0) raise(Errc::config, "reps must be positive");
  auto session = Session::open(ps, run);
  const auto& ctx = session->ctx;
  const u64 p = ctx->p();
  const auto setup = cmp::CompareSetup::make(ctx, kind_of(ps.circuit), bits);
  const std::size_t valid = setup.layout.blocks * setup.layout.width;
  // The helper needs a worker of its own even when the main path runs alone.
  auto ex = exec::make_executor(std::max<std::size_t>(run.workers, opt.nonblocking ? 2 : 1), shape_of(ctx));
  cmp::OpCounter counter;
  cmp::Evaluator ev(ctx, session->keys.relin, session->keys.galois, &counter);
  Prng rng(run.seed);
  std::vector<u64> data(ctx->l()), op1(ctx->l());
  for (auto& x : data) x = rng.uniform(p);
  for (auto& x : op1) x = rng.uniform(p);
  const auto cd = bgv::encrypt(bgv::encode(ctx, data), session->keys.pk, ctx, splitmix64(run.seed + 1));
  const auto co = bgv::encrypt(bgv::encode(ctx, op1), session->keys.pk, ctx, splitmix64(run.seed + 2));
  const auto cq = bgv::encrypt(bgv::encode(ctx, pipe::encode_query(opt.query, setup)), session->keys.pk, ctx,
                               splitmix64(run.seed + 3));
  const auto schedule = run.deterministic ? pipe::Schedule::serialized : pipe::Schedule::concurrent;

  Report r;
  fill_report_common(r, ps, run, "app private-query");
  r.reps = opt.reps;
  const auto before = metrics::snapshot();
  const auto t_all = Clock::now();
  std::vector<double> samples, helper, main_leg;
  std::vector<u64> got;
  for (std::size_t rep = 0; rep < opt.reps; ++rep) {
    const auto res = pipe::private_query(cq, co, opt.op2, cd, setup, ev, *ex, opt.nonblocking, schedule);
    samples.push_back(res.timing.total_ms);
    helper.push_back(res.timing.helper_ms);
    main_leg.push_back(res.timing.main_ms);
    if (rep == 0) got = bgv::decrypt_slots(res.ct, session->keys.sk, ctx);
  }
  r.total_ms = ms_since(t_all);
  r.components = metrics::snapshot() - before;
  r.wall = wall_stats(samples);
  const arith::Modulus pm(p);
  for (std::size_t i = 0; i < valid; ++i) {
    u64 expect = 0;
    switch (opt.query) {
      case pipe::Query::add: expect = (data[i] + op1[i]) % p; break;
      case pipe::Query::mult: expect = data[i] * op1[i] % p; break;
      case pipe::Query::power: expect = arith::pow_mod(data[i], opt.op2, pm); break;
    }
    ++r.checks;
    r.failures += got[i] != expect;
  }
  r.verified = r.failures == 0;
  r.op_counts = op_counts_json(counter);
  r.ciphertexts_before = r.ciphertexts_after = 3;
  r.utilization_before = r.utilization_after = static_cast<double>(valid) / static_cast<double>(ctx->l());
  r.compaction = {{"requested", false}, {"applied", false}, {"reason", "not applicable"}};
  r.extra = {{"query", query_name(opt.query)},
             {"op2", opt.op2},
             {"nonblocking", opt.nonblocking},
             {"tag_bits", bits},
             {"valid_slots", valid},
             {"helper_ms", wall_stats(helper).median_ms},
             {"main_ms", wall_stats(main_leg).median_ms},
             {"total_ms", r.wall.median_ms}};
  return r;
}

}  // namespace ufhe::app
