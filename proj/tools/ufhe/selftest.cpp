#include "selftest.hpp"

#include <algorithm>
#include <exception>
#include <functional>

#include "ufhe/arith.hpp"
#include "ufhe/bgv.hpp"
#include "ufhe/compare.hpp"
#include "ufhe/ring.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/slotmgr.hpp"
#include "ufhe/transform.hpp"

namespace ufhe::app {

namespace {

class Suite {
 public:
  explicit Suite(std::string name) { r_.name = std::move(name); }
  void check(bool ok) { ok ? ++r_.passed : ++r_.failed; }
  // A throwing body counts as one failure.
  void run(const std::function<void(Suite&)>& body) {
    try {
      body(*this);
    } catch (const std::exception&) {
      ++r_.failed;
    }
  }
  SuiteResult result() const { return r_; }

 private:
  SuiteResult r_;
};

// a * b mod (Phi_m, q) by schoolbook product and long division.
std::vector<u64> mul_mod_phi(const std::vector<u64>& a, const std::vector<u64>& b, const std::vector<u64>& phi,
                             const arith::Modulus& q) {
  const std::size_t n = phi.size() - 1;
  std::vector<u64> prod(2 * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) prod[i + j] = arith::add_mod(prod[i + j], arith::mul_mod(a[i], b[j], q), q);
  for (std::size_t k = 2 * n - 1; k >= n; --k) {
    const u64 c = prod[k];
    if (c == 0) continue;
    for (std::size_t i = 0; i <= n; ++i)
      prod[k - n + i] = arith::sub_mod(prod[k - n + i], arith::mul_mod(c, phi[i], q), q);
  }
  prod.resize(n);
  return prod;
}

SuiteResult arith_suite(Prng& rng) {
  Suite s("arith");
  s.run([&](Suite& t) {
    const arith::Modulus q((u64{1} << 61) - 1);
    bool ok = true;
    for (int i = 0; i < 10000; ++i) {
      const u64 a = rng.uniform(q.value()), b = rng.uniform(q.value());
      ok &= arith::mul_mod(a, b, q) == static_cast<u64>(static_cast<u128>(a) * b % q.value());
    }
    t.check(ok);
    t.check(arith::pow_mod(3, 6, arith::Modulus(91)) == 1);
    const auto basis = arith::gen_ntt_primes(91, 256, 59, 3);
    bool cong = basis.size() == 3;
    for (const auto& m : basis.primes()) cong &= m.value() % 23296 == 1;
    t.check(cong);
    bool crt = true;
    for (int i = 0; i < 100; ++i) {
      const BigInt x = BigInt(rng.next()) * rng.next() - BigInt(rng.next()) * rng.next();
      std::vector<u64> res;
      for (const auto& m : basis.primes()) res.push_back(arith::reduce_big(x, m));
      crt &= arith::crt_compose(res, basis) == x;
    }
    t.check(crt);
  });
  return s.result();
}

SuiteResult transform_suite(Prng& rng, bool fault) {
  Suite s("transform");
  for (const u64 m : {91ULL, 31ULL, 61ULL}) {
    s.run([&](Suite& t) {
      const u64 pad = transform::next_pow2(2 * m - 1);
      const auto basis = arith::gen_ntt_primes(m, pad, 59, 1);
      transform::BluesteinPlan plan(m, basis[0]);
      if (fault) plan.inject_fault();
      const std::size_t n = plan.n();
      const u64 q = basis[0].value();
      std::vector<u64> a(n), b(n);
      for (auto& v : a) v = rng.uniform(q);
      for (auto& v : b) v = rng.uniform(q);
      const auto ea = transform::to_eval(a, plan), eb = transform::to_eval(b, plan);
      t.check(transform::from_eval(ea, plan) == a);
      std::vector<u64> prod(n);
      for (std::size_t i = 0; i < n; ++i) prod[i] = arith::mul_mod(ea[i], eb[i], basis[0]);
      t.check(transform::from_eval(prod, plan) == mul_mod_phi(a, b, plan.phi_m(), basis[0]));
      std::vector<u64> evals(m);
      for (auto& v : evals) v = rng.uniform(q);
      t.check(transform::zmstar_filter(evals, plan) == transform::zmstar_filter_reference(evals, plan));
    });
  }
  s.run([&](Suite& t) {
    transform::PlanCache cache;
    const auto basis = arith::gen_ntt_primes(91, 256, 59, 2);
    const auto p1 = cache.get(91, basis[0]);
    const auto p2 = cache.get(91, basis[0]);
    cache.get(91, basis[1]);
    t.check(p1 == p2 && cache.build_count(91, basis[0].value()) == 1 && cache.build_count() == 2);
  });
  return s.result();
}

SuiteResult ring_suite(Prng& rng) {
  Suite s("ring");
  s.run([&](Suite& t) {
    transform::PlanCache cache;
    auto ctx = std::make_shared<const ring::RingContext>(91, arith::gen_ntt_primes(91, 256, 59, 4), cache);
    for (const auto op : {ring::ElementOp::add, ring::ElementOp::sub, ring::ElementOp::mul}) {
      const auto a = ring::sample(ring::SampleKind::uniform, ctx, 4, rng);
      const auto b = ring::sample(ring::SampleKind::uniform, ctx, 4, rng);
      t.check(ring::elementwise(op, a, b) == ring::elementwise_reference(op, a, b));
    }
  });
  return s.result();
}

SuiteResult bgv_suite(Prng& rng, std::uint64_t seed) {
  Suite s("bgv");
  s.run([&](Suite& t) {
    transform::PlanCache cache;
    const auto ctx = bgv::Context::create({}, cache);
    const auto keys = bgv::keygen(ctx, seed);
    const std::size_t l = ctx->l();
    std::vector<u64> a(l), b(l);
    for (auto& v : a) v = rng.uniform(3);
    for (auto& v : b) v = rng.uniform(3);
    const auto ca = bgv::encrypt(bgv::encode(ctx, a), keys.pk, ctx, seed + 1);
    const auto cb = bgv::encrypt(bgv::encode(ctx, b), keys.pk, ctx, seed + 2);
    t.check(bgv::decrypt_slots(ca, keys.sk, ctx) == a);
    std::vector<u64> sum(l), prod(l), rot(l);
    for (std::size_t i = 0; i < l; ++i) {
      sum[i] = (a[i] + b[i]) % 3;
      prod[i] = a[i] * b[i] % 3;
      rot[i] = a[(i + 1) % l];
    }
    t.check(bgv::decrypt_slots(bgv::he_add(ca, cb, ctx), keys.sk, ctx) == sum);
    t.check(bgv::decrypt_slots(bgv::he_mul(ca, cb, keys.relin, ctx), keys.sk, ctx) == prod);
    t.check(bgv::decrypt_slots(bgv::rotate(ca, 1, keys.galois, ctx), keys.sk, ctx) == rot);
  });
  return s.result();
}

SuiteResult digit_suite() {
  Suite s("digits");
  for (const u64 p : {3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    for (const auto kind : {cmp::CircuitKind::bivariate, cmp::CircuitKind::univariate}) {
      s.run([&](Suite& t) {
        const auto c = cmp::DigitCircuit::build(p, kind);
        const u64 a = kind == cmp::CircuitKind::bivariate ? p : (p + 1) / 2;
        bool ok = true;
        for (u64 x = 0; x < a; ++x)
          for (u64 y = 0; y < a; ++y) {
            const u64 want = x < y ? 1 : 0;
            ok &= kind == cmp::CircuitKind::bivariate ? c.eval_table(x, y) == want && c.eval_zs(x, y) == want
                                                      : c.eval_univar((x + p - y) % p) == want;
          }
        t.check(ok);
      });
    }
  }
  return s.result();
}

SuiteResult compare_suite(Prng& rng, std::uint64_t seed) {
  Suite s("compare");
  s.run([&](Suite& t) {
    transform::PlanCache cache;
    const auto ctx = bgv::Context::create({3, 121, 8}, cache);
    const auto keys = bgv::keygen(ctx, seed);
    const auto setup = cmp::CompareSetup::make(ctx, cmp::CircuitKind::bivariate, 4);
    cmp::Evaluator ev(ctx, keys.relin, keys.galois);
    std::vector<u64> a(setup.layout.blocks), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform(16);
      b[i] = i % 2 == 0 ? a[i] : rng.uniform(16);
    }
    const auto ca = bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(a, setup.layout)), keys.pk, ctx, seed + 1);
    const auto cb = bgv::encrypt(bgv::encode(ctx, cmp::pack_ints(b, setup.layout)), keys.pk, ctx, seed + 2);
    const auto r = cmp::compare_ints(ca, cb, setup, ev);
    const auto lt = cmp::head_values(bgv::decrypt_slots(r.lt, keys.sk, ctx), setup.layout, a.size());
    const auto eq = cmp::head_values(bgv::decrypt_slots(r.eq, keys.sk, ctx), setup.layout, a.size());
    for (std::size_t i = 0; i < a.size(); ++i) t.check(lt[i] == (a[i] < b[i]) && eq[i] == (a[i] == b[i]));
  });
  return s.result();
}

SuiteResult slot_suite(Prng& rng) {
  Suite s("slotmgr");
  s.run([&](Suite& t) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t l = 12 + rng.uniform(20), count = 1 + rng.uniform(6);
      std::vector<slots::SlotUsage> us;
      std::size_t useful = 0;
      for (std::size_t c = 0; c < count; ++c) {
        slots::SlotUsage u{std::vector<std::uint8_t>(l, 0), slots::OpTag::declare};
        for (auto& b : u.mask) b = rng.uniform(3) == 0 ? 1 : 0;
        useful += u.used();
        us.push_back(u);
      }
      const auto plan = slots::plan_compaction(us);
      const std::size_t want = std::min((useful + l - 1) / l, count);
      t.check(plan.moves.size() == useful && plan.dst_count == want);
    }
  });
  return s.result();
}

}  // namespace

std::vector<SuiteResult> run_selftest(const SelftestOptions& opt) {
  Prng rng(opt.seed);
  return {arith_suite(rng),        transform_suite(rng, opt.inject_plan_fault), ring_suite(rng),
          bgv_suite(rng, opt.seed), digit_suite(),                              compare_suite(rng, opt.seed),
          slot_suite(rng)};
}

nlohmann::json to_json(const std::vector<SuiteResult>& suites) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : suites) j.push_back({{"suite", s.name}, {"passed", s.passed}, {"failed", s.failed}});
  return j;
}

bool all_passed(const std::vector<SuiteResult>& suites) {
  for (const auto& s : suites)
    if (s.failed != 0 || s.passed == 0) return false;
  return true;
}

}  // namespace ufhe::app
