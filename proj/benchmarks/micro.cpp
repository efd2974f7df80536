#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "ufhe/arith.hpp"
#include "ufhe/bgv.hpp"
#include "ufhe/compare.hpp"
#include "ufhe/ring.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/transform.hpp"

namespace {

using namespace ufhe;

struct Env {
  transform::PlanCache cache;
  bgv::ContextPtr ctx;
  bgv::KeySet keys;
};

const Env& env(u64 p, u64 m, std::size_t levels) {
  static std::mutex mu;
  static std::map<std::array<u64, 3>, std::unique_ptr<Env>> envs;
  std::lock_guard lock(mu);
  auto& e = envs[{p, m, levels}];
  if (!e) {
    e = std::make_unique<Env>();
    bgv::ParamsSpec spec;
    spec.p = p;
    spec.m = m;
    spec.levels = levels;
    e->ctx = bgv::Context::create(spec, e->cache);
    e->keys = bgv::keygen(e->ctx, 1);
  }
  return *e;
}

bgv::Ciphertext random_ct(const Env& e, std::uint64_t seed, u64 bound) {
  Prng rng(seed);
  std::vector<u64> v(e.ctx->l());
  for (auto& x : v) x = rng.uniform(bound);
  return bgv::encrypt(bgv::encode(e.ctx, v), e.keys.pk, e.ctx, seed);
}

void BM_MulMod(benchmark::State& state) {
  const arith::Modulus q(288230376152293121ULL);
  Prng rng(1);
  std::vector<u64> a(4096), b(4096);
  for (auto& x : a) x = rng.uniform(q.value());
  for (auto& x : b) x = rng.uniform(q.value());
  for (auto _ : state) {
    u64 acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc ^= arith::mul_mod(a[i], b[i], q);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * a.size()));
}
BENCHMARK(BM_MulMod);

void BM_ToEval(benchmark::State& state) {
  const u64 m = static_cast<u64>(state.range(0));
  const auto basis = arith::gen_ntt_primes(m, transform::next_pow2(2 * m - 1), 59, 1);
  const transform::BluesteinPlan plan(m, basis[0]);
  Prng rng(m);
  std::vector<u64> a(plan.n());
  for (auto& x : a) x = rng.uniform(basis[0].value());
  for (auto _ : state) benchmark::DoNotOptimize(transform::to_eval(a, plan));
}
BENCHMARK(BM_ToEval)->Arg(91)->Arg(307)->Arg(757)->Unit(benchmark::kMicrosecond);

void elementwise_bench(benchmark::State& state, bool fused) {
  const std::size_t primes = static_cast<std::size_t>(state.range(0));
  transform::PlanCache cache;
  const auto ring = std::make_shared<const ring::RingContext>(757, arith::gen_ntt_primes(757, 2048, 59, primes), cache);
  const auto a = ring::sample(ring::SampleKind::uniform, ring, primes, 1);
  const auto b = ring::sample(ring::SampleKind::uniform, ring, primes, 2);
  for (auto _ : state) {
    if (fused)
      benchmark::DoNotOptimize(ring::elementwise(ring::ElementOp::mul, a, b));
    else
      benchmark::DoNotOptimize(ring::elementwise_reference(ring::ElementOp::mul, a, b));
  }
}
void BM_ElementwiseFused(benchmark::State& state) { elementwise_bench(state, true); }
void BM_ElementwiseReference(benchmark::State& state) { elementwise_bench(state, false); }
BENCHMARK(BM_ElementwiseFused)->Arg(3)->Arg(6)->Arg(11)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ElementwiseReference)->Arg(3)->Arg(6)->Arg(11)->Unit(benchmark::kMicrosecond);

void BM_HeMul(benchmark::State& state) {
  const auto& e = env(3, 121, 10);
  const auto a = random_ct(e, 1, 3), b = random_ct(e, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(bgv::he_mul(a, b, e.keys.relin, e.ctx));
}
BENCHMARK(BM_HeMul)->Unit(benchmark::kMillisecond);

void BM_DigitJob(benchmark::State& state) {
  const u64 p = static_cast<u64>(state.range(0));
  const auto kind = state.range(1) == 0 ? cmp::CircuitKind::bivariate : cmp::CircuitKind::univariate;
  const auto& e = p == 3 ? env(3, 121, 10) : env(17, 307, 16);
  const auto circuit = cmp::DigitCircuit::build(p, kind);
  const u64 bound = kind == cmp::CircuitKind::bivariate ? p : (p + 1) / 2;
  const auto x = random_ct(e, 3, bound), y = random_ct(e, 4, bound);
  cmp::Evaluator ev(e.ctx, e.keys.relin, e.keys.galois);
  for (auto _ : state) benchmark::DoNotOptimize(cmp::lt_eq_digit(x, y, circuit, ev));
}
BENCHMARK(BM_DigitJob)->Args({3, 0})->Args({3, 1})->Args({17, 1})->Unit(benchmark::kMillisecond);

void BM_CompareInts(benchmark::State& state) {
  const auto& e = env(3, 121, 10);
  const auto setup = cmp::CompareSetup::make(e.ctx, cmp::CircuitKind::bivariate, static_cast<unsigned>(state.range(0)));
  Prng rng(5);
  std::vector<u64> a(setup.layout.blocks), b(setup.layout.blocks);
  for (auto& x : a) x = rng.uniform(u64{1} << state.range(0));
  for (auto& x : b) x = rng.uniform(u64{1} << state.range(0));
  const auto ca = bgv::encrypt(bgv::encode(e.ctx, cmp::pack_ints(a, setup.layout)), e.keys.pk, e.ctx, 6);
  const auto cb = bgv::encrypt(bgv::encode(e.ctx, cmp::pack_ints(b, setup.layout)), e.keys.pk, e.ctx, 7);
  cmp::Evaluator ev(e.ctx, e.keys.relin, e.keys.galois);
  for (auto _ : state) benchmark::DoNotOptimize(cmp::compare_ints(ca, cb, setup, ev));
}
BENCHMARK(BM_CompareInts)->Arg(6)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
