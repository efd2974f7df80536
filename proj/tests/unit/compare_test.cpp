#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "ufhe/error.hpp"

namespace ufhe::cmp {
namespace {

using test::fixture;
using test::random_slots;

TEST(Interpolation, RecoversValues) {
  Prng rng(1);
  for (const u64 p : {3ULL, 7ULL, 13ULL, 31ULL}) {
    const auto v = random_slots(p, p, rng);
    const auto c = interpolate_fp(v, p);
    EXPECT_LE(c.size(), p);
    for (u64 x = 0; x < p; ++x) ASSERT_EQ(eval_fp(c, x, p), v[x]);
  }
}

class DigitTables : public ::testing::TestWithParam<u64> {};

TEST_P(DigitTables, AllRepresentationsAgree) {
  const u64 p = GetParam();
  const auto biv = DigitCircuit::build(p, CircuitKind::bivariate);
  for (u64 x = 0; x < p; ++x)
    for (u64 y = 0; y < p; ++y) {
      ASSERT_EQ(biv.eval_table(x, y), x < y ? 1u : 0u);
      ASSERT_EQ(biv.eval_zs(x, y), x < y ? 1u : 0u);
    }
  const auto uni = DigitCircuit::build(p, CircuitKind::univariate);
  const u64 h = (p + 1) / 2;
  for (u64 x = 0; x < h; ++x)
    for (u64 y = 0; y < h; ++y) ASSERT_EQ(uni.eval_univar((x + p - y) % p), x < y ? 1u : 0u);
  EXPECT_LE(uni.lt_univar_coeffs().size(), p);
  EXPECT_EQ(biv.reference_cost(), 3 * p - 5);
}

INSTANTIATE_TEST_SUITE_P(Primes, DigitTables, ::testing::Values(3, 5, 7, 11, 13, 17, 19, 23, 29, 31));

TEST(DigitCircuit, Budgets) {
  EXPECT_EQ(DigitCircuit::build(5, CircuitKind::bivariate).nonscalar_mult_budget(), 6u);
  EXPECT_EQ(DigitCircuit::build(13, CircuitKind::bivariate).nonscalar_mult_budget(), 24u);
  EXPECT_EQ(DigitCircuit::build(17, CircuitKind::univariate).nonscalar_mult_budget(), 10u + 10u);
  EXPECT_EQ(ps_mult_bound(8), 2u * 3u + 3u);
}

TEST(PolyEval, PatersonStockmeyerMatchesHorner) {
  const auto& f = fixture(17, 307, 8, bgv::Circuit::univariate);
  Prng rng(2);
  const auto x = random_slots(f.ctx->l(), 17, rng);
  const auto ct = f.enc(x, 1);
  for (const std::size_t deg : {1u, 4u, 8u, 16u}) {
    const auto coeffs = random_slots(deg + 1, 17, rng);
    auto ev = f.evaluator();
    const auto ps = f.dec(poly_eval_ps(coeffs, ct, ev));
    EXPECT_LE(ev.tally(), ps_mult_bound(deg));
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(ps[i], eval_fp(coeffs, x[i], 17));
    if (deg > f.ctx->levels() - 2) continue;  // Horner depth grows linearly
    auto ev2 = f.evaluator();
    EXPECT_EQ(f.dec(poly_eval_horner(coeffs, ct, ev2)), ps);
  }
}

TEST(Layout, PackUnpack) {
  const auto L = make_layout(3, 22, 6, plain::Alphabet::full);
  EXPECT_EQ(L.digits, 4u);
  EXPECT_EQ(L.blocks, 5u);
  EXPECT_EQ(L.max_value(), 80u);
  const std::vector<u64> v{0, 63, 17, 42, 5};
  const auto slots = pack_ints(v, L);
  EXPECT_EQ(slots.size(), 22u);
  EXPECT_EQ(unpack_ints(slots, L, 5), v);
  EXPECT_EQ(head_values(slots, L, 5), (std::vector<u64>{0, 0, 2, 0, 2}));
  EXPECT_THROW(make_layout(3, 22, 64, plain::Alphabet::full), Error);
}

TEST(Digits, EncryptedTablesSmallPrimes) {
  for (const u64 p : {3ULL, 5ULL}) {
    const auto& f = fixture(p, p == 3 ? 91 : 31, 8);
    const std::size_t l = f.ctx->l();
    std::vector<u64> x(l), y(l);
    for (std::size_t i = 0; i < l; ++i) {
      x[i] = i % p;
      y[i] = (i / p) % p;
    }
    const auto cx = f.enc(x, 1), cy = f.enc(y, 2);
    const auto circuit = DigitCircuit::build(p, CircuitKind::bivariate);
    OpCounter counter;
    auto ev = f.evaluator(&counter);
    const auto r = lt_eq_digit(cx, cy, circuit, ev);
    const auto lt = f.dec(r.lt), eq = f.dec(r.eq);
    for (std::size_t i = 0; i < l; ++i) {
      ASSERT_EQ(lt[i], x[i] < y[i] ? 1u : 0u);
      ASSERT_EQ(eq[i], x[i] == y[i] ? 1u : 0u);
    }
    EXPECT_EQ(counter.digit_jobs(CircuitKind::bivariate), 1u);
    EXPECT_LE(counter.max_digit_job(CircuitKind::bivariate), circuit.reference_cost());
  }
}

TEST(Compare, ExhaustiveFourBit) {
  const auto& f = fixture(3, 121, 10);
  const auto setup = CompareSetup::make(f.ctx, CircuitKind::bivariate, 4);
  auto ev = f.evaluator();
  const std::size_t B = setup.layout.blocks;
  std::vector<u64> a, b;
  for (u64 x = 0; x < 16; ++x)
    for (u64 y = 0; y < 16; ++y) a.push_back(x), b.push_back(y);
  for (std::size_t off = 0; off < a.size(); off += B) {
    const std::size_t cnt = std::min(B, a.size() - off);
    const std::vector<u64> va(a.begin() + off, a.begin() + off + cnt), vb(b.begin() + off, b.begin() + off + cnt);
    const auto r = compare_ints(f.enc(pack_ints(va, setup.layout), off), f.enc(pack_ints(vb, setup.layout), off + 1),
                                setup, ev);
    const auto lt = head_values(f.dec(r.lt), setup.layout, cnt), eq = head_values(f.dec(r.eq), setup.layout, cnt);
    for (std::size_t i = 0; i < cnt; ++i) {
      ASSERT_EQ(lt[i], va[i] < vb[i] ? 1u : 0u) << va[i] << " " << vb[i];
      ASSERT_EQ(eq[i], va[i] == vb[i] ? 1u : 0u) << va[i] << " " << vb[i];
    }
  }
}

TEST(Compare, BatchMatchesSingleAndIsWorkerIndependent) {
  const auto& f = fixture(3, 121, 10);
  const auto setup = CompareSetup::make(f.ctx, CircuitKind::bivariate, 8);
  Prng rng(3);
  std::vector<Ciphertext> a, b;
  for (int i = 0; i < 3; ++i) {
    a.push_back(f.enc(pack_ints(random_slots(setup.layout.blocks, 256, rng), setup.layout), 10 + i));
    b.push_back(f.enc(pack_ints(random_slots(setup.layout.blocks, 256, rng), setup.layout), 20 + i));
  }
  auto ev = f.evaluator();
  exec::SequentialExecutor seq;
  exec::PoolExecutor pool(3);
  const auto r1 = compare_ints(a, b, setup, ev, seq);
  const auto r3 = compare_ints(a, b, setup, ev, pool);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(r1[i].lt, r3[i].lt);
    EXPECT_EQ(r1[i].lt, compare_ints(a[i], b[i], setup, ev).lt);
  }
}

TEST(Compare, EqIntsAndSelect) {
  const auto& f = fixture(3, 121, 10);
  const auto setup = CompareSetup::make(f.ctx, CircuitKind::bivariate, 6);
  const std::size_t B = setup.layout.blocks;
  const std::vector<u64> a{5, 9, 63, 0, 12}, b{5, 8, 63, 1, 40};
  ASSERT_EQ(B, a.size());
  auto ev = f.evaluator();
  const auto ca = f.enc(pack_ints(a, setup.layout), 1), cb = f.enc(pack_ints(b, setup.layout), 2);
  const auto eq = head_values(f.dec(eq_ints(ca, cb, setup, ev)), setup.layout, B);
  EXPECT_EQ(eq, (std::vector<u64>{1, 0, 1, 0, 0}));
  const auto lt = broadcast_heads(compare_ints(ca, cb, setup, ev).lt, B, setup, ev);
  const auto lo = unpack_ints(f.dec(select(ca, cb, lt, ev)), setup.layout, B);
  for (std::size_t i = 0; i < B; ++i) EXPECT_EQ(lo[i], std::min(a[i], b[i]));
}

TEST(Compare, MinTournament) {
  const auto& f = fixture(3, 121, 36);
  const auto setup = CompareSetup::make(f.ctx, CircuitKind::bivariate, 6);
  const std::vector<u64> vals{41, 7, 58, 13, 9};
  std::vector<Ciphertext> items;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::vector<u64> v(setup.layout.blocks, setup.layout.max_value());
    v[0] = vals[i];
    items.push_back(f.enc(pack_ints(v, setup.layout), 30 + i));
  }
  auto ev = f.evaluator();
  exec::SequentialExecutor ex;
  const auto r = min_tournament(items, setup, ev, ex);
  EXPECT_EQ(unpack_ints(f.dec(r), setup.layout, 1)[0], 7u);
}

TEST(Compare, SortRank) {
  const auto& f = fixture(17, 307, 16, bgv::Circuit::univariate);
  const auto setup = CompareSetup::make(f.ctx, CircuitKind::univariate, 8);
  const std::vector<u64> vals{200, 3, 77, 77, 150, 0};
  const auto ct = f.enc(pack_ints(vals, setup.layout), 5);
  auto ev = f.evaluator();
  exec::SequentialExecutor ex;
  const auto sorted = unpack_ints(f.dec(sort_rank(ct, vals.size(), setup, ev, ex)), setup.layout, vals.size());
  auto want = vals;
  std::sort(want.begin(), want.end());
  EXPECT_EQ(sorted, want);
}

TEST(Compare, SortRejectsTooManyItems) {
  const auto& f = fixture(17, 307, 16, bgv::Circuit::univariate);
  const auto setup = CompareSetup::make(f.ctx, CircuitKind::univariate, 8);
  auto ev = f.evaluator();
  exec::SequentialExecutor ex;
  const auto ct = f.enc(std::vector<u64>{}, 1);
  EXPECT_THROW(sort_rank(ct, 17, setup, ev, ex), Error);
}

TEST(OpCounter, PhasesAndReset) {
  OpCounter c;
  c.bump(Phase::extraction, OpCounter::Kind::nonscalar, 3);
  c.bump(Phase::shift_add, OpCounter::Kind::rotation);
  c.record_digit_job(CircuitKind::univariate, 5);
  c.record_digit_job(CircuitKind::univariate, 2);
  EXPECT_EQ(c.total().nonscalar_mults, 3u);
  EXPECT_EQ(c.phase(Phase::shift_add).rotations, 1u);
  EXPECT_EQ(c.max_digit_job(CircuitKind::univariate), 5u);
  EXPECT_EQ(c.digit_jobs(CircuitKind::univariate), 2u);
  c.reset();
  EXPECT_EQ(c.total(), PhaseCounts{});
}

}  // namespace
}  // namespace ufhe::cmp
