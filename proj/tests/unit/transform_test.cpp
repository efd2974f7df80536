#include <gtest/gtest.h>

#include <numeric>

#include "ufhe/arith.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/transform.hpp"

namespace ufhe::transform {
namespace {

using arith::Modulus;

std::vector<u64> random_vec(std::size_t n, u64 q, Prng& rng) {
  std::vector<u64> v(n);
  for (auto& x : v) x = rng.uniform(q);
  return v;
}

// Direct O(m^2) evaluation at omega^j.
std::vector<u64> naive_dft(const std::vector<u64>& a, u64 omega, u64 m, const Modulus& q) {
  std::vector<u64> out(m, 0);
  for (u64 j = 0; j < m; ++j) {
    const u64 w = arith::pow_mod(omega, j, q);
    u64 acc = 0;
    for (std::size_t i = a.size(); i-- > 0;) acc = arith::add_mod(arith::mul_mod(acc, w, q), a[i], q);
    out[j] = acc;
  }
  return out;
}

std::vector<u64> schoolbook_mod_phi(const std::vector<u64>& a, const std::vector<u64>& b,
                                    const std::vector<u64>& phi, const Modulus& q) {
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

TEST(Ntt, RoundTripAndCyclicConvolution) {
  const auto basis = arith::gen_ntt_primes(31, 64, 59, 1);
  const NttTables t(64, basis[0]);
  Prng rng(1);
  const auto a = random_vec(64, basis[0].value(), rng), b = random_vec(64, basis[0].value(), rng);
  EXPECT_EQ(ntt_pow2(ntt_pow2(a, t, Direction::forward), t, Direction::inverse), a);
  auto fa = ntt_pow2(a, t, Direction::forward), fb = ntt_pow2(b, t, Direction::forward);
  for (std::size_t i = 0; i < 64; ++i) fa[i] = arith::mul_mod(fa[i], fb[i], basis[0]);
  const auto c = ntt_pow2(fa, t, Direction::inverse);
  for (std::size_t k = 0; k < 64; ++k) {
    u64 want = 0;
    for (std::size_t i = 0; i < 64; ++i) want = arith::add_mod(want, arith::mul_mod(a[i], b[(k + 64 - i) % 64], basis[0]), basis[0]);
    ASSERT_EQ(c[k], want);
  }
  EXPECT_EQ(ntt_pow2(a, t, Direction::forward), naive_dft(a, t.root(), 64, basis[0]));
}

TEST(Ntt, BitReverseIsInvolution) {
  std::vector<u64> v(16);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  bit_reverse_permute(w);
  EXPECT_EQ(w[1], 8u);
  EXPECT_EQ(w[3], 12u);
  bit_reverse_permute(w);
  EXPECT_EQ(w, v);
}

class Bluestein : public ::testing::TestWithParam<u64> {};

TEST_P(Bluestein, MatchesDirectDft) {
  const u64 m = GetParam();
  const auto basis = arith::gen_ntt_primes(m, next_pow2(2 * m - 1), 59, 1);
  const BluesteinPlan plan(m, basis[0]);
  Prng rng(m);
  const auto a = random_vec(m, basis[0].value(), rng);
  EXPECT_EQ(bluestein_dft(a, plan, Direction::forward), naive_dft(a, plan.omega(), m, basis[0]));
  EXPECT_EQ(bluestein_dft(bluestein_dft(a, plan, Direction::forward), plan, Direction::inverse), a);
}

TEST_P(Bluestein, EvalIsValuesAtPrimitiveRoots) {
  const u64 m = GetParam();
  const auto basis = arith::gen_ntt_primes(m, next_pow2(2 * m - 1), 59, 1);
  const BluesteinPlan plan(m, basis[0]);
  Prng rng(m + 1);
  const auto a = random_vec(plan.n(), basis[0].value(), rng);
  const auto full = naive_dft(a, plan.omega(), m, basis[0]);
  std::vector<u64> want;
  for (u64 j = 1; j < m; ++j)
    if (arith::gcd(j, m) == 1) want.push_back(full[j]);
  EXPECT_EQ(to_eval(a, plan), want);
  EXPECT_EQ(from_eval(want, plan), a);
}

TEST_P(Bluestein, PointwiseProductIsRingProduct) {
  const u64 m = GetParam();
  const auto basis = arith::gen_ntt_primes(m, next_pow2(2 * m - 1), 59, 3);
  for (const auto& q : basis.primes()) {
    const BluesteinPlan plan(m, q);
    Prng rng(q.value());
    const auto a = random_vec(plan.n(), q.value(), rng), b = random_vec(plan.n(), q.value(), rng);
    auto ea = to_eval(a, plan);
    const auto eb = to_eval(b, plan);
    for (std::size_t i = 0; i < ea.size(); ++i) ea[i] = arith::mul_mod(ea[i], eb[i], q);
    ASSERT_EQ(from_eval(ea, plan), schoolbook_mod_phi(a, b, plan.phi_m(), q));
  }
}

TEST_P(Bluestein, FilterMatchesReference) {
  const u64 m = GetParam();
  const auto basis = arith::gen_ntt_primes(m, next_pow2(2 * m - 1), 59, 1);
  const BluesteinPlan plan(m, basis[0]);
  Prng rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto v = random_vec(m, basis[0].value(), rng);
    ASSERT_EQ(zmstar_filter(v, plan), zmstar_filter_reference(v, plan));
  }
  std::size_t count = 0;
  for (u64 j = 0; j < m; ++j) count += plan.in_zmstar()[j];
  EXPECT_EQ(count, plan.n());
  EXPECT_EQ(count, arith::euler_phi(m));
}

INSTANTIATE_TEST_SUITE_P(Rings, Bluestein, ::testing::Values(31, 61, 91, 121, 257));

TEST(Bluestein, FaultInjectionBreaksRoundTrip) {
  const auto basis = arith::gen_ntt_primes(91, 256, 59, 1);
  BluesteinPlan plan(91, basis[0]);
  Prng rng(8);
  const auto a = random_vec(plan.n(), basis[0].value(), rng);
  plan.inject_fault();
  EXPECT_NE(from_eval(to_eval(a, plan), plan), a);
}

TEST(PlanCache, BuildsEachKeyOnce) {
  PlanCache cache;
  const auto basis = arith::gen_ntt_primes(91, 256, 59, 2);
  const auto p1 = cache.get(91, basis[0]);
  const auto p2 = cache.get(91, basis[0]);
  EXPECT_EQ(p1.get(), p2.get());
  cache.get(91, basis[1]);
  EXPECT_EQ(cache.build_count(91, basis[0].value()), 1u);
  EXPECT_EQ(cache.build_count(91, basis[1].value()), 1u);
  EXPECT_EQ(cache.build_count(), 2u);
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_TRUE(*p1 == BluesteinPlan(91, basis[0]));
}

}  // namespace
}  // namespace ufhe::transform
