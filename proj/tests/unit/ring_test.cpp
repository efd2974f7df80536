#include <gtest/gtest.h>

#include "ufhe/arith.hpp"
#include "ufhe/ring.hpp"
#include "ufhe/transform.hpp"
#include "ufhe/rng.hpp"

namespace ufhe::ring {
namespace {

RingPtr make_ring(u64 m, std::size_t primes, transform::PlanCache& cache) {
  return std::make_shared<const RingContext>(m, arith::gen_ntt_primes(m, transform::next_pow2(2 * m - 1), 59, primes),
                                             cache);
}

class Staging : public ::testing::TestWithParam<std::size_t> {};

TEST_P(Staging, FusedMatchesRowByRow) {
  const std::size_t levels = GetParam();
  transform::PlanCache cache;
  const auto ctx = make_ring(91, levels + 1, cache);
  Prng rng(levels);
  for (int i = 0; i < 100; ++i) {
    const auto a = sample(SampleKind::uniform, ctx, levels + 1, rng);
    const auto b = sample(SampleKind::uniform, ctx, levels + 1, rng);
    for (const auto op : {ElementOp::add, ElementOp::sub, ElementOp::mul})
      ASSERT_EQ(elementwise(op, a, b), elementwise_reference(op, a, b));
  }
}

INSTANTIATE_TEST_SUITE_P(Levels, Staging, ::testing::Values(2, 5, 10));

TEST(Ring, SignedRoundTrip) {
  transform::PlanCache cache;
  const auto ctx = make_ring(31, 3, cache);
  Prng rng(1);
  std::vector<std::int64_t> c(ctx->n());
  for (auto& v : c) v = static_cast<std::int64_t>(rng.uniform(2001)) - 1000;
  const auto a = from_signed(ctx, 3, c);
  const auto back = compose(convert(convert(a, Rep::eval), Rep::coeff));
  for (std::size_t i = 0; i < c.size(); ++i) ASSERT_EQ(back[i], BigInt(c[i]));
}

TEST(Ring, SamplersRespectBounds) {
  transform::PlanCache cache;
  const auto ctx = make_ring(91, 2, cache);
  const auto t = compose(sample(SampleKind::ternary, ctx, 2, 5));
  const auto e = compose(sample(SampleKind::error, ctx, 2, 6));
  for (const auto& v : t) ASSERT_LE(abs(v), 1);
  for (const auto& v : e) ASSERT_LE(abs(v), kErrorBound);
}

TEST(Ring, AutomorphismMatchesCoefficientMap) {
  transform::PlanCache cache;
  const u64 m = 91;
  const auto ctx = make_ring(m, 1, cache);
  const auto& q = ctx->prime(0);
  const auto phi = transform::cyclotomic_poly(m, q);
  Prng rng(2);
  const auto a = sample(SampleKind::uniform, ctx, 1, rng);
  const auto coeffs = convert(a, Rep::coeff);
  for (const u64 t : {3ULL, 9ULL, 90ULL}) {
    // a(x^t) as a polynomial of degree < m, then reduced modulo Phi_m.
    std::vector<u64> big(m, 0);
    for (std::size_t i = 0; i < ctx->n(); ++i)
      big[i * t % m] = arith::add_mod(big[i * t % m], coeffs.row(0)[i], q);
    for (std::size_t k = m - 1; k >= ctx->n(); --k) {
      const u64 c = big[k];
      for (std::size_t i = 0; i <= ctx->n(); ++i)
        big[k - ctx->n() + i] = arith::sub_mod(big[k - ctx->n() + i], arith::mul_mod(c, phi[i], q), q);
    }
    big.resize(ctx->n());
    const auto got = convert(automorphism(a, t), Rep::coeff);
    ASSERT_TRUE(std::equal(big.begin(), big.end(), got.row(0).begin())) << t;
  }
}

TEST(Ring, ModSwitchDropsWithSmallCorrection) {
  transform::PlanCache cache;
  const auto ctx = make_ring(31, 3, cache);
  const u64 p = 5;
  Prng rng(3);
  const auto a = convert(sample(SampleKind::uniform, ctx, 3, rng), Rep::coeff);
  const auto r = mod_switch_drop(a, p);
  ASSERT_EQ(r.active(), 2u);
  EXPECT_EQ(convert(mod_switch_drop_eval(convert(a, Rep::eval), p), Rep::coeff), r);
  const BigInt q_last = ctx->prime(2).value();
  const BigInt& big_q = ctx->level_basis(3).big_q();
  const auto A = compose(a), R = compose(r);
  for (std::size_t i = 0; i < A.size(); ++i) {
    BigInt delta = (A[i] - q_last * R[i]) % big_q;
    if (delta > big_q / 2) delta -= big_q;
    if (delta < -big_q / 2) delta += big_q;
    ASSERT_EQ(delta % p, 0);
    ASSERT_LE(abs(delta), q_last * p);
  }
}

TEST(Ring, DropKeepsLeadingRows) {
  transform::PlanCache cache;
  const auto ctx = make_ring(31, 4, cache);
  const auto a = sample(SampleKind::uniform, ctx, 4, 9);
  const auto d = drop_to(a, 2);
  ASSERT_EQ(d.active(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_TRUE(std::ranges::equal(d.row(i), a.row(i)));
}

TEST(Ring, ScalarOps) {
  transform::PlanCache cache;
  const auto ctx = make_ring(31, 2, cache);
  std::vector<std::int64_t> c(ctx->n(), 0);
  c[0] = 3;
  c[5] = -2;
  const auto a = from_signed(ctx, 2, c);
  const auto back = compose(mul_scalar(a, -7));
  EXPECT_EQ(back[0], -21);
  EXPECT_EQ(back[5], 14);
  EXPECT_EQ(compose(negate(a))[5], 2);
}

}  // namespace
}  // namespace ufhe::ring
