#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "support.hpp"
#include "ufhe/error.hpp"
#include "ufhe/executor.hpp"
#include "ufhe/pipeline.hpp"

namespace ufhe::pipe {
namespace {

using test::fixture;
using test::random_slots;

TEST(Executor, ResultsIndependentOfWorkers) {
  std::vector<std::function<u64()>> jobs;
  for (u64 i = 0; i < 40; ++i) jobs.emplace_back([i] { return splitmix64(i); });
  exec::SequentialExecutor seq;
  exec::PoolExecutor pool(4);
  EXPECT_EQ(exec::schedule(seq, jobs), exec::schedule(pool, jobs));
}

TEST(Executor, ReportsLowestFailingJob) {
  exec::PoolExecutor pool(3);
  std::atomic<int> ran{0};
  try {
    pool.run(20, [&](std::size_t i) {
      ++ran;
      if (i == 7 || i == 13) throw std::runtime_error("boom " + std::to_string(i));
    });
    FAIL();
  } catch (const exec::WorkerPanic& e) {
    EXPECT_EQ(e.job_index(), 7u);
  }
  EXPECT_EQ(ran.load(), 20);
}

TEST(Executor, NestedRunsComplete) {
  exec::PoolExecutor pool(2);
  std::atomic<int> total{0};
  pool.run(4, [&](std::size_t) { pool.run(4, [&](std::size_t) { ++total; }); });
  EXPECT_EQ(total.load(), 16);
}

TEST(Handle, SingleConsumer) {
  const auto& f = fixture(3, 91, 5);
  const auto ct = f.enc(std::vector<u64>{1}, 1);
  exec::PoolExecutor pool(2);
  auto h = spawn([ct] { return ct; }, pool);
  EXPECT_EQ(h.wait(), ct);
  EXPECT_TRUE(h.consumed());
  EXPECT_EQ(h.state(), HandleState::ready);
  EXPECT_LE(h.started(), h.finished());
  try {
    h.wait();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::already_consumed);
  }
}

TEST(Handle, FailurePropagates) {
  exec::PoolExecutor pool(2);
  auto h = spawn([]() -> Ciphertext { throw std::runtime_error("helper failed"); }, pool);
  try {
    h.wait();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::comparison_failed);
  }
  EXPECT_EQ(h.state(), HandleState::failed);
}

TEST(Handle, SerializedRunsInline) {
  const auto& f = fixture(3, 91, 5);
  const auto ct = f.enc(std::vector<u64>{2}, 2);
  exec::PoolExecutor pool(2);
  const auto caller = std::this_thread::get_id();
  std::thread::id ran_on;
  auto h = spawn(
      [&] {
        ran_on = std::this_thread::get_id();
        return ct;
      },
      pool, Schedule::serialized);
  EXPECT_EQ(h.state(), HandleState::ready);
  EXPECT_EQ(ran_on, caller);
  EXPECT_EQ(h.wait(), ct);
}

TEST(SpawnCompare, MatchesDirectComparison) {
  const auto& f = fixture(3, 121, 10);
  const auto setup = cmp::CompareSetup::make(f.ctx, cmp::CircuitKind::bivariate, 6);
  const std::vector<u64> a{1, 40, 63, 7, 0}, b{2, 40, 10, 9, 0};
  const auto ca = f.enc(cmp::pack_ints(a, setup.layout), 1), cb = f.enc(cmp::pack_ints(b, setup.layout), 2);
  const auto ev = f.evaluator();
  exec::PoolExecutor pool(2);
  auto lt = spawn_compare(CompareKind::lt, ca, cb, setup, ev, pool);
  auto eq = spawn_compare(CompareKind::eq, ca, cb, setup, ev, pool);
  EXPECT_EQ(cmp::head_values(f.dec(lt.wait()), setup.layout, 5), (std::vector<u64>{1, 0, 0, 1, 0}));
  EXPECT_EQ(cmp::head_values(f.dec(eq.wait()), setup.layout, 5), (std::vector<u64>{0, 1, 0, 0, 1}));
}

class PrivateQuery : public ::testing::TestWithParam<std::tuple<Query, bool>> {};

TEST_P(PrivateQuery, SelectsTheQueriedBranch) {
  const auto [query, nonblocking] = GetParam();
  const auto& f = fixture(3, 121, 10);
  const auto setup = cmp::CompareSetup::make(f.ctx, cmp::CircuitKind::bivariate, 2);
  const std::size_t used = setup.layout.blocks * setup.layout.width;
  Prng rng(9);
  const auto data = random_slots(f.ctx->l(), 3, rng), op1 = random_slots(f.ctx->l(), 3, rng);
  const u64 op2 = 5;
  const auto q = f.enc(encode_query(query, setup), 3);
  const auto ev = f.evaluator();
  exec::PoolExecutor pool(2);
  const auto r = private_query(q, f.enc(op1, 4), op2, f.enc(data, 5), setup, ev, pool, nonblocking);
  const auto got = f.dec(r.ct);
  for (std::size_t i = 0; i < used; ++i) {
    u64 want = 0;
    switch (query) {
      case Query::add: want = (data[i] + op1[i]) % 3; break;
      case Query::mult: want = data[i] * op1[i] % 3; break;
      case Query::power: want = data[i] == 0 ? 0 : (data[i] == 1 ? 1 : 2); break;  // 2^5 = 2 mod 3
    }
    ASSERT_EQ(got[i], want) << i;
  }
  EXPECT_GT(r.timing.helper_ms, 0.0);
  EXPECT_GT(r.timing.main_ms, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Modes, PrivateQuery,
                         ::testing::Combine(::testing::Values(Query::add, Query::mult, Query::power),
                                            ::testing::Bool()));

TEST(PrivateQuery, BlockingAndNonblockingAgree) {
  const auto& f = fixture(3, 121, 10);
  const auto setup = cmp::CompareSetup::make(f.ctx, cmp::CircuitKind::bivariate, 2);
  const auto q = f.enc(encode_query(Query::mult, setup), 6);
  const auto data = f.enc(std::vector<u64>(22, 2), 7), op1 = f.enc(std::vector<u64>(22, 2), 8);
  const auto ev = f.evaluator();
  exec::PoolExecutor pool(2);
  const auto a = private_query(q, op1, 3, data, setup, ev, pool, true);
  const auto b = private_query(q, op1, 3, data, setup, ev, pool, false);
  EXPECT_EQ(a.ct, b.ct);
}

TEST(Power, SquareAndMultiply) {
  const auto& f = fixture(5, 31, 8);
  const std::vector<u64> v{0, 1, 2, 3, 4};
  const auto ct = f.enc(v, 1);
  auto ev = f.evaluator();
  for (const u64 e : {1ULL, 2ULL, 7ULL, 64ULL}) {
    const auto got = f.dec(power(ct, e, ev));
    for (std::size_t i = 0; i < v.size(); ++i) {
      u64 want = 1;
      for (u64 k = 0; k < e; ++k) want = want * v[i] % 5;
      ASSERT_EQ(got[i], want) << e;
    }
  }
}

}  // namespace
}  // namespace ufhe::pipe
