#include "ufhe/pipeline.hpp"

#include <bit>

#include "ufhe/error.hpp"

namespace ufhe::pipe {

namespace {

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown exception";
  }
}

}  // namespace

HandleState CompareHandle::state() const {
  if (!s_) raise(Errc::config, "empty handle");
  std::lock_guard lock(s_->mu);
  return s_->state;
}

bool CompareHandle::consumed() const {
  if (!s_) return false;
  std::lock_guard lock(s_->mu);
  return s_->consumed;
}

Ciphertext CompareHandle::wait() {
  if (!s_) raise(Errc::config, "empty handle");
  std::unique_lock lock(s_->mu);
  if (s_->consumed) raise(Errc::already_consumed, "handle result was already taken");
  s_->cv.wait(lock, [&] { return s_->state != HandleState::pending; });
  s_->consumed = true;
  if (s_->state == HandleState::failed) raise(Errc::comparison_failed, describe(s_->error));
  Ciphertext out = std::move(*s_->result);
  s_->result.reset();
  return out;
}

Clock::time_point CompareHandle::started() const {
  std::lock_guard lock(s_->mu);
  return s_->start;
}

Clock::time_point CompareHandle::finished() const {
  std::lock_guard lock(s_->mu);
  return s_->finish;
}

CompareHandle spawn(std::function<Ciphertext()> task, exec::Executor& ex, Schedule schedule) {
  auto shared = std::make_shared<CompareHandle::Shared>();
  auto body = [shared, task = std::move(task)] {
    {
      std::lock_guard lock(shared->mu);
      shared->start = Clock::now();
    }
    std::optional<Ciphertext> result;
    std::exception_ptr error;
    try {
      result.emplace(task());
    } catch (...) {
      error = std::current_exception();
    }
    std::lock_guard lock(shared->mu);
    shared->finish = Clock::now();
    shared->result = std::move(result);
    shared->error = error;
    shared->state = error ? HandleState::failed : HandleState::ready;
    shared->cv.notify_all();
  };
  if (schedule == Schedule::serialized) {
    body();
  } else {
    // Errors are recorded in the handle, so the future carries nothing.
    (void)ex.submit(std::move(body));
  }
  return CompareHandle(std::move(shared));
}

CompareHandle spawn_compare(CompareKind kind, const Ciphertext& a, const Ciphertext& b,
                            const cmp::CompareSetup& setup, const cmp::Evaluator& ev, exec::Executor& ex,
                            Schedule schedule) {
  return spawn(
      [kind, a, b, &setup, job = ev.fork()]() mutable {
        if (kind == CompareKind::eq) return cmp::eq_ints(a, b, setup, job);
        return cmp::compare_ints(a, b, setup, job).lt;
      },
      ex, schedule);
}

u64 QueryTags::of(Query q) const noexcept {
  switch (q) {
    case Query::add: return add;
    case Query::mult: return mult;
    case Query::power: return power;
  }
  return 0;
}

std::vector<u64> encode_query(Query q, const cmp::CompareSetup& setup, const QueryTags& tags) {
  const std::vector<u64> ints(setup.layout.blocks, tags.of(q));
  return cmp::pack_ints(ints, setup.layout);
}

Ciphertext power(const Ciphertext& data, u64 e, cmp::Evaluator& ev) {
  if (e == 0) return ev.add_scalar(ev.mul_scalar(data, 0, cmp::Phase::other), 1, cmp::Phase::other);
  std::optional<Ciphertext> acc;
  Ciphertext base = data;
  for (u64 bits = e;;) {
    if (bits & 1) acc = acc ? ev.mul(*acc, base, cmp::Phase::other) : base;
    bits >>= 1;
    if (bits == 0) break;
    base = ev.square(base, cmp::Phase::other);
  }
  return *acc;
}

QueryResult private_query(const Ciphertext& q, const Ciphertext& op1, u64 op2, const Ciphertext& data,
                          const cmp::CompareSetup& setup, const cmp::Evaluator& ev, exec::Executor& ex,
                          bool nonblocking, Schedule schedule, const QueryTags& tags) {
  const auto& L = setup.layout;
  if (q.level() < 2) raise(Errc::out_of_levels, "query tag has no levels left");
  const auto t0 = Clock::now();

  // Helper leg: c_k = [q = tag_k], replicated over each block.
  auto selectors = [&q, &setup, &tags, &ev, &L]() {
    cmp::Evaluator job = ev.fork();
    std::vector<Ciphertext> out;
    for (const Query k : {Query::add, Query::mult, Query::power}) {
      const std::vector<u64> tag(L.blocks, tags.of(k));
      const Ciphertext t = bgv::trivial(bgv::encode(setup.ctx, cmp::pack_ints(tag, L)), setup.ctx, q.level());
      out.push_back(cmp::broadcast_heads(cmp::eq_ints(q, t, setup, job), L.blocks, setup, job));
    }
    return out;
  };
  Clock::time_point helper_start, helper_end;
  std::vector<Ciphertext> c;
  CompareHandle handle;
  std::shared_ptr<std::vector<Ciphertext>> rest;
  if (nonblocking) {
    rest = std::make_shared<std::vector<Ciphertext>>();
    handle = spawn(
        [selectors, rest] {
          auto all = selectors();
          rest->assign(all.begin() + 1, all.end());
          return all.front();
        },
        ex, schedule);
  } else {
    helper_start = Clock::now();
    c = selectors();
    helper_end = Clock::now();
  }

  // Main leg.
  const auto main_start = Clock::now();
  cmp::Evaluator job = ev.fork();
  std::vector<Ciphertext> branch;
  try {
    branch.push_back(job.add(data, op1, cmp::Phase::other));
    branch.push_back(job.mul(data, op1, cmp::Phase::other));
    branch.push_back(power(data, op2, job));
  } catch (...) {
    // The helper borrows this frame's arguments; let it finish before unwinding.
    if (nonblocking && !handle.consumed()) {
      try {
        handle.wait();
      } catch (...) {
      }
    }
    throw;
  }
  const auto main_end = Clock::now();

  if (nonblocking) {
    Ciphertext first = handle.wait();
    c.push_back(std::move(first));
    for (auto& x : *rest) c.push_back(std::move(x));
    helper_start = handle.started();
    helper_end = handle.finished();
  }

  Ciphertext out = job.mul(branch[0], c[0], cmp::Phase::other);
  for (std::size_t k = 1; k < 3; ++k) out = job.add(out, job.mul(branch[k], c[k], cmp::Phase::other), cmp::Phase::other);
  const auto t1 = Clock::now();
  return {std::move(out), {ms_between(helper_start, helper_end), ms_between(main_start, main_end), ms_between(t0, t1)}};
}

}  // namespace ufhe::pipe
