#pragma once

#include <chrono>
#include <condition_variable>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>

#include "ufhe/bgv.hpp"
#include "ufhe/compare.hpp"
#include "ufhe/executor.hpp"

namespace ufhe::pipe {

using bgv::Ciphertext;
using Clock = std::chrono::steady_clock;

enum class HandleState { pending, ready, failed };

// Serialized runs the helper inline at spawn, so helper and main path never interleave.
enum class Schedule { concurrent, serialized };

// Deferred result of a comparison running on a helper worker. Single consumer.
class CompareHandle {
 public:
  CompareHandle() = default;

  HandleState state() const;
  bool consumed() const;
  // Blocks until the helper finishes. Throws AlreadyConsumed on a second call and
  // ComparisonFailed when the helper threw.
  Ciphertext wait();

  Clock::time_point started() const;
  Clock::time_point finished() const;

 private:
  struct Shared {
    mutable std::mutex mu;
    std::condition_variable cv;
    HandleState state = HandleState::pending;
    std::optional<Ciphertext> result;
    std::exception_ptr error;
    bool consumed = false;
    Clock::time_point start, finish;
  };

  explicit CompareHandle(std::shared_ptr<Shared> s) : s_(std::move(s)) {}
  friend CompareHandle spawn(std::function<Ciphertext()> task, exec::Executor& ex, Schedule schedule);

  std::shared_ptr<Shared> s_;
};

// Runs task on a helper from ex and returns immediately (concurrent) or after it ran (serialized).
CompareHandle spawn(std::function<Ciphertext()> task, exec::Executor& ex, Schedule schedule = Schedule::concurrent);

enum class CompareKind { eq, lt };

// Integer comparison on a helper; the result is valid at block heads.
CompareHandle spawn_compare(CompareKind kind, const Ciphertext& a, const Ciphertext& b,
                            const cmp::CompareSetup& setup, const cmp::Evaluator& ev, exec::Executor& ex,
                            Schedule schedule = Schedule::concurrent);

enum class Query { add, mult, power };

// Digit-coded query tags compared as integers of setup.layout.
struct QueryTags {
  u64 add = 1;
  u64 mult = 2;
  u64 power = 3;

  u64 of(Query q) const noexcept;
};

// Slot vector holding the tag of q in every block.
std::vector<u64> encode_query(Query q, const cmp::CompareSetup& setup, const QueryTags& tags = {});

struct QueryTiming {
  double helper_ms = 0;
  double main_ms = 0;
  double total_ms = 0;
};

struct QueryResult {
  Ciphertext ct;
  QueryTiming timing;
};

// Selects Data + op1, Data * op1 or Data^op2 by the encrypted tag q. The tag matches run on a helper
// when nonblocking, otherwise before the main path. Valid on the first blocks * width slots.
QueryResult private_query(const Ciphertext& q, const Ciphertext& op1, u64 op2, const Ciphertext& data,
                          const cmp::CompareSetup& setup, const cmp::Evaluator& ev, exec::Executor& ex,
                          bool nonblocking, Schedule schedule = Schedule::concurrent, const QueryTags& tags = {});

// Data^e by square-and-multiply.
Ciphertext power(const Ciphertext& data, u64 e, cmp::Evaluator& ev);

}  // namespace ufhe::pipe
