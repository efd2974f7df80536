#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "ufhe/error.hpp"
#include "ufhe/ring.hpp"

namespace ufhe::exec {

// Failure of a scheduled job; carries the index of the job that threw.
class WorkerPanic : public Error {
 public:
  WorkerPanic(std::size_t job, const std::string& what)
      : Error(Errc::worker_panic, "job " + std::to_string(job) + ": " + what), job_(job) {}
  std::size_t job_index() const noexcept { return job_; }

 private:
  std::size_t job_;
};

// Backend for independent jobs. Results must not depend on the backend or worker count.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual std::size_t workers() const noexcept = 0;
  // Calls job(i) for every i < count and returns after all finish.
  // Throws WorkerPanic for the lowest failing index.
  virtual void run(std::size_t count, const std::function<void(std::size_t)>& job) = 0;
  // Starts task on a helper; the future reports completion.
  virtual std::future<void> submit(std::function<void()> task) = 0;
};

// Runs everything on the calling thread, in index order.
class SequentialExecutor final : public Executor {
 public:
  std::size_t workers() const noexcept override { return 1; }
  void run(std::size_t count, const std::function<void(std::size_t)>& job) override;
  std::future<void> submit(std::function<void()> task) override;
};

struct WorkspaceShape {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::size_t transform_scratch = 0;
};

// Fixed pool of worker threads, each bound to its own preallocated Workspace.
// The calling thread also drains jobs in run(), so nested run() calls cannot deadlock.
class PoolExecutor final : public Executor {
 public:
  explicit PoolExecutor(std::size_t workers, WorkspaceShape shape = {});
  ~PoolExecutor() override;
  PoolExecutor(const PoolExecutor&) = delete;
  PoolExecutor& operator=(const PoolExecutor&) = delete;

  std::size_t workers() const noexcept override { return threads_.size(); }
  void run(std::size_t count, const std::function<void(std::size_t)>& job) override;
  std::future<void> submit(std::function<void()> task) override;

 private:
  void worker_loop(std::size_t id);

  std::vector<std::unique_ptr<ring::Workspace>> spaces_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  bool stop_ = false;
};

std::unique_ptr<Executor> make_executor(std::size_t workers, WorkspaceShape shape = {});

// Runs jobs through the executor and returns their results in job order.
template <class R>
std::vector<R> schedule(Executor& ex, const std::vector<std::function<R()>>& jobs) {
  std::vector<std::optional<R>> slots(jobs.size());
  ex.run(jobs.size(), [&](std::size_t i) { slots[i].emplace(jobs[i]()); });
  std::vector<R> out;
  out.reserve(jobs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace ufhe::exec
