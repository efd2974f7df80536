#include "ufhe/executor.hpp"

#include <atomic>
#include <limits>

namespace ufhe::exec {

namespace {

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown exception";
  }
}

// Shared state of one run() call.
struct Batch {
  std::size_t count;
  const std::function<void(std::size_t)>* job;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex mu;
  std::condition_variable cv;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  void drain() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        (*job)(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
      if (done.fetch_add(1) + 1 == count) {
        std::lock_guard lock(mu);
        cv.notify_all();
      }
    }
  }
};

}  // namespace

void SequentialExecutor::run(std::size_t count, const std::function<void(std::size_t)>& job) {
  for (std::size_t i = 0; i < count; ++i) {
    try {
      job(i);
    } catch (...) {
      throw WorkerPanic(i, describe(std::current_exception()));
    }
  }
}

std::future<void> SequentialExecutor::submit(std::function<void()> task) {
  std::promise<void> done;
  try {
    task();
    done.set_value();
  } catch (...) {
    done.set_exception(std::current_exception());
  }
  return done.get_future();
}

PoolExecutor::PoolExecutor(std::size_t workers, WorkspaceShape shape) {
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) {
    auto ws = std::make_unique<ring::Workspace>();
    if (shape.rows != 0) ws->reserve(shape.rows, shape.width, shape.transform_scratch);
    spaces_.push_back(std::move(ws));
  }
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this, i] { worker_loop(i); });
}

PoolExecutor::~PoolExecutor() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void PoolExecutor::worker_loop(std::size_t id) {
  ring::Workspace::bind(spaces_[id].get());
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

void PoolExecutor::run(std::size_t count, const std::function<void(std::size_t)>& job) {
  if (count == 0) return;
  auto batch = std::make_shared<Batch>();
  batch->count = count;
  batch->job = &job;
  // The caller is one of the W workers for the duration of the batch.
  const std::size_t helpers = std::min(threads_.size() - 1, count - 1);
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < helpers; ++i) queue_.emplace_back([batch] { batch->drain(); });
  }
  cv_.notify_all();
  batch->drain();
  {
    std::unique_lock lock(batch->mu);
    batch->cv.wait(lock, [&] { return batch->done.load() == count; });
  }
  if (batch->failure) throw WorkerPanic(batch->failed_index, describe(batch->failure));
}

std::future<void> PoolExecutor::submit(std::function<void()> task) {
  auto promise = std::make_shared<std::promise<void>>();
  auto fut = promise->get_future();
  {
    std::lock_guard lock(mu_);
    queue_.emplace_back([promise, task = std::move(task)] {
      try {
        task();
        promise->set_value();
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    });
  }
  cv_.notify_one();
  return fut;
}

std::unique_ptr<Executor> make_executor(std::size_t workers, WorkspaceShape shape) {
  if (workers <= 1) return std::make_unique<SequentialExecutor>();
  return std::make_unique<PoolExecutor>(workers, shape);
}

}  // namespace ufhe::exec
