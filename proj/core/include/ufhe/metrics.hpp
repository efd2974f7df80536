#pragma once

#include <chrono>
#include <cstdint>

namespace ufhe::metrics {

// Process-wide timing buckets matching the report's breakdown categories.
enum class Component : int { transform = 0, elementwise = 1, crt = 2 };

inline constexpr int kComponentCount = 3;

struct Snapshot {
  std::uint64_t nanos[kComponentCount] = {};
  std::uint64_t calls[kComponentCount] = {};

  std::uint64_t ns(Component c) const { return nanos[static_cast<int>(c)]; }
  std::uint64_t count(Component c) const { return calls[static_cast<int>(c)]; }
  Snapshot operator-(const Snapshot& o) const;
};

void record(Component c, std::uint64_t nanos) noexcept;
Snapshot snapshot() noexcept;
void reset() noexcept;

class ScopedTimer {
 public:
  explicit ScopedTimer(Component c) noexcept : c_(c), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    const auto d = std::chrono::steady_clock::now() - start_;
    record(c_, static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(d).count()));
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  Component c_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ufhe::metrics
