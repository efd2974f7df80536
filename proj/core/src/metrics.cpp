#include "ufhe/metrics.hpp"

#include <atomic>

namespace ufhe::metrics {

namespace {

std::atomic<std::uint64_t> g_nanos[kComponentCount];
std::atomic<std::uint64_t> g_calls[kComponentCount];

}  // namespace

Snapshot Snapshot::operator-(const Snapshot& o) const {
  Snapshot d;
  for (int i = 0; i < kComponentCount; ++i) {
    d.nanos[i] = nanos[i] - o.nanos[i];
    d.calls[i] = calls[i] - o.calls[i];
  }
  return d;
}

void record(Component c, std::uint64_t nanos) noexcept {
  const int i = static_cast<int>(c);
  g_nanos[i].fetch_add(nanos, std::memory_order_relaxed);
  g_calls[i].fetch_add(1, std::memory_order_relaxed);
}

Snapshot snapshot() noexcept {
  Snapshot s;
  for (int i = 0; i < kComponentCount; ++i) {
    s.nanos[i] = g_nanos[i].load(std::memory_order_relaxed);
    s.calls[i] = g_calls[i].load(std::memory_order_relaxed);
  }
  return s;
}

void reset() noexcept {
  for (int i = 0; i < kComponentCount; ++i) {
    g_nanos[i].store(0, std::memory_order_relaxed);
    g_calls[i].store(0, std::memory_order_relaxed);
  }
}

}  // namespace ufhe::metrics
