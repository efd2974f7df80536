#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "params.hpp"
#include "report.hpp"
#include "ufhe/bgv.hpp"
#include "ufhe/pipeline.hpp"
#include "ufhe/transform.hpp"

namespace ufhe::app {

struct RunOptions {
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool deterministic = false;
  double memory_limit_mb = 2048;
};

// Context, keys and the plan cache for one parameter set.
struct Session {
  ParamSet params;
  transform::PlanCache cache;
  bgv::ContextPtr ctx;
  bgv::KeySet keys;

  // Throws CapacityExceeded when the estimated key material exceeds the memory limit.
  static std::unique_ptr<Session> open(const ParamSet& ps, const RunOptions& run);
};

// Largest width <= bits whose digits fit into l slots; 0 if none.
unsigned supported_bits(unsigned bits, u64 p, std::size_t l, plain::Alphabet alphabet);

// Largest width <= bits whose comparison circuit runs within the session's levels and noise budget,
// found by trial comparisons; 0 if none.
unsigned depth_supported_bits(unsigned bits, const Session& s, cmp::CircuitKind kind);

struct BenchOptions {
  std::string param = "toy-p3-m91";
  std::optional<bgv::Circuit> circuit;
  std::size_t reps = 10;
  unsigned bits = 64;
  std::size_t pairs = 0;  // ciphertext pairs per rep; 0 picks max(8, workers)
};

Report bench_compare(const BenchOptions& opt, const RunOptions& run);

struct AppOptions {
  std::string param;  // empty picks the application's default set
  std::size_t n = 16;
  unsigned bits = 0;  // 0 picks the application's default width
  bool compaction = true;
  pipe::Query query = pipe::Query::add;
  u64 op2 = 64;
  bool nonblocking = true;
  std::size_t reps = 1;
};

Report app_sort(const AppOptions& opt, const RunOptions& run);
Report app_min(const AppOptions& opt, const RunOptions& run);
Report app_private_query(const AppOptions& opt, const RunOptions& run);

pipe::Query parse_query(const std::string& s);
std::string_view query_name(pipe::Query q) noexcept;

}  // namespace ufhe::app
