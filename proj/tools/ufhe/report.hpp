#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ufhe/compare.hpp"
#include "ufhe/metrics.hpp"

namespace ufhe::app {

struct WallStats {
  double mean_ms = 0;
  double median_ms = 0;
  double stddev_ms = 0;
  std::vector<double> samples_ms;
};

WallStats wall_stats(std::vector<double> samples_ms);

struct Report {
  std::string command;
  std::string param_set;
  std::string circuit;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool deterministic = false;
  std::size_t reps = 0;
  WallStats wall;
  nlohmann::json op_counts = nlohmann::json::object();
  double utilization_before = 0;
  double utilization_after = 0;
  std::size_t ciphertexts_before = 0;
  std::size_t ciphertexts_after = 0;
  nlohmann::json compaction = nlohmann::json::object();
  metrics::Snapshot components;
  double total_ms = 0;
  bool verified = false;
  std::size_t checks = 0;
  std::size_t failures = 0;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json op_counts_json(const cmp::OpCounter& counter);
// Timing breakdown: transform, element-wise, CRT, and everything else of total_ms.
nlohmann::json breakdown_json(const metrics::Snapshot& s, double total_ms);
nlohmann::json to_json(const Report& r);
// Fields that are stable under a fixed seed and deterministic mode (no timings).
nlohmann::json stable_fields(const nlohmann::json& report);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace ufhe::app
