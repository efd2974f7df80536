#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ufhe::app {

struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t failed = 0;
};

struct SelftestOptions {
  // Corrupts one chirp entry of the transform plans under test.
  bool inject_plan_fault = false;
  std::uint64_t seed = 1;
};

std::vector<SuiteResult> run_selftest(const SelftestOptions& opt);
nlohmann::json to_json(const std::vector<SuiteResult>& suites);
bool all_passed(const std::vector<SuiteResult>& suites);

}  // namespace ufhe::app
