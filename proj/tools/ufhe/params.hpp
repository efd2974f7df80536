#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ufhe/bgv.hpp"

namespace ufhe::app {

enum class Source { paper, derived };

struct ParamSet {
  std::string name;
  u64 p = 0;
  u64 m = 0;
  bgv::Circuit circuit = bgv::Circuit::bivariate;
  // Slot structure of the ring: ord_m(p) and phi(m) / ord_m(p).
  std::size_t d = 0;
  std::size_t l = 0;
  int prime_bits = 59;
  std::size_t levels = 0;
  int lambda = 0;  // advisory
  Source source = Source::derived;
  // Paper rows only: the table's (d l), log2 Q and integer capacity as printed.
  std::size_t table_d = 0;
  std::size_t table_l = 0;
  int table_log_q = 0;
  std::size_t table_ints = 0;
  std::string note;
};

std::string_view source_name(Source s) noexcept;
std::string_view circuit_name(bgv::Circuit c) noexcept;
bgv::Circuit parse_circuit(const std::string& s);

// Derived toy sets used by the tests and applications, followed by the twenty paper rows.
const std::vector<ParamSet>& builtin_param_sets();
// Searches sets added through register_param_sets (latest first), then the builtins.
const ParamSet& find_param_set(const std::string& name);
void register_param_sets(const std::vector<ParamSet>& sets);
const ParamSet* find_param_set(const std::vector<ParamSet>& sets, const std::string& name);

nlohmann::json to_json(const ParamSet& ps);
ParamSet param_set_from_json(const nlohmann::json& j);
// Accepts an array of sets or an object with a "params" array.
std::vector<ParamSet> load_param_sets(const std::string& path);
std::vector<ParamSet> param_sets_from_json(const nlohmann::json& j);

struct Validation {
  bool ok = true;
  std::vector<std::string> problems;
  std::size_t ring_d = 0;
  std::size_t ring_l = 0;
};

// Number theory checks for every set; derived sets also rebuild the slot algebra and compare (d, l).
Validation validate(const ParamSet& ps);

bgv::ParamsSpec to_spec(const ParamSet& ps);

// Rough key material size: relinearization plus Galois keys, in bytes.
double estimated_key_bytes(const ParamSet& ps);

}  // namespace ufhe::app
