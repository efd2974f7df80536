#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ufhe/error.hpp"

namespace ufhe::app {

WallStats wall_stats(std::vector<double> samples_ms) {
  WallStats w;
  w.samples_ms = samples_ms;
  if (samples_ms.empty()) return w;
  const double n = static_cast<double>(samples_ms.size());
  w.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / n;
  double var = 0;
  for (const double s : samples_ms) var += (s - w.mean_ms) * (s - w.mean_ms);
  w.stddev_ms = samples_ms.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  std::sort(samples_ms.begin(), samples_ms.end());
  const std::size_t k = samples_ms.size();
  w.median_ms = k % 2 == 1 ? samples_ms[k / 2] : (samples_ms[k / 2 - 1] + samples_ms[k / 2]) / 2;
  return w;
}

nlohmann::json op_counts_json(const cmp::OpCounter& counter) {
  nlohmann::json j = nlohmann::json::object();
  const auto one = [](const cmp::PhaseCounts& c) {
    return nlohmann::json{{"nonscalar_mults", c.nonscalar_mults},
                          {"scalar_mults", c.scalar_mults},
                          {"adds", c.adds},
                          {"rotations", c.rotations}};
  };
  for (std::size_t i = 0; i < cmp::kPhaseCount; ++i) {
    const auto ph = static_cast<cmp::Phase>(i);
    j[std::string(cmp::phase_name(ph))] = one(counter.phase(ph));
  }
  j["total"] = one(counter.total());
  for (const auto kind : {cmp::CircuitKind::bivariate, cmp::CircuitKind::univariate}) {
    if (counter.digit_jobs(kind) == 0) continue;
    j["digit_jobs"][std::string(cmp::circuit_name(kind))] = {{"jobs", counter.digit_jobs(kind)},
                                                             {"max_nonscalar_mults", counter.max_digit_job(kind)}};
  }
  return j;
}

nlohmann::json breakdown_json(const metrics::Snapshot& s, double total_ms) {
  const auto ms = [&](metrics::Component c) { return static_cast<double>(s.ns(c)) / 1e6; };
  const double t = ms(metrics::Component::transform), e = ms(metrics::Component::elementwise),
               c = ms(metrics::Component::crt);
  return {{"transform_ms", t}, {"elementwise_ms", e}, {"crt_ms", c}, {"other_ms", std::max(0.0, total_ms - t - e - c)}};
}

nlohmann::json to_json(const Report& r) {
  return {{"command", r.command},
          {"param_set", r.param_set},
          {"circuit", r.circuit},
          {"seed", r.seed},
          {"workers", r.workers},
          {"deterministic", r.deterministic},
          {"reps", r.reps},
          {"wall_clock",
           {{"mean_ms", r.wall.mean_ms},
            {"median_ms", r.wall.median_ms},
            {"stddev_ms", r.wall.stddev_ms},
            {"samples_ms", r.wall.samples_ms}}},
          {"op_counts", r.op_counts},
          {"slot_utilization", {{"before", r.utilization_before}, {"after", r.utilization_after}}},
          {"ciphertext_counts", {{"before", r.ciphertexts_before}, {"after", r.ciphertexts_after}}},
          {"compaction", r.compaction},
          {"timing_breakdown", breakdown_json(r.components, r.total_ms)},
          {"verification", {{"passed", r.verified}, {"checks", r.checks}, {"failures", r.failures}}},
          {"status", r.verified ? "verified" : "failed"},
          {"extra", r.extra}};
}

namespace {

void strip_timings(nlohmann::json& j) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end();) {
    const std::string& k = it.key();
    if (k.size() > 3 && k.compare(k.size() - 3, 3, "_ms") == 0) {
      it = j.erase(it);
    } else {
      strip_timings(*it);
      ++it;
    }
  }
}

}  // namespace

nlohmann::json stable_fields(const nlohmann::json& report) {
  nlohmann::json j = report;
  j.erase("wall_clock");
  j.erase("timing_breakdown");
  strip_timings(j);
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) raise(Errc::config, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace ufhe::app
