#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace dlet {

enum class Comparison { at_most, at_least, informational };

/// One measured quantity against its tolerance.
struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::at_most;

  [[nodiscard]] bool passed() const;
  /// "pass", "fail" or "informational".
  [[nodiscard]] std::string status() const;
};

struct SuiteReport {
  std::string name;
  std::vector<Check> checks;
  double runtime_s = 0.0;
  double time_limit_s = 0.0;

  [[nodiscard]] bool passed() const;
  /// Checks plus runtime, without the runtime when include_timing is false.
  [[nodiscard]] nlohmann::json to_json(bool include_timing = true) const;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = 0;
};

/// filters, reconstruction, heat_oracle, diffusionlet, self_similarity,
/// refinement, translation, cev, cir, variance_mc, sharp, covariance,
/// truncation, ou.
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown name, listing the known ones.
SuiteReport run_suite(const std::string& name, const SuiteOptions& options = {});

}  // namespace dlet
