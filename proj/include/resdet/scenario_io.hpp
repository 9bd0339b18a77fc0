#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resdet/detectors.hpp"
#include "resdet/sim.hpp"

namespace resdet {

/// A scenario document after parsing, tuning and model construction.
struct LoadedScenario {
  Scenario scenario;
  double far = 0.0;  ///< 0 when the detector threshold was given directly
  std::optional<CusumTuning> cusum_tuning;
  std::string direction_label;  ///< "worst", "ones", "unit-ones" or "explicit"
  bool seed_in_file = false;
  std::vector<std::string> adjustments;
};

/// Matrix from nested row arrays. Throws ScenarioError on ragged or
/// non-numeric input.
Matrix matrix_from_json(const nlohmann::json& rows, const std::string& name);
Vector vector_from_json(const nlohmann::json& values, const std::string& name);
nlohmann::json matrix_to_json(const Matrix& m);

/// Builds the plant, closed loop, detector and attack described by `doc`.
/// `default_seed` applies when the document has no sim.seed; `seed_override`
/// beats both. Structural problems raise ScenarioError, unstable models
/// ModelError.
LoadedScenario load_scenario(const nlohmann::json& doc, std::uint64_t default_seed,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

LoadedScenario load_scenario_file(const std::string& path, std::uint64_t default_seed,
                                  std::optional<std::uint64_t> seed_override = std::nullopt);

/// Parses a JSON file, raising ScenarioError for unreadable or malformed text.
nlohmann::json read_json_file(const std::string& path);

}  // namespace resdet
