#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "afsel/acquisition.hpp"
#include "afsel/engine.hpp"

namespace afsel::config {

struct ExperimentConfig {
  std::vector<int> functions;
  std::vector<int> instances;
  std::vector<int> dims;
  std::vector<int> seeds;
  std::vector<af::Schedule> schedules;  // canonical-order subset, default all 7
  engine::EngineConfig engine;
  int parallelism = 1;
  std::filesystem::path output_dir = "runs";
};

// Parses a JSON experiment description.  `seeds` may be a count (expanded to
// 0..n-1) or an explicit list; every other list is explicit.  Missing
// optional sections keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Reads the file and applies the AFSEL_OUTPUT_DIR / AFSEL_PARALLELISM
// environment overrides.
ExperimentConfig load_config(const std::filesystem::path& path);

void apply_env_overrides(ExperimentConfig& cfg);

// Throws std::invalid_argument when selections are empty or reference
// unknown functions/schedules.
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace afsel::config
