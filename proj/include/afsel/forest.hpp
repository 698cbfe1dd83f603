#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "afsel/acquisition.hpp"
#include "afsel/ela.hpp"
#include "afsel/engine.hpp"

namespace afsel::rf {

inline constexpr int kTargetCount = af::kScheduleCount;
using Targets = std::array<double, kTargetCount>;

struct DatasetRow {
  int function_id = 0;
  int instance_id = 0;
  int seed = 0;
  ela::FeatureVector features;
  Targets targets{};
  bool train = true;
};

struct Dataset {
  int schema_version = 1;
  std::vector<DatasetRow> rows;  // sorted by (function_id, instance_id, seed)
  std::map<int, std::pair<double, double>> regret_range;  // per function: [min, max] log regret
  std::vector<std::string> flags;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.7;
};

// Collapses run records into one row per (function, instance, seed): the
// shared features plus the 7 schedule targets, min-max normalised per
// function over all of that function's final log-regrets.  Rows missing a
// schedule are dropped with a flag.  The train/test split is seeded and
// stratified by (function, instance).
Dataset build_dataset(const std::vector<engine::RunRecord>& records, std::uint64_t split_seed,
                      double train_fraction = 0.7);

struct ForestConfig {
  int trees = 100;
  int min_leaf = 1;
  int max_depth = 0;           // 0 = unlimited
  int features_per_split = 0;  // 0 = ceil(sqrt(feature count))
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Targets value{};
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct Forest {
  int schema_version = 1;
  ForestConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  std::vector<double> imputation;  // per-feature training median
  std::vector<Tree> trees;
};

// Multi-target regression forest over the training rows: bootstrap per tree,
// greedy splits maximising summed per-target variance reduction.  Rows are
// canonically sorted before bootstrapping, so training is invariant to input
// row order.  NaN features are imputed with training medians.
Forest train_forest(const Dataset& dataset, const ForestConfig& config, std::uint64_t seed);

Targets predict_forest(const Forest& forest, const ela::FeatureVector& features);

// Index of the smallest entry; ties resolve to the earliest (canonical
// portfolio order).
int best_index(std::span<const double> values);

int select_index(const Forest& forest, const ela::FeatureVector& features);
af::ScheduleId select_schedule(const Forest& forest, const ela::FeatureVector& features);
af::ScheduleId vbs(const Targets& targets);

nlohmann::json to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j);
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

nlohmann::json to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace afsel::rf
