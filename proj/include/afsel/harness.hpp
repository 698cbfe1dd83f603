#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "afsel/analytics.hpp"
#include "afsel/config.hpp"
#include "afsel/forest.hpp"

namespace afsel::harness {

struct RunSummary {
  int executed = 0;
  int skipped = 0;  // already present in the output directory
  int failed = 0;
};

// Executes the config's full cross product functions x instances x dims x
// seeds x schedules with a bounded worker pool.  Each worker appends finished
// runs to its own part file; the parts are merged into records.jsonl at the
// end.  Keys already present in the directory are skipped, which makes an
// interrupted experiment resumable.  Per-run failures land in failures.log
// and do not stop the matrix.
RunSummary run_experiments(const config::ExperimentConfig& cfg);

struct PipelineConfig {
  std::filesystem::path runs_dir;
  std::filesystem::path out_dir;
  std::uint64_t split_seed = 1;
  double train_fraction = 0.7;
  std::uint64_t forest_seed = 1;
  rf::ForestConfig forest;
  std::optional<std::filesystem::path> model_path;  // reuse a trained model
  analytics::ConvergenceConfig convergence;
};

struct PipelineResult {
  rf::Dataset dataset;
  rf::Forest forest;
  analytics::PerformanceTable table;       // test rows only
  std::vector<analytics::RankRow> ranks;   // test rows only
  analytics::ConvergenceSummary convergence;
};

// Records -> dataset -> forest -> selector evaluation on held-out rows.
// Writes model.json, final_regret.csv, ranks.csv and convergence.csv into
// out_dir.  Normalisation bounds come from every run of a function, so the
// reported values match the dataset targets; only held-out rows are reported.
PipelineResult pipeline(const PipelineConfig& cfg);

}  // namespace afsel::harness
