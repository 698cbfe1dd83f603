#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "afsel/acquisition.hpp"
#include "afsel/engine.hpp"

namespace afsel::analytics {

struct RunId {
  int function_id = 0;
  int instance_id = 0;
  int seed = 0;

  auto operator<=>(const RunId&) const = default;
};

// One run key with its 7 final log-regrets in canonical schedule order, plus
// the selector's choice (-1 when no selector applies to this row).
struct RawRow {
  RunId id;
  std::array<double, af::kScheduleCount> log_regret{};
  int afs_index = -1;
};

struct PerformanceRow {
  RunId id;
  std::array<double, af::kScheduleCount> values{};  // normalised to [0,1] per function
  int afs_index = -1;
  double afs_value = 0.0;  // value of the chosen schedule; NaN when afs_index < 0
  int vbs_index = 0;
  double vbs_value = 0.0;  // row minimum
};

struct PerformanceTable {
  std::vector<PerformanceRow> rows;
  std::map<int, std::pair<double, double>> ranges;  // per function: raw [min, max]
  std::vector<std::string> flags;
};

// Min-max normalises the final log-regrets to [0,1] per function, over every
// run and schedule of that function in the input.  A function whose values
// are all equal is filled with 0.5 and flagged.
PerformanceTable normalize_per_function(const std::vector<RawRow>& rows);

struct RankRow {
  RunId id;
  std::array<double, af::kScheduleCount> ranks{};  // tie-averaged, sum 28
  double afs_rank = 0.0;                           // NaN when no selector choice
  double vbs_rank = 0.0;
};

// Ascending tie-averaged ranks of 7 values (lower value = rank 1).
std::array<double, af::kScheduleCount> rank_values(
    const std::array<double, af::kScheduleCount>& values);

// Ranks one run: the 7 schedule ranks, the selector's inherited rank, and the
// oracle's rank (the row minimum's rank).
RankRow rank_per_run(const RunId& id, const std::array<double, af::kScheduleCount>& values,
                     int afs_index);

enum class CiMethod { normal, bootstrap };

struct ConvergenceConfig {
  CiMethod ci = CiMethod::normal;
  int bootstrap_samples = 1000;
  std::uint64_t bootstrap_seed = 17;
};

struct ConvergencePoint {
  int iteration = 0;
  double mean = 0.0;
  double ci_low = 0.0;   // NaN when fewer than 2 runs cover the iteration
  double ci_high = 0.0;  // NaN when fewer than 2 runs cover the iteration
  int runs = 0;
};

struct ConvergenceSeries {
  af::ScheduleId schedule = af::ScheduleId::static_ei;
  std::vector<ConvergencePoint> points;
};

struct ConvergenceSummary {
  std::vector<ConvergenceSeries> series;  // canonical schedule order
  std::vector<std::string> flags;
};

// Normalises incumbent log-regret to [0,1] per function over every run and
// iteration of that function, then aggregates each schedule per iteration:
// mean across runs with a 95% confidence interval (1.96 * sd / sqrt(n), or a
// seeded percentile bootstrap).
ConvergenceSummary convergence_summary(const std::vector<engine::RunRecord>& records,
                                       const ConvergenceConfig& config = {});

void write_final_regret_csv(const PerformanceTable& table, const std::filesystem::path& path);
void write_ranks_csv(const std::vector<RankRow>& rows, const std::filesystem::path& path);
void write_convergence_csv(const ConvergenceSummary& summary, const std::filesystem::path& path);

}  // namespace afsel::analytics
