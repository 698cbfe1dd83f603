#include "afsel/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "afsel/ela.hpp"
#include "afsel/rng.hpp"

namespace afsel::analytics {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void write_number(std::ostream& out, double v) {
  if (std::isnan(v)) return;  // NaN becomes an empty field
  out << std::setprecision(17) << v;
}

}  // namespace

PerformanceTable normalize_per_function(const std::vector<RawRow>& rows) {
  PerformanceTable table;
  for (const RawRow& row : rows) {
    for (double v : row.log_regret) {
      if (!std::isfinite(v)) throw std::invalid_argument("log-regrets must be finite");
    }
    const auto [lo_it, hi_it] = std::minmax_element(row.log_regret.begin(), row.log_regret.end());
    auto [it, inserted] = table.ranges.try_emplace(row.id.function_id, *lo_it, *hi_it);
    if (!inserted) {
      it->second.first = std::min(it->second.first, *lo_it);
      it->second.second = std::max(it->second.second, *hi_it);
    }
  }

  for (const auto& [fid, range] : table.ranges) {
    if (range.second <= range.first) {
      table.flags.push_back("constant_regret:" + std::to_string(fid));
    }
  }

  std::vector<const RawRow*> ordered;
  ordered.reserve(rows.size());
  for (const RawRow& row : rows) ordered.push_back(&row);
  std::sort(ordered.begin(), ordered.end(),
            [](const RawRow* a, const RawRow* b) { return a->id < b->id; });

  for (const RawRow* raw : ordered) {
    PerformanceRow row;
    row.id = raw->id;
    row.afs_index = raw->afs_index;
    const auto [lo, hi] = table.ranges.at(raw->id.function_id);
    for (int s = 0; s < af::kScheduleCount; ++s) {
      const double v = raw->log_regret[static_cast<std::size_t>(s)];
      row.values[static_cast<std::size_t>(s)] = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    }
    row.vbs_index = static_cast<int>(
        std::min_element(row.values.begin(), row.values.end()) - row.values.begin());
    row.vbs_value = row.values[static_cast<std::size_t>(row.vbs_index)];
    row.afs_value = raw->afs_index >= 0 ? row.values[static_cast<std::size_t>(raw->afs_index)] : kNan;
    table.rows.push_back(row);
  }
  return table;
}

std::array<double, af::kScheduleCount> rank_values(
    const std::array<double, af::kScheduleCount>& values) {
  std::array<int, af::kScheduleCount> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
  });

  std::array<double, af::kScheduleCount> ranks{};
  int i = 0;
  while (i < af::kScheduleCount) {
    int j = i;
    while (j + 1 < af::kScheduleCount &&
           values[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])] ==
               values[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]) {
      ++j;
    }
    // Positions i..j share a value; each gets the mean of ranks i+1..j+1.
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (int k = i; k <= j; ++k) {
      ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = shared;
    }
    i = j + 1;
  }
  return ranks;
}

RankRow rank_per_run(const RunId& id, const std::array<double, af::kScheduleCount>& values,
                     int afs_index) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("rank inputs must be finite");
  }
  if (afs_index >= af::kScheduleCount) throw std::invalid_argument("selector index out of range");
  RankRow row;
  row.id = id;
  row.ranks = rank_values(values);
  row.afs_rank = afs_index >= 0 ? row.ranks[static_cast<std::size_t>(afs_index)] : kNan;
  row.vbs_rank = *std::min_element(row.ranks.begin(), row.ranks.end());
  return row;
}

ConvergenceSummary convergence_summary(const std::vector<engine::RunRecord>& records,
                                       const ConvergenceConfig& config) {
  ConvergenceSummary summary;

  // Per-function bounds of incumbent log-regret over every run and iteration.
  std::map<int, std::pair<double, double>> ranges;
  for (const engine::RunRecord& record : records) {
    for (const auto& [iteration, value] : engine::incumbent_trajectory(record)) {
      auto [it, inserted] = ranges.try_emplace(record.function_id, value, value);
      if (!inserted) {
        it->second.first = std::min(it->second.first, value);
        it->second.second = std::max(it->second.second, value);
      }
    }
  }
  for (const auto& [fid, range] : ranges) {
    if (range.second <= range.first) {
      summary.flags.push_back("constant_regret:" + std::to_string(fid));
    }
  }

  for (const af::Schedule& schedule : af::portfolio()) {
    // values[iteration] = normalised incumbent log-regret of each run.
    std::vector<std::vector<double>> values;
    int runs = 0;
    for (const engine::RunRecord& record : records) {
      if (record.schedule != schedule.id) continue;
      ++runs;
      const auto [lo, hi] = ranges.at(record.function_id);
      for (const auto& [iteration, value] : engine::incumbent_trajectory(record)) {
        if (static_cast<std::size_t>(iteration) >= values.size()) {
          values.resize(static_cast<std::size_t>(iteration) + 1);
        }
        values[static_cast<std::size_t>(iteration)].push_back(
            hi > lo ? (value - lo) / (hi - lo) : 0.5);
      }
    }
    if (runs < 2) {
      summary.flags.push_back(std::string("few_runs:") + std::string(af::to_string(schedule.id)));
    }

    ConvergenceSeries series;
    series.schedule = schedule.id;
    for (std::size_t iter = 0; iter < values.size(); ++iter) {
      const std::vector<double>& xs = values[iter];
      ConvergencePoint point;
      point.iteration = static_cast<int>(iter);
      point.runs = static_cast<int>(xs.size());
      point.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      if (xs.size() < 2) {
        point.ci_low = kNan;
        point.ci_high = kNan;
      } else if (config.ci == CiMethod::normal) {
        double ss = 0.0;
        for (double x : xs) ss += (x - point.mean) * (x - point.mean);
        const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        const double half = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
        point.ci_low = point.mean - half;
        point.ci_high = point.mean + half;
      } else {
        Rng rng(derive(StreamKey{config.bootstrap_seed}, "boot",
                       af::portfolio_index(schedule.id), static_cast<int>(iter)));
        std::vector<double> means(static_cast<std::size_t>(config.bootstrap_samples));
        for (double& m : means) {
          double sum = 0.0;
          for (std::size_t k = 0; k < xs.size(); ++k) sum += xs[rng.index(xs.size())];
          m = sum / static_cast<double>(xs.size());
        }
        std::sort(means.begin(), means.end());
        point.ci_low = ela::quantile_type7(means, 0.025);
        point.ci_high = ela::quantile_type7(means, 0.975);
      }
      series.points.push_back(point);
    }
    summary.series.push_back(std::move(series));
  }
  return summary;
}

void write_final_regret_csv(const PerformanceTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "function_id,instance_id,seed";
  for (const af::Schedule& s : af::portfolio()) out << ',' << af::to_string(s.id);
  out << ",afs,vbs,afs_choice\n";
  for (const PerformanceRow& row : table.rows) {
    out << row.id.function_id << ',' << row.id.instance_id << ',' << row.id.seed;
    for (double v : row.values) {
      out << ',';
      write_number(out, v);
    }
    out << ',';
    write_number(out, row.afs_value);
    out << ',';
    write_number(out, row.vbs_value);
    out << ',';
    if (row.afs_index >= 0) {
      out << af::to_string(af::portfolio()[static_cast<std::size_t>(row.afs_index)].id);
    }
    out << '\n';
  }
}

void write_ranks_csv(const std::vector<RankRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "function_id,instance_id,seed";
  for (const af::Schedule& s : af::portfolio()) out << ',' << af::to_string(s.id);
  out << ",afs,vbs\n";
  for (const RankRow& row : rows) {
    out << row.id.function_id << ',' << row.id.instance_id << ',' << row.id.seed;
    for (double r : row.ranks) {
      out << ',';
      write_number(out, r);
    }
    out << ',';
    write_number(out, row.afs_rank);
    out << ',';
    write_number(out, row.vbs_rank);
    out << '\n';
  }
}

void write_convergence_csv(const ConvergenceSummary& summary, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "schedule,iteration,mean,ci_low,ci_high,runs\n";
  for (const ConvergenceSeries& series : summary.series) {
    for (const ConvergencePoint& point : series.points) {
      out << af::to_string(series.schedule) << ',' << point.iteration << ',';
      write_number(out, point.mean);
      out << ',';
      write_number(out, point.ci_low);
      out << ',';
      write_number(out, point.ci_high);
      out << ',' << point.runs << '\n';
    }
  }
}

}  // namespace afsel::analytics
