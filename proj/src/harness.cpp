#include "afsel/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "afsel/records.hpp"

namespace afsel::harness {

namespace {

struct Job {
  int function_id = 0;
  int instance_id = 0;
  int dim = 0;
  int seed = 0;
  af::Schedule schedule;
};

void merge_part_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> parts;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("part_", 0) == 0 && entry.path().extension() == ".jsonl") {
      parts.push_back(entry.path());
    }
  }
  if (parts.empty()) return;
  std::sort(parts.begin(), parts.end());

  std::ofstream out(dir / "records.jsonl", std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + (dir / "records.jsonl").string());
  for (const auto& part : parts) {
    std::ifstream in(part);
    if (!in) throw std::runtime_error("cannot read " + part.string());
    out << in.rdbuf();
  }
  out.close();
  for (const auto& part : parts) std::filesystem::remove(part);
}

}  // namespace

RunSummary run_experiments(const config::ExperimentConfig& cfg) {
  config::validate(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  {
    const auto probe = cfg.output_dir / ".write_probe";
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory not writable: " + cfg.output_dir.string());
    out.close();
    std::filesystem::remove(probe);
  }

  const std::set<records::RunKey> done = records::scan_keys(cfg.output_dir);

  RunSummary summary;
  std::vector<Job> jobs;
  for (int fid : cfg.functions) {
    for (int iid : cfg.instances) {
      for (int dim : cfg.dims) {
        for (int seed : cfg.seeds) {
          for (const af::Schedule& schedule : cfg.schedules) {
            if (done.contains({fid, iid, dim, seed, schedule.id})) {
              ++summary.skipped;
            } else {
              jobs.push_back({fid, iid, dim, seed, schedule});
            }
          }
        }
      }
    }
  }
  if (jobs.empty()) {
    merge_part_files(cfg.output_dir);
    return summary;
  }

  const int workers = std::min<int>(cfg.parallelism, static_cast<int>(jobs.size()));
  std::atomic<std::size_t> next{0};
  std::atomic<int> executed{0};
  std::atomic<int> failed{0};
  std::mutex failure_mutex;

  auto work = [&](int worker) {
    std::ostringstream part_name;
    part_name << "part_" << worker << ".jsonl";
    const auto part_path = cfg.output_dir / part_name.str();
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      const Job& job = jobs[i];
      try {
        const bbob::Problem problem(job.function_id, job.instance_id, job.dim);
        const engine::RunRecord record =
            engine::run(problem, job.schedule, cfg.engine, job.seed);
        records::append_records(part_path, {&record, 1});
        ++executed;
      } catch (const std::exception& e) {
        ++failed;
        std::scoped_lock lock(failure_mutex);
        std::ofstream log(cfg.output_dir / "failures.log", std::ios::app);
        log << "function " << job.function_id << " instance " << job.instance_id << " dim "
            << job.dim << " seed " << job.seed << " schedule " << af::to_string(job.schedule.id)
            << ": " << e.what() << '\n';
      }
    }
  };

  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& t : pool) t.join();
  }

  summary.executed = executed.load();
  summary.failed = failed.load();
  merge_part_files(cfg.output_dir);
  return summary;
}

PipelineResult pipeline(const PipelineConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);

  const std::vector<engine::RunRecord> all_records = records::load_directory(cfg.runs_dir);
  if (all_records.empty()) throw std::runtime_error("no records in " + cfg.runs_dir.string());

  PipelineResult result;
  result.dataset = rf::build_dataset(all_records, cfg.split_seed, cfg.train_fraction);
  result.forest = cfg.model_path ? rf::load_forest(*cfg.model_path)
                                 : rf::train_forest(result.dataset, cfg.forest, cfg.forest_seed);
  rf::save_forest(result.forest, cfg.out_dir / "model.json");

  // Raw 7-schedule log-regrets per kept run key; the selector column is
  // filled for held-out rows only.
  std::map<std::tuple<int, int, int>, std::array<double, af::kScheduleCount>> raw;
  for (const engine::RunRecord& record : all_records) {
    raw[{record.function_id, record.instance_id, record.seed}]
       [static_cast<std::size_t>(af::portfolio_index(record.schedule))] = record.final_log_regret;
  }

  std::vector<analytics::RawRow> rows;
  std::set<std::tuple<int, int, int>> test_keys;
  for (const rf::DatasetRow& row : result.dataset.rows) {
    analytics::RawRow raw_row;
    raw_row.id = {row.function_id, row.instance_id, row.seed};
    raw_row.log_regret = raw.at({row.function_id, row.instance_id, row.seed});
    if (!row.train) {
      raw_row.afs_index = rf::select_index(result.forest, row.features);
      test_keys.insert({row.function_id, row.instance_id, row.seed});
    }
    rows.push_back(raw_row);
  }

  analytics::PerformanceTable table = analytics::normalize_per_function(rows);
  result.table.ranges = table.ranges;
  result.table.flags = table.flags;
  for (const analytics::PerformanceRow& row : table.rows) {
    if (test_keys.contains({row.id.function_id, row.id.instance_id, row.id.seed})) {
      result.table.rows.push_back(row);
      result.ranks.push_back(analytics::rank_per_run(row.id, row.values, row.afs_index));
    }
  }

  std::vector<engine::RunRecord> test_records;
  for (const engine::RunRecord& record : all_records) {
    if (test_keys.contains({record.function_id, record.instance_id, record.seed})) {
      test_records.push_back(record);
    }
  }
  result.convergence = analytics::convergence_summary(test_records, cfg.convergence);

  analytics::write_final_regret_csv(result.table, cfg.out_dir / "final_regret.csv");
  analytics::write_ranks_csv(result.ranks, cfg.out_dir / "ranks.csv");
  analytics::write_convergence_csv(result.convergence, cfg.out_dir / "convergence.csv");
  return result;
}

}  // namespace afsel::harness
