#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "afsel/analytics.hpp"
#include "afsel/bbob.hpp"
#include "afsel/config.hpp"
#include "afsel/ela.hpp"
#include "afsel/forest.hpp"
#include "afsel/harness.hpp"
#include "afsel/records.hpp"

namespace {

void write_features_csv(const std::vector<afsel::engine::RunRecord>& records,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "function_id,instance_id,dim,seed,schedule";
  for (std::string_view name : afsel::ela::feature_names()) out << ',' << name;
  out << '\n';
  for (const afsel::engine::RunRecord& record : records) {
    out << record.function_id << ',' << record.instance_id << ',' << record.dim << ','
        << record.seed << ',' << afsel::af::to_string(record.schedule);
    for (double v : record.features.values) {
      out << ',';
      if (!std::isnan(v)) out << std::setprecision(17) << v;
    }
    out << '\n';
  }
}

afsel::doe::Design design_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const auto j = nlohmann::json::parse(in);
  afsel::doe::Design design;
  design.points = j.at("points").get<std::vector<std::vector<double>>>();
  design.values = j.at("values").get<std::vector<double>>();
  if (design.points.size() != design.values.size()) {
    throw std::runtime_error("design points and values differ in length");
  }
  design.meta.size = static_cast<int>(design.points.size());
  design.meta.dim = design.points.empty() ? 0 : static_cast<int>(design.points.front().size());
  return design;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-run acquisition-schedule selection for Bayesian optimisation"};
  app.require_subcommand(1);

  auto* suite = app.add_subcommand("suite", "Benchmark suite information");
  suite->require_subcommand(1);
  suite->add_subcommand("list", "List the 24 benchmark functions")->callback([] {
    for (const afsel::bbob::FunctionInfo& info : afsel::bbob::suite()) {
      std::cout << std::setw(2) << info.id << "  " << std::setw(32) << std::left
                << std::string(info.name) << std::right << "  " << info.group << '\n';
    }
  });

  std::string config_path;
  auto* run = app.add_subcommand("run", "Execute the experiment matrix from a config file");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->callback([&] {
    const auto cfg = afsel::config::load_config(config_path);
    const auto summary = afsel::harness::run_experiments(cfg);
    std::cout << "executed " << summary.executed << ", skipped " << summary.skipped << ", failed "
              << summary.failed << '\n';
    if (summary.failed > 0) throw CLI::RuntimeError(1);
  });

  std::string runs_dir;
  std::string out_path;
  auto* features = app.add_subcommand("features", "Export landscape features of recorded runs");
  features->add_option("--runs", runs_dir, "Directory of run records")->required();
  features->add_option("--out", out_path, "Output CSV file")->required();
  features->callback([&] {
    write_features_csv(afsel::records::load_directory(runs_dir), out_path);
  });

  std::uint64_t split_seed = 1;
  double train_fraction = 0.7;
  auto* dataset = app.add_subcommand("dataset", "Build a training dataset from run records");
  dataset->add_option("--runs", runs_dir, "Directory of run records")->required();
  dataset->add_option("--out", out_path, "Output dataset JSON")->required();
  dataset->add_option("--split-seed", split_seed, "Train/test split seed");
  dataset->add_option("--train-fraction", train_fraction, "Training fraction");
  dataset->callback([&] {
    const auto records = afsel::records::load_directory(runs_dir);
    const auto ds = afsel::rf::build_dataset(records, split_seed, train_fraction);
    afsel::rf::save_dataset(ds, out_path);
    for (const std::string& flag : ds.flags) std::cerr << "warning: " << flag << '\n';
    std::cout << ds.rows.size() << " rows\n";
  });

  std::string dataset_path;
  std::uint64_t forest_seed = 1;
  afsel::rf::ForestConfig forest_cfg;
  auto* train = app.add_subcommand("train", "Train the schedule selector");
  train->add_option("--dataset", dataset_path, "Dataset JSON")->required();
  train->add_option("--seed", forest_seed, "Forest seed");
  train->add_option("--out", out_path, "Output model JSON")->required();
  train->add_option("--trees", forest_cfg.trees, "Number of trees");
  train->callback([&] {
    const auto ds = afsel::rf::load_dataset(dataset_path);
    afsel::rf::save_forest(afsel::rf::train_forest(ds, forest_cfg, forest_seed), out_path);
  });

  std::string model_path;
  std::string design_path;
  auto* select = app.add_subcommand("select", "Pick a schedule for an evaluated design");
  select->add_option("--model", model_path, "Trained model JSON")->required();
  select->add_option("--design", design_path, "Evaluated design JSON (points, values)")->required();
  select->callback([&] {
    const auto forest = afsel::rf::load_forest(model_path);
    const auto design = design_from_file(design_path);
    const auto features = afsel::ela::feature_vector(design);
    const auto predictions = afsel::rf::predict_forest(forest, features);
    nlohmann::json j;
    j["schedule"] = afsel::af::to_string(
        afsel::af::portfolio()[static_cast<std::size_t>(afsel::rf::best_index(predictions))].id);
    j["predictions"] = predictions;
    std::cout << j.dump() << '\n';
  });

  std::string analyze_model;
  auto* analyze = app.add_subcommand("analyze", "Train, select and summarise held-out performance");
  analyze->add_option("--runs", runs_dir, "Directory of run records")->required();
  analyze->add_option("--out", out_path, "Output directory")->required();
  analyze->add_option("--model", analyze_model, "Reuse a trained model instead of training");
  analyze->add_option("--split-seed", split_seed, "Train/test split seed");
  analyze->add_option("--train-fraction", train_fraction, "Training fraction");
  analyze->add_option("--forest-seed", forest_seed, "Forest seed");
  analyze->callback([&] {
    afsel::harness::PipelineConfig cfg;
    cfg.runs_dir = runs_dir;
    cfg.out_dir = out_path;
    cfg.split_seed = split_seed;
    cfg.train_fraction = train_fraction;
    cfg.forest_seed = forest_seed;
    if (!analyze_model.empty()) cfg.model_path = analyze_model;
    const auto result = afsel::harness::pipeline(cfg);
    for (const std::string& flag : result.dataset.flags) std::cerr << "warning: " << flag << '\n';
    std::cout << result.table.rows.size() << " held-out rows\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
