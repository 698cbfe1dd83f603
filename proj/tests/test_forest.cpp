#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <vector>

#include "afsel/forest.hpp"

using namespace afsel;
using rf::Dataset;
using rf::DatasetRow;
using rf::Forest;
using rf::ForestConfig;
using rf::Targets;

namespace {

ela::FeatureVector random_features(Rng& rng) {
  ela::FeatureVector fv;
  for (auto& v : fv.values) v = rng.uniform(-1.0, 1.0);
  return fv;
}

engine::RunRecord make_record(int fid, int iid, int seed, af::ScheduleId schedule,
                              double final_log_regret, const ela::FeatureVector& features) {
  engine::RunRecord record;
  record.function_id = fid;
  record.instance_id = iid;
  record.seed = seed;
  record.schedule = schedule;
  record.final_log_regret = final_log_regret;
  record.features = features;
  return record;
}

// A full 7-schedule group with deterministic per-schedule regrets.
void append_group(std::vector<engine::RunRecord>& records, int fid, int iid, int seed,
                  const ela::FeatureVector& features, double base) {
  for (int t = 0; t < af::kScheduleCount; ++t) {
    records.push_back(make_record(fid, iid, seed, af::portfolio()[static_cast<std::size_t>(t)].id,
                                  base + 0.3 * t, features));
  }
}

// Dataset rows with targets driven by a step in feature 0 and noise elsewhere.
Dataset synthetic_step_dataset(int n, StreamKey key) {
  Dataset dataset;
  Rng rng(key);
  for (int i = 0; i < n; ++i) {
    DatasetRow row;
    row.function_id = 1;
    row.instance_id = 0;
    row.seed = i;
    row.features = random_features(rng);
    row.targets.fill(0.5);
    row.targets[0] = row.features.values[0] > 0.0 ? 0.0 : 1.0;
    row.train = true;
    dataset.rows.push_back(std::move(row));
  }
  return dataset;
}

Forest two_leaf_forest(int feature, double threshold, double left_value, double right_value) {
  Forest forest;
  forest.config.trees = 1;
  for (std::string_view name : ela::feature_names()) forest.feature_names.emplace_back(name);
  for (const af::Schedule& s : af::portfolio()) {
    forest.target_names.emplace_back(af::to_string(s.id));
  }
  forest.imputation.assign(ela::kFeatureCount, 0.0);
  rf::Tree tree;
  tree.nodes.resize(3);
  tree.nodes[0].feature = feature;
  tree.nodes[0].threshold = threshold;
  tree.nodes[0].left = 1;
  tree.nodes[0].right = 2;
  tree.nodes[1].value.fill(left_value);
  tree.nodes[2].value.fill(right_value);
  forest.trees.push_back(std::move(tree));
  return forest;
}

}  // namespace

TEST_CASE("dataset construction counts complete groups") {
  Rng rng(derive(StreamKey{55}, "count"));
  std::vector<engine::RunRecord> records;
  for (int fid : {1, 2}) {
    for (int seed = 0; seed < 3; ++seed) {
      append_group(records, fid, 0, seed, random_features(rng), -2.0 + 0.5 * seed);
    }
  }
  const Dataset dataset = rf::build_dataset(records, 0);
  REQUIRE(dataset.rows.size() == 6);
  CHECK(dataset.flags.empty());
  for (const DatasetRow& row : dataset.rows) {
    for (double t : row.targets) {
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
    }
  }
  // Rows come out sorted by (function, instance, seed).
  for (std::size_t i = 1; i < dataset.rows.size(); ++i) {
    const auto a = std::make_tuple(dataset.rows[i - 1].function_id,
                                   dataset.rows[i - 1].instance_id, dataset.rows[i - 1].seed);
    const auto b = std::make_tuple(dataset.rows[i].function_id, dataset.rows[i].instance_id,
                                   dataset.rows[i].seed);
    CHECK(a < b);
  }
}

TEST_CASE("targets min-max normalise per function") {
  Rng rng(derive(StreamKey{55}, "norm"));
  const ela::FeatureVector fv = random_features(rng);
  std::vector<engine::RunRecord> records;
  const std::array<double, 7> regrets = {-3.0, 1.0, -1.0, 0.0, -2.0, 0.5, -0.5};
  for (int t = 0; t < 7; ++t) {
    records.push_back(make_record(4, 0, 0, af::portfolio()[static_cast<std::size_t>(t)].id,
                                  regrets[static_cast<std::size_t>(t)], fv));
  }
  const Dataset dataset = rf::build_dataset(records, 0);
  REQUIRE(dataset.rows.size() == 1);
  const Targets& targets = dataset.rows[0].targets;
  CHECK(targets[0] == doctest::Approx(0.0));
  CHECK(targets[1] == doctest::Approx(1.0));
  CHECK(targets[2] == doctest::Approx(0.5));
  CHECK(targets[4] == doctest::Approx(0.25));
  CHECK(dataset.regret_range.at(4) == std::pair<double, double>{-3.0, 1.0});
}

TEST_CASE("incomplete and duplicate groups are dropped with flags") {
  Rng rng(derive(StreamKey{55}, "drop"));
  const ela::FeatureVector fv = random_features(rng);
  std::vector<engine::RunRecord> records;
  append_group(records, 1, 0, 0, fv, -1.0);
  // Seed 1 misses static_pi.
  for (int t = 0; t < 7; ++t) {
    if (t == 1) continue;
    records.push_back(
        make_record(1, 0, 1, af::portfolio()[static_cast<std::size_t>(t)].id, 0.1 * t, fv));
  }
  // Seed 0 additionally carries a duplicate ee25 record.
  records.push_back(make_record(1, 0, 0, af::ScheduleId::ee25, 99.0, fv));

  const Dataset dataset = rf::build_dataset(records, 0);
  REQUIRE(dataset.rows.size() == 1);
  CHECK(dataset.rows[0].seed == 0);
  REQUIRE(dataset.flags.size() == 2);
  CHECK(std::find(dataset.flags.begin(), dataset.flags.end(), "duplicate_record:1:0:0:ee25") !=
        dataset.flags.end());
  CHECK(std::find(dataset.flags.begin(), dataset.flags.end(), "incomplete_group:1:0:1") !=
        dataset.flags.end());
  // The first ee25 record won; the duplicate's outlier regret was ignored.
  CHECK(dataset.regret_range.at(1).second < 99.0);
}

TEST_CASE("zero regret spread pins targets at one half") {
  Rng rng(derive(StreamKey{55}, "flat"));
  std::vector<engine::RunRecord> records;
  for (int seed = 0; seed < 2; ++seed) {
    for (int t = 0; t < 7; ++t) {
      records.push_back(make_record(9, 0, seed, af::portfolio()[static_cast<std::size_t>(t)].id,
                                    -12.0, random_features(rng)));
    }
  }
  const Dataset dataset = rf::build_dataset(records, 0);
  REQUIRE(dataset.rows.size() == 2);
  for (const DatasetRow& row : dataset.rows) {
    for (double t : row.targets) CHECK(t == doctest::Approx(0.5));
  }
  CHECK(std::count(dataset.flags.begin(), dataset.flags.end(), "constant_regret:9") == 1);
}

TEST_CASE("the train split is stratified, seeded, and clamped") {
  Rng rng(derive(StreamKey{55}, "split"));
  std::vector<engine::RunRecord> records;
  for (int fid : {1, 2}) {
    for (int iid : {0, 1}) {
      for (int seed = 0; seed < 10; ++seed) {
        append_group(records, fid, iid, seed, random_features(rng), -1.0 - 0.2 * seed);
      }
    }
  }
  const Dataset a = rf::build_dataset(records, 17);
  std::map<std::pair<int, int>, int> train_counts;
  for (const DatasetRow& row : a.rows) {
    if (row.train) ++train_counts[{row.function_id, row.instance_id}];
  }
  for (const auto& [stratum, count] : train_counts) CHECK(count == 7);

  const Dataset b = rf::build_dataset(records, 17);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].train == b.rows[i].train);

  const Dataset c = rf::build_dataset(records, 18);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    any_difference = any_difference || a.rows[i].train != c.rows[i].train;
  }
  CHECK(any_difference);

  const Dataset half = rf::build_dataset(records, 17, 0.5);
  std::map<std::pair<int, int>, int> half_counts;
  for (const DatasetRow& row : half.rows) {
    if (row.train) ++half_counts[{row.function_id, row.instance_id}];
  }
  for (const auto& [stratum, count] : half_counts) CHECK(count == 5);

  // A singleton stratum always keeps its row in training.
  std::vector<engine::RunRecord> lone;
  append_group(lone, 3, 0, 0, random_features(rng), 0.0);
  const Dataset single = rf::build_dataset(lone, 0, 0.1);
  REQUIRE(single.rows.size() == 1);
  CHECK(single.rows[0].train);

  CHECK_THROWS_AS(rf::build_dataset(records, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rf::build_dataset(records, 0, 1.0), std::invalid_argument);
}

TEST_CASE("training requires ten rows") {
  Dataset dataset = synthetic_step_dataset(9, derive(StreamKey{55}, "tiny"));
  CHECK_THROWS_AS(rf::train_forest(dataset, ForestConfig{}, 1), std::invalid_argument);
  Dataset enough = synthetic_step_dataset(10, derive(StreamKey{55}, "tiny"));
  CHECK_NOTHROW(rf::train_forest(enough, ForestConfig{}, 1));
}

TEST_CASE("constant targets give constant predictions") {
  Dataset dataset;
  Rng rng(derive(StreamKey{55}, "const"));
  for (int i = 0; i < 15; ++i) {
    DatasetRow row;
    row.function_id = 1;
    row.seed = i;
    row.features = random_features(rng);
    row.targets.fill(0.25);
    dataset.rows.push_back(std::move(row));
  }
  const Forest forest = rf::train_forest(dataset, ForestConfig{}, 3);
  for (int rep = 0; rep < 10; ++rep) {
    const Targets p = rf::predict_forest(forest, random_features(rng));
    for (double v : p) CHECK(v == doctest::Approx(0.25));
  }
}

TEST_CASE("the forest learns a single-feature step") {
  Dataset dataset = synthetic_step_dataset(2000, derive(StreamKey{55}, "step"));
  for (int i = 1400; i < 2000; ++i) dataset.rows[static_cast<std::size_t>(i)].train = false;
  const Forest forest = rf::train_forest(dataset, ForestConfig{}, 11);

  double abs_error = 0.0;
  int held_out = 0;
  for (const DatasetRow& row : dataset.rows) {
    if (row.train) continue;
    const Targets p = rf::predict_forest(forest, row.features);
    abs_error += std::abs(p[0] - row.targets[0]);
    ++held_out;
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  REQUIRE(held_out == 600);
  CHECK(abs_error / held_out < 0.1);
}

TEST_CASE("training is deterministic and row-order invariant") {
  Dataset dataset = synthetic_step_dataset(30, derive(StreamKey{55}, "order"));
  const Forest a = rf::train_forest(dataset, ForestConfig{}, 5);
  const Forest b = rf::train_forest(dataset, ForestConfig{}, 5);
  CHECK(rf::to_json(a).dump() == rf::to_json(b).dump());

  Dataset shuffled = dataset;
  Rng rng(derive(StreamKey{55}, "shuffle"));
  rng.shuffle(shuffled.rows);
  const Forest c = rf::train_forest(shuffled, ForestConfig{}, 5);
  CHECK(rf::to_json(a).dump() == rf::to_json(c).dump());

  const Forest d = rf::train_forest(dataset, ForestConfig{}, 6);
  CHECK(rf::to_json(a).dump() != rf::to_json(d).dump());
}

TEST_CASE("prediction walks trees to their leaves and averages") {
  const Forest one = two_leaf_forest(3, 0.5, 0.2, 0.8);
  ela::FeatureVector fv;
  fv.values.fill(0.0);
  fv.values[3] = 0.3;
  Targets p = rf::predict_forest(one, fv);
  for (double v : p) CHECK(v == 0.2);
  fv.values[3] = 0.7;
  p = rf::predict_forest(one, fv);
  for (double v : p) CHECK(v == 0.8);

  Forest two = two_leaf_forest(3, 0.5, 0.2, 0.8);
  two.trees.push_back(two_leaf_forest(3, 0.5, 0.4, 0.6).trees[0]);
  two.config.trees = 2;
  fv.values[3] = 0.3;
  p = rf::predict_forest(two, fv);
  for (double v : p) CHECK(v == doctest::Approx(0.3));

  // NaN features fall back to the stored imputation value.
  Forest imputing = two_leaf_forest(3, 0.5, 0.2, 0.8);
  fv.values[3] = std::numeric_limits<double>::quiet_NaN();
  p = rf::predict_forest(imputing, fv);
  for (double v : p) CHECK(v == 0.2);  // imputed 0 goes left
  imputing.imputation[3] = 0.9;
  p = rf::predict_forest(imputing, fv);
  for (double v : p) CHECK(v == 0.8);

  const Forest empty;
  CHECK_THROWS_AS(rf::predict_forest(empty, fv), std::invalid_argument);
}

TEST_CASE("selection takes the argmin with canonical tie-breaks") {
  const std::vector<double> mixed = {0.9, 0.1, 0.5, 0.5, 0.5, 0.5, 0.5};
  CHECK(rf::best_index(mixed) == 1);
  const std::vector<double> equal(7, 0.5);
  CHECK(rf::best_index(equal) == 0);

  std::vector<double> transformed;
  for (double v : mixed) transformed.push_back(std::exp(3.0 * v) - 1.0);
  CHECK(rf::best_index(transformed) == rf::best_index(mixed));

  // Through a forest: the left leaf is better, so anything landing there
  // keeps static_ei; a right-landing query picks the lower-valued leaf too.
  const Forest forest = two_leaf_forest(0, 0.0, 0.1, 0.6);
  ela::FeatureVector fv;
  fv.values.fill(-1.0);
  CHECK(rf::select_schedule(forest, fv) == af::ScheduleId::static_ei);
  CHECK(rf::select_index(forest, fv) == 0);
}

TEST_CASE("the oracle choice is the true argmin") {
  const Targets example = {0.2, 0.1, 0.3, 0.4, 0.15, 0.5, 0.6};
  CHECK(rf::vbs(example) == af::ScheduleId::static_pi);
  const double best = *std::min_element(example.begin(), example.end());
  CHECK(best <= example[af::portfolio_index(rf::vbs(example))]);

  Targets tied;
  tied.fill(0.5);
  tied[0] = 0.1;
  tied[4] = 0.1;
  CHECK(rf::vbs(tied) == af::ScheduleId::static_ei);
}

TEST_CASE("forest and dataset serialisation round-trips") {
  Dataset dataset = synthetic_step_dataset(20, derive(StreamKey{55}, "io"));
  dataset.rows[0].features.values[5] = std::numeric_limits<double>::quiet_NaN();
  dataset.rows[0].features.reasons[5] = ela::NanReason::degenerate_sample;
  dataset.flags.push_back("constant_regret:9");
  dataset.regret_range[1] = {-4.0, 2.0};

  const auto dir = std::filesystem::temp_directory_path() / "afsel_forest_io";
  std::filesystem::create_directories(dir);
  rf::save_dataset(dataset, dir / "dataset.json");
  const Dataset loaded = rf::load_dataset(dir / "dataset.json");
  REQUIRE(loaded.rows.size() == dataset.rows.size());
  CHECK(loaded.flags == dataset.flags);
  CHECK(loaded.regret_range.at(1) == std::pair<double, double>{-4.0, 2.0});
  CHECK(std::isnan(loaded.rows[0].features.values[5]));
  CHECK(loaded.rows[0].features.reasons[5] == ela::NanReason::degenerate_sample);
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    CHECK(loaded.rows[i].targets == dataset.rows[i].targets);
    CHECK(loaded.rows[i].train == dataset.rows[i].train);
    CHECK(loaded.rows[i].seed == dataset.rows[i].seed);
  }

  const Forest forest = rf::train_forest(dataset, ForestConfig{}, 2);
  rf::save_forest(forest, dir / "model.json");
  const Forest reloaded = rf::load_forest(dir / "model.json");
  CHECK(rf::to_json(forest).dump() == rf::to_json(reloaded).dump());

  Rng rng(derive(StreamKey{55}, "queries"));
  for (int rep = 0; rep < 10; ++rep) {
    ela::FeatureVector fv = random_features(rng);
    if (rep % 2 == 0) fv.values[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK(rf::predict_forest(forest, fv) == rf::predict_forest(reloaded, fv));
  }
  std::filesystem::remove_all(dir);
}
