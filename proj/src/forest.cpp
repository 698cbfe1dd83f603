#include "afsel/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace afsel::rf {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::tuple<int, int, int> row_key(const DatasetRow& row) {
  return {row.function_id, row.instance_id, row.seed};
}

double json_number(const nlohmann::json& j) { return j.is_null() ? kNan : j.get<double>(); }

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

struct TreeBuilder {
  const std::vector<std::array<double, ela::kFeatureCount>>& features;
  const std::vector<Targets>& targets;
  const ForestConfig& config;
  int mtry;
  Rng& rng;
  Tree tree;

  int build(std::vector<int>& rows, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const auto n = static_cast<double>(rows.size());
    Targets sum{};
    for (int r : rows) {
      for (int t = 0; t < kTargetCount; ++t) {
        sum[static_cast<std::size_t>(t)] +=
            targets[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
      }
    }
    Targets mean{};
    for (int t = 0; t < kTargetCount; ++t) {
      mean[static_cast<std::size_t>(t)] = sum[static_cast<std::size_t>(t)] / n;
    }

    const bool depth_capped = config.max_depth > 0 && depth >= config.max_depth;
    if (static_cast<int>(rows.size()) < 2 * config.min_leaf || depth_capped) {
      tree.nodes[static_cast<std::size_t>(node_id)].value = mean;
      return node_id;
    }

    // Pick the split maximising the summed per-target variance reduction,
    // which is equivalent to maximising sum (S_left^2/n_left + S_right^2/n_right).
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -std::numeric_limits<double>::infinity();
    double parent_score = 0.0;
    for (int t = 0; t < kTargetCount; ++t) {
      parent_score += sum[static_cast<std::size_t>(t)] * sum[static_cast<std::size_t>(t)] / n;
    }

    std::array<int, ela::kFeatureCount> pool{};
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < mtry; ++k) {
      const auto swap_with =
          static_cast<std::size_t>(k) + rng.index(static_cast<std::size_t>(ela::kFeatureCount - k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[swap_with]);
    }

    std::vector<int> sorted = rows;
    for (int k = 0; k < mtry; ++k) {
      const int f = pool[static_cast<std::size_t>(k)];
      std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        return features[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)] <
               features[static_cast<std::size_t>(b)][static_cast<std::size_t>(f)];
      });

      Targets left_sum{};
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const int r = sorted[i];
        for (int t = 0; t < kTargetCount; ++t) {
          left_sum[static_cast<std::size_t>(t)] +=
              targets[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
        }
        const double x_here = features[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)];
        const double x_next =
            features[static_cast<std::size_t>(sorted[i + 1])][static_cast<std::size_t>(f)];
        if (x_here == x_next) continue;
        const auto n_left = static_cast<double>(i + 1);
        const auto n_right = static_cast<double>(sorted.size() - i - 1);
        if (n_left < config.min_leaf || n_right < config.min_leaf) continue;

        double score = 0.0;
        for (int t = 0; t < kTargetCount; ++t) {
          const double ls = left_sum[static_cast<std::size_t>(t)];
          const double rs = sum[static_cast<std::size_t>(t)] - ls;
          score += ls * ls / n_left + rs * rs / n_right;
        }
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (x_here + x_next);
        }
      }
    }

    if (best_feature < 0 || best_score <= parent_score + 1e-12) {
      tree.nodes[static_cast<std::size_t>(node_id)].value = mean;
      return node_id;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      if (features[static_cast<std::size_t>(r)][static_cast<std::size_t>(best_feature)] <=
          best_threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }
    if (left_rows.empty() || right_rows.empty()) {
      tree.nodes[static_cast<std::size_t>(node_id)].value = mean;
      return node_id;
    }

    const int left_id = build(left_rows, depth + 1);
    const int right_id = build(right_rows, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = right_id;
    return node_id;
  }
};

Targets tree_predict(const Tree& tree, const std::array<double, ela::kFeatureCount>& x) {
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].value;
}

std::array<double, ela::kFeatureCount> impute(const ela::FeatureVector& features,
                                              const std::vector<double>& medians) {
  std::array<double, ela::kFeatureCount> x{};
  for (int f = 0; f < ela::kFeatureCount; ++f) {
    const double v = features.values[static_cast<std::size_t>(f)];
    x[static_cast<std::size_t>(f)] = std::isnan(v) ? medians[static_cast<std::size_t>(f)] : v;
  }
  return x;
}

}  // namespace

Dataset build_dataset(const std::vector<engine::RunRecord>& records, std::uint64_t split_seed,
                      double train_fraction) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw std::invalid_argument("train fraction must be in (0, 1)");
  }
  Dataset dataset;
  dataset.split_seed = split_seed;
  dataset.train_fraction = train_fraction;

  // Group records by run key; a complete group has all 7 schedules.
  std::map<std::tuple<int, int, int>, std::array<const engine::RunRecord*, kTargetCount>> groups;
  for (const engine::RunRecord& record : records) {
    const auto key = std::make_tuple(record.function_id, record.instance_id, record.seed);
    auto& slot = groups[key];
    const auto idx = static_cast<std::size_t>(af::portfolio_index(record.schedule));
    if (slot[idx] != nullptr) {
      std::ostringstream msg;
      msg << "duplicate_record:" << record.function_id << ":" << record.instance_id << ":"
          << record.seed << ":" << af::to_string(record.schedule);
      dataset.flags.push_back(msg.str());
      continue;
    }
    slot[idx] = &record;
  }

  std::map<std::tuple<int, int, int>, std::array<const engine::RunRecord*, kTargetCount>> complete;
  for (const auto& [key, slot] : groups) {
    const bool full = std::all_of(slot.begin(), slot.end(),
                                  [](const engine::RunRecord* r) { return r != nullptr; });
    if (full) {
      complete.emplace(key, slot);
    } else {
      std::ostringstream msg;
      msg << "incomplete_group:" << std::get<0>(key) << ":" << std::get<1>(key) << ":"
          << std::get<2>(key);
      dataset.flags.push_back(msg.str());
    }
  }

  // Per-function normalisation bounds over every run of the kept groups.
  for (const auto& [key, slot] : complete) {
    const int fid = std::get<0>(key);
    for (const engine::RunRecord* record : slot) {
      auto [it, inserted] = dataset.regret_range.try_emplace(
          fid, record->final_log_regret, record->final_log_regret);
      if (!inserted) {
        it->second.first = std::min(it->second.first, record->final_log_regret);
        it->second.second = std::max(it->second.second, record->final_log_regret);
      }
    }
  }

  std::set<int> degenerate;
  for (const auto& [key, slot] : complete) {
    DatasetRow row;
    row.function_id = std::get<0>(key);
    row.instance_id = std::get<1>(key);
    row.seed = std::get<2>(key);
    row.features = slot[0]->features;
    const auto [lo, hi] = dataset.regret_range.at(row.function_id);
    if (hi > lo) {
      for (int t = 0; t < kTargetCount; ++t) {
        row.targets[static_cast<std::size_t>(t)] =
            (slot[static_cast<std::size_t>(t)]->final_log_regret - lo) / (hi - lo);
      }
    } else {
      row.targets.fill(0.5);
      if (degenerate.insert(row.function_id).second) {
        dataset.flags.push_back("constant_regret:" + std::to_string(row.function_id));
      }
    }
    dataset.rows.push_back(std::move(row));
  }
  // groups is an ordered map, so rows are already sorted by key.

  // Seeded 70/30 split, stratified by (function, instance).
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    strata[{dataset.rows[i].function_id, dataset.rows[i].instance_id}].push_back(i);
  }
  for (auto& [stratum, members] : strata) {
    Rng rng(derive(StreamKey{split_seed}, "split", stratum.first, stratum.second));
    rng.shuffle(members);
    const auto k = static_cast<double>(members.size());
    const auto n_train = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(train_fraction * k), 1, static_cast<long long>(k)));
    for (std::size_t i = 0; i < members.size(); ++i) {
      dataset.rows[members[i]].train = i < n_train;
    }
  }
  return dataset;
}

Forest train_forest(const Dataset& dataset, const ForestConfig& config, std::uint64_t seed) {
  std::vector<const DatasetRow*> train_rows;
  for (const DatasetRow& row : dataset.rows) {
    if (row.train) train_rows.push_back(&row);
  }
  if (train_rows.size() < 10) {
    throw std::invalid_argument("training requires at least 10 rows");
  }
  std::sort(train_rows.begin(), train_rows.end(),
            [](const DatasetRow* a, const DatasetRow* b) { return row_key(*a) < row_key(*b); });

  Forest forest;
  forest.config = config;
  forest.seed = seed;
  for (std::string_view name : ela::feature_names()) forest.feature_names.emplace_back(name);
  for (const af::Schedule& s : af::portfolio()) forest.target_names.emplace_back(af::to_string(s.id));

  // Per-feature training medians for NaN imputation.
  forest.imputation.assign(ela::kFeatureCount, 0.0);
  for (int f = 0; f < ela::kFeatureCount; ++f) {
    std::vector<double> finite;
    for (const DatasetRow* row : train_rows) {
      const double v = row->features.values[static_cast<std::size_t>(f)];
      if (!std::isnan(v)) finite.push_back(v);
    }
    if (!finite.empty()) {
      std::sort(finite.begin(), finite.end());
      forest.imputation[static_cast<std::size_t>(f)] = ela::quantile_type7(finite, 0.5);
    }
  }

  std::vector<std::array<double, ela::kFeatureCount>> features;
  std::vector<Targets> targets;
  features.reserve(train_rows.size());
  targets.reserve(train_rows.size());
  for (const DatasetRow* row : train_rows) {
    features.push_back(impute(row->features, forest.imputation));
    targets.push_back(row->targets);
  }

  const int mtry = config.features_per_split > 0
                       ? config.features_per_split
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ela::kFeatureCount))));

  const auto n = train_rows.size();
  forest.trees.reserve(static_cast<std::size_t>(config.trees));
  for (int t = 0; t < config.trees; ++t) {
    Rng rng(derive(StreamKey{seed}, "tree", t));
    std::vector<int> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i) bootstrap[i] = static_cast<int>(rng.index(n));
    TreeBuilder builder{features, targets, config, mtry, rng, {}};
    builder.build(bootstrap, 0);
    forest.trees.push_back(std::move(builder.tree));
  }
  return forest;
}

Targets predict_forest(const Forest& forest, const ela::FeatureVector& features) {
  if (forest.trees.empty()) throw std::invalid_argument("forest has no trees");
  const std::array<double, ela::kFeatureCount> x = impute(features, forest.imputation);
  Targets out{};
  for (const Tree& tree : forest.trees) {
    const Targets p = tree_predict(tree, x);
    for (int t = 0; t < kTargetCount; ++t) out[static_cast<std::size_t>(t)] += p[static_cast<std::size_t>(t)];
  }
  const auto n = static_cast<double>(forest.trees.size());
  for (int t = 0; t < kTargetCount; ++t) out[static_cast<std::size_t>(t)] /= n;
  return out;
}

int best_index(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty value list");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

int select_index(const Forest& forest, const ela::FeatureVector& features) {
  const Targets predictions = predict_forest(forest, features);
  return best_index(predictions);
}

af::ScheduleId select_schedule(const Forest& forest, const ela::FeatureVector& features) {
  return af::portfolio()[static_cast<std::size_t>(select_index(forest, features))].id;
}

af::ScheduleId vbs(const Targets& targets) {
  for (double t : targets) {
    if (!std::isfinite(t)) throw std::invalid_argument("targets must be finite");
  }
  return af::portfolio()[static_cast<std::size_t>(best_index(targets))].id;
}

nlohmann::json to_json(const Forest& forest) {
  nlohmann::json j;
  j["schema_version"] = forest.schema_version;
  j["kind"] = "forest";
  j["seed"] = forest.seed;
  j["config"] = {{"trees", forest.config.trees},
                 {"min_leaf", forest.config.min_leaf},
                 {"max_depth", forest.config.max_depth},
                 {"features_per_split", forest.config.features_per_split}};
  j["feature_names"] = forest.feature_names;
  j["target_names"] = forest.target_names;
  j["imputation"] = forest.imputation;
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : forest.trees) {
    nlohmann::json node_feature = nlohmann::json::array();
    nlohmann::json node_threshold = nlohmann::json::array();
    nlohmann::json node_left = nlohmann::json::array();
    nlohmann::json node_right = nlohmann::json::array();
    nlohmann::json node_value = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
      node_feature.push_back(node.feature);
      node_threshold.push_back(node.threshold);
      node_left.push_back(node.left);
      node_right.push_back(node.right);
      node_value.push_back(node.value);
    }
    trees.push_back({{"feature", std::move(node_feature)},
                     {"threshold", std::move(node_threshold)},
                     {"left", std::move(node_left)},
                     {"right", std::move(node_right)},
                     {"value", std::move(node_value)}});
  }
  j["trees"] = std::move(trees);
  return j;
}

Forest forest_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "forest") throw std::invalid_argument("not a forest file");
  Forest forest;
  forest.schema_version = j.at("schema_version").get<int>();
  forest.seed = j.at("seed").get<std::uint64_t>();
  const auto& cfg = j.at("config");
  forest.config.trees = cfg.at("trees").get<int>();
  forest.config.min_leaf = cfg.at("min_leaf").get<int>();
  forest.config.max_depth = cfg.at("max_depth").get<int>();
  forest.config.features_per_split = cfg.at("features_per_split").get<int>();
  forest.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  forest.target_names = j.at("target_names").get<std::vector<std::string>>();
  forest.imputation = j.at("imputation").get<std::vector<double>>();
  if (forest.imputation.size() != ela::kFeatureCount) {
    throw std::invalid_argument("imputation vector has wrong length");
  }
  for (const auto& tj : j.at("trees")) {
    Tree tree;
    const auto& feature = tj.at("feature");
    const auto& threshold = tj.at("threshold");
    const auto& left = tj.at("left");
    const auto& right = tj.at("right");
    const auto& value = tj.at("value");
    for (std::size_t i = 0; i < feature.size(); ++i) {
      TreeNode node;
      node.feature = feature[i].get<int>();
      node.threshold = threshold[i].get<double>();
      node.left = left[i].get<int>();
      node.right = right[i].get<int>();
      node.value = value[i].get<Targets>();
      tree.nodes.push_back(node);
    }
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(forest).dump(2) << '\n';
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return forest_from_json(nlohmann::json::parse(in));
}

nlohmann::json to_json(const Dataset& dataset) {
  nlohmann::json j;
  j["schema_version"] = dataset.schema_version;
  j["kind"] = "dataset";
  j["split_seed"] = dataset.split_seed;
  j["train_fraction"] = dataset.train_fraction;
  j["flags"] = dataset.flags;
  nlohmann::json ranges = nlohmann::json::object();
  for (const auto& [fid, range] : dataset.regret_range) {
    ranges[std::to_string(fid)] = {range.first, range.second};
  }
  j["regret_range"] = std::move(ranges);
  nlohmann::json rows = nlohmann::json::array();
  for (const DatasetRow& row : dataset.rows) {
    nlohmann::json values = nlohmann::json::array();
    nlohmann::json reasons = nlohmann::json::array();
    for (int f = 0; f < ela::kFeatureCount; ++f) {
      values.push_back(number_or_null(row.features.values[static_cast<std::size_t>(f)]));
      reasons.push_back(static_cast<int>(row.features.reasons[static_cast<std::size_t>(f)]));
    }
    rows.push_back({{"function_id", row.function_id},
                    {"instance_id", row.instance_id},
                    {"seed", row.seed},
                    {"train", row.train},
                    {"features", std::move(values)},
                    {"feature_flags", std::move(reasons)},
                    {"targets", row.targets}});
  }
  j["rows"] = std::move(rows);
  return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "dataset") throw std::invalid_argument("not a dataset file");
  Dataset dataset;
  dataset.schema_version = j.at("schema_version").get<int>();
  dataset.split_seed = j.at("split_seed").get<std::uint64_t>();
  dataset.train_fraction = j.at("train_fraction").get<double>();
  dataset.flags = j.at("flags").get<std::vector<std::string>>();
  for (const auto& [key, range] : j.at("regret_range").items()) {
    dataset.regret_range[std::stoi(key)] = {range[0].get<double>(), range[1].get<double>()};
  }
  for (const auto& rj : j.at("rows")) {
    DatasetRow row;
    row.function_id = rj.at("function_id").get<int>();
    row.instance_id = rj.at("instance_id").get<int>();
    row.seed = rj.at("seed").get<int>();
    row.train = rj.at("train").get<bool>();
    const auto& values = rj.at("features");
    const auto& reasons = rj.at("feature_flags");
    if (values.size() != ela::kFeatureCount) {
      throw std::invalid_argument("feature vector has wrong length");
    }
    for (std::size_t f = 0; f < ela::kFeatureCount; ++f) {
      row.features.values[f] = json_number(values[f]);
      row.features.reasons[f] = static_cast<ela::NanReason>(reasons[f].get<int>());
    }
    row.targets = rj.at("targets").get<Targets>();
    dataset.rows.push_back(std::move(row));
  }
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(dataset).dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return dataset_from_json(nlohmann::json::parse(in));
}

}  // namespace afsel::rf
