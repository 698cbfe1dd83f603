#include "afsel/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace afsel::records {

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

af::ScheduleId schedule_from_json(const nlohmann::json& j) {
  const auto name = j.get<std::string>();
  const auto id = af::parse_schedule(name);
  if (!id) throw std::invalid_argument("unknown schedule: " + name);
  return *id;
}

}  // namespace

RunKey key_of(const engine::RunRecord& record) {
  return {record.function_id, record.instance_id, record.dim, record.seed, record.schedule};
}

nlohmann::json to_json(const engine::RunRecord& record) {
  nlohmann::json j;
  j["schema_version"] = record.schema_version;
  j["function_id"] = record.function_id;
  j["instance_id"] = record.instance_id;
  j["dim"] = record.dim;
  j["seed"] = record.seed;
  j["schedule"] = af::to_string(record.schedule);
  j["f_opt"] = record.f_opt;

  j["design"] = {{"points", record.design.points}, {"values", record.design.values}};

  nlohmann::json features = nlohmann::json::array();
  nlohmann::json feature_flags = nlohmann::json::array();
  for (int f = 0; f < ela::kFeatureCount; ++f) {
    features.push_back(number_or_null(record.features.values[static_cast<std::size_t>(f)]));
    feature_flags.push_back(
        static_cast<int>(record.features.reasons[static_cast<std::size_t>(f)]));
  }
  j["features"] = std::move(features);
  j["feature_flags"] = std::move(feature_flags);

  nlohmann::json evals = nlohmann::json::array();
  for (const engine::Evaluation& e : record.evaluations) {
    evals.push_back({{"iteration", e.iteration},
                     {"point", e.point},
                     {"value", e.value},
                     {"af", e.af_used == af::Kind::ei ? "ei" : "pi"},
                     {"fallback", e.fallback},
                     {"best_so_far", e.best_so_far}});
  }
  j["evals"] = std::move(evals);
  j["incumbent_regret"] = record.incumbent_regret;
  j["final_value"] = record.final_value;
  j["final_regret"] = record.final_regret;
  j["final_log_regret"] = record.final_log_regret;
  j["timing"] = record.timing_seconds;
  j["flags"] = record.flags;
  return j;
}

engine::RunRecord record_from_json(const nlohmann::json& j) {
  engine::RunRecord record;
  record.schema_version = j.at("schema_version").get<int>();
  record.function_id = j.at("function_id").get<int>();
  record.instance_id = j.at("instance_id").get<int>();
  record.dim = j.at("dim").get<int>();
  record.seed = j.at("seed").get<int>();
  record.schedule = schedule_from_json(j.at("schedule"));
  record.f_opt = j.at("f_opt").get<double>();

  const auto& design = j.at("design");
  record.design.points = design.at("points").get<std::vector<std::vector<double>>>();
  record.design.values = design.at("values").get<std::vector<double>>();
  record.design.meta.function_id = record.function_id;
  record.design.meta.instance_id = record.instance_id;
  record.design.meta.dim = record.dim;
  record.design.meta.seed = record.seed;
  record.design.meta.size = static_cast<int>(record.design.points.size());

  const auto& features = j.at("features");
  const auto& feature_flags = j.at("feature_flags");
  if (features.size() != ela::kFeatureCount || feature_flags.size() != ela::kFeatureCount) {
    throw std::invalid_argument("feature vector has wrong length");
  }
  for (std::size_t f = 0; f < ela::kFeatureCount; ++f) {
    record.features.values[f] = json_number(features[f]);
    record.features.reasons[f] = static_cast<ela::NanReason>(feature_flags[f].get<int>());
  }

  for (const auto& ej : j.at("evals")) {
    engine::Evaluation e;
    e.iteration = ej.at("iteration").get<int>();
    e.point = ej.at("point").get<std::vector<double>>();
    e.value = ej.at("value").get<double>();
    e.af_used = ej.at("af").get<std::string>() == "pi" ? af::Kind::pi : af::Kind::ei;
    e.fallback = ej.at("fallback").get<bool>();
    e.best_so_far = ej.at("best_so_far").get<double>();
    record.evaluations.push_back(std::move(e));
  }
  record.incumbent_regret = j.at("incumbent_regret").get<std::vector<double>>();
  record.final_value = j.at("final_value").get<double>();
  record.final_regret = j.at("final_regret").get<double>();
  record.final_log_regret = j.at("final_log_regret").get<double>();
  record.timing_seconds = j.at("timing").get<double>();
  record.flags = j.at("flags").get<std::vector<std::string>>();
  return record;
}

std::string record_line(const engine::RunRecord& record) { return to_json(record).dump(); }

void append_records(const std::filesystem::path& file,
                    std::span<const engine::RunRecord> records) {
  std::ofstream out(file, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (const engine::RunRecord& record : records) out << record_line(record) << '\n';
}

std::vector<engine::RunRecord> read_records(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::vector<engine::RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << file.string() << ":" << line_no << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  return out;
}

std::vector<engine::RunRecord> load_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<engine::RunRecord> out;
  for (const auto& file : files) {
    auto batch = read_records(file);
    out.insert(out.end(), std::make_move_iterator(batch.begin()),
               std::make_move_iterator(batch.end()));
  }
  std::sort(out.begin(), out.end(), [](const engine::RunRecord& a, const engine::RunRecord& b) {
    return key_of(a) < key_of(b);
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (key_of(out[i - 1]) == key_of(out[i])) {
      std::ostringstream msg;
      msg << "duplicate record key: function " << out[i].function_id << " instance "
          << out[i].instance_id << " dim " << out[i].dim << " seed " << out[i].seed << " schedule "
          << af::to_string(out[i].schedule);
      throw std::runtime_error(msg.str());
    }
  }
  return out;
}

std::set<RunKey> scan_keys(const std::filesystem::path& dir) {
  std::set<RunKey> keys;
  if (!std::filesystem::exists(dir)) return keys;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    if (!in) throw std::runtime_error("cannot read " + entry.path().string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      keys.insert({j.at("function_id").get<int>(), j.at("instance_id").get<int>(),
                   j.at("dim").get<int>(), j.at("seed").get<int>(),
                   schedule_from_json(j.at("schedule"))});
    }
  }
  return keys;
}

}  // namespace afsel::records
