#pragma once

#include <compare>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "afsel/engine.hpp"

namespace afsel::records {

// Identity of one run inside a record directory.
struct RunKey {
  int function_id = 0;
  int instance_id = 0;
  int dim = 0;
  int seed = 0;
  af::ScheduleId schedule = af::ScheduleId::static_ei;

  auto operator<=>(const RunKey&) const = default;
};

RunKey key_of(const engine::RunRecord& record);

nlohmann::json to_json(const engine::RunRecord& record);
engine::RunRecord record_from_json(const nlohmann::json& j);

// One compact JSON document per line; NaN feature entries become null.
std::string record_line(const engine::RunRecord& record);

void append_records(const std::filesystem::path& file,
                    std::span<const engine::RunRecord> records);

std::vector<engine::RunRecord> read_records(const std::filesystem::path& file);

// All records from every *.jsonl file in the directory, sorted by key.
// Throws when the same key appears twice.
std::vector<engine::RunRecord> load_directory(const std::filesystem::path& dir);

// The keys present in a directory, without materialising full records; this
// is what makes reruns resumable.
std::set<RunKey> scan_keys(const std::filesystem::path& dir);

}  // namespace afsel::records
