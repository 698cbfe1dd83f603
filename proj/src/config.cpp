#include "afsel/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include "afsel/bbob.hpp"

namespace afsel::config {

namespace {

std::vector<int> int_list(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be a list");
  return j.get<std::vector<int>>();
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.functions = int_list(j.at("functions"), "functions");
  cfg.instances = int_list(j.at("instances"), "instances");
  cfg.dims = int_list(j.at("dims"), "dims");

  const auto& seeds = j.at("seeds");
  if (seeds.is_number_integer()) {
    const int n = seeds.get<int>();
    if (n < 1) throw std::invalid_argument("seed count must be positive");
    for (int s = 0; s < n; ++s) cfg.seeds.push_back(s);
  } else {
    cfg.seeds = int_list(seeds, "seeds");
  }

  if (j.contains("schedules")) {
    for (const auto& name : j.at("schedules")) {
      const auto id = af::parse_schedule(name.get<std::string>());
      if (!id) throw std::invalid_argument("unknown schedule: " + name.get<std::string>());
      for (const af::Schedule& s : af::portfolio()) {
        if (s.id == *id) cfg.schedules.push_back(s);
      }
    }
  } else {
    cfg.schedules.assign(af::portfolio().begin(), af::portfolio().end());
  }

  if (j.contains("budget")) {
    const auto& b = j.at("budget");
    cfg.engine.budget.doe_size = b.value("doe_size", cfg.engine.budget.doe_size);
    cfg.engine.budget.surrogate_evals =
        b.value("surrogate_evals", cfg.engine.budget.surrogate_evals);
  }
  if (j.contains("gp")) {
    const auto& g = j.at("gp");
    cfg.engine.gp.restarts = g.value("restarts", cfg.engine.gp.restarts);
    cfg.engine.gp.objective_evals = g.value("objective_evals", cfg.engine.gp.objective_evals);
  }
  if (j.contains("af_opt")) {
    const auto& a = j.at("af_opt");
    cfg.engine.af_opt.candidates = a.value("candidates", cfg.engine.af_opt.candidates);
    cfg.engine.af_opt.refinements = a.value("refinements", cfg.engine.af_opt.refinements);
    cfg.engine.af_opt.refine_steps = a.value("refine_steps", cfg.engine.af_opt.refine_steps);
    cfg.engine.af_opt.initial_step_fraction =
        a.value("initial_step_fraction", cfg.engine.af_opt.initial_step_fraction);
  }
  cfg.engine.xi = j.value("xi", cfg.engine.xi);
  cfg.parallelism = j.value("parallelism", cfg.parallelism);
  if (j.contains("output_dir")) {
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  ExperimentConfig cfg = config_from_json(nlohmann::json::parse(in));
  apply_env_overrides(cfg);
  return cfg;
}

void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("AFSEL_OUTPUT_DIR")) {
    cfg.output_dir = dir;
  }
  if (const char* par = std::getenv("AFSEL_PARALLELISM")) {
    std::size_t used = 0;
    const int value = std::stoi(par, &used);
    if (used != std::string(par).size() || value < 1) {
      throw std::invalid_argument("AFSEL_PARALLELISM must be a positive integer");
    }
    cfg.parallelism = value;
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.functions.empty()) throw std::invalid_argument("no functions selected");
  if (cfg.instances.empty()) throw std::invalid_argument("no instances selected");
  if (cfg.dims.empty()) throw std::invalid_argument("no dims selected");
  if (cfg.seeds.empty()) throw std::invalid_argument("no seeds selected");
  if (cfg.schedules.empty()) throw std::invalid_argument("no schedules selected");
  for (int fid : cfg.functions) {
    if (fid < 1 || fid > bbob::kFunctionCount) {
      throw std::invalid_argument("unknown function id: " + std::to_string(fid));
    }
  }
  for (int iid : cfg.instances) {
    if (iid < 0) throw std::invalid_argument("instance ids must be non-negative");
  }
  for (int dim : cfg.dims) {
    if (dim < 2) throw std::invalid_argument("dims must be at least 2");
  }
  if (cfg.parallelism < 1) throw std::invalid_argument("parallelism must be positive");
  if (cfg.output_dir.empty()) throw std::invalid_argument("output directory must be set");
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["functions"] = cfg.functions;
  j["instances"] = cfg.instances;
  j["dims"] = cfg.dims;
  j["seeds"] = cfg.seeds;
  nlohmann::json schedules = nlohmann::json::array();
  for (const af::Schedule& s : cfg.schedules) schedules.push_back(af::to_string(s.id));
  j["schedules"] = std::move(schedules);
  j["budget"] = {{"doe_size", cfg.engine.budget.doe_size},
                 {"surrogate_evals", cfg.engine.budget.surrogate_evals}};
  j["gp"] = {{"restarts", cfg.engine.gp.restarts},
             {"objective_evals", cfg.engine.gp.objective_evals}};
  j["af_opt"] = {{"candidates", cfg.engine.af_opt.candidates},
                 {"refinements", cfg.engine.af_opt.refinements},
                 {"refine_steps", cfg.engine.af_opt.refine_steps},
                 {"initial_step_fraction", cfg.engine.af_opt.initial_step_fraction}};
  j["xi"] = cfg.engine.xi;
  j["parallelism"] = cfg.parallelism;
  j["output_dir"] = cfg.output_dir.string();
  return j;
}

}  // namespace afsel::config
