#pragma once

#include <string>
#include <utility>
#include <vector>

#include "afsel/acquisition.hpp"
#include "afsel/bbob.hpp"
#include "afsel/doe.hpp"
#include "afsel/ela.hpp"
#include "afsel/gp.hpp"

namespace afsel::engine {

struct BudgetConfig {
  int doe_size = 0;  // 0 means 10 * dim
  int surrogate_evals = 100;
};

struct AfOptConfig {
  int candidates = 1000;
  int refinements = 10;
  int refine_steps = 20;
  double initial_step_fraction = 0.1;  // of the box width
};

struct EngineConfig {
  BudgetConfig budget;
  gp::Config gp;
  AfOptConfig af_opt;
  double xi = 0.0;
};

struct Evaluation {
  int iteration = 0;  // 0-based surrogate iteration
  std::vector<double> point;
  double value = 0.0;
  af::Kind af_used = af::Kind::ei;
  bool fallback = false;  // surrogate failed; the point is a uniform draw
  double best_so_far = 0.0;
};

struct RunRecord {
  int schema_version = 1;
  int function_id = 0;
  int instance_id = 0;
  int dim = 0;
  int seed = 0;
  af::ScheduleId schedule = af::ScheduleId::static_ei;
  double f_opt = 0.0;
  doe::Design design;
  ela::FeatureVector features;
  std::vector<Evaluation> evaluations;
  std::vector<double> incumbent_regret;  // one entry per surrogate evaluation
  double final_value = 0.0;
  double final_regret = 0.0;
  double final_log_regret = 0.0;
  double timing_seconds = 0.0;
  std::vector<std::string> flags;
};

inline constexpr double kRegretFloor = 1e-12;

// log10 of the regret, floored so exact hits stay finite.
double log_regret(double regret);

// Maximises the acquisition surface over the box by seeded uniform candidates
// followed by local stochastic refinements of the best few.  Fully
// deterministic for a given key; equal scores resolve to the earlier
// candidate.
std::vector<double> maximize_af(const gp::Model& model, af::Kind kind, double best, double xi,
                                double lower, double upper, int dim, const AfOptConfig& config,
                                StreamKey key);

// One full budget-constrained optimisation run of a schedule on a problem.
// The initial design depends only on (function, instance, seed), so all
// schedules of the same run share it, and the landscape features are computed
// from exactly that design.
RunRecord run(const bbob::Problem& problem, const af::Schedule& schedule,
              const EngineConfig& config, int seed);

// Incumbent log-regret after each surrogate evaluation; the initial design
// contributes only its best value as the starting incumbent.
std::vector<std::pair<int, double>> incumbent_trajectory(const RunRecord& record);

}  // namespace afsel::engine
