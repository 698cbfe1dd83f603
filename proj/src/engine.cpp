#include "afsel/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace afsel::engine {

namespace {

constexpr std::uint64_t kEngineSeed = 0x9e3779b97f4a7c15ULL;

double af_value(const gp::Model& model, af::Kind kind, const std::vector<double>& x, double best,
                double xi) {
  const gp::Prediction p = model.predict(x);
  return kind == af::Kind::ei ? af::expected_improvement(p.mean, p.stdev, best, xi)
                              : af::probability_of_improvement(p.mean, p.stdev, best, xi);
}

}  // namespace

double log_regret(double regret) { return std::log10(std::max(regret, kRegretFloor)); }

std::vector<double> maximize_af(const gp::Model& model, af::Kind kind, double best, double xi,
                                double lower, double upper, int dim, const AfOptConfig& config,
                                StreamKey key) {
  if (config.candidates < 1) throw std::invalid_argument("need at least one candidate");

  Rng cand_rng(derive(key, "candidates"));
  std::vector<std::vector<double>> candidates(static_cast<std::size_t>(config.candidates),
                                              std::vector<double>(static_cast<std::size_t>(dim)));
  std::vector<double> scores(static_cast<std::size_t>(config.candidates));
  for (int c = 0; c < config.candidates; ++c) {
    auto& x = candidates[static_cast<std::size_t>(c)];
    for (int j = 0; j < dim; ++j) x[static_cast<std::size_t>(j)] = cand_rng.uniform(lower, upper);
    scores[static_cast<std::size_t>(c)] = af_value(model, kind, x, best, xi);
  }

  const int starts = std::clamp(config.refinements, 1, config.candidates);
  std::vector<int> order(static_cast<std::size_t>(config.candidates));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });

  std::vector<double> best_point;
  double best_score = -std::numeric_limits<double>::infinity();
  const double width = upper - lower;
  for (int r = 0; r < starts; ++r) {
    Rng refine_rng(derive(key, "refine", r));
    std::vector<double> x = candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    double fx = scores[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    double step = config.initial_step_fraction * width;
    for (int s = 0; s < config.refine_steps; ++s) {
      std::vector<double> proposal(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) {
        proposal[j] = std::clamp(x[j] + step * refine_rng.normal(), lower, upper);
      }
      const double fp = af_value(model, kind, proposal, best, xi);
      if (fp > fx) {
        x = std::move(proposal);
        fx = fp;
      } else {
        step *= 0.5;
      }
    }
    if (fx > best_score) {
      best_score = fx;
      best_point = std::move(x);
    }
  }
  return best_point;
}

RunRecord run(const bbob::Problem& problem, const af::Schedule& schedule,
              const EngineConfig& config, int seed) {
  const int dim = problem.dim();
  const int doe_size = config.budget.doe_size > 0 ? config.budget.doe_size : 10 * dim;
  if (doe_size < 10) {
    // The landscape features need a minimally informative design.
    throw std::invalid_argument("design must have at least 10 points");
  }
  if (config.budget.surrogate_evals < 1) {
    throw std::invalid_argument("surrogate budget must be positive");
  }

  const auto started = std::chrono::steady_clock::now();

  RunRecord record;
  record.function_id = problem.function_id();
  record.instance_id = problem.instance_id();
  record.dim = dim;
  record.seed = seed;
  record.schedule = schedule.id;
  record.f_opt = problem.f_opt();

  const doe::DesignKey dkey = doe::design_key(problem.function_id(), problem.instance_id(), seed);
  record.design = doe::sample_design(problem, doe_size, dkey);
  record.features = ela::feature_vector(record.design);

  const StreamKey root = derive(StreamKey{kEngineSeed}, problem.function_id(),
                                problem.instance_id(), dim, seed);
  const StreamKey sched_root = derive(root, "schedule", af::portfolio_index(schedule.id));
  const StreamKey coin_root = derive(sched_root, "af");

  std::vector<std::vector<double>> points = record.design.points;
  std::vector<double> values = record.design.values;
  double best = *std::min_element(values.begin(), values.end());

  const int budget = config.budget.surrogate_evals;
  record.evaluations.reserve(static_cast<std::size_t>(budget));
  record.incumbent_regret.reserve(static_cast<std::size_t>(budget));
  for (int iter = 0; iter < budget; ++iter) {
    const af::Kind kind = af::schedule_af(schedule, iter, budget, coin_root);

    Evaluation eval;
    eval.iteration = iter;
    eval.af_used = kind;
    try {
      const gp::Model model =
          gp::Model::fit(points, values, config.gp, derive(sched_root, "gp", iter));
      eval.point = maximize_af(model, kind, best, config.xi, bbob::kLowerBound, bbob::kUpperBound,
                               dim, config.af_opt, derive(sched_root, "afmax", iter));
    } catch (const gp::surrogate_error&) {
      Rng fallback_rng(derive(sched_root, "fallback", iter));
      eval.point.resize(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) {
        eval.point[static_cast<std::size_t>(j)] =
            fallback_rng.uniform(bbob::kLowerBound, bbob::kUpperBound);
      }
      eval.fallback = true;
      record.flags.push_back("fallback:" + std::to_string(iter));
    }

    eval.value = problem.evaluate(eval.point);
    best = std::min(best, eval.value);
    eval.best_so_far = best;
    record.incumbent_regret.push_back(problem.regret(best));

    points.push_back(eval.point);
    values.push_back(eval.value);
    record.evaluations.push_back(std::move(eval));
  }

  record.final_value = best;
  record.final_regret = problem.regret(best);
  record.final_log_regret = log_regret(record.final_regret);
  record.timing_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

std::vector<std::pair<int, double>> incumbent_trajectory(const RunRecord& record) {
  std::vector<std::pair<int, double>> out;
  out.reserve(record.incumbent_regret.size());
  for (std::size_t i = 0; i < record.incumbent_regret.size(); ++i) {
    out.emplace_back(static_cast<int>(i), log_regret(record.incumbent_regret[i]));
  }
  return out;
}

}  // namespace afsel::engine
