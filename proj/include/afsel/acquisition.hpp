#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "afsel/rng.hpp"

namespace afsel::af {

enum class Kind { ei, pi };

enum class ScheduleId {
  static_ei,
  static_pi,
  random_af,
  round_robin,
  ee25,
  ee50,
  ee75,
};

inline constexpr int kScheduleCount = 7;

struct Schedule {
  ScheduleId id = ScheduleId::static_ei;
  double switch_fraction = 0.0;  // explore/exploit switch point, 0 otherwise
};

// The fixed portfolio in canonical order; this order defines target-vector
// indexing throughout the selector and analytics code.
const std::array<Schedule, kScheduleCount>& portfolio();

std::string_view to_string(ScheduleId id);
std::optional<ScheduleId> parse_schedule(std::string_view name);
int portfolio_index(ScheduleId id);

double normal_pdf(double z);
double normal_cdf(double z);

// Expected improvement for minimisation; never negative.  A zero predictive
// deviation collapses to the deterministic improvement.
double expected_improvement(double mean, double stdev, double best, double xi = 0.0);

// Probability of improvement for minimisation.
double probability_of_improvement(double mean, double stdev, double best, double xi = 0.0);

// Which acquisition function the schedule plays at the given iteration
// (0-based, must lie in [0, budget)).  The random schedule draws a fair coin
// from a stream keyed by (key, iteration), so replays are exact.
Kind schedule_af(const Schedule& schedule, int iteration, int budget, StreamKey key);

}  // namespace afsel::af
