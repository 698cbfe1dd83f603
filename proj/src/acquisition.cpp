#include "afsel/acquisition.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace afsel::af {

const std::array<Schedule, kScheduleCount>& portfolio() {
  static const std::array<Schedule, kScheduleCount> kPortfolio = {{
      {ScheduleId::static_ei, 0.0},
      {ScheduleId::static_pi, 0.0},
      {ScheduleId::random_af, 0.0},
      {ScheduleId::round_robin, 0.0},
      {ScheduleId::ee25, 0.25},
      {ScheduleId::ee50, 0.50},
      {ScheduleId::ee75, 0.75},
  }};
  return kPortfolio;
}

std::string_view to_string(ScheduleId id) {
  switch (id) {
    case ScheduleId::static_ei: return "static_ei";
    case ScheduleId::static_pi: return "static_pi";
    case ScheduleId::random_af: return "random";
    case ScheduleId::round_robin: return "round_robin";
    case ScheduleId::ee25: return "ee25";
    case ScheduleId::ee50: return "ee50";
    case ScheduleId::ee75: return "ee75";
  }
  return "unknown";
}

std::optional<ScheduleId> parse_schedule(std::string_view name) {
  for (const Schedule& s : portfolio()) {
    if (to_string(s.id) == name) return s.id;
  }
  return std::nullopt;
}

int portfolio_index(ScheduleId id) {
  const auto& p = portfolio();
  for (int i = 0; i < kScheduleCount; ++i) {
    if (p[static_cast<std::size_t>(i)].id == id) return i;
  }
  throw std::invalid_argument("unknown schedule id");
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

void check_finite_inputs(double mean, double stdev, double best, double xi) {
  if (std::isnan(mean) || std::isnan(stdev) || std::isnan(best) || std::isnan(xi)) {
    throw std::invalid_argument("acquisition inputs must not be NaN");
  }
}

}  // namespace

double expected_improvement(double mean, double stdev, double best, double xi) {
  check_finite_inputs(mean, stdev, best, xi);
  const double gap = best - mean - xi;
  if (stdev <= 0.0) return std::max(gap, 0.0);
  const double z = gap / stdev;
  return std::max(gap * normal_cdf(z) + stdev * normal_pdf(z), 0.0);
}

double probability_of_improvement(double mean, double stdev, double best, double xi) {
  check_finite_inputs(mean, stdev, best, xi);
  const double gap = best - mean - xi;
  if (stdev <= 0.0) return gap > 0.0 ? 1.0 : 0.0;
  return normal_cdf(gap / stdev);
}

Kind schedule_af(const Schedule& schedule, int iteration, int budget, StreamKey key) {
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  if (iteration < 0 || iteration >= budget) {
    throw std::invalid_argument("iteration out of range");
  }
  switch (schedule.id) {
    case ScheduleId::static_ei:
      return Kind::ei;
    case ScheduleId::static_pi:
      return Kind::pi;
    case ScheduleId::random_af: {
      Rng rng(derive(key, iteration));
      return rng.coin() ? Kind::pi : Kind::ei;
    }
    case ScheduleId::round_robin:
      return iteration % 2 == 0 ? Kind::ei : Kind::pi;
    case ScheduleId::ee25:
    case ScheduleId::ee50:
    case ScheduleId::ee75: {
      const int switch_at =
          static_cast<int>(std::ceil(schedule.switch_fraction * static_cast<double>(budget)));
      return iteration < switch_at ? Kind::ei : Kind::pi;
    }
  }
  throw std::invalid_argument("unknown schedule id");
}

}  // namespace afsel::af
