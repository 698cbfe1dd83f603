#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "afsel/doe.hpp"

namespace afsel::ela {

inline constexpr int kFeatureCount = 38;

enum class NanReason : std::uint8_t {
  none,
  constant_values,    // zero spread in the inputs of the statistic
  degenerate_sample,  // too few usable points for the statistic
};

// Canonical feature order; every feature vector, dataset column and model
// input follows it.
std::span<const std::string_view> feature_names();
int feature_index(std::string_view name);  // -1 when unknown

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::array<NanReason, kFeatureCount> reasons{};
};

template <int N>
struct FeatureBlock {
  std::array<double, N> values{};
  std::array<NanReason, N> reasons{};

  void set(int i, double v) { values[static_cast<std::size_t>(i)] = v; }
  void flag(int i, NanReason r);
};

using Points = std::vector<std::vector<double>>;

// Objective-value distribution: skewness, excess kurtosis, and the number of
// interior modes of a Gaussian kernel density estimate (Silverman bandwidth,
// 512-point grid padded by three bandwidths).
FeatureBlock<3> distribution_features(std::span<const double> values);

// Adjusted R^2 (and coefficient summaries) of four least-squares models:
// linear, linear with interactions, quadratic, quadratic with interactions.
FeatureBlock<9> meta_model_features(const Points& points, std::span<const double> values);

// Pairwise-distance contraction of the best 2/5/10/25% of the sample against
// the full sample: ratios and differences of mean/median distances.
FeatureBlock<16> dispersion_features(const Points& points, std::span<const double> values);

// Information content of the objective sequence along a nearest-neighbour
// tour: entropy peak, settling/half-peak sensitivities, initial partial
// information.
FeatureBlock<5> information_content_features(const Points& points, std::span<const double> values);

// Nearest-neighbour versus nearest-better-neighbour distance statistics.
FeatureBlock<5> nearest_better_features(const Points& points, std::span<const double> values);

// Full 38-entry vector over an evaluated design, in canonical order.
FeatureVector feature_vector(const doe::Design& design);

// Exposed internals of the information-content computation.
std::vector<double> tour_slopes(const Points& points, std::span<const double> values);
double symbol_entropy(std::span<const double> slopes, double eps);
double partial_information(std::span<const double> slopes, double eps);

// Linear-interpolation quantile (the common "type 7" rule); input must be
// sorted ascending.
double quantile_type7(std::span<const double> sorted, double q);

}  // namespace afsel::ela
