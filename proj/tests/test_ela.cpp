#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "afsel/doe.hpp"
#include "afsel/ela.hpp"
#include "afsel/rng.hpp"

using namespace afsel;
using ela::NanReason;
using ela::Points;

namespace {

Points line_points(const std::vector<double>& xs) {
  Points out;
  for (double x : xs) out.push_back({x});
  return out;
}

Points random_points(Rng& rng, int n, int dim) {
  Points out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> p;
    for (int d = 0; d < dim; ++d) p.push_back(rng.uniform(-5.0, 5.0));
    out.push_back(p);
  }
  return out;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Local type-7 quantile so the oracles do not share code with the library.
double quantile7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

double mean_v(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const double m = mean_v(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double pearson_v(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_v(a);
  const double mb = mean_v(b);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db);
}

// Brute-force dispersion oracle: recompute every quota slice directly from
// the full pairwise distance lists.
std::array<double, 16> dispersion_oracle(const Points& points, const std::vector<double>& values) {
  const std::size_t n = points.size();
  std::vector<double> full;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a < b) full.push_back(dist(points[a], points[b]));
    }
  }
  const double full_mean = mean_v(full);
  const double full_median = quantile7(full, 0.5);

  std::array<double, 16> out{};
  const std::array<double, 4> quotas = {0.02, 0.05, 0.10, 0.25};
  for (int qi = 0; qi < 4; ++qi) {
    const double threshold = quantile7(values, quotas[static_cast<std::size_t>(qi)]);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (values[i] <= threshold) subset.push_back(i);
    }
    if (subset.size() < 2) {
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      subset = {order[0], order[1]};
    }
    std::vector<double> sub;
    for (std::size_t a = 0; a < subset.size(); ++a) {
      for (std::size_t b = a + 1; b < subset.size(); ++b) {
        sub.push_back(dist(points[subset[a]], points[subset[b]]));
      }
    }
    const double sub_mean = mean_v(sub);
    const double sub_median = quantile7(sub, 0.5);
    out[static_cast<std::size_t>(qi)] = sub_mean / full_mean;
    out[static_cast<std::size_t>(qi) + 4] = sub_median / full_median;
    out[static_cast<std::size_t>(qi) + 8] = sub_mean - full_mean;
    out[static_cast<std::size_t>(qi) + 12] = sub_median - full_median;
  }
  return out;
}

// Brute-force nearest-better oracle built from an explicit distance matrix.
std::array<double, 5> nearest_better_oracle(const Points& points,
                                            const std::vector<double>& values) {
  const std::size_t n = points.size();
  Eigen::MatrixXd d(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          dist(points[a], points[b]);
    }
  }
  std::vector<double> nn, nb, ratio, degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    double better = std::numeric_limits<double>::infinity();
    std::size_t target = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dij = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      best = std::min(best, dij);
      if (values[j] < values[i] && dij < better) {
        better = dij;
        target = j;
      }
    }
    if (target < n) {
      nn.push_back(best);
      nb.push_back(better);
      ratio.push_back(best / better);
      degree[target] += 1.0;
    }
  }
  std::array<double, 5> out{};
  out[0] = sample_sd(nn) / sample_sd(nb);
  out[1] = mean_v(nn) / mean_v(nb);
  out[2] = pearson_v(nn, nb);
  out[3] = sample_sd(ratio) / mean_v(ratio);
  std::vector<double> vals(values.begin(), values.end());
  out[4] = pearson_v(degree, vals);
  return out;
}

}  // namespace

TEST_CASE("feature names are canonical, unique, and indexable") {
  const auto names = ela::feature_names();
  REQUIRE(names.size() == 38);
  std::set<std::string> unique;
  for (std::size_t i = 0; i < names.size(); ++i) {
    unique.insert(std::string(names[i]));
    CHECK(ela::feature_index(names[i]) == static_cast<int>(i));
  }
  CHECK(unique.size() == 38);
  CHECK(ela::feature_index("ela_distr.skewness") == 0);
  CHECK(ela::feature_index("ic.h_max") == 28);
  CHECK(ela::feature_index("nbc.nb_fitness.cor") == 33 + 4);
  CHECK(ela::feature_index("no_such_feature") == -1);
}

TEST_CASE("type-7 quantile interpolates linearly") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(ela::quantile_type7(v, 0.0) == doctest::Approx(1.0));
  CHECK(ela::quantile_type7(v, 0.25) == doctest::Approx(1.75));
  CHECK(ela::quantile_type7(v, 0.5) == doctest::Approx(2.5));
  CHECK(ela::quantile_type7(v, 1.0) == doctest::Approx(4.0));
  const std::vector<double> odd = {1.0, 2.0, 10.0};
  CHECK(ela::quantile_type7(odd, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("symmetric samples have zero skewness") {
  const std::vector<double> v = {-2.0, -1.0, 0.0, 1.0, 2.0};
  const auto block = ela::distribution_features(v);
  CHECK(std::abs(block.values[0]) <= 1e-12);
}

TEST_CASE("distribution moments match direct computation") {
  Rng rng(derive(StreamKey{3}, "moments"));
  std::vector<double> v;
  for (int i = 0; i < 10000; ++i) v.push_back(rng.normal());
  const auto block = ela::distribution_features(v);
  CHECK(std::abs(block.values[0]) < 0.1);
  CHECK(std::abs(block.values[1]) < 0.2);

  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d / n;
    m3 += d * d * d / n;
    m4 += d * d * d * d / n;
  }
  CHECK(block.values[0] == doctest::Approx(m3 / std::pow(m2, 1.5)).epsilon(1e-9));
  CHECK(block.values[1] == doctest::Approx(m4 / (m2 * m2) - 3.0).epsilon(1e-9));
}

TEST_CASE("density mode count separates unimodal from bimodal samples") {
  std::vector<double> unimodal;
  for (double x = -2.0; x <= 2.0; x += 0.2) unimodal.push_back(x);
  CHECK(ela::distribution_features(unimodal).values[2] == doctest::Approx(1.0));

  std::vector<double> bimodal;
  for (double off : {0.0, 10.0}) {
    for (double x : {-0.2, -0.1, 0.0, 0.1, 0.2}) bimodal.push_back(off + x);
  }
  CHECK(ela::distribution_features(bimodal).values[2] == doctest::Approx(2.0));
}

TEST_CASE("constant samples flag shape statistics and report one mode") {
  const std::vector<double> v(12, 3.5);
  const auto block = ela::distribution_features(v);
  CHECK(std::isnan(block.values[0]));
  CHECK(std::isnan(block.values[1]));
  CHECK(block.reasons[0] == NanReason::constant_values);
  CHECK(block.reasons[1] == NanReason::constant_values);
  CHECK(block.values[2] == doctest::Approx(1.0));

  CHECK_THROWS_AS(ela::distribution_features(std::vector<double>{1.0, 2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("meta models recover exact linear structure") {
  Rng rng(derive(StreamKey{3}, "lin"));
  const Points points = random_points(rng, 20, 2);
  std::vector<double> values;
  for (const auto& p : points) values.push_back(3.0 + 2.0 * p[0] - 5.0 * p[1]);

  const auto block = ela::meta_model_features(points, values);
  CHECK(block.values[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(block.values[1] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(block.values[2] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(block.values[3] == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(block.values[4] == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(block.values[5] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("meta models recover exact quadratic structure") {
  Rng rng(derive(StreamKey{3}, "quad"));
  const Points points = random_points(rng, 25, 2);
  std::vector<double> values;
  for (const auto& p : points) {
    const double a = p[0] - 1.0;
    const double b = p[1] + 2.0;
    values.push_back(a * a + b * b + 0.5);
  }
  const auto block = ela::meta_model_features(points, values);
  CHECK(block.values[6] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(block.values[7] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(block.values[8] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("meta adjusted R^2 agrees with an independent least-squares oracle") {
  Rng rng(derive(StreamKey{3}, "cubic"));
  const int n = 30;
  const Points points = random_points(rng, n, 2);
  std::vector<double> values;
  for (const auto& p : points) {
    values.push_back(p[0] * p[0] * p[0] - 2.0 * p[0] * p[1] + 0.3 * p[1] + rng.normal());
  }
  const auto block = ela::meta_model_features(points, values);

  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = points[static_cast<std::size_t>(i)][0];
    x(i, 1) = points[static_cast<std::size_t>(i)][1];
    y[i] = values[static_cast<std::size_t>(i)];
  }
  auto adj_r2 = [&](const Eigen::MatrixXd& design) {
    const Eigen::VectorXd coef =
        design.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
    const double ss_res = (y - design * coef).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    const double rows = static_cast<double>(design.rows());
    const double preds = static_cast<double>(design.cols() - 1);
    const double r2 = 1.0 - ss_res / ss_tot;
    return 1.0 - (1.0 - r2) * (rows - 1.0) / (rows - preds - 1.0);
  };

  Eigen::MatrixXd lin(n, 3);
  lin.col(0).setOnes();
  lin.col(1) = x.col(0);
  lin.col(2) = x.col(1);
  Eigen::MatrixXd lin_i(n, 4);
  lin_i << lin, x.col(0).cwiseProduct(x.col(1));
  Eigen::MatrixXd quad(n, 5);
  quad << lin, x.col(0).cwiseAbs2(), x.col(1).cwiseAbs2();
  Eigen::MatrixXd quad_i(n, 6);
  quad_i << quad, x.col(0).cwiseProduct(x.col(1));

  CHECK(block.values[0] == doctest::Approx(adj_r2(lin)).epsilon(1e-8));
  CHECK(block.values[5] == doctest::Approx(adj_r2(lin_i)).epsilon(1e-8));
  CHECK(block.values[6] == doctest::Approx(adj_r2(quad)).epsilon(1e-8));
  CHECK(block.values[8] == doctest::Approx(adj_r2(quad_i)).epsilon(1e-8));
}

TEST_CASE("meta models flag constant targets") {
  Rng rng(derive(StreamKey{3}, "const"));
  const Points points = random_points(rng, 15, 2);
  const std::vector<double> values(15, 2.0);
  const auto block = ela::meta_model_features(points, values);
  for (int slot : {0, 5, 6, 8}) {
    CHECK(std::isnan(block.values[static_cast<std::size_t>(slot)]));
    CHECK(block.reasons[static_cast<std::size_t>(slot)] == NanReason::constant_values);
  }
  CHECK(block.values[1] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("dispersion matches a brute-force recomputation") {
  for (int rep = 0; rep < 3; ++rep) {
    Rng rng(derive(StreamKey{3}, "disp", rep));
    const Points points = random_points(rng, 20, 3);
    std::vector<double> values;
    for (const auto& p : points) {
      values.push_back(p[0] * p[0] + std::sin(p[1]) + 0.1 * p[2] + rng.uniform());
    }
    const auto block = ela::dispersion_features(points, values);
    const auto oracle = dispersion_oracle(points, values);
    for (int i = 0; i < 16; ++i) {
      CAPTURE(rep);
      CAPTURE(i);
      CHECK(std::abs(block.values[static_cast<std::size_t>(i)] -
                     oracle[static_cast<std::size_t>(i)]) < 1e-10);
    }
  }
}

TEST_CASE("dispersion on coincident points flags ratios and zeroes differences") {
  const Points points(20, std::vector<double>{1.0, 2.0});
  std::vector<double> values;
  for (int i = 0; i < 20; ++i) values.push_back(i);
  const auto block = ela::dispersion_features(points, values);
  for (int i = 0; i < 8; ++i) {
    CHECK(std::isnan(block.values[static_cast<std::size_t>(i)]));
    CHECK(block.reasons[static_cast<std::size_t>(i)] == NanReason::constant_values);
  }
  for (int i = 8; i < 16; ++i) {
    CHECK(block.values[static_cast<std::size_t>(i)] == doctest::Approx(0.0));
  }
}

TEST_CASE("dispersion with constant values contracts to the full sample") {
  Rng rng(derive(StreamKey{3}, "flatvals"));
  const Points points = random_points(rng, 20, 2);
  const std::vector<double> values(20, 7.0);
  const auto block = ela::dispersion_features(points, values);
  for (int i = 0; i < 8; ++i) {
    CHECK(block.values[static_cast<std::size_t>(i)] == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = 8; i < 16; ++i) {
    CHECK(block.values[static_cast<std::size_t>(i)] == doctest::Approx(0.0));
  }
}

TEST_CASE("small quantile slices fall back to the two best points") {
  Rng rng(derive(StreamKey{3}, "twobest"));
  const Points points = random_points(rng, 20, 2);
  std::vector<double> values;
  for (int i = 0; i < 20; ++i) values.push_back(i);
  const auto block = ela::dispersion_features(points, values);
  // With 20 strictly increasing values the 2% slice keeps only the minimum,
  // so the contract substitutes the pair of best points.
  const double pair_dist = dist(points[0], points[1]);
  std::vector<double> full;
  for (std::size_t a = 0; a < 20; ++a) {
    for (std::size_t b = a + 1; b < 20; ++b) full.push_back(dist(points[a], points[b]));
  }
  CHECK(block.values[0] == doctest::Approx(pair_dist / mean_v(full)).epsilon(1e-12));
  CHECK(block.values[8] == doctest::Approx(pair_dist - mean_v(full)).epsilon(1e-12));
}

TEST_CASE("tour slopes skip coincident points and follow the nearest neighbour") {
  // Positions are laid out so the tour is the identity order; the duplicate
  // of the third point contributes no slope.
  const Points points = line_points({0.0, 1.0, 2.0, 2.0, 3.0});
  const std::vector<double> values = {0.0, 2.0, 1.0, 5.0, 6.0};
  const auto slopes = ela::tour_slopes(points, values);
  REQUIRE(slopes.size() == 3);
  CHECK(slopes[0] == doctest::Approx(2.0));
  CHECK(slopes[1] == doctest::Approx(-1.0));
  CHECK(slopes[2] == doctest::Approx(1.0));
}

TEST_CASE("alternating sequence reaches the two-symbol entropy plateau") {
  std::vector<double> xs, values;
  for (int i = 0; i < 12; ++i) {
    xs.push_back(i);
    values.push_back(i % 2 == 0 ? 0.0 : 1.0);
  }
  const Points points = line_points(xs);
  const auto slopes = ela::tour_slopes(points, values);
  REQUIRE(slopes.size() == 11);

  const double h0 = ela::symbol_entropy(slopes, 0.0);
  const double expected = std::log(2.0) / std::log(6.0);
  CHECK(std::abs(h0 - expected) < 1e-12);
  CHECK(std::abs(h0 - 0.3868) < 1e-4);

  const auto block = ela::information_content_features(points, values);
  CHECK(block.values[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(block.values[2] == doctest::Approx(0.0));  // entropy peaks already at eps = 0
  CHECK(block.values[4] == doctest::Approx(1.0));  // every slope flips sign

  // The entropy collapses once eps swallows the unit slopes, so the settling
  // and half-peak epsilons bracket 1 at the grid resolution.
  const double first_above_one = -5.0 + 20.0 * 250.0 / 999.0;
  const double last_below_one = -5.0 + 20.0 * 249.0 / 999.0;
  CHECK(block.values[1] == doctest::Approx(first_above_one).epsilon(1e-9));
  CHECK(block.values[3] == doctest::Approx(last_below_one).epsilon(1e-9));
}

TEST_CASE("monotone sequences compress to a single symbol run") {
  std::vector<double> xs, values;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(i);
    values.push_back(i * i);  // uneven slopes so moderate eps mixes 0 and +
  }
  const auto block = ela::information_content_features(line_points(xs), values);
  CHECK(block.values[4] == doctest::Approx(1.0 / 9.0));
  CHECK(block.values[0] > 0.0);
}

TEST_CASE("vanishing slopes yield zero entropy and immediate settling") {
  std::vector<double> xs, values;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(i);
    values.push_back(i * 1e-7);
  }
  const auto block = ela::information_content_features(line_points(xs), values);
  CHECK(block.values[0] == 0.0);
  CHECK(block.values[1] == doctest::Approx(-5.0));
  CHECK(block.values[2] == doctest::Approx(0.0));
  CHECK(std::isnan(block.values[3]));
  CHECK(block.reasons[3] == NanReason::degenerate_sample);
  CHECK(block.values[4] == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("partial information counts sign changes") {
  const std::vector<double> flat(5, 0.0);
  CHECK(ela::partial_information(flat, 0.0) == doctest::Approx(0.0));
  const std::vector<double> updown = {1.0, 1.0, -1.0, 1.0};
  CHECK(ela::partial_information(updown, 0.0) == doctest::Approx(3.0 / 4.0));
  CHECK(ela::symbol_entropy(flat, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("nearest-better statistics match a brute-force recomputation") {
  for (int rep = 0; rep < 3; ++rep) {
    Rng rng(derive(StreamKey{3}, "nbc", rep));
    const Points points = random_points(rng, 20, 2);
    std::vector<double> values;
    for (const auto& p : points) values.push_back(p[0] * p[0] + p[1] * p[1] + rng.uniform());
    const auto block = ela::nearest_better_features(points, values);
    const auto oracle = nearest_better_oracle(points, values);
    for (int i = 0; i < 5; ++i) {
      CAPTURE(rep);
      CAPTURE(i);
      CHECK(std::abs(block.values[static_cast<std::size_t>(i)] -
                     oracle[static_cast<std::size_t>(i)]) < 1e-10);
    }
  }
}

TEST_CASE("shrinking gaps towards the optimum align both neighbour distances") {
  // Gaps 4, 3, 2, 1 with strictly improving values: each point's nearest
  // neighbour is also its nearest better neighbour.
  const Points points = line_points({0.0, 4.0, 7.0, 9.0, 10.0});
  const std::vector<double> values = {5.0, 4.0, 3.0, 2.0, 1.0};
  const auto block = ela::nearest_better_features(points, values);
  CHECK(block.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(block.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(block.values[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(block.values[3] == doctest::Approx(0.0));
}

TEST_CASE("evenly spaced improving points leave the correlation undefined") {
  const Points points = line_points({0.0, 1.0, 2.0, 3.0, 4.0});
  const std::vector<double> values = {5.0, 4.0, 3.0, 2.0, 1.0};
  const auto block = ela::nearest_better_features(points, values);
  CHECK(block.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isnan(block.values[0]));
  CHECK(block.reasons[0] == NanReason::constant_values);
  CHECK(std::isnan(block.values[2]));
  CHECK(block.reasons[2] == NanReason::constant_values);
}

TEST_CASE("nearest-better ordering is label-invariant") {
  Rng rng(derive(StreamKey{3}, "perm"));
  const Points points = random_points(rng, 15, 2);
  std::vector<double> values;
  for (const auto& p : points) values.push_back(std::cos(p[0]) + p[1] * p[1]);
  const auto base = ela::nearest_better_features(points, values);

  std::vector<int> order = rng.permutation(15);
  Points shuffled_points;
  std::vector<double> shuffled_values;
  for (int idx : order) {
    shuffled_points.push_back(points[static_cast<std::size_t>(idx)]);
    shuffled_values.push_back(values[static_cast<std::size_t>(idx)]);
  }
  const auto shuffled = ela::nearest_better_features(shuffled_points, shuffled_values);
  for (int i = 0; i < 5; ++i) {
    CHECK(base.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(shuffled.values[static_cast<std::size_t>(i)]).epsilon(1e-10));
  }
}

TEST_CASE("constant values flag every better-neighbour statistic") {
  Rng rng(derive(StreamKey{3}, "nbconst"));
  const Points points = random_points(rng, 10, 2);
  const std::vector<double> values(10, 1.0);
  const auto block = ela::nearest_better_features(points, values);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::isnan(block.values[static_cast<std::size_t>(i)]));
    CHECK(block.reasons[static_cast<std::size_t>(i)] == NanReason::constant_values);
  }
}

TEST_CASE("feature vector assembles all blocks in canonical order") {
  Rng rng(derive(StreamKey{3}, "vector"));
  doe::Design design;
  design.points = random_points(rng, 20, 2);
  for (const auto& p : design.points) {
    design.values.push_back(p[0] * p[0] + 3.0 * std::sin(p[1]));
  }
  const auto fv = ela::feature_vector(design);
  REQUIRE(fv.values.size() == 38);

  const auto distr = ela::distribution_features(design.values);
  const auto meta = ela::meta_model_features(design.points, design.values);
  const auto disp = ela::dispersion_features(design.points, design.values);
  const auto ic = ela::information_content_features(design.points, design.values);
  const auto nbc = ela::nearest_better_features(design.points, design.values);
  for (int i = 0; i < 3; ++i) CHECK(fv.values[static_cast<std::size_t>(i)] == distr.values[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 9; ++i) CHECK(fv.values[static_cast<std::size_t>(i) + 3] == meta.values[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 16; ++i) CHECK(fv.values[static_cast<std::size_t>(i) + 12] == disp.values[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 5; ++i) CHECK(fv.values[static_cast<std::size_t>(i) + 28] == ic.values[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 5; ++i) CHECK(fv.values[static_cast<std::size_t>(i) + 33] == nbc.values[static_cast<std::size_t>(i)]);

  const auto again = ela::feature_vector(design);
  for (int i = 0; i < 38; ++i) {
    const double a = fv.values[static_cast<std::size_t>(i)];
    const double b = again.values[static_cast<std::size_t>(i)];
    CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
  }

  doe::Design small;
  small.points = random_points(rng, 9, 2);
  small.values.assign(9, 1.0);
  CHECK_THROWS_AS(ela::feature_vector(small), std::invalid_argument);
}

TEST_CASE("spatial features ignore translation, value features ignore shifts") {
  Rng rng(derive(StreamKey{3}, "invariance"));
  doe::Design base;
  base.points = random_points(rng, 18, 2);
  for (const auto& p : base.points) base.values.push_back(p[0] * p[0] - p[1] + std::sin(3.0 * p[0]));
  const auto fv = ela::feature_vector(base);

  doe::Design moved = base;
  for (auto& p : moved.points) {
    p[0] += 0.5;
    p[1] -= 0.25;
  }
  const auto fv_moved = ela::feature_vector(moved);
  for (int i = 12; i < 38; ++i) {
    const double a = fv.values[static_cast<std::size_t>(i)];
    const double b = fv_moved.values[static_cast<std::size_t>(i)];
    CAPTURE(i);
    if (std::isnan(a)) {
      CHECK(std::isnan(b));
    } else {
      CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)));
    }
  }

  doe::Design lifted = base;
  for (auto& v : lifted.values) v += 10.0;
  const auto fv_lifted = ela::feature_vector(lifted);
  const int intercept = ela::feature_index("ela_meta.lin_simple.intercept");
  for (int i = 0; i < 38; ++i) {
    if (i == intercept) continue;
    const double a = fv.values[static_cast<std::size_t>(i)];
    const double b = fv_lifted.values[static_cast<std::size_t>(i)];
    CAPTURE(i);
    if (std::isnan(a)) {
      CHECK(std::isnan(b));
    } else {
      CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)));
    }
  }
  CHECK(fv_lifted.values[static_cast<std::size_t>(intercept)] ==
        doctest::Approx(fv.values[static_cast<std::size_t>(intercept)] + 10.0).epsilon(1e-6));
}
