#include "afsel/ela.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace afsel::ela {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator).
double sd_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da <= 0.0 || db <= 0.0) return kNan;
  return num / std::sqrt(da * db);
}

// Least squares fit with intercept; returns coefficients (intercept first)
// and the adjusted R^2.
struct FitResult {
  Eigen::VectorXd coef;
  double adj_r2 = kNan;
};

FitResult least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  FitResult result;
  const auto qr = design.colPivHouseholderQr();
  if (qr.rank() < design.cols()) {
    // Rank-deficient model matrix: fall back to a lightly ridged normal
    // equations solve.
    const Eigen::MatrixXd gram =
        design.transpose() * design +
        1e-8 * Eigen::MatrixXd::Identity(design.cols(), design.cols());
    result.coef = gram.ldlt().solve(design.transpose() * y);
  } else {
    result.coef = qr.solve(y);
  }
  const Eigen::VectorXd residual = y - design * result.coef;
  const double ss_res = residual.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  const auto n = static_cast<double>(design.rows());
  const auto p = static_cast<double>(design.cols() - 1);  // predictors without intercept
  if (ss_tot <= 0.0 || n - p - 1.0 <= 0.0) return result;
  const double r2 = 1.0 - ss_res / ss_tot;
  result.adj_r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0);
  return result;
}

std::vector<double> pairwise_distances(const Points& points, std::span<const std::size_t> subset) {
  std::vector<double> out;
  out.reserve(subset.size() * (subset.size() - 1) / 2);
  for (std::size_t a = 0; a < subset.size(); ++a) {
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      out.push_back(euclidean(points[subset[a]], points[subset[b]]));
    }
  }
  return out;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_type7(v, 0.5);
}

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {{
    "ela_distr.skewness",
    "ela_distr.kurtosis",
    "ela_distr.number_of_peaks",
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.intercept",
    "ela_meta.lin_simple.coef.min",
    "ela_meta.lin_simple.coef.max",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.lin_w_interact.adj_r2",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_meta.quad_w_interact.adj_r2",
    "disp.ratio_mean_02",
    "disp.ratio_mean_05",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "disp.ratio_median_02",
    "disp.ratio_median_05",
    "disp.ratio_median_10",
    "disp.ratio_median_25",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.diff_median_02",
    "disp.diff_median_05",
    "disp.diff_median_10",
    "disp.diff_median_25",
    "ic.h_max",
    "ic.eps_s",
    "ic.eps_max",
    "ic.eps_ratio",
    "ic.m0",
    "nbc.nn_nb.sd_ratio",
    "nbc.nn_nb.mean_ratio",
    "nbc.nn_nb.cor",
    "nbc.dist_ratio.coeff_var",
    "nbc.nb_fitness.cor",
}};

}  // namespace

template <int N>
void FeatureBlock<N>::flag(int i, NanReason r) {
  values[static_cast<std::size_t>(i)] = kNan;
  reasons[static_cast<std::size_t>(i)] = r;
}

template struct FeatureBlock<3>;
template struct FeatureBlock<5>;
template struct FeatureBlock<9>;
template struct FeatureBlock<16>;

std::span<const std::string_view> feature_names() { return kFeatureNames; }

int feature_index(std::string_view name) {
  for (int i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

double quantile_type7(std::span<const double> sorted, double q) {
  if (sorted.empty()) return kNan;
  if (sorted.size() == 1) return sorted[0];
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

FeatureBlock<3> distribution_features(std::span<const double> values) {
  if (values.size() < 4) throw std::invalid_argument("need at least 4 values");
  FeatureBlock<3> out;
  const auto n = static_cast<double>(values.size());
  const double mean = mean_of(values);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) {
    // A constant sample has no shape statistics and a single density bump.
    out.flag(0, NanReason::constant_values);
    out.flag(1, NanReason::constant_values);
    out.set(2, 1);
    return out;
  }
  out.set(0, m3 / std::pow(m2, 1.5));
  out.set(1, m4 / (m2 * m2) - 3.0);

  // KDE mode count with Silverman's bandwidth; the fallback chain keeps the
  // bandwidth positive for heavily tied samples.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = sd_of(values);
  const double iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);
  double width = std::min(sd, iqr / 1.34);
  if (width <= 0.0) width = sd;  // zero interquartile range on a tied sample
  const double h = 0.9 * width * std::pow(n, -0.2);

  constexpr int kGrid = 512;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  std::array<double, kGrid> density{};
  for (int g = 0; g < kGrid; ++g) {
    const double x = lo + (hi - lo) * g / (kGrid - 1);
    double s = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    density[static_cast<std::size_t>(g)] = s / (n * h * std::sqrt(2.0 * std::numbers::pi));
  }
  int peaks = 0;
  for (int g = 1; g + 1 < kGrid; ++g) {
    const std::size_t u = static_cast<std::size_t>(g);
    if (density[u] > density[u - 1] && density[u] > density[u + 1]) ++peaks;
  }
  out.set(2, peaks);
  return out;
}

FeatureBlock<9> meta_model_features(const Points& points, std::span<const double> values) {
  const std::size_t n = points.size();
  if (n < 2 || values.size() != n) throw std::invalid_argument("bad sample");
  const auto dim = static_cast<Eigen::Index>(points.front().size());
  const auto rows = static_cast<Eigen::Index>(n);

  Eigen::MatrixXd x(rows, dim);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    y[i] = values[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  const Eigen::Index n_inter = dim * (dim - 1) / 2;
  auto with_intercept = [&](Eigen::Index extra) {
    Eigen::MatrixXd m(rows, 1 + dim + extra);
    m.col(0).setOnes();
    m.block(0, 1, rows, dim) = x;
    return m;
  };
  auto add_interactions = [&](Eigen::MatrixXd& m, Eigen::Index offset) {
    Eigen::Index c = offset;
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = a + 1; b < dim; ++b) {
        m.col(c++) = x.col(a).cwiseProduct(x.col(b));
      }
    }
  };

  FeatureBlock<9> out;

  const FitResult lin = least_squares(with_intercept(0), y);
  Eigen::MatrixXd lin_inter = with_intercept(n_inter);
  add_interactions(lin_inter, 1 + dim);
  const FitResult lin_i = least_squares(lin_inter, y);

  Eigen::MatrixXd quad = with_intercept(dim);
  quad.block(0, 1 + dim, rows, dim) = x.array().square().matrix();
  const FitResult quad_fit = least_squares(quad, y);

  Eigen::MatrixXd quad_inter = with_intercept(dim + n_inter);
  quad_inter.block(0, 1 + dim, rows, dim) = x.array().square().matrix();
  add_interactions(quad_inter, 1 + 2 * dim);
  const FitResult quad_i = least_squares(quad_inter, y);

  auto put_adj = [&](int slot, const FitResult& fit) {
    if (std::isnan(fit.adj_r2)) {
      out.flag(slot, NanReason::constant_values);
    } else {
      out.set(slot, fit.adj_r2);
    }
  };

  put_adj(0, lin);
  out.set(1, lin.coef[0]);
  const Eigen::VectorXd abs_lin = lin.coef.segment(1, dim).cwiseAbs();
  const double cmin = abs_lin.minCoeff();
  const double cmax = abs_lin.maxCoeff();
  out.set(2, cmin);
  out.set(3, cmax);
  if (cmin > 0.0) {
    out.set(4, cmax / cmin);
  } else {
    out.flag(4, NanReason::degenerate_sample);
  }
  put_adj(5, lin_i);
  put_adj(6, quad_fit);
  const Eigen::VectorXd abs_quad = quad_fit.coef.segment(1 + dim, dim).cwiseAbs();
  const double qmin = abs_quad.minCoeff();
  if (qmin > 0.0) {
    out.set(7, abs_quad.maxCoeff() / qmin);
  } else {
    out.flag(7, NanReason::degenerate_sample);
  }
  put_adj(8, quad_i);
  return out;
}

FeatureBlock<16> dispersion_features(const Points& points, std::span<const double> values) {
  const std::size_t n = points.size();
  if (n < 8 || values.size() != n) throw std::invalid_argument("need at least 8 points");
  FeatureBlock<16> out;

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const std::vector<double> full = pairwise_distances(points, all);
  const double full_mean = mean_of(full);
  const double full_median = median_of(full);

  std::vector<double> sorted_y(values.begin(), values.end());
  std::sort(sorted_y.begin(), sorted_y.end());

  constexpr std::array<double, 4> kQuotas = {0.02, 0.05, 0.10, 0.25};
  for (int qi = 0; qi < 4; ++qi) {
    const double threshold = quantile_type7(sorted_y, kQuotas[static_cast<std::size_t>(qi)]);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (values[i] <= threshold) subset.push_back(i);
    }
    if (subset.size() < 2) {
      // Too small a quantile slice: fall back to the two best points.
      std::vector<std::size_t> by_value(n);
      for (std::size_t i = 0; i < n; ++i) by_value[i] = i;
      std::stable_sort(by_value.begin(), by_value.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      subset.assign(by_value.begin(), by_value.begin() + 2);
    }
    const std::vector<double> dists = pairwise_distances(points, subset);
    const double sub_mean = mean_of(dists);
    const double sub_median = median_of(dists);
    if (full_mean > 0.0) {
      out.set(qi, sub_mean / full_mean);
    } else {
      out.flag(qi, NanReason::constant_values);
    }
    if (full_median > 0.0) {
      out.set(qi + 4, sub_median / full_median);
    } else {
      out.flag(qi + 4, NanReason::constant_values);
    }
    out.set(qi + 8, sub_mean - full_mean);
    out.set(qi + 12, sub_median - full_median);
  }
  return out;
}

std::vector<double> tour_slopes(const Points& points, std::span<const double> values) {
  const std::size_t n = points.size();
  if (n < 3 || values.size() != n) throw std::invalid_argument("bad sample");

  // Nearest-neighbour tour starting at the first point; ties break to the
  // lowest index.
  std::vector<bool> visited(n, false);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::size_t current = 0;
  visited[0] = true;
  order.push_back(0);
  for (std::size_t step = 1; step < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (visited[j]) continue;
      const double d = euclidean(points[current], points[j]);
      if (d < best) {
        best = d;
        pick = j;
      }
    }
    visited[pick] = true;
    order.push_back(pick);
    current = pick;
  }

  std::vector<double> slopes;
  slopes.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = euclidean(points[order[i]], points[order[i + 1]]);
    if (d > 0.0) {
      slopes.push_back((values[order[i + 1]] - values[order[i]]) / d);
    }
  }
  return slopes;
}

namespace {

std::vector<int> symbols_for(std::span<const double> slopes, double eps) {
  std::vector<int> s;
  s.reserve(slopes.size());
  for (double phi : slopes) {
    if (phi < -eps) {
      s.push_back(-1);
    } else if (phi > eps) {
      s.push_back(1);
    } else {
      s.push_back(0);
    }
  }
  return s;
}

}  // namespace

double symbol_entropy(std::span<const double> slopes, double eps) {
  const std::vector<int> s = symbols_for(slopes, eps);
  if (s.size() < 2) return 0.0;
  // Frequencies of the six unequal consecutive symbol pairs.
  std::array<std::array<double, 3>, 3> count{};
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    count[static_cast<std::size_t>(s[i] + 1)][static_cast<std::size_t>(s[i + 1] + 1)] += 1.0;
  }
  const auto total = static_cast<double>(s.size() - 1);
  double h = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      const double p = count[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] / total;
      if (p > 0.0) h -= p * std::log(p) / std::log(6.0);
    }
  }
  return h;
}

double partial_information(std::span<const double> slopes, double eps) {
  const std::vector<int> s = symbols_for(slopes, eps);
  int length = 0;
  int previous = 0;
  for (int sym : s) {
    if (sym != 0 && sym != previous) {
      ++length;
      previous = sym;
    }
  }
  return static_cast<double>(length) / static_cast<double>(s.size());
}

FeatureBlock<5> information_content_features(const Points& points, std::span<const double> values) {
  if (points.size() < 10) throw std::invalid_argument("need at least 10 points");
  FeatureBlock<5> out;
  const std::vector<double> slopes = tour_slopes(points, values);
  if (slopes.size() < 2) {
    for (int i = 0; i < 5; ++i) out.flag(i, NanReason::degenerate_sample);
    return out;
  }

  std::vector<double> eps_grid;
  eps_grid.push_back(0.0);
  constexpr int kGridSize = 1000;
  for (int i = 0; i < kGridSize; ++i) {
    const double e = -5.0 + 20.0 * static_cast<double>(i) / (kGridSize - 1);
    eps_grid.push_back(std::pow(10.0, e));
  }

  double h_max = 0.0;
  double eps_at_max = 0.0;
  double eps_settle = kNan;
  for (double eps : eps_grid) {
    const double h = symbol_entropy(slopes, eps);
    if (h > h_max) {
      h_max = h;
      eps_at_max = eps;
    }
  }
  double eps_half = kNan;
  for (double eps : eps_grid) {
    const double h = symbol_entropy(slopes, eps);
    if (std::isnan(eps_settle) && eps > 0.0 && h < 0.05) eps_settle = eps;
    if (h > 0.5 * h_max) eps_half = eps;
  }

  out.set(0, h_max);
  if (std::isnan(eps_settle)) {
    out.flag(1, NanReason::degenerate_sample);
  } else {
    out.set(1, std::log10(eps_settle));
  }
  out.set(2, eps_at_max);
  if (std::isnan(eps_half) || eps_half <= 0.0) {
    out.flag(3, NanReason::degenerate_sample);
  } else {
    out.set(3, std::log10(eps_half));
  }
  out.set(4, partial_information(slopes, 0.0));
  return out;
}

FeatureBlock<5> nearest_better_features(const Points& points, std::span<const double> values) {
  const std::size_t n = points.size();
  if (n < 5 || values.size() != n) throw std::invalid_argument("need at least 5 points");
  FeatureBlock<5> out;

  std::vector<double> nn(n, kNan), nb(n, kNan);
  std::vector<int> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best_any = std::numeric_limits<double>::infinity();
    double best_better = std::numeric_limits<double>::infinity();
    std::size_t better_idx = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = euclidean(points[i], points[j]);
      best_any = std::min(best_any, d);
      if (values[j] < values[i] && d < best_better) {
        best_better = d;
        better_idx = j;
      }
    }
    nn[i] = best_any;
    if (better_idx < n) {
      nb[i] = best_better;
      ++indegree[better_idx];
    }
  }

  std::vector<double> nn_valid, nb_valid, ratio;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(nb[i])) continue;
    nn_valid.push_back(nn[i]);
    nb_valid.push_back(nb[i]);
    ratio.push_back(nn[i] / nb[i]);
  }

  if (nn_valid.size() < 2) {
    const bool all_equal =
        std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
    const NanReason reason = all_equal ? NanReason::constant_values : NanReason::degenerate_sample;
    for (int i = 0; i < 4; ++i) out.flag(i, reason);
  } else {
    const double sd_nb = sd_of(nb_valid);
    if (sd_nb > 0.0) {
      out.set(0, sd_of(nn_valid) / sd_nb);
    } else {
      out.flag(0, NanReason::constant_values);
    }
    const double mean_nb = mean_of(nb_valid);
    if (mean_nb > 0.0) {
      out.set(1, mean_of(nn_valid) / mean_nb);
    } else {
      out.flag(1, NanReason::constant_values);
    }
    const double cor = pearson(nn_valid, nb_valid);
    if (std::isnan(cor)) {
      out.flag(2, NanReason::constant_values);
    } else {
      out.set(2, cor);
    }
    const double mean_ratio = mean_of(ratio);
    if (mean_ratio > 0.0) {
      out.set(3, sd_of(ratio) / mean_ratio);
    } else {
      out.flag(3, NanReason::constant_values);
    }
  }

  std::vector<double> degree(n);
  for (std::size_t i = 0; i < n; ++i) degree[i] = indegree[i];
  const double cor = pearson(degree, values);
  if (std::isnan(cor)) {
    out.flag(4, NanReason::constant_values);
  } else {
    out.set(4, cor);
  }
  return out;
}

FeatureVector feature_vector(const doe::Design& design) {
  const std::size_t n = design.points.size();
  if (n < 10) throw std::invalid_argument("need at least 10 design points");
  if (design.values.size() != n) throw std::invalid_argument("design values missing");

  FeatureVector out;
  auto copy_block = [&](const auto& block, int offset) {
    for (std::size_t i = 0; i < block.values.size(); ++i) {
      out.values[static_cast<std::size_t>(offset) + i] = block.values[i];
      out.reasons[static_cast<std::size_t>(offset) + i] = block.reasons[i];
    }
  };

  copy_block(distribution_features(design.values), 0);
  copy_block(meta_model_features(design.points, design.values), 3);
  copy_block(dispersion_features(design.points, design.values), 12);
  copy_block(information_content_features(design.points, design.values), 28);
  copy_block(nearest_better_features(design.points, design.values), 33);
  return out;
}

}  // namespace afsel::ela
