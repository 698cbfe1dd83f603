#include "afsel/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace afsel::gp {

namespace {

constexpr double kSqrt5 = 2.2360679774997896;

Eigen::MatrixXd kernel_matrix(const KernelParams& params, const Eigen::MatrixXd& points,
                              double jitter) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = params.signal_variance + jitter;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = matern52(points.row(i).transpose(), points.row(j).transpose(), params);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

struct Factorisation {
  Eigen::MatrixXd lower;
  Eigen::VectorXd alpha;
  double lml = 0.0;
};

bool try_factorise(const KernelParams& params, const Eigen::MatrixXd& points,
                   const Eigen::VectorXd& values, double jitter, Factorisation& out) {
  const Eigen::MatrixXd k = kernel_matrix(params, points, jitter);
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return false;
  out.lower = llt.matrixL();
  out.alpha = llt.solve(values);
  const double n = static_cast<double>(points.rows());
  out.lml = -0.5 * values.dot(out.alpha) - out.lower.diagonal().array().log().sum() -
            0.5 * n * std::log(2.0 * std::numbers::pi);
  return true;
}

// Simple Nelder-Mead minimiser with a hard cap on objective evaluations.
template <typename F>
Eigen::VectorXd nelder_mead(F&& objective, const Eigen::VectorXd& start, double step,
                            int max_evals, double* best_value) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> value;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return objective(x);
  };

  simplex.push_back(start);
  value.push_back(eval(start));
  for (int i = 0; i < n && evals < max_evals; ++i) {
    Eigen::VectorXd v = start;
    v[i] += step;
    simplex.push_back(v);
    value.push_back(eval(v));
  }
  while (static_cast<int>(simplex.size()) < n + 1) {
    simplex.push_back(start);
    value.push_back(value.front());
  }

  auto order = [&] {
    std::vector<int> idx(simplex.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return value[static_cast<std::size_t>(a)] < value[static_cast<std::size_t>(b)]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> v2;
    for (int i : idx) {
      s2.push_back(simplex[static_cast<std::size_t>(i)]);
      v2.push_back(value[static_cast<std::size_t>(i)]);
    }
    simplex.swap(s2);
    value.swap(v2);
  };

  while (evals < max_evals) {
    order();
    if (value.back() - value.front() < 1e-10) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex.back());
    const double fr = eval(reflected);
    if (fr < value.front()) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex.back());
      const double fe = evals < max_evals ? eval(expanded) : fr;
      if (fe < fr) {
        simplex.back() = expanded;
        value.back() = fe;
      } else {
        simplex.back() = reflected;
        value.back() = fr;
      }
      continue;
    }
    if (fr < value[static_cast<std::size_t>(n - 1)]) {
      simplex.back() = reflected;
      value.back() = fr;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + 0.5 * (simplex.back() - centroid);
    const double fc = evals < max_evals ? eval(contracted) : fr;
    if (fc < value.back()) {
      simplex.back() = contracted;
      value.back() = fc;
      continue;
    }
    for (std::size_t i = 1; i < simplex.size() && evals < max_evals; ++i) {
      simplex[i] = simplex.front() + 0.5 * (simplex[i] - simplex.front());
      value[i] = eval(simplex[i]);
    }
  }

  order();
  if (best_value != nullptr) *best_value = value.front();
  return simplex.front();
}

}  // namespace

double matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / params.lengthscales[i];
    r2 += d * d;
  }
  const double t = kSqrt5 * std::sqrt(r2);
  return params.signal_variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
}

double log_marginal_likelihood(const KernelParams& params, const Eigen::MatrixXd& points,
                               const Eigen::VectorXd& values, double jitter) {
  Factorisation fact;
  if (!try_factorise(params, points, values, jitter, fact)) {
    throw surrogate_error("kernel matrix is not positive definite");
  }
  return fact.lml;
}

Eigen::VectorXd log_marginal_gradient(const KernelParams& params, const Eigen::MatrixXd& points,
                                      const Eigen::VectorXd& values, double jitter) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  Factorisation fact;
  if (!try_factorise(params, points, values, jitter, fact)) {
    throw surrogate_error("kernel matrix is not positive definite");
  }
  Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
  fact.lower.triangularView<Eigen::Lower>().solveInPlace(kinv);
  fact.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);
  const Eigen::MatrixXd w = fact.alpha * fact.alpha.transpose() - kinv;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (Eigen::Index m = 0; m < d; ++m) {
        const double diff = (points(i, m) - points(j, m)) / params.lengthscales[m];
        r2 += diff * diff;
      }
      const double t = kSqrt5 * std::sqrt(r2);
      const double decay = std::exp(-t);
      // d k / d log(signal_variance) is the kernel itself, without jitter.
      grad[0] += 0.5 * w(i, j) * params.signal_variance * (1.0 + t + t * t / 3.0) * decay;
      for (Eigen::Index m = 0; m < d; ++m) {
        const double diff = (points(i, m) - points(j, m)) / params.lengthscales[m];
        const double dk = params.signal_variance * (5.0 / 3.0) * (1.0 + t) * decay * diff * diff;
        grad[m + 1] += 0.5 * w(i, j) * dk;
      }
    }
  }
  return grad;
}

namespace {

// Shared fit preamble: validate the sample, normalise inputs by the box,
// standardise targets.  Returns the standardised target vector.
Eigen::VectorXd prepare_sample(const std::vector<std::vector<double>>& points,
                               const std::vector<double>& values, const Config& config,
                               Eigen::MatrixXd& train_points, double& y_mean, double& y_scale) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("fit requires at least 2 observations");
  if (values.size() != n) throw std::invalid_argument("points/values size mismatch");
  const std::size_t dim = points.front().size();
  if (dim == 0) throw std::invalid_argument("points must be non-empty");
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("inconsistent point dimensions");
    for (double v : p) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite observation value");
  }

  const double span = config.upper - config.lower;
  train_points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      train_points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (points[i][j] - config.lower) / span;
    }
  }

  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y[static_cast<Eigen::Index>(i)] = values[i];
  y_mean = y.mean();
  const double var = (y.array() - y_mean).square().mean();
  y_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  return (y.array() - y_mean) / y_scale;
}

}  // namespace

Model Model::fit(const std::vector<std::vector<double>>& points, const std::vector<double>& values,
                 const Config& config, StreamKey key) {
  Model model;
  model.box_lower_ = config.lower;
  model.box_upper_ = config.upper;
  const Eigen::VectorXd y_std =
      prepare_sample(points, values, config, model.train_points_, model.y_mean_, model.y_scale_);
  const std::size_t dim = points.front().size();

  const int theta_dim = static_cast<int>(dim) + 1;
  const double log_sig_lo = std::log(config.signal_min);
  const double log_sig_hi = std::log(config.signal_max);
  const double log_len_lo = std::log(config.lengthscale_min);
  const double log_len_hi = std::log(config.lengthscale_max);
  const double search_jitter = config.jitter_ladder.empty() ? 1e-10 : config.jitter_ladder.front();

  auto unpack = [&](const Eigen::VectorXd& theta) {
    KernelParams p;
    p.signal_variance = std::exp(std::clamp(theta[0], log_sig_lo, log_sig_hi));
    p.lengthscales.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      p.lengthscales[static_cast<Eigen::Index>(j)] =
          std::exp(std::clamp(theta[static_cast<Eigen::Index>(j) + 1], log_len_lo, log_len_hi));
    }
    return p;
  };

  auto objective = [&](const Eigen::VectorXd& theta) {
    double penalty = 0.0;
    auto bound_penalty = [&](double v, double lo, double hi) {
      if (v < lo) penalty += (lo - v) * (lo - v);
      if (v > hi) penalty += (v - hi) * (v - hi);
    };
    bound_penalty(theta[0], log_sig_lo, log_sig_hi);
    for (int j = 1; j < theta_dim; ++j) bound_penalty(theta[j], log_len_lo, log_len_hi);

    const KernelParams p = unpack(theta);
    Factorisation fact;
    if (!try_factorise(p, model.train_points_, y_std, search_jitter, fact)) {
      return 1e12 + penalty;
    }
    return -fact.lml + 10.0 * penalty;
  };

  Eigen::VectorXd best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < config.restarts; ++restart) {
    Eigen::VectorXd start(theta_dim);
    if (restart == 0) {
      start[0] = 0.0;
      for (int j = 1; j < theta_dim; ++j) start[j] = std::log(0.3);
    } else {
      Rng rng(derive(key, "restart", restart));
      start[0] = rng.uniform(std::log(0.1), std::log(10.0));
      for (int j = 1; j < theta_dim; ++j) start[j] = rng.uniform(std::log(0.05), std::log(2.0));
    }
    double value = 0.0;
    const Eigen::VectorXd theta =
        nelder_mead(objective, start, 0.5, config.objective_evals, &value);
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
  }

  model.params_ = unpack(best_theta);

  Factorisation fact;
  bool ok = false;
  for (double jitter : config.jitter_ladder) {
    if (try_factorise(model.params_, model.train_points_, y_std, jitter, fact)) {
      model.jitter_ = jitter;
      ok = true;
      break;
    }
  }
  if (!ok) throw surrogate_error("kernel factorisation failed at all jitter levels");

  model.chol_lower_ = fact.lower;
  model.alpha_ = fact.alpha;
  model.lml_ = fact.lml;
  return model;
}

Model Model::fit_with_params(const std::vector<std::vector<double>>& points,
                             const std::vector<double>& values, const KernelParams& params,
                             const Config& config) {
  Model model;
  model.box_lower_ = config.lower;
  model.box_upper_ = config.upper;
  const Eigen::VectorXd y_std =
      prepare_sample(points, values, config, model.train_points_, model.y_mean_, model.y_scale_);
  if (params.lengthscales.size() != model.train_points_.cols()) {
    throw std::invalid_argument("lengthscale count does not match dimension");
  }
  model.params_ = params;

  Factorisation fact;
  bool ok = false;
  for (double jitter : config.jitter_ladder) {
    if (try_factorise(model.params_, model.train_points_, y_std, jitter, fact)) {
      model.jitter_ = jitter;
      ok = true;
      break;
    }
  }
  if (!ok) throw surrogate_error("kernel factorisation failed at all jitter levels");

  model.chol_lower_ = fact.lower;
  model.alpha_ = fact.alpha;
  model.lml_ = fact.lml;
  return model;
}

Prediction Model::predict(std::span<const double> x) const {
  const Eigen::Index dim = train_points_.cols();
  if (static_cast<Eigen::Index>(x.size()) != dim) {
    throw std::invalid_argument("query point has wrong dimension");
  }
  Eigen::VectorXd q(dim);
  const double span = box_upper_ - box_lower_;
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (!std::isfinite(x[static_cast<std::size_t>(j)])) {
      throw std::invalid_argument("query point has non-finite coordinate");
    }
    q[j] = (x[static_cast<std::size_t>(j)] - box_lower_) / span;
  }

  const Eigen::Index n = train_points_.rows();
  Eigen::VectorXd kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kstar[i] = matern52(q, train_points_.row(i).transpose(), params_);
  }

  const double mean_std = kstar.dot(alpha_);
  Eigen::VectorXd v = kstar;
  chol_lower_.triangularView<Eigen::Lower>().solveInPlace(v);
  const double variance = std::max(params_.signal_variance - v.squaredNorm(), 0.0);

  Prediction out;
  out.mean = y_mean_ + y_scale_ * mean_std;
  out.stdev = y_scale_ * std::sqrt(variance);
  return out;
}

}  // namespace afsel::gp
