#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

#include "afsel/rng.hpp"

namespace afsel::gp {

// Raised when the surrogate cannot be factorised even at the largest jitter;
// callers are expected to fall back rather than abort the run.
class surrogate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  int restarts = 3;
  int objective_evals = 200;  // per restart
  double lengthscale_min = 1e-3;
  double lengthscale_max = 1e3;
  double signal_min = 1e-6;
  double signal_max = 1e6;
  std::vector<double> jitter_ladder = {1e-10, 1e-8, 1e-6, 1e-4};
  double lower = -5.0;  // input box, used to normalise inputs to [0, 1]
  double upper = 5.0;
};

// Matern 5/2 kernel with one lengthscale per input dimension.
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;
};

double matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params);

// Gaussian log marginal likelihood of `values` under the kernel on `points`
// (rows are points).  Throws surrogate_error if K + jitter*I is not positive
// definite.
double log_marginal_likelihood(const KernelParams& params, const Eigen::MatrixXd& points,
                               const Eigen::VectorXd& values, double jitter);

// Gradient of the log marginal likelihood with respect to
// (log signal_variance, log lengthscale_1, ..., log lengthscale_d).
Eigen::VectorXd log_marginal_gradient(const KernelParams& params, const Eigen::MatrixXd& points,
                                      const Eigen::VectorXd& values, double jitter);

struct Prediction {
  double mean = 0.0;
  double stdev = 0.0;
};

class Model {
 public:
  // Fits kernel hyperparameters by maximising the marginal likelihood with a
  // seeded multi-start Nelder-Mead search in log space.  Inputs are
  // normalised by the configured box, targets standardised internally.
  static Model fit(const std::vector<std::vector<double>>& points,
                   const std::vector<double>& values, const Config& config, StreamKey key);

  // Builds the model at the given hyperparameters (lengthscales in box-
  // normalised coordinates), skipping the likelihood search.
  static Model fit_with_params(const std::vector<std::vector<double>>& points,
                               const std::vector<double>& values, const KernelParams& params,
                               const Config& config);

  Prediction predict(std::span<const double> x) const;

  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }
  double log_likelihood() const { return lml_; }
  int dim() const { return static_cast<int>(train_points_.cols()); }
  int size() const { return static_cast<int>(train_points_.rows()); }

 private:
  Model() = default;

  Eigen::MatrixXd train_points_;  // normalised to [0, 1]
  Eigen::MatrixXd chol_lower_;
  Eigen::VectorXd alpha_;
  KernelParams params_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double box_lower_ = -5.0;
  double box_upper_ = 5.0;
};

}  // namespace afsel::gp
