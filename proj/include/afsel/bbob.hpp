#pragma once

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

#include "afsel/rng.hpp"

namespace afsel::bbob {

inline constexpr double kLowerBound = -5.0;
inline constexpr double kUpperBound = 5.0;
inline constexpr int kFunctionCount = 24;

// Peak data for the Gallagher functions (f21/f22): rotated centres, per-peak
// axis scalings and heights.
struct GallagherPeaks {
  Eigen::MatrixXd rotated_centres;  // peaks x dim, rows hold R*y_j
  Eigen::MatrixXd scales;           // peaks x dim
  Eigen::VectorXd weights;          // peak heights w_j
};

// Everything instance-dependent: optimum location/value and the two rotation
// matrices.  Both rotations are generated for every instance even when a
// function uses only one of them, so stream consumption is uniform.
struct InstanceTransform {
  Eigen::VectorXd x_opt;
  double f_opt = 0.0;
  Eigen::MatrixXd rot1;
  Eigen::MatrixXd rot2;
  GallagherPeaks peaks;  // populated for f21/f22 only
};

class Problem {
 public:
  // function_id in 1..24, instance_id >= 0, dim >= 2.
  Problem(int function_id, int instance_id, int dim);

  double evaluate(std::span<const double> x) const;
  double evaluate(const Eigen::VectorXd& x) const;

  // Distance of an observed value from the optimum, clamped at zero so tiny
  // negative rounding residues cannot leak through.
  double regret(double value) const { return std::max(value - transform_.f_opt, 0.0); }

  int function_id() const { return function_id_; }
  int instance_id() const { return instance_id_; }
  int dim() const { return dim_; }
  const Eigen::VectorXd& x_opt() const { return transform_.x_opt; }
  double f_opt() const { return transform_.f_opt; }
  const InstanceTransform& transform() const { return transform_; }

 private:
  int function_id_;
  int instance_id_;
  int dim_;
  InstanceTransform transform_;
  double weierstrass_offset_ = 0.0;  // f16 bias term, precomputed
};

struct FunctionInfo {
  int id;
  std::string_view name;
  std::string_view group;
};

// Static catalogue of the 24 functions in id order.
std::span<const FunctionInfo> suite();

}  // namespace afsel::bbob
