#include "afsel/bbob.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace afsel::bbob {

namespace {

constexpr std::uint64_t kSuiteSeed = 0x42f0e1eba9ea3693ULL;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Irregular oscillation applied coordinate-wise.
double oscillate_scalar(double x) {
  if (x == 0.0) return 0.0;
  const double lx = std::log(std::abs(x));
  const double c1 = x > 0.0 ? 10.0 : 5.5;
  const double c2 = x > 0.0 ? 7.9 : 3.1;
  return sign_of(x) * std::exp(lx + 0.049 * (std::sin(c1 * lx) + std::sin(c2 * lx)));
}

Eigen::VectorXd oscillate(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = oscillate_scalar(v[i]);
  return out;
}

// Symmetry-breaking power transform; identity on non-positive coordinates.
Eigen::VectorXd asymmetric(const Eigen::VectorXd& v, double beta) {
  const auto dim = v.size();
  Eigen::VectorXd out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double x = v[i];
    if (x > 0.0) {
      const double e = 1.0 + beta * (static_cast<double>(i) / static_cast<double>(dim - 1)) * std::sqrt(x);
      out[i] = std::pow(x, e);
    } else {
      out[i] = x;
    }
  }
  return out;
}

// Diagonal of the conditioning matrix: alpha^(0.5 * i / (dim - 1)).
Eigen::VectorXd scale_powers(int dim, double alpha) {
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim; ++i) {
    out[i] = std::pow(alpha, 0.5 * static_cast<double>(i) / static_cast<double>(dim - 1));
  }
  return out;
}

double boundary_penalty(const Eigen::VectorXd& x) {
  double pen = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double excess = std::abs(x[i]) - 5.0;
    if (excess > 0.0) pen += excess * excess;
  }
  return pen;
}

// Haar-distributed rotation: QR of a Gaussian matrix with the sign of the R
// diagonal folded into Q.
Eigen::MatrixXd random_rotation(Rng& rng, int dim) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (int j = 0; j < dim; ++j) {
    if (diag[j] < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

GallagherPeaks make_gallagher_peaks(Rng& rng, const Eigen::MatrixXd& rotation, int dim, int peak_count) {
  GallagherPeaks peaks;
  Eigen::MatrixXd centres(peak_count, dim);
  for (int j = 0; j < dim; ++j) centres(0, j) = rng.uniform(-4.0, 4.0);
  for (int p = 1; p < peak_count; ++p)
    for (int j = 0; j < dim; ++j) centres(p, j) = rng.uniform(-4.9, 4.9);

  peaks.weights.resize(peak_count);
  peaks.weights[0] = 10.0;
  for (int p = 1; p < peak_count; ++p) {
    peaks.weights[p] = 1.1 + 8.0 * static_cast<double>(p - 1) / static_cast<double>(peak_count - 2);
  }

  // Condition numbers: sqrt(1000) for the global peak, then 1000^(k/(P-2))
  // over a random permutation of 0..P-2 for the rest.
  std::vector<int> perm = rng.permutation(peak_count - 1);
  Eigen::VectorXd condition(peak_count);
  condition[0] = std::sqrt(1000.0);
  for (int p = 1; p < peak_count; ++p) {
    condition[p] = std::pow(1000.0, static_cast<double>(perm[static_cast<std::size_t>(p - 1)]) /
                                        static_cast<double>(peak_count - 2));
  }

  peaks.scales.resize(peak_count, dim);
  for (int p = 0; p < peak_count; ++p) {
    const Eigen::VectorXd base = scale_powers(dim, condition[p]) / std::pow(condition[p], 0.25);
    std::vector<int> axis = rng.permutation(dim);
    for (int j = 0; j < dim; ++j) peaks.scales(p, j) = base[axis[static_cast<std::size_t>(j)]];
  }

  peaks.rotated_centres = centres * rotation.transpose();
  return peaks;
}

double gallagher_value(const Eigen::VectorXd& x, const InstanceTransform& t, int dim) {
  const Eigen::VectorXd z = t.rot1 * x;
  double best = 0.0;
  for (Eigen::Index p = 0; p < t.peaks.weights.size(); ++p) {
    double q = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double d = z[j] - t.peaks.rotated_centres(p, j);
      q += t.peaks.scales(p, j) * d * d;
    }
    best = std::max(best, t.peaks.weights[p] * std::exp(-q / (2.0 * dim)));
  }
  const double s = oscillate_scalar(10.0 - best);
  return s * s + boundary_penalty(x) + t.f_opt;
}

double rosenbrock_sum(const Eigen::VectorXd& z) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
    const double a = z[i] * z[i] - z[i + 1];
    const double b = z[i] - 1.0;
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

}  // namespace

Problem::Problem(int function_id, int instance_id, int dim)
    : function_id_(function_id), instance_id_(instance_id), dim_(dim) {
  if (function_id < 1 || function_id > kFunctionCount) {
    throw std::invalid_argument("function_id must be in 1..24");
  }
  if (instance_id < 0) throw std::invalid_argument("instance_id must be non-negative");
  if (dim < 2) throw std::invalid_argument("dim must be at least 2");

  const StreamKey root = derive(StreamKey{kSuiteSeed}, function_id, instance_id);

  Rng rot_rng1(derive(root, "rot1"));
  transform_.rot1 = random_rotation(rot_rng1, dim);
  Rng rot_rng2(derive(root, "rot2"));
  transform_.rot2 = random_rotation(rot_rng2, dim);

  Rng fopt_rng(derive(root, "f_opt"));
  const double drawn = std::round(100.0 * fopt_rng.cauchy()) / 100.0;
  transform_.f_opt = std::clamp(drawn, -1000.0, 1000.0);

  Rng xopt_rng(derive(root, "x_opt"));
  Eigen::VectorXd base(dim);
  for (int i = 0; i < dim; ++i) base[i] = xopt_rng.uniform(-4.0, 4.0);

  const double scale = std::max(1.0, std::sqrt(static_cast<double>(dim)) / 8.0);
  switch (function_id_) {
    case 4:
      transform_.x_opt = base;
      for (int i = 0; i < dim; i += 2) transform_.x_opt[i] = std::abs(base[i]);
      break;
    case 5:
      transform_.x_opt = base.unaryExpr([](double v) { return 5.0 * sign_of(v); });
      break;
    case 8:
      transform_.x_opt = 0.75 * base;
      break;
    case 9:
    case 19:
      transform_.x_opt = (0.5 / scale) * transform_.rot1.transpose() * Eigen::VectorXd::Ones(dim);
      break;
    case 20:
      transform_.x_opt = base.unaryExpr([](double v) { return 0.5 * 4.2096874633 * sign_of(v); });
      break;
    case 21:
    case 22: {
      Rng peak_rng(derive(root, "peaks"));
      const int peak_count = function_id_ == 21 ? 101 : 21;
      transform_.peaks = make_gallagher_peaks(peak_rng, transform_.rot1, dim, peak_count);
      transform_.x_opt = transform_.peaks.rotated_centres.row(0).transpose();
      transform_.x_opt = transform_.rot1.transpose() * transform_.x_opt;
      break;
    }
    case 24:
      transform_.x_opt = base.unaryExpr([](double v) { return 1.25 * sign_of(v); });
      break;
    default:
      transform_.x_opt = base;
      break;
  }

  if (function_id_ == 16) {
    double f0 = 0.0;
    for (int k = 0; k <= 11; ++k) {
      f0 += std::pow(0.5, k) * std::cos(kTwoPi * std::pow(3.0, k) * 0.5);
    }
    weierstrass_offset_ = f0;
  }
}

double Problem::evaluate(std::span<const double> x) const {
  return evaluate(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
}

double Problem::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::invalid_argument("point has wrong dimension");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw std::invalid_argument("point has non-finite coordinate");
  }

  const int dim = dim_;
  const InstanceTransform& t = transform_;
  const Eigen::VectorXd shifted = x - t.x_opt;
  const double scale = std::max(1.0, std::sqrt(static_cast<double>(dim)) / 8.0);

  switch (function_id_) {
    case 1: {
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) sum += shifted[i] * shifted[i];
      return sum + t.f_opt;
    }
    case 2: {
      const Eigen::VectorXd z = oscillate(shifted);
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        sum += std::pow(10.0, 6.0 * i / (dim - 1)) * z[i] * z[i];
      }
      return sum + t.f_opt;
    }
    case 3: {
      const Eigen::VectorXd z =
          scale_powers(dim, 10.0).cwiseProduct(asymmetric(oscillate(shifted), 0.2));
      double cos_sum = 0.0;
      for (int i = 0; i < dim; ++i) cos_sum += std::cos(kTwoPi * z[i]);
      return 10.0 * (dim - cos_sum) + z.squaredNorm() + t.f_opt;
    }
    case 4: {
      const Eigen::VectorXd osc = oscillate(shifted);
      double sq = 0.0, cos_sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        double s = std::pow(10.0, 0.5 * i / (dim - 1));
        if (i % 2 == 0 && osc[i] > 0.0) s *= 10.0;
        const double z = s * osc[i];
        sq += z * z;
        cos_sum += std::cos(kTwoPi * z);
      }
      return 10.0 * (dim - cos_sum) + sq + 100.0 * boundary_penalty(x) + t.f_opt;
    }
    case 5: {
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double s = sign_of(t.x_opt[i]) * std::pow(10.0, static_cast<double>(i) / (dim - 1));
        const double z = (t.x_opt[i] * x[i] < 25.0) ? x[i] : t.x_opt[i];
        sum += 5.0 * std::abs(s) - s * z;
      }
      return sum + t.f_opt;
    }
    case 6: {
      const Eigen::VectorXd z =
          t.rot2 * scale_powers(dim, 10.0).cwiseProduct(t.rot1 * shifted).eval();
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double s = (z[i] * t.x_opt[i] > 0.0) ? 100.0 : 1.0;
        sum += s * z[i] * s * z[i];
      }
      return std::pow(oscillate_scalar(sum), 0.9) + t.f_opt;
    }
    case 7: {
      const Eigen::VectorXd zhat = scale_powers(dim, 10.0).cwiseProduct(t.rot1 * shifted);
      Eigen::VectorXd ztilde(dim);
      for (int i = 0; i < dim; ++i) {
        ztilde[i] = (std::abs(zhat[i]) > 0.5) ? std::floor(0.5 + zhat[i])
                                              : std::floor(0.5 + 10.0 * zhat[i]) / 10.0;
      }
      const Eigen::VectorXd z = t.rot2 * ztilde;
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        sum += std::pow(10.0, 2.0 * i / (dim - 1)) * z[i] * z[i];
      }
      return 0.1 * std::max(std::abs(zhat[0]) / 1e4, sum) + boundary_penalty(x) + t.f_opt;
    }
    case 8: {
      const Eigen::VectorXd z = scale * shifted + Eigen::VectorXd::Ones(dim);
      return rosenbrock_sum(z) + t.f_opt;
    }
    case 9: {
      const Eigen::VectorXd z =
          scale * (t.rot1 * x) + 0.5 * Eigen::VectorXd::Ones(dim);
      return rosenbrock_sum(z) + t.f_opt;
    }
    case 10: {
      const Eigen::VectorXd z = oscillate(t.rot1 * shifted);
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        sum += std::pow(10.0, 6.0 * i / (dim - 1)) * z[i] * z[i];
      }
      return sum + t.f_opt;
    }
    case 11: {
      const Eigen::VectorXd z = oscillate(t.rot1 * shifted);
      double sum = 1e6 * z[0] * z[0];
      for (int i = 1; i < dim; ++i) sum += z[i] * z[i];
      return sum + t.f_opt;
    }
    case 12: {
      const Eigen::VectorXd z = t.rot1 * asymmetric(t.rot1 * shifted, 0.5).eval();
      double sum = z[0] * z[0];
      for (int i = 1; i < dim; ++i) sum += 1e6 * z[i] * z[i];
      return sum + t.f_opt;
    }
    case 13: {
      const Eigen::VectorXd z =
          t.rot2 * scale_powers(dim, 10.0).cwiseProduct(t.rot1 * shifted).eval();
      double tail = 0.0;
      for (int i = 1; i < dim; ++i) tail += z[i] * z[i];
      return z[0] * z[0] + 100.0 * std::sqrt(tail) + t.f_opt;
    }
    case 14: {
      const Eigen::VectorXd z = t.rot1 * shifted;
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        sum += std::pow(std::abs(z[i]), 2.0 + 4.0 * i / (dim - 1));
      }
      return std::sqrt(sum) + t.f_opt;
    }
    case 15: {
      const Eigen::VectorXd inner = asymmetric(oscillate(t.rot1 * shifted), 0.2);
      const Eigen::VectorXd z =
          t.rot1 * scale_powers(dim, 10.0).cwiseProduct(t.rot2 * inner).eval();
      double cos_sum = 0.0;
      for (int i = 0; i < dim; ++i) cos_sum += std::cos(kTwoPi * z[i]);
      return 10.0 * (dim - cos_sum) + z.squaredNorm() + t.f_opt;
    }
    case 16: {
      const Eigen::VectorXd z =
          t.rot1 * scale_powers(dim, 0.01).cwiseProduct(t.rot2 * oscillate(t.rot1 * shifted)).eval();
      double mean = 0.0;
      for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int k = 0; k <= 11; ++k) {
          s += std::pow(0.5, k) * std::cos(kTwoPi * std::pow(3.0, k) * (z[i] + 0.5));
        }
        mean += s;
      }
      mean /= dim;
      const double core = mean - weierstrass_offset_;
      return 10.0 * core * core * core + 10.0 / dim * boundary_penalty(x) + t.f_opt;
    }
    case 17:
    case 18: {
      const double alpha = function_id_ == 17 ? 10.0 : 1000.0;
      const Eigen::VectorXd z =
          scale_powers(dim, alpha).cwiseProduct(t.rot2 * asymmetric(t.rot1 * shifted, 0.5)).eval();
      double sum = 0.0;
      for (int i = 0; i + 1 < dim; ++i) {
        const double s = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
        const double sin_term = std::sin(50.0 * std::pow(s, 0.2));
        sum += std::sqrt(s) * (1.0 + sin_term * sin_term);
      }
      sum /= (dim - 1);
      return sum * sum + 10.0 * boundary_penalty(x) + t.f_opt;
    }
    case 19: {
      const Eigen::VectorXd z =
          scale * (t.rot1 * x) + 0.5 * Eigen::VectorXd::Ones(dim);
      double sum = 0.0;
      for (int i = 0; i + 1 < dim; ++i) {
        const double a = z[i] * z[i] - z[i + 1];
        const double b = z[i] - 1.0;
        const double s = 100.0 * a * a + b * b;
        sum += s / 4000.0 - std::cos(s);
      }
      return 10.0 * sum / (dim - 1) + 10.0 + t.f_opt;
    }
    case 20: {
      Eigen::VectorXd xhat(dim);
      for (int i = 0; i < dim; ++i) xhat[i] = 2.0 * sign_of(t.x_opt[i]) * x[i];
      Eigen::VectorXd zhat(dim);
      zhat[0] = xhat[0];
      for (int i = 1; i < dim; ++i) {
        zhat[i] = xhat[i] + 0.25 * (xhat[i - 1] - 2.0 * std::abs(t.x_opt[i - 1]));
      }
      const Eigen::VectorXd two_abs = 2.0 * t.x_opt.cwiseAbs();
      const Eigen::VectorXd z =
          100.0 * (scale_powers(dim, 10.0).cwiseProduct(zhat - two_abs) + two_abs);
      double sum = 0.0;
      for (int i = 0; i < dim; ++i) sum += z[i] * std::sin(std::sqrt(std::abs(z[i])));
      return -sum / (100.0 * dim) + 4.189828872724339 + 100.0 * boundary_penalty(z / 100.0) +
             t.f_opt;
    }
    case 21:
    case 22:
      return gallagher_value(x, t, dim);
    case 23: {
      const Eigen::VectorXd z =
          t.rot2 * scale_powers(dim, 100.0).cwiseProduct(t.rot1 * shifted).eval();
      double prod = 1.0;
      for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int j = 1; j <= 32; ++j) {
          const double p = std::pow(2.0, j) * z[i];
          s += std::abs(p - std::round(p)) / std::pow(2.0, j);
        }
        prod *= std::pow(1.0 + (i + 1) * s, 10.0 / std::pow(dim, 1.2));
      }
      const double factor = 10.0 / (dim * dim);
      return factor * prod - factor + boundary_penalty(x) + t.f_opt;
    }
    case 24: {
      const double mu0 = 2.5;
      const double s = 1.0 - 1.0 / (2.0 * std::sqrt(static_cast<double>(dim) + 20.0) - 8.2);
      const double mu1 = -std::sqrt((mu0 * mu0 - 1.0) / s);
      Eigen::VectorXd xhat(dim);
      for (int i = 0; i < dim; ++i) xhat[i] = 2.0 * sign_of(t.x_opt[i]) * x[i];
      const Eigen::VectorXd z =
          t.rot2 *
          scale_powers(dim, 100.0)
              .cwiseProduct(t.rot1 * (xhat - mu0 * Eigen::VectorXd::Ones(dim)))
              .eval();
      double first = 0.0, second = 0.0, cos_sum = 0.0;
      for (int i = 0; i < dim; ++i) {
        first += (xhat[i] - mu0) * (xhat[i] - mu0);
        second += (xhat[i] - mu1) * (xhat[i] - mu1);
        cos_sum += std::cos(kTwoPi * z[i]);
      }
      second = 1.0 * dim + s * second;
      return std::min(first, second) + 10.0 * (dim - cos_sum) + 1e4 * boundary_penalty(x) +
             t.f_opt;
    }
    default:
      throw std::logic_error("unhandled function id");
  }
}

std::span<const FunctionInfo> suite() {
  static constexpr std::array<FunctionInfo, kFunctionCount> kSuite = {{
      {1, "sphere", "separable"},
      {2, "ellipsoid", "separable"},
      {3, "rastrigin", "separable"},
      {4, "bueche_rastrigin", "separable"},
      {5, "linear_slope", "separable"},
      {6, "attractive_sector", "moderate_conditioning"},
      {7, "step_ellipsoid", "moderate_conditioning"},
      {8, "rosenbrock", "moderate_conditioning"},
      {9, "rosenbrock_rotated", "moderate_conditioning"},
      {10, "ellipsoid_rotated", "high_conditioning"},
      {11, "discus", "high_conditioning"},
      {12, "bent_cigar", "high_conditioning"},
      {13, "sharp_ridge", "high_conditioning"},
      {14, "different_powers", "high_conditioning"},
      {15, "rastrigin_rotated", "multimodal_structured"},
      {16, "weierstrass", "multimodal_structured"},
      {17, "schaffers_f7", "multimodal_structured"},
      {18, "schaffers_f7_ill_conditioned", "multimodal_structured"},
      {19, "griewank_rosenbrock", "multimodal_structured"},
      {20, "schwefel", "multimodal_weak_structure"},
      {21, "gallagher_101_peaks", "multimodal_weak_structure"},
      {22, "gallagher_21_peaks", "multimodal_weak_structure"},
      {23, "katsuura", "multimodal_weak_structure"},
      {24, "lunacek_bi_rastrigin", "multimodal_weak_structure"},
  }};
  return kSuite;
}

}  // namespace afsel::bbob
