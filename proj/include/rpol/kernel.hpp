#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace rpol {

using Point = Eigen::VectorXd;

enum class KernelKind { SquareExponential };

// Stationary kernel with unit prior variance: k(x, x) = 1 for every x.
struct KernelSpec {
  KernelKind kind = KernelKind::SquareExponential;
  double lengthscale = 1.0;
};

inline double se_kernel(const Point& x, const Point& y, double lengthscale) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("se_kernel: dimension mismatch between inputs");
  }
  if (!(lengthscale > 0.0)) {
    throw std::invalid_argument("se_kernel: lengthscale must be positive");
  }
  return std::exp(-(x - y).squaredNorm() / (2.0 * lengthscale * lengthscale));
}

inline double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y) {
  return se_kernel(x, y, spec.lengthscale);
}

}  // namespace rpol
