#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

namespace chartdate {

enum class KernelShape {
  gaussian,      ///< exp{-(u/h)^2}
  student_t,     ///< (1 + u^2/(nu h^2))^{-(nu+1)/2}
  epanechnikov,  ///< max(0, 1 - (u/h)^2), compactly supported
};

std::string_view to_string(KernelShape shape);
KernelShape parse_kernel_shape(std::string_view name);

/// Symmetric, nonincreasing smoothing kernel K_h.
///
/// `scale` is the multiplicative constant the kernel is defined up to. It
/// is part of the value returned by operator() but every estimator in this
/// library works with ratios K(u)/K(0), from which it cancels exactly.
struct KernelSpec {
  KernelShape shape = KernelShape::gaussian;
  double bandwidth = 1.0;
  double nu = 3.0;
  double scale = 1.0;

  /// Throws std::invalid_argument on h <= 0, nu <= 0 (student_t) or
  /// scale <= 0.
  void validate() const;

  /// log(K(u)/K(0)); -infinity outside a compact support.
  double log_ratio(double u) const {
    const double z = u / bandwidth;
    switch (shape) {
      case KernelShape::gaussian:
        return -z * z;
      case KernelShape::student_t:
        return -0.5 * (nu + 1.0) * std::log1p(z * z / nu);
      case KernelShape::epanechnikov:
        return std::abs(z) < 1.0 ? std::log1p(-z * z)
                                 : -std::numeric_limits<double>::infinity();
    }
    return -std::numeric_limits<double>::infinity();
  }

  /// K(u)/K(0), in [0, 1].
  double ratio(double u) const { return std::exp(log_ratio(u)); }

  /// scale * K(u)/K(0).
  double operator()(double u) const { return scale * ratio(u); }

  std::string describe() const;
};

}  // namespace chartdate
