#pragma once

#include <cmath>

#include "dsr/kernels.hpp"
#include "dsr/quadrature.hpp"
#include "dsr/target.hpp"

namespace dsr {

/// <f_hat, f>_{H_K} = sum_j alpha_j f(x_j) by the reproducing property.
template <KernelFunction K>
double rkhs_inner_with_target(const KernelExpansion<K>& f_hat, const TargetFunction& target) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < f_hat.size(); ++j) s += f_hat.coefficients[j] * target(f_hat.points[j]);
  return s;
}

/// ||f_hat - f||^2_{H_K} = alpha^T G alpha - 2 sum_j alpha_j f(x_j) + ||f||^2.
template <KernelFunction K>
double hk_error_sq(const KernelExpansion<K>& f_hat, const TargetFunction& target) {
  const double norm_f = target.norm_sq_or_throw();
  if (f_hat.size() == 0) return norm_f;
  const Vector g_alpha = GramOperator<K>(f_hat.kernel, f_hat.points).apply(f_hat.coefficients);
  const double value = f_hat.coefficients.dot(g_alpha) - 2.0 * rkhs_inner_with_target(f_hat, target) + norm_f;
  return clamp_norm_sq(value, norm_f);
}

template <KernelFunction K>
double hk_error(const KernelExpansion<K>& f_hat, const TargetFunction& target) {
  return std::sqrt(hk_error_sq(f_hat, target));
}

/// sqrt(int_0^1 (f_hat - f)^2) by Gauss–Legendre quadrature.
template <KernelFunction K>
double l2_error(const KernelExpansion<K>& f_hat, const TargetFunction& target, int quad_nodes = 256) {
  require(quad_nodes >= 64, "l2_error: need at least 64 quadrature nodes");
  const auto rule = gauss_legendre(quad_nodes);
  const Eigen::Map<const Vector> nodes(rule->nodes.data(), static_cast<Eigen::Index>(rule->nodes.size()));
  const Vector fitted = f_hat.size() == 0 ? Vector::Zero(nodes.size()) : f_hat(nodes);
  double s = 0.0;
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const double d = fitted[i] - target(nodes[i]);
    s += rule->weights[static_cast<std::size_t>(i)] * d * d;
  }
  return std::sqrt(s);
}

}  // namespace dsr
