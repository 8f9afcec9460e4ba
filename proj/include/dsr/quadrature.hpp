#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "dsr/errors.hpp"

namespace dsr {

/// Gauss–Legendre nodes and weights mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class Fn>
  double integrate(Fn&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

namespace detail {

inline std::shared_ptr<const QuadratureRule> build_gauss_legendre(int order) {
  auto rule = std::make_shared<QuadratureRule>();
  // Boost returns the nonnegative zeros of P_order in increasing order.
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(order);
  std::vector<std::pair<double, double>> full;
  full.reserve(static_cast<std::size_t>(order));
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(order, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    full.emplace_back(z, w);
    if (z != 0.0) full.emplace_back(-z, w);
  }
  std::sort(full.begin(), full.end());
  for (const auto& [z, w] : full) {
    rule->nodes.push_back(0.5 * (z + 1.0));
    rule->weights.push_back(0.5 * w);
  }
  return rule;
}

}  // namespace detail

/// Cached Gauss–Legendre rule with `order` nodes on [0, 1]. Thread-safe.
inline std::shared_ptr<const QuadratureRule> gauss_legendre(int order) {
  require(order >= 1, "quadrature order must be positive");
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = detail::build_gauss_legendre(order);
  return slot;
}

}  // namespace dsr
