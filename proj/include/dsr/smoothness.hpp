#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dsr/errors.hpp"
#include "dsr/quadrature.hpp"
#include "dsr/target.hpp"

namespace dsr {

enum class CoefficientMethod { Auto, Analytic, Quadrature };

/// c_j = int_0^1 f'(x) e_j'(x) dx against e_j(x) = sqrt(2) sin(pi j x) / (pi j),
/// the orthonormal basis of H^1_0 under <f, g> = int f' g'.
///
/// Quadrature uses integration by parts, c_j = sqrt(2) pi j int_0^1 f(x) sin(pi j x) dx,
/// which only needs values of f, on a Gauss–Legendre rule with 64 J nodes.
inline std::vector<double> fourier_coefficients(const TargetFunction& f, int J,
                                                CoefficientMethod method = CoefficientMethod::Auto) {
  require(J >= 1, "fourier_coefficients: J must be positive");
  require(static_cast<bool>(f.value), "fourier_coefficients: target has no value function");
  if (std::abs(f(0.0)) > 1e-12 || std::abs(f(1.0)) > 1e-12)
    throw InputError("target '" + f.name + "' does not vanish at 0 and 1");
  std::vector<double> c(static_cast<std::size_t>(J));
  const bool analytic = method == CoefficientMethod::Analytic ||
                        (method == CoefficientMethod::Auto && static_cast<bool>(f.coefficient_rule));
  if (analytic) {
    require(static_cast<bool>(f.coefficient_rule), "target '" + f.name + "' has no analytic coefficient rule");
    for (int j = 1; j <= J; ++j) c[static_cast<std::size_t>(j - 1)] = f.coefficient_rule(j);
    return c;
  }
  const auto rule = gauss_legendre(64 * J);
  std::vector<double> values(rule->nodes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = rule->weights[i] * f(rule->nodes[i]);
  for (int j = 1; j <= J; ++j) {
    const double pj = std::numbers::pi * j;
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * std::sin(pj * rule->nodes[i]);
    c[static_cast<std::size_t>(j - 1)] = std::numbers::sqrt2 * pj * s;
  }
  return c;
}

struct SmoothnessReport {
  std::vector<double> coefficients;
  /// -c_j / sqrt(2): the same coefficients in the cosine-basis normalization,
  /// under which the quadratic bump reads -2 (pi j)^{-2}.
  std::vector<double> alternate_convention;
  std::size_t nonzero = 0;
  bool odd_only = false;         // even-indexed coefficients vanish
  bool finite_expansion = false; // all coefficients past the first half vanish
  double decay_exponent = std::numeric_limits<double>::quiet_NaN();  // p in |c_j| ~ j^{-p}
  double fit_residual = 0.0;     // RMS residual of the log-log fit
  double r_max = std::numeric_limits<double>::quiet_NaN();
  std::string verdict;
};

/// Source-condition exponent implied by |c_j| ~ j^{-p}: the partial sums of
/// sum j^{4r} c_j^2 stay bounded iff 4r - 2p < -1, so r_max = (2p - 1) / 4.
inline SmoothnessReport max_smoothness(const std::vector<double>& coefficients, double zero_tolerance = 1e-9) {
  SmoothnessReport rep;
  rep.coefficients = coefficients;
  rep.alternate_convention.reserve(coefficients.size());
  for (double c : coefficients) rep.alternate_convention.push_back(c == 0.0 ? 0.0 : -c / std::numbers::sqrt2);

  double largest = 0.0;
  for (double c : coefficients) largest = std::max(largest, std::abs(c));
  const double cut = zero_tolerance * std::max(largest, std::numeric_limits<double>::min());
  auto nonzero = [&](std::size_t i) { return largest > 0.0 && std::abs(coefficients[i]) > cut; };

  std::size_t last = 0, even_nonzero = 0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!nonzero(i)) continue;
    ++rep.nonzero;
    last = i + 1;
    if ((i + 1) % 2 == 0) ++even_nonzero;
  }
  if (rep.nonzero == 0) {
    rep.finite_expansion = true;
    rep.r_max = std::numeric_limits<double>::infinity();
    rep.verdict = "degenerate input: all coefficients vanish; r = inf";
    return rep;
  }
  rep.odd_only = even_nonzero == 0 && rep.nonzero > 1;
  if (2 * last <= coefficients.size()) {
    rep.finite_expansion = true;
    rep.r_max = std::numeric_limits<double>::infinity();
    rep.verdict = "finitely many nonzero coefficients; r = inf";
    return rep;
  }
  if (rep.nonzero < 8) throw InputError("max_smoothness: need at least 8 nonzero coefficients for a decay fit");

  // least squares of log|c_j| on log j over the nonzero coefficients
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!nonzero(i)) continue;
    const double lx = std::log(static_cast<double>(i + 1)), ly = std::log(std::abs(coefficients[i]));
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, cnt += 1;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / cnt;
  double rss = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!nonzero(i)) continue;
    const double d = std::log(std::abs(coefficients[i])) - (intercept + slope * std::log(static_cast<double>(i + 1)));
    rss += d * d;
  }
  rep.fit_residual = std::sqrt(rss / cnt);
  rep.decay_exponent = -slope;
  rep.r_max = (2.0 * rep.decay_exponent - 1.0) / 4.0;
  rep.verdict = "source condition holds for 0 < r < " + std::to_string(rep.r_max);
  return rep;
}

/// Dyadic block sums D_i = sum_{2^{i-1} < j <= 2^i} j^{4r} c_j^2 of the
/// source-condition series. Ratios D_{i+1}/D_i below 1 indicate convergence,
/// above 1 divergence.
inline std::vector<double> dyadic_block_sums(const std::vector<double>& coefficients, double r) {
  std::vector<double> blocks;
  std::size_t lo = 0, hi = 1;
  while (hi <= coefficients.size()) {
    double s = 0.0;
    for (std::size_t j = lo + 1; j <= hi; ++j) {
      const double c = coefficients[j - 1];
      s += std::pow(static_cast<double>(j), 4.0 * r) * c * c;
    }
    blocks.push_back(s);
    lo = hi;
    hi *= 2;
  }
  return blocks;
}

/// Ratio of the last two dyadic block sums.
inline double dyadic_growth_ratio(const std::vector<double>& coefficients, double r) {
  const auto blocks = dyadic_block_sums(coefficients, r);
  require(blocks.size() >= 2, "dyadic_growth_ratio: need at least 2 coefficients");
  return blocks.back() / blocks[blocks.size() - 2];
}

}  // namespace dsr
