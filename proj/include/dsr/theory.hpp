#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "dsr/errors.hpp"

namespace dsr {

/// Model parameters entering the rate formulas.
struct TheoryParams {
  double r = 0.5;      // source condition exponent
  double b = 2.0;      // eigenvalue decay exponent, > 1
  double beta = 4.0 / (std::numbers::pi * std::numbers::pi);
  double s = 0.0;      // norm interpolation, 0 = H_K, 1/2 = L^2
  double sigma = 1.0;  // noise level
  double R = 1.0;      // source radius
  double n = 1.0;      // sample size
  double M = 1.0;      // output moment bound; carried, unused by the formulas

  void validate() const {
    require(r > 0.0, "theory: r must be positive");
    require(b > 1.0, "theory: b must exceed 1");
    require(beta > 0.0, "theory: beta must be positive");
    require(s >= 0.0 && s <= 0.5, "theory: s must lie in [0, 1/2]");
    require(sigma > 0.0 && R > 0.0 && M > 0.0, "theory: sigma, R and M must be positive");
    require(n >= 1.0, "theory: n must be >= 1");
  }

  /// sigma^2 / (R^2 n)
  double noise_ratio() const { return sigma * sigma / (R * R * n); }
  double rate_denominator() const { return 2.0 * b * r + b + 1.0; }
};

/// lambda_n = min((sigma^2/(R^2 n))^{b/(2br+b+1)}, 1)
inline double lambda_choice(const TheoryParams& p) {
  p.validate();
  return std::min(std::pow(p.noise_ratio(), p.b / p.rate_denominator()), 1.0);
}

/// a_n = R (sigma^2/(R^2 n))^{b(r+s)/(2br+b+1)}
inline double rate(const TheoryParams& p) {
  p.validate();
  return p.R * std::pow(p.noise_ratio(), p.b * (p.r + p.s) / p.rate_denominator());
}

/// Admissible exponent for m = n^alpha of the total error: min(2br, b+1)/(2br+b+1).
inline double alpha_bound(const TheoryParams& p) {
  p.validate();
  return std::min(2.0 * p.b * p.r, p.b + 1.0) / p.rate_denominator();
}

/// Exponent bound from the approximation error: 2b min(r, 1)/(2br+b+1).
inline double alpha_bound_approximation(const TheoryParams& p) {
  p.validate();
  return 2.0 * p.b * std::min(p.r, 1.0) / p.rate_denominator();
}

/// Exponent bound from the sample error: 2br/(2br+b+1).
inline double alpha_bound_sample(const TheoryParams& p) {
  p.validate();
  return 2.0 * p.b * p.r / p.rate_denominator();
}

/// Eigenvalue sequence of the normalized covariance operator: either an
/// explicit list or the power law mu_j = min(1, beta j^{-b}).
struct SpectrumModel {
  std::vector<double> values;
  double beta = 0.0;
  double b = 0.0;

  static SpectrumModel empirical(std::vector<double> v) {
    for (double mu : v) require(mu >= 0.0 && mu <= 1.0 + 1e-12, "spectrum values must lie in [0, 1]");
    SpectrumModel s;
    s.values = std::move(v);
    return s;
  }

  static SpectrumModel power_law(double beta, double b) {
    require(beta > 0.0 && b > 1.0, "power-law spectrum needs beta > 0, b > 1");
    SpectrumModel s;
    s.beta = beta;
    s.b = b;
    return s;
  }

  /// mu_j = kappa^{-2} (pi j)^{-2} = 4 / (pi j)^2 for K(x,t) = min(x,t) - xt and uniform inputs.
  static SpectrumModel sobolev() { return power_law(4.0 / (std::numbers::pi * std::numbers::pi), 2.0); }

  bool analytic() const { return values.empty() && b > 1.0; }
  double mu(double j) const { return std::min(1.0, beta * std::pow(j, -b)); }
};

struct EffectiveDimension {
  double value = 0.0;
  std::size_t truncation = 0;  // terms summed explicitly (J)
  double tail = 0.0;           // estimate of the sum beyond J
  double tail_error = 0.0;     // bound on |estimate - true tail|
};

/// N(lambda) = sum_j mu_j / (mu_j + lambda).
///
/// For analytic spectra the sum runs to J with mu_J/(mu_J + lambda) <= 2e-8 and
/// the remainder is bracketed by the integrals of h(x) = mu(x)/(mu(x)+lambda)
/// over [J+1, inf) and [J, inf); the midpoint is added and half the bracket
/// width reported.
inline EffectiveDimension effective_dimension(const SpectrumModel& spec, double lambda,
                                              std::size_t max_terms = 20'000'000) {
  require(lambda > 0.0 && lambda <= 1.0, "effective_dimension: lambda must lie in (0, 1]");
  EffectiveDimension out;
  if (!spec.analytic()) {
    for (double mu : spec.values) out.value += mu / (mu + lambda);
    out.truncation = spec.values.size();
    return out;
  }
  const double target_term = 2e-8;
  // beta J^{-b} / lambda <= target_term  =>  J >= (beta / (lambda target_term))^{1/b}
  const double j_needed = std::pow(spec.beta / (lambda * target_term), 1.0 / spec.b);
  const std::size_t J =
      static_cast<std::size_t>(std::clamp(std::ceil(j_needed), 1.0, static_cast<double>(max_terms)));
  // sum small terms first
  for (std::size_t j = J; j >= 1; --j) {
    const double mu = spec.mu(static_cast<double>(j));
    out.value += mu / (mu + lambda);
  }
  auto h = [&](double x) {
    const double mu = spec.mu(x);
    return mu / (mu + lambda);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double upper = integrator.integrate([&](double t) { return h(static_cast<double>(J) + t); });
  const double lower = integrator.integrate([&](double t) { return h(static_cast<double>(J) + 1.0 + t); });
  out.truncation = J;
  out.tail = 0.5 * (upper + lower);
  out.tail_error = 0.5 * (upper - lower);
  out.value += out.tail;
  return out;
}

/// Upper bound (beta b/(b-1)) (kappa^2 lambda)^{-1/b} valid for mu_j <= beta j^{-b}.
inline double effective_dimension_upper_bound(double beta, double b, double kappa, double lambda) {
  require(b > 1.0 && beta > 0.0 && kappa > 0.0 && lambda > 0.0, "invalid effective dimension bound parameters");
  return beta * b / (b - 1.0) * std::pow(kappa * kappa * lambda, -1.0 / b);
}

/// B_n(lambda) = 1 + (2/(n lambda) + sqrt(N(lambda)/(n lambda)))^2
inline double b_quantity(double n_block, double lambda, double n_lambda) {
  require(n_block > 0.0 && lambda > 0.0 && n_lambda >= 0.0, "b_quantity: inputs must be positive");
  const double nl = n_block * lambda;
  const double term = 2.0 / nl + std::sqrt(n_lambda / nl);
  return 1.0 + term * term;
}

/// Whether B_{n/m}(lambda) <= 2, the block-size condition used for m = n^alpha.
inline bool block_condition_holds(double n, double m, double lambda, double n_lambda) {
  require(m >= 1.0 && n >= m, "block condition: need 1 <= m <= n");
  return b_quantity(n / m, lambda, n_lambda) <= 2.0;
}

/// One row of the theory table.
struct TheoryRow {
  double n, m, b, r, s, sigma, R;
  double lambda_n, a_n, alpha_max, n_lambda, b_block;
};

inline TheoryRow theory_row(TheoryParams p, double m) {
  p.validate();
  require(m >= 1.0 && m <= p.n, "theory: m must lie in [1, n]");
  TheoryRow row{p.n, m, p.b, p.r, p.s, p.sigma, p.R, 0, 0, 0, 0, 0};
  row.lambda_n = lambda_choice(p);
  row.a_n = rate(p);
  row.alpha_max = alpha_bound(p);
  row.n_lambda = effective_dimension(SpectrumModel::power_law(p.beta, p.b), row.lambda_n).value;
  row.b_block = b_quantity(p.n / m, row.lambda_n, row.n_lambda);
  return row;
}

inline constexpr const char* kTheoryCsvHeader = "n,m,b,r,s,sigma,R,lambda_n,a_n,alpha_max,N_lambda,B_block";

}  // namespace dsr
