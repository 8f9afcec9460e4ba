#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dsr/errors.hpp"

namespace dsr {

enum class FilterKind { Tikhonov, Landweber, NuMethod, SpectralCutoff };

/// A spectral regularization family g_lambda together with its constants:
/// sup |t g(t)| <= d_prime, sup |g(t)| <= e / lambda, sup |r(t)| <= gamma0 and
/// the qualification sup |r(t)| t^q <= gamma_q(q) lambda^q.
struct FilterSpec {
  FilterKind kind = FilterKind::Tikhonov;
  double nu = 1.0;  // only meaningful for the nu-method

  static FilterSpec tikhonov() { return {FilterKind::Tikhonov, 1.0}; }
  static FilterSpec landweber() { return {FilterKind::Landweber, 1.0}; }
  static FilterSpec cutoff() { return {FilterKind::SpectralCutoff, 1.0}; }
  static FilterSpec nu_method(double nu = 1.0) {
    require(nu > 0.0 && std::isfinite(nu), "nu-method needs nu > 0");
    return {FilterKind::NuMethod, nu};
  }

  bool is_iterative() const { return kind == FilterKind::Landweber || kind == FilterKind::NuMethod; }

  std::string name() const {
    switch (kind) {
      case FilterKind::Tikhonov: return "tikhonov";
      case FilterKind::Landweber: return "landweber";
      case FilterKind::NuMethod: return "nu-method";
      case FilterKind::SpectralCutoff: return "cutoff";
    }
    return "unknown";
  }

  // The nu-method residual 1 - t p_1(t) dips to 1 - omega_1 at t = 1.
  double d_prime() const { return kind == FilterKind::NuMethod ? (4.0 * nu + 2.0) / (4.0 * nu + 1.0) : 1.0; }
  double e() const { return kind == FilterKind::NuMethod ? 2.0 : 1.0; }
  double gamma0() const { return 1.0; }

  double qualification() const {
    switch (kind) {
      case FilterKind::Tikhonov: return 1.0;
      case FilterKind::NuMethod: return nu;
      default: return std::numeric_limits<double>::infinity();
    }
  }

  /// Constant in the qualification inequality for exponent q, if known.
  std::optional<double> gamma_q(double q) const {
    if (q <= 0.0 || q > qualification()) return std::nullopt;
    switch (kind) {
      case FilterKind::Tikhonov:
      case FilterKind::SpectralCutoff: return 1.0;
      case FilterKind::Landweber: return q <= 1.0 ? 1.0 : std::pow(q, q);
      case FilterKind::NuMethod: return std::nullopt;
    }
    return std::nullopt;
  }
};

inline FilterSpec parse_filter(std::string_view name, double nu = 1.0) {
  if (name == "tikhonov") return FilterSpec::tikhonov();
  if (name == "landweber") return FilterSpec::landweber();
  if (name == "nu-method") return FilterSpec::nu_method(nu);
  if (name == "cutoff") return FilterSpec::cutoff();
  throw InputError("unknown filter '" + std::string(name) + "' (tikhonov, landweber, nu-method, cutoff)");
}

/// Regularization parameter. Iterative filters also carry the iteration count:
/// Landweber k = floor(1/lambda), nu-method k = floor(lambda^{-1/2}).
struct LambdaParam {
  double lambda = 1.0;
  int k = 1;

  static LambdaParam make(const FilterSpec& filter, double lambda) {
    require(lambda > 0.0 && lambda <= 1.0, "lambda must lie in (0, 1]");
    LambdaParam p{lambda, 1};
    if (filter.kind == FilterKind::Landweber) p.k = floor_count(1.0 / lambda);
    if (filter.kind == FilterKind::NuMethod) p.k = floor_count(1.0 / std::sqrt(lambda));
    return p;
  }

  /// Inverse mapping for iterative filters: lambda = 1/k or 1/k^2.
  static LambdaParam from_iterations(const FilterSpec& filter, int k) {
    require(filter.is_iterative(), "iteration count only applies to iterative filters");
    require(k >= 1, "iteration count must be >= 1");
    const double kd = static_cast<double>(k);
    return {filter.kind == FilterKind::Landweber ? 1.0 / kd : 1.0 / (kd * kd), k};
  }

 private:
  static int floor_count(double x) {
    // absorbs representation error in 1/lambda for lambda = 1/k exactly
    const double k = std::floor(x * (1.0 + 1e-12));
    require(k <= 1e9, "lambda too small for an iterative filter");
    return std::max(1, static_cast<int>(k));
  }
};

/// nu-method semi-iterative coefficients for step k >= 2.
struct NuStep {
  double mu;
  double omega;
};

inline double nu_first_omega(double nu) { return (4.0 * nu + 2.0) / (4.0 * nu + 1.0); }

inline NuStep nu_step(double nu, int k) {
  const double kd = k;
  const double mu = (kd - 1.0) * (2.0 * kd - 3.0) * (2.0 * kd + 2.0 * nu - 1.0) /
                    ((kd + 2.0 * nu - 1.0) * (2.0 * kd + 4.0 * nu - 1.0) * (2.0 * kd + 2.0 * nu - 3.0));
  const double omega = 4.0 * (2.0 * kd + 2.0 * nu - 1.0) * (kd + nu - 1.0) /
                       ((kd + 2.0 * nu - 1.0) * (2.0 * kd + 4.0 * nu - 1.0));
  return {mu, omega};
}

namespace detail {

inline double nu_polynomial(double nu, int k, double t) {
  double prev = 0.0;
  double cur = nu_first_omega(nu);
  for (int j = 2; j <= k; ++j) {
    const auto [mu, omega] = nu_step(nu, j);
    const double next = cur + mu * (cur - prev) + omega * (1.0 - t * cur);
    prev = cur;
    cur = next;
  }
  return cur;
}

// sum_{j<k} (1-t)^j = (1 - (1-t)^k) / t, stable near t = 0.
inline double landweber_sum(int k, double t) {
  if (t == 0.0) return k;
  return -std::expm1(k * std::log1p(-t)) / t;
}

}  // namespace detail

/// g_lambda(t) without range checks; t = 0 is allowed (eigenvalues of a
/// singular Gram matrix).
inline double g_unchecked(const FilterSpec& f, const LambdaParam& p, double t) {
  switch (f.kind) {
    case FilterKind::Tikhonov: return 1.0 / (p.lambda + t);
    case FilterKind::Landweber: return detail::landweber_sum(p.k, t);
    case FilterKind::NuMethod: return detail::nu_polynomial(f.nu, p.k, t);
    case FilterKind::SpectralCutoff: return t >= p.lambda ? 1.0 / t : 0.0;
  }
  return 0.0;
}

inline double residual_unchecked(const FilterSpec& f, const LambdaParam& p, double t) {
  switch (f.kind) {
    case FilterKind::Tikhonov: return p.lambda / (p.lambda + t);
    case FilterKind::Landweber: return std::pow(1.0 - t, p.k);
    case FilterKind::NuMethod: return 1.0 - t * detail::nu_polynomial(f.nu, p.k, t);
    case FilterKind::SpectralCutoff: return t >= p.lambda ? 0.0 : 1.0;
  }
  return 1.0;
}

inline void check_spectral_argument(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw InputError("filter argument must lie in (0, 1]");
}

inline double g(const FilterSpec& f, const LambdaParam& p, double t) {
  check_spectral_argument(t);
  return g_unchecked(f, p, t);
}

inline double residual(const FilterSpec& f, const LambdaParam& p, double t) {
  check_spectral_argument(t);
  return residual_unchecked(f, p, t);
}

/// g applied elementwise to a spectrum in [0, 1].
inline Eigen::VectorXd apply_filter(const FilterSpec& f, const LambdaParam& p, const Eigen::VectorXd& spectrum) {
  Eigen::VectorXd out(spectrum.size());
  if (f.kind == FilterKind::NuMethod) {
    // run the three-term recurrence on the whole vector at once
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(spectrum.size());
    Eigen::VectorXd cur = Eigen::VectorXd::Constant(spectrum.size(), nu_first_omega(f.nu));
    for (int j = 2; j <= p.k; ++j) {
      const auto [mu, omega] = nu_step(f.nu, j);
      Eigen::VectorXd next = cur + mu * (cur - prev) + omega * (Eigen::VectorXd::Ones(spectrum.size()) - spectrum.cwiseProduct(cur));
      prev = std::move(cur);
      cur = std::move(next);
    }
    return cur;
  }
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) out[i] = g_unchecked(f, p, spectrum[i]);
  return out;
}

/// Largest observed values of the four quantities bounded by the filter axioms.
struct AxiomReport {
  double max_tg = 0.0;          // sup |t g(t)|           vs d_prime
  double max_g_lambda = 0.0;    // sup |g(t)| lambda      vs e
  double max_residual = 0.0;    // sup |r(t)|             vs gamma0
  double max_qual_ratio = 0.0;  // sup |r(t)| t^q / lambda^q  vs gamma_q
  double q = 1.0;
  std::optional<double> gamma_q;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Scans a (lambda, t) grid and checks the filter's documented constants.
/// `q` defaults to the filter's qualification, or 1 when that is infinite.
inline AxiomReport verify_axioms(const FilterSpec& f, const std::vector<double>& lambda_grid,
                                 const std::vector<double>& t_grid, std::optional<double> q = std::nullopt,
                                 double tolerance = 1e-12) {
  AxiomReport rep;
  rep.q = q.value_or(std::isfinite(f.qualification()) ? f.qualification() : 1.0);
  rep.gamma_q = f.gamma_q(rep.q);
  for (double lambda : lambda_grid) {
    const LambdaParam p = LambdaParam::make(f, lambda);
    for (double t : t_grid) {
      const double gv = g(f, p, t);
      const double rv = residual(f, p, t);
      rep.max_tg = std::max(rep.max_tg, std::abs(t * gv));
      rep.max_g_lambda = std::max(rep.max_g_lambda, std::abs(gv) * lambda);
      rep.max_residual = std::max(rep.max_residual, std::abs(rv));
      rep.max_qual_ratio = std::max(rep.max_qual_ratio, std::abs(rv) * std::pow(t / lambda, rep.q));
    }
  }
  auto check = [&](double observed, double bound, const char* what) {
    if (observed > bound + tolerance * std::max(1.0, bound))
      rep.violations.push_back(std::string(what) + " = " + std::to_string(observed) + " exceeds " + std::to_string(bound));
  };
  check(rep.max_tg, f.d_prime(), "sup|t g|");
  check(rep.max_g_lambda, f.e(), "sup|g| lambda");
  check(rep.max_residual, f.gamma0(), "sup|r|");
  if (rep.gamma_q) check(rep.max_qual_ratio, *rep.gamma_q, "qualification ratio");
  return rep;
}

/// n points log-spaced over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int n) {
  require(lo > 0.0 && hi >= lo && n >= 1, "log_grid: need 0 < lo <= hi and n >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = hi;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace dsr
