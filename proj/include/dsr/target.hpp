#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "dsr/errors.hpp"

namespace dsr {

enum class TargetKind { QuadraticBump, ScaledSine, User };

/// Regression function on [0, 1] vanishing at both endpoints (an element of
/// H^1_0), optionally with its closed-form sine coefficients and H_K norm.
struct TargetFunction {
  TargetKind kind = TargetKind::User;
  std::string name;
  std::function<double(double)> value;
  /// c_j = <f, e_j> for e_j(x) = sqrt(2) sin(pi j x) / (pi j), when known.
  std::function<double(int)> coefficient_rule;
  std::optional<double> rkhs_norm_sq;

  double operator()(double x) const { return value(x); }

  /// f(x) = x (1 - x) / 2; ||f||^2 = int (1 - 2x)^2 / 4 = 1/12.
  static TargetFunction quadratic_bump() {
    TargetFunction f;
    f.kind = TargetKind::QuadraticBump;
    f.name = "quadratic-bump";
    f.value = [](double x) { return 0.5 * x * (1.0 - x); };
    f.coefficient_rule = [](int j) {
      if (j % 2 == 0) return 0.0;
      const double pj = std::numbers::pi * j;
      return 2.0 * std::numbers::sqrt2 / (pj * pj);
    };
    f.rkhs_norm_sq = 1.0 / 12.0;
    return f;
  }

  /// f(x) = sin(2 pi x) / (2 pi) = e_2 / sqrt(2); ||f||^2 = int cos^2(2 pi x) = 1/2.
  static TargetFunction scaled_sine() {
    TargetFunction f;
    f.kind = TargetKind::ScaledSine;
    f.name = "scaled-sine";
    f.value = [](double x) { return std::sin(2.0 * std::numbers::pi * x) / (2.0 * std::numbers::pi); };
    f.coefficient_rule = [](int j) { return j == 2 ? 1.0 / std::numbers::sqrt2 : 0.0; };
    f.rkhs_norm_sq = 0.5;
    return f;
  }

  static TargetFunction zero() {
    return user("zero", [](double) { return 0.0; }, 0.0);
  }

  static TargetFunction user(std::string name, std::function<double(double)> fn,
                             std::optional<double> norm_sq = std::nullopt) {
    TargetFunction f;
    f.kind = TargetKind::User;
    f.name = std::move(name);
    f.value = std::move(fn);
    if (norm_sq) require(*norm_sq >= 0.0, "target norm must be nonnegative");
    f.rkhs_norm_sq = norm_sq;
    return f;
  }

  double norm_sq_or_throw() const {
    if (!rkhs_norm_sq) throw InputError("target '" + name + "' has no known RKHS norm");
    return *rkhs_norm_sq;
  }
};

inline TargetFunction parse_target(std::string_view name) {
  if (name == "quadratic-bump") return TargetFunction::quadratic_bump();
  if (name == "scaled-sine") return TargetFunction::scaled_sine();
  if (name == "zero") return TargetFunction::zero();
  throw InputError("unknown target '" + std::string(name) + "' (quadratic-bump, scaled-sine, zero)");
}

}  // namespace dsr
