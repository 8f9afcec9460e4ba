#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dsr/errors.hpp"

namespace dsr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorCRef = Eigen::Ref<const Eigen::VectorXd>;

enum class KernelKind { SobolevMin, User };

/// A symmetric positive-semidefinite kernel with a known sup bound
/// kappa = sup_x sqrt(K(x, x)) and a domain predicate.
///
/// `k(x, t)` is the unchecked evaluation used in inner loops; use `eval()`
/// for the domain-checked entry point.
template <class K>
concept KernelFunction = std::copy_constructible<K> && requires(const K& k, double x, double t) {
  { k(x, t) } -> std::convertible_to<double>;
  { k.kappa() } -> std::convertible_to<double>;
  { k.in_domain(x) } -> std::convertible_to<bool>;
  { k.kind() } -> std::same_as<KernelKind>;
};

/// K(x, t) = min(x, t) - x t on [0, 1], the reproducing kernel of H^1_0[0, 1]
/// with inner product <f, g> = int f' g'.
class SobolevMinKernel {
 public:
  double operator()(double x, double t) const { return std::min(x, t) - x * t; }
  double kappa() const { return 0.5; }
  bool in_domain(double x) const { return x >= 0.0 && x <= 1.0; }
  KernelKind kind() const { return KernelKind::SobolevMin; }
  std::string name() const { return "sobolev-min"; }
};

/// Escape hatch for arbitrary kernels on a user-defined domain.
///
/// When no bound is given, kappa is taken as the maximum of sqrt(K(x, x)) over
/// 1025 equispaced points of [0, 1] that lie in the domain.
class UserKernel {
 public:
  using Function = std::function<double(double, double)>;
  using Domain = std::function<bool(double)>;

  explicit UserKernel(Function fn, std::optional<double> kappa = std::nullopt,
                      Domain domain = [](double x) { return x >= 0.0 && x <= 1.0; })
      : fn_(std::move(fn)), domain_(std::move(domain)) {
    require(static_cast<bool>(fn_), "user kernel needs a function");
    if (kappa) {
      require(*kappa >= 0.0 && std::isfinite(*kappa), "kernel bound must be finite and nonnegative");
      kappa_ = *kappa;
    } else {
      double best = 0.0;
      for (int i = 0; i <= 1024; ++i) {
        const double x = i / 1024.0;
        if (domain_(x)) best = std::max(best, fn_(x, x));
      }
      kappa_ = std::sqrt(best);
    }
  }

  double operator()(double x, double t) const { return fn_(x, t); }
  double kappa() const { return kappa_; }
  bool in_domain(double x) const { return domain_(x); }
  KernelKind kind() const { return KernelKind::User; }
  std::string name() const { return "user"; }

 private:
  Function fn_;
  Domain domain_;
  double kappa_ = 0.0;
};

template <KernelFunction K>
double eval(const K& kernel, double x, double t) {
  if (!kernel.in_domain(x) || !kernel.in_domain(t))
    throw InputError("kernel argument outside the domain");
  return kernel(x, t);
}

template <KernelFunction K>
double kappa_of(const K& kernel) {
  return kernel.kappa();
}

template <KernelFunction K>
void check_points(const K& kernel, const VectorCRef& points) {
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]) || !kernel.in_domain(points[i]))
      throw InputError("point " + std::to_string(points[i]) + " outside the kernel domain");
  }
}

/// Dense Gram matrix together with its anchor points.
struct GramMatrix {
  Matrix entries;
  Vector points;
};

template <KernelFunction K>
GramMatrix gram(const K& kernel, const VectorCRef& points) {
  require(points.size() > 0, "gram: empty point list");
  check_points(kernel, points);
  const Eigen::Index n = points.size();
  GramMatrix g{Matrix(n, n), points};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = kernel(points[i], points[j]);
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  }
  return g;
}

/// Cross-kernel matrix C(i, j) = K(rows[i], cols[j]).
template <KernelFunction K>
Matrix cross_gram(const K& kernel, const VectorCRef& rows, const VectorCRef& cols) {
  Matrix c(rows.size(), cols.size());
  for (Eigen::Index j = 0; j < cols.size(); ++j)
    for (Eigen::Index i = 0; i < rows.size(); ++i) c(i, j) = kernel(rows[i], cols[j]);
  return c;
}

/// Linear map v -> G v for the Gram matrix of a fixed anchor set, plus the
/// cross product v -> K(eval_points, anchors) v.
///
/// The generic version keeps a dense copy of G for up to kDenseLimit anchors
/// and evaluates entries on the fly beyond that.
template <KernelFunction K>
class GramOperator {
 public:
  static constexpr Eigen::Index kDenseLimit = 4096;

  GramOperator(K kernel, Vector anchors) : kernel_(std::move(kernel)), anchors_(std::move(anchors)) {
    if (anchors_.size() <= kDenseLimit) dense_ = gram(kernel_, anchors_).entries;
  }

  Eigen::Index size() const { return anchors_.size(); }
  const Vector& anchors() const { return anchors_; }

  Vector apply(const VectorCRef& v) const {
    if (dense_) return (*dense_) * v;
    return apply_at(anchors_, v);
  }

  Vector apply_at(const VectorCRef& eval_points, const VectorCRef& v) const {
    Vector out(eval_points.size());
    for (Eigen::Index i = 0; i < eval_points.size(); ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < anchors_.size(); ++j) s += kernel_(eval_points[i], anchors_[j]) * v[j];
      out[i] = s;
    }
    return out;
  }

 private:
  K kernel_;
  Vector anchors_;
  std::optional<Matrix> dense_;
};

/// Structured O(n log n) operator for min(x, t) - x t.
///
/// sum_j (min(x, a_j) - x a_j) v_j = P(x) + x (S(x) - P_total), where P(x) sums
/// a_j v_j over anchors a_j <= x and S(x) sums v_j over anchors a_j > x.
template <>
class GramOperator<SobolevMinKernel> {
 public:
  GramOperator(SobolevMinKernel /*kernel*/, Vector anchors) : anchors_(std::move(anchors)) {
    order_.resize(static_cast<std::size_t>(anchors_.size()));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return anchors_[a] < anchors_[b]; });
    sorted_.resize(anchors_.size());
    for (std::size_t s = 0; s < order_.size(); ++s) sorted_[static_cast<Eigen::Index>(s)] = anchors_[order_[s]];
  }

  Eigen::Index size() const { return anchors_.size(); }
  const Vector& anchors() const { return anchors_; }

  Vector apply(const VectorCRef& v) const {
    const Eigen::Index n = anchors_.size();
    std::vector<double> prefix, suffix;
    sums(v, prefix, suffix);
    const double total = prefix[static_cast<std::size_t>(n)];
    Vector out(n);
    for (Eigen::Index s = 0; s < n; ++s) {
      const double x = sorted_[s];
      const auto cut = static_cast<std::size_t>(s + 1);
      out[order_[static_cast<std::size_t>(s)]] = prefix[cut] + x * (suffix[cut] - total);
    }
    return out;
  }

  Vector apply_at(const VectorCRef& eval_points, const VectorCRef& v) const {
    std::vector<double> prefix, suffix;
    sums(v, prefix, suffix);
    const double total = prefix.back();
    Vector out(eval_points.size());
    const double* begin = sorted_.data();
    const double* end = begin + sorted_.size();
    for (Eigen::Index i = 0; i < eval_points.size(); ++i) {
      const double x = eval_points[i];
      const auto cut = static_cast<std::size_t>(std::upper_bound(begin, end, x) - begin);
      out[i] = prefix[cut] + x * (suffix[cut] - total);
    }
    return out;
  }

 private:
  void sums(const VectorCRef& v, std::vector<double>& prefix, std::vector<double>& suffix) const {
    const std::size_t n = order_.size();
    prefix.assign(n + 1, 0.0);
    suffix.assign(n + 1, 0.0);
    for (std::size_t s = 0; s < n; ++s)
      prefix[s + 1] = prefix[s] + sorted_[static_cast<Eigen::Index>(s)] * v[order_[s]];
    for (std::size_t s = n; s-- > 0;) suffix[s] = suffix[s + 1] + v[order_[s]];
  }

  Vector anchors_;
  Vector sorted_;
  std::vector<Eigen::Index> order_;
};

/// f(x) = sum_j coefficients[j] K(points[j], x).
template <KernelFunction K>
struct KernelExpansion {
  K kernel;
  Vector points;
  Vector coefficients;

  KernelExpansion(K k, Vector pts, Vector coef)
      : kernel(std::move(k)), points(std::move(pts)), coefficients(std::move(coef)) {
    require(points.size() == coefficients.size(), "expansion: coefficient/anchor length mismatch");
  }

  Eigen::Index size() const { return points.size(); }

  double operator()(double x) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < points.size(); ++j) s += coefficients[j] * kernel(points[j], x);
    return s;
  }

  Vector operator()(const VectorCRef& xs) const {
    return GramOperator<K>(kernel, points).apply_at(xs, coefficients);
  }
};

/// Merges expansions into one with coefficients scaled by `weights[i]`.
template <KernelFunction K>
KernelExpansion<K> concatenate(const std::vector<KernelExpansion<K>>& parts, const std::vector<double>& weights) {
  require(!parts.empty(), "concatenate: no expansions");
  require(parts.size() == weights.size(), "concatenate: weight count mismatch");
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector points(total), coef(total);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    points.segment(offset, parts[i].size()) = parts[i].points;
    coef.segment(offset, parts[i].size()) = weights[i] * parts[i].coefficients;
    offset += parts[i].size();
  }
  return KernelExpansion<K>(parts.front().kernel, std::move(points), std::move(coef));
}

/// Clamps tiny negative round-off in a squared norm; larger negatives mean the
/// kernel is not PSD on these points.
inline double clamp_norm_sq(double value, double scale = 1.0) {
  if (value >= 0.0) return value;
  if (value >= -1e-10 * std::max(1.0, scale)) return 0.0;
  throw NumericError("negative squared RKHS norm " + std::to_string(value));
}

/// ||f||^2_{H_K} = alpha^T G alpha for an expansion.
template <KernelFunction K>
double rkhs_norm_sq(const KernelExpansion<K>& f) {
  if (f.size() == 0) return 0.0;
  const Vector g_alpha = GramOperator<K>(f.kernel, f.points).apply(f.coefficients);
  return clamp_norm_sq(f.coefficients.dot(g_alpha));
}

}  // namespace dsr
