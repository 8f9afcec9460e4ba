#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "dsr/errors.hpp"
#include "dsr/filters.hpp"
#include "dsr/kernels.hpp"

namespace dsr {

/// Eigenvalues below this are treated as exact zeros of the normalized Gram matrix.
inline constexpr double kZeroEigenvalue = 1e-14;

namespace detail {

template <KernelFunction K>
void check_fit_inputs(const K& kernel, const VectorCRef& x, const VectorCRef& y) {
  require(x.size() >= 1, "fit: need at least one sample");
  require(x.size() == y.size(), "fit: inputs and outputs differ in length");
  require(kernel.kappa() > 0.0, "fit: kernel bound kappa must be positive");
  check_points(kernel, x);
  for (Eigen::Index i = 0; i < y.size(); ++i) require(std::isfinite(y[i]), "fit: non-finite output value");
}

}  // namespace detail

/// Eigendecomposition of M = kappa^{-2} G / n for one block of inputs.
/// Eigenvalues are sorted descending and clamped to [0, 1].
template <KernelFunction K>
class SpectralModel {
 public:
  SpectralModel(K kernel, Vector points) : kernel_(std::move(kernel)), points_(std::move(points)) {
    require(points_.size() >= 1, "spectral model: no points");
    require(kernel_.kappa() > 0.0, "spectral model: kernel bound kappa must be positive");
    const double n = static_cast<double>(points_.size());
    const double kappa2 = kernel_.kappa() * kernel_.kappa();
    Matrix m = gram(kernel_, points_).entries / (kappa2 * n);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition of the Gram matrix failed");
    const Eigen::Index size = points_.size();
    eigenvalues_ = solver.eigenvalues().reverse();
    eigenvectors_ = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index i = 0; i < size; ++i) {
      double& mu = eigenvalues_[i];
      mu = mu < kZeroEigenvalue ? 0.0 : std::min(mu, 1.0);
    }
    scale_ = 1.0 / (kappa2 * n);
  }

  const K& kernel() const { return kernel_; }
  const Vector& points() const { return points_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double kappa() const { return kernel_.kappa(); }
  Eigen::Index size() const { return points_.size(); }
  /// kappa^{-2} / n, the factor mapping filtered data to coefficients.
  double scale() const { return scale_; }

  /// V^T v
  Vector project(const VectorCRef& v) const { return eigenvectors_.transpose() * v; }

  /// alpha = kappa^{-2} (1/n) V g(Lambda) V^T y
  Vector coefficients(const FilterSpec& f, const LambdaParam& p, const VectorCRef& y) const {
    require(y.size() == points_.size(), "spectral model: output length mismatch");
    return filtered_from_projection(f, p, project(y));
  }

  /// Same as coefficients() but starting from a precomputed V^T y.
  Vector filtered_from_projection(const FilterSpec& f, const LambdaParam& p, const VectorCRef& projected) const {
    const Vector gv = apply_filter(f, p, eigenvalues_);
    return scale_ * (eigenvectors_ * gv.cwiseProduct(projected));
  }

  KernelExpansion<K> expansion(const FilterSpec& f, const LambdaParam& p, const VectorCRef& y) const {
    return KernelExpansion<K>(kernel_, points_, coefficients(f, p, y));
  }

 private:
  K kernel_;
  Vector points_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  double scale_ = 1.0;
};

template <KernelFunction K>
KernelExpansion<K> fit_spectral(const K& kernel, const FilterSpec& f, const LambdaParam& p, const VectorCRef& x,
                                const VectorCRef& y) {
  detail::check_fit_inputs(kernel, x, y);
  return SpectralModel<K>(kernel, x).expansion(f, p, y);
}

template <KernelFunction K>
KernelExpansion<K> fit_spectral(const K& kernel, const FilterSpec& f, double lambda, const VectorCRef& x,
                                const VectorCRef& y) {
  return fit_spectral(kernel, f, LambdaParam::make(f, lambda), x, y);
}

/// Landweber / nu-method iteration in coefficient space.
///
/// Works on u with alpha = kappa^{-2} u / n, so that after k steps
/// u_k = g_k(M) y for M = kappa^{-2} G / n:
///   Landweber  u_k = u_{k-1} + (y - M u_{k-1})
///   nu-method  u_1 = omega_1 y,
///              u_k = u_{k-1} + mu_k (u_{k-1} - u_{k-2}) + omega_k (y - M u_{k-1})
/// Each step costs one Gram product, O(n log n) for the Sobolev kernel.
template <KernelFunction K>
class IterativeSolver {
 public:
  IterativeSolver(const K& kernel, const FilterSpec& f, Vector x, Vector y)
      : filter_(f), y_(std::move(y)), op_(kernel, std::move(x)), kernel_(kernel) {
    require(f.is_iterative(), "iterative solver needs the landweber or nu-method filter");
    detail::check_fit_inputs(kernel, op_.anchors(), y_);
    const double n = static_cast<double>(y_.size());
    scale_ = 1.0 / (kernel.kappa() * kernel.kappa() * n);
    u_ = Vector::Zero(y_.size());
    u_prev_ = u_;
  }

  int iterations() const { return k_; }

  void step() {
    if (k_ == 0) {
      u_ = filter_.kind == FilterKind::NuMethod ? Vector(nu_first_omega(filter_.nu) * y_) : y_;
    } else {
      const Vector& mu_u = m_times_u();
      Vector next;
      if (filter_.kind == FilterKind::Landweber) {
        next = u_ + (y_ - mu_u);
      } else {
        const auto [mu, omega] = nu_step(filter_.nu, k_ + 1);
        next = u_ + mu * (u_ - u_prev_) + omega * (y_ - mu_u);
      }
      u_prev_ = std::move(u_);
      u_ = std::move(next);
    }
    ++k_;
    cached_ = false;
  }

  void run_to(int k) {
    while (k_ < k) step();
  }

  Vector coefficients() const { return scale_ * u_; }

  /// G alpha for the current coefficients (equals M u).
  const Vector& gram_times_coefficients() { return m_times_u(); }

  KernelExpansion<K> expansion() const { return KernelExpansion<K>(kernel_, op_.anchors(), coefficients()); }

 private:
  const Vector& m_times_u() {
    if (!cached_) {
      mu_ = scale_ * op_.apply(u_);
      cached_ = true;
    }
    return mu_;
  }

  FilterSpec filter_;
  Vector y_;
  GramOperator<K> op_;
  K kernel_;
  double scale_ = 1.0;
  Vector u_, u_prev_, mu_;
  bool cached_ = false;
  int k_ = 0;
};

template <KernelFunction K>
KernelExpansion<K> fit_iterative(const K& kernel, const FilterSpec& f, const LambdaParam& p, const VectorCRef& x,
                                 const VectorCRef& y) {
  require(f.is_iterative(), "fit_iterative: filter " + f.name() + " is not iterative");
  IterativeSolver<K> solver(kernel, f, x, y);
  solver.run_to(p.k);
  return solver.expansion();
}

template <KernelFunction K>
KernelExpansion<K> fit_iterative(const K& kernel, const FilterSpec& f, double lambda, const VectorCRef& x,
                                 const VectorCRef& y) {
  require(f.is_iterative(), "fit_iterative: filter " + f.name() + " is not iterative");
  return fit_iterative(kernel, f, LambdaParam::make(f, lambda), x, y);
}

enum class FitMethod { Spectral, Iterative };

template <KernelFunction K>
KernelExpansion<K> fit(const K& kernel, const FilterSpec& f, const LambdaParam& p, const VectorCRef& x,
                       const VectorCRef& y, FitMethod method = FitMethod::Spectral) {
  if (method == FitMethod::Iterative && f.is_iterative()) return fit_iterative(kernel, f, p, x, y);
  return fit_spectral(kernel, f, p, x, y);
}

template <KernelFunction K>
double predict(const KernelExpansion<K>& f, double x) {
  return f(x);
}

}  // namespace dsr
