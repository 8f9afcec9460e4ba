#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "dsr/errors.hpp"
#include "dsr/estimator.hpp"
#include "dsr/metrics.hpp"
#include "dsr/parallel.hpp"
#include "dsr/random.hpp"
#include "dsr/target.hpp"

namespace dsr {

/// Paired inputs and outputs.
struct Dataset {
  Vector x;
  Vector y;

  Eigen::Index size() const { return x.size(); }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset d{Vector(static_cast<Eigen::Index>(idx.size())), Vector(static_cast<Eigen::Index>(idx.size()))};
    for (std::size_t i = 0; i < idx.size(); ++i) {
      d.x[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(idx[i])];
      d.y[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(idx[i])];
    }
    return d;
  }
};

/// Disjoint blocks covering 0..n-1.
struct Partition {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> blocks;

  std::size_t m() const { return blocks.size(); }

  std::vector<std::size_t> block_of() const {
    std::vector<std::size_t> out(n);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (std::size_t i : blocks[b]) out[i] = b;
    return out;
  }
};

/// Splits n indices into m contiguous blocks of balanced size (the first
/// n mod m blocks get one extra index), optionally after a seeded shuffle.
inline Partition partition(std::size_t n, std::size_t m, std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  require(m >= 1, "partition: m must be >= 1");
  require(m <= n, "partition: more blocks than samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    auto engine = make_engine(*shuffle_seed, Stream::Partition);
    std::shuffle(order.begin(), order.end(), engine);
  }
  Partition p;
  p.n = n;
  p.blocks.resize(m);
  const std::size_t base = n / m, extra = n % m;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < m; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    p.blocks[b].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                       order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return p;
}

/// Arithmetic mean of m local estimators.
template <KernelFunction K>
struct AveragedEstimator {
  std::vector<KernelExpansion<K>> locals;

  std::size_t m() const { return locals.size(); }

  /// Mean of local predictions, summed in ascending block order.
  double operator()(double x) const {
    double s = 0.0;
    for (const auto& f : locals) s += f(x);
    return s / static_cast<double>(locals.size());
  }

  /// The average as one expansion over all anchors with weights alpha_j / m.
  KernelExpansion<K> combined() const {
    return concatenate(locals, std::vector<double>(locals.size(), 1.0 / static_cast<double>(locals.size())));
  }
};

struct DistributedOptions {
  FitMethod method = FitMethod::Spectral;
  std::size_t workers = 1;
};

/// Fits every block with the same lambda and averages the local estimators.
template <KernelFunction K>
AveragedEstimator<K> fit_distributed(const K& kernel, const FilterSpec& f, const LambdaParam& p, const Dataset& data,
                                     const Partition& part, DistributedOptions opts = {}) {
  require(part.n == static_cast<std::size_t>(data.size()), "fit_distributed: partition does not match data size");
  require(part.m() >= 1, "fit_distributed: empty partition");
  std::vector<std::optional<KernelExpansion<K>>> slots(part.m());
  parallel_for(part.m(), opts.workers, [&](std::size_t b) {
    const Dataset block = data.subset(part.blocks[b]);
    slots[b].emplace(fit(kernel, f, p, block.x, block.y, opts.method));
  });
  AveragedEstimator<K> out;
  out.locals.reserve(part.m());
  for (auto& s : slots) out.locals.push_back(std::move(*s));
  return out;
}

/// Bias/variance split of f_rho - f_bar into
///   approximation part  f_rho - f_tilde,   f_tilde = (1/m) sum_j g(T_j) T_j f_rho
///   sample part         f_tilde - f_bar   = (1/m) sum_j g(T_j) (T_j f_rho - S_j^* y_j)
/// Both f_tilde and the sample part lie in the anchor span: in coefficients
/// they are the block fits of the noiseless values f_rho(x) and of f_rho(x) - y.
template <KernelFunction K>
struct DiagnosticSplit {
  KernelExpansion<K> surrogate;    // f_tilde
  KernelExpansion<K> sample_part;  // f_tilde - f_bar
  double approx_norm = 0.0;
  double sample_norm = 0.0;
  /// <f_rho - f_tilde, f_tilde - f_bar>; total^2 = approx^2 + 2 cross + sample^2.
  double cross_term = 0.0;
  double total_norm = 0.0;  // ||f_rho - f_bar||
};

template <KernelFunction K>
DiagnosticSplit<K> diagnostic_split(const K& kernel, const FilterSpec& f, const LambdaParam& p, const Dataset& data,
                                    const Partition& part, const TargetFunction& target, DistributedOptions opts = {}) {
  Dataset noiseless = data;
  Dataset residual = data;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    noiseless.y[i] = target(data.x[i]);
    residual.y[i] = noiseless.y[i] - data.y[i];
  }
  const auto surrogate = fit_distributed(kernel, f, p, noiseless, part, opts).combined();
  const auto sample = fit_distributed(kernel, f, p, residual, part, opts).combined();
  const auto estimate = fit_distributed(kernel, f, p, data, part, opts).combined();

  DiagnosticSplit<K> out{surrogate, sample};
  out.approx_norm = hk_error(surrogate, target);
  out.sample_norm = std::sqrt(rkhs_norm_sq(sample));
  const Vector g_sample = GramOperator<K>(kernel, sample.points).apply(sample.coefficients);
  out.cross_term = rkhs_inner_with_target(sample, target) - surrogate.coefficients.dot(g_sample);
  out.total_norm = hk_error(estimate, target);
  return out;
}

}  // namespace dsr
