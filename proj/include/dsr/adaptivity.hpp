#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "dsr/distributed.hpp"
#include "dsr/errors.hpp"
#include "dsr/estimator.hpp"
#include "dsr/filters.hpp"
#include "dsr/parallel.hpp"
#include "dsr/random.hpp"

namespace dsr {

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded shuffle, then the first round(train_fraction n) indices train.
inline HoldoutSplit holdout_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "holdout: train fraction must lie in (0, 1)");
  const auto m_t = static_cast<std::size_t>(std::round(train_fraction * static_cast<double>(n)));
  require(m_t >= 1 && m_t < n, "holdout: need at least one training and one validation sample");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto engine = make_engine(seed, Stream::Holdout);
  std::shuffle(order.begin(), order.end(), engine);
  HoldoutSplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m_t));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(m_t), order.end());
  return s;
}

/// m_k = ceil(m_t^{a_k}) for a_k = 0.6, 0.5, ..., 0, with repeats dropped so the
/// sequence is strictly decreasing.
inline std::vector<std::size_t> default_m_sequence(std::size_t m_t) {
  require(m_t >= 1, "m sequence: empty training set");
  std::vector<std::size_t> out;
  for (int i = 6; i >= 0; --i) {
    const double a = i / 10.0;
    const auto m = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(m_t), a) - 1e-9));
    const std::size_t clamped = std::clamp<std::size_t>(m, 1, m_t);
    if (out.empty() || clamped < out.back()) out.push_back(clamped);
  }
  return out;
}

/// Mean squared prediction error on validation data.
template <class Estimator>
double empirical_error(const Estimator& f, const Dataset& validation) {
  require(validation.size() >= 1, "empirical_error: empty validation set");
  double s = 0.0;
  for (Eigen::Index i = 0; i < validation.size(); ++i) {
    const double d = validation.y[i] - f(validation.x[i]);
    s += d * d;
  }
  return s / static_cast<double>(validation.size());
}

/// First k >= 3 (1-based) with Delta(k) <= delta * min_{2 <= j < k} Delta(j),
/// where Delta(j) = |Err(j) - Err(j-1)| and err[k-1] = Err(k).
inline std::optional<std::size_t> stopping_index(const std::vector<double>& err, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= err.size(); ++k) {
    const double d = std::abs(err[k - 1] - err[k - 2]);
    if (k >= 3 && d <= delta * best) return k;
    best = std::min(best, d);
  }
  return std::nullopt;
}

/// Averaged estimators over m blocks of `train` for every lambda in `lattice`.
/// Each block is eigendecomposed once and filtered per lambda.
template <KernelFunction K>
std::vector<AveragedEstimator<K>> fit_lattice(const K& kernel, const FilterSpec& f, const Dataset& train,
                                              std::size_t m, const std::vector<double>& lattice,
                                              std::size_t workers = 1) {
  require(!lattice.empty(), "fit_lattice: empty lattice");
  const Partition part = partition(static_cast<std::size_t>(train.size()), m);
  std::vector<std::vector<Vector>> coef(part.m());  // [block][lambda]
  std::vector<Dataset> blocks(part.m());
  parallel_for(part.m(), workers, [&](std::size_t b) {
    blocks[b] = train.subset(part.blocks[b]);
    detail::check_fit_inputs(kernel, blocks[b].x, blocks[b].y);
    const SpectralModel<K> model(kernel, blocks[b].x);
    const Vector py = model.project(blocks[b].y);
    for (double lambda : lattice)
      coef[b].push_back(model.filtered_from_projection(f, LambdaParam::make(f, lambda), py));
  });
  std::vector<AveragedEstimator<K>> out(lattice.size());
  for (std::size_t l = 0; l < lattice.size(); ++l)
    for (std::size_t b = 0; b < part.m(); ++b) out[l].locals.emplace_back(kernel, blocks[b].x, coef[b][l]);
  return out;
}

struct AdaptOptions {
  double delta = 0.5;
  double train_fraction = 0.8;
  std::vector<std::size_t> m_sequence;  // empty = default_m_sequence(m_t)
  bool refit_on_all = false;
  std::size_t workers = 1;
};

struct AdaptTraceRow {
  std::size_t k = 0, m_k = 0;
  double lambda_hat = 0.0;
  double err = 0.0;
  double delta_k = std::numeric_limits<double>::quiet_NaN();  // undefined for k = 1
};

template <KernelFunction K>
struct AdaptResult {
  std::size_t k_star = 0;
  double lambda_hat = 0.0;
  std::size_t lambda_index = 0;  // position of lambda_hat in the lattice
  bool triggered = false;        // false: m sequence exhausted before the rule fired
  AveragedEstimator<K> estimator;
  std::vector<AdaptTraceRow> trace;
};

/// Hold-out adaptive choice of (m, lambda) on an explicit train/validation split.
///
/// For k = 1, 2, ... fits the m_k-block averages on the training data for all
/// lambda in the lattice, takes lambda_hat_k = argmin of the validation error
/// (ties to the larger lambda) and stops by the discrepancy-style rule.
template <KernelFunction K>
AdaptResult<K> adapt(const K& kernel, const FilterSpec& f, const Dataset& train, const Dataset& validation,
                     const std::vector<double>& lattice, AdaptOptions opts = {}) {
  require(!lattice.empty(), "adapt: empty lattice");
  require(opts.delta > 0.0 && opts.delta < 1.0, "adapt: delta must lie in (0, 1)");
  require(validation.size() >= 1, "adapt: empty validation set");
  const auto m_t = static_cast<std::size_t>(train.size());
  std::vector<std::size_t> seq = opts.m_sequence.empty() ? default_m_sequence(m_t) : opts.m_sequence;
  require(seq.size() >= 3, "adapt: the m sequence needs at least 3 entries");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    require(seq[i] >= 1 && seq[i] <= m_t, "adapt: m_k must lie in [1, m_t]");
    if (i > 0) require(seq[i] < seq[i - 1], "adapt: m sequence must be strictly decreasing");
  }
  // scan from the largest lambda so strict improvement breaks ties upward
  std::vector<std::size_t> by_lambda(lattice.size());
  std::iota(by_lambda.begin(), by_lambda.end(), std::size_t{0});
  std::stable_sort(by_lambda.begin(), by_lambda.end(), [&](std::size_t a, std::size_t b) { return lattice[a] > lattice[b]; });

  AdaptResult<K> res;
  std::vector<double> errs;
  std::vector<AveragedEstimator<K>> best_estimators;
  for (std::size_t k = 1; k <= seq.size(); ++k) {
    auto estimators = fit_lattice(kernel, f, train, seq[k - 1], lattice, opts.workers);
    std::size_t best = by_lambda.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t l : by_lambda) {
      const double e = empirical_error(estimators[l], validation);
      if (e < best_err) {
        best_err = e;
        best = l;
      }
    }
    AdaptTraceRow row{k, seq[k - 1], lattice[best], best_err};
    if (k >= 2) row.delta_k = std::abs(best_err - errs.back());
    errs.push_back(best_err);
    res.trace.push_back(row);
    best_estimators.push_back(std::move(estimators[best]));
    if (auto stop = stopping_index(errs, opts.delta); stop) {
      res.k_star = *stop;
      res.triggered = true;
      break;
    }
  }
  if (!res.triggered) res.k_star = seq.size();
  const AdaptTraceRow& chosen = res.trace[res.k_star - 1];
  res.lambda_hat = chosen.lambda_hat;
  res.lambda_index = static_cast<std::size_t>(std::find(lattice.begin(), lattice.end(), chosen.lambda_hat) - lattice.begin());
  res.estimator = std::move(best_estimators[res.k_star - 1]);
  return res;
}

/// Splits `data` with a seeded hold-out and runs the adaptive procedure. With
/// `refit_on_all` the final estimator is refit on train and validation data.
template <KernelFunction K>
AdaptResult<K> adapt(const K& kernel, const FilterSpec& f, const Dataset& data, const std::vector<double>& lattice,
                     AdaptOptions opts, std::uint64_t seed) {
  const HoldoutSplit split = holdout_split(static_cast<std::size_t>(data.size()), opts.train_fraction, seed);
  auto res = adapt(kernel, f, data.subset(split.train), data.subset(split.validation), lattice, opts);
  if (opts.refit_on_all) {
    const Partition part = partition(static_cast<std::size_t>(data.size()), res.trace[res.k_star - 1].m_k);
    res.estimator = fit_distributed(kernel, f, LambdaParam::make(f, res.lambda_hat), data, part, {FitMethod::Spectral, opts.workers});
  }
  return res;
}

inline constexpr const char* kAdaptTraceCsvHeader = "k,m_k,lambda_hat,err,delta_k";

}  // namespace dsr
