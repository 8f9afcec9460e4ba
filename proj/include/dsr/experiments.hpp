#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "dsr/distributed.hpp"
#include "dsr/errors.hpp"
#include "dsr/estimator.hpp"
#include "dsr/filters.hpp"
#include "dsr/kernels.hpp"
#include "dsr/metrics.hpp"
#include "dsr/parallel.hpp"
#include "dsr/random.hpp"
#include "dsr/target.hpp"
#include "dsr/theory.hpp"

namespace dsr {

enum class LambdaMode { Explicit, Oracle, Theory };

/// One Monte-Carlo experiment. `runs` is the number of repetitions.
struct ExperimentConfig {
  TargetFunction target = TargetFunction::quadratic_bump();
  FilterSpec filter = FilterSpec::nu_method(1.0);
  std::size_t n = 1000;
  std::optional<double> alpha;    // m = max(1, round(n^alpha))
  std::optional<std::size_t> m;   // explicit block count, used when alpha is unset
  double sigma = 0.005;
  LambdaMode lambda_mode = LambdaMode::Oracle;
  double lambda = 1e-2;           // LambdaMode::Explicit
  std::optional<int> k;           // explicit iteration count, overrides lambda
  std::size_t runs = 30;
  std::uint64_t seed = 1;
  std::size_t workers = 0;        // 0 = hardware concurrency
  // oracle grid
  double lambda_min = 1e-6;
  double lambda_max = 1.0;
  int grid_points = 40;
  int k_max = 0;                  // 0 = derived from lambda_min
  int quad_nodes = 256;
  // theory rule
  double r = 0.75;
  double b = 2.0;
  double R = 1.0;
  bool timing = false;

  std::size_t blocks() const {
    if (alpha) return blocks_for(n, *alpha);
    return m.value_or(1);
  }

  static std::size_t blocks_for(std::size_t n, double alpha) {
    const double m = std::round(std::pow(static_cast<double>(n), alpha));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1.0, m)), 1, n);
  }

  void validate() const {
    require(n >= 1, "config: n must be >= 1");
    require(runs >= 1, "config: runs must be >= 1");
    require(sigma >= 0.0 && std::isfinite(sigma), "config: sigma must be >= 0");
    if (alpha) require(*alpha >= 0.0, "config: alpha must be >= 0");
    if (m) require(*m >= 1 && *m <= n, "config: m must lie in [1, n]");
    require(lambda > 0.0 && lambda <= 1.0, "config: lambda must lie in (0, 1]");
    if (k) require(*k >= 1 && filter.is_iterative(), "config: k needs an iterative filter and k >= 1");
    require(lambda_min > 0.0 && lambda_max <= 1.0 && lambda_min <= lambda_max, "config: bad lambda grid range");
    require(grid_points >= 1, "config: grid_points must be >= 1");
    require(k_max >= 0, "config: k_max must be >= 0");
    require(quad_nodes >= 64, "config: quad_nodes must be >= 64");
  }

  FitMethod method() const { return filter.is_iterative() ? FitMethod::Iterative : FitMethod::Spectral; }
};

/// x_i ~ Unif[0, 1], y_i = f(x_i) + N(0, sigma^2); one stream per (seed, stream, run).
inline Dataset gen_data(const TargetFunction& target, std::size_t n, double sigma, std::uint64_t seed,
                        std::uint64_t run = 0, Stream stream = Stream::Assessment) {
  require(n >= 1, "gen_data: n must be >= 1");
  require(sigma >= 0.0, "gen_data: sigma must be >= 0");
  auto engine = make_engine(seed, stream, run);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d{Vector(static_cast<Eigen::Index>(n)), Vector(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < d.x.size(); ++i) d.x[i] = unif(engine);
  for (Eigen::Index i = 0; i < d.y.size(); ++i) {
    const double eps = noise(engine);
    d.y[i] = target(d.x[i]) + (sigma > 0.0 ? sigma * eps : 0.0);
  }
  return d;
}

/// Candidate parameters ordered from strongest to weakest regularization.
inline std::vector<LambdaParam> oracle_grid(const ExperimentConfig& c) {
  std::vector<LambdaParam> grid;
  if (c.filter.is_iterative()) {
    int k_max = c.k_max;
    if (k_max == 0) {
      k_max = LambdaParam::make(c.filter, c.lambda_min).k;
      if (c.filter.kind == FilterKind::Landweber) k_max = std::min(k_max, 2000);
    }
    for (int k = 1; k <= k_max; ++k) grid.push_back(LambdaParam::from_iterations(c.filter, k));
  } else {
    auto lambdas = log_grid(c.lambda_min, c.lambda_max, c.grid_points);
    std::reverse(lambdas.begin(), lambdas.end());
    for (double l : lambdas) grid.push_back(LambdaParam::make(c.filter, l));
  }
  return grid;
}

/// Squared H_K error of the single-machine fit at every grid point.
///
/// Iterative filters walk the iteration once and read off the error at each
/// requested k; spectral filters reuse one eigendecomposition and evaluate the
/// error in the eigenbasis.
template <KernelFunction K>
std::vector<double> hk_error_path(const K& kernel, const FilterSpec& f, const Dataset& data,
                                  const TargetFunction& target, const std::vector<LambdaParam>& grid) {
  const double norm_f = target.norm_sq_or_throw();
  Vector fvec(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) fvec[i] = target(data.x[i]);
  std::vector<double> out(grid.size());
  if (f.is_iterative()) {
    IterativeSolver<K> solver(kernel, f, data.x, data.y);
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a].k < grid[b].k; });
    for (std::size_t i : order) {
      solver.run_to(grid[i].k);
      const Vector alpha = solver.coefficients();
      const double value = alpha.dot(solver.gram_times_coefficients()) - 2.0 * alpha.dot(fvec) + norm_f;
      out[i] = clamp_norm_sq(value, norm_f);
    }
    return out;
  }
  const SpectralModel<K> model(kernel, data.x);
  const Vector py = model.project(data.y);
  const Vector pf = model.project(fvec);
  const double kappa2n = 1.0 / model.scale();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // alpha = V beta, alpha^T G alpha = kappa^2 n sum mu beta^2
    const Vector beta = model.scale() * apply_filter(f, grid[i], model.eigenvalues()).cwiseProduct(py);
    const double quad = kappa2n * beta.cwiseProduct(beta).dot(model.eigenvalues());
    out[i] = clamp_norm_sq(quad - 2.0 * beta.dot(pf) + norm_f, norm_f);
  }
  return out;
}

struct OracleResult {
  LambdaParam best;
  std::size_t best_index = 0;
  std::vector<LambdaParam> grid;
  std::vector<double> rms_error;  // root-mean H_K error over runs, per grid point
};

/// Grid point minimizing sqrt(mean_runs ||f - f_hat||^2_{H_K}) at m = 1, over
/// `runs` fresh data sets from the oracle stream. Ties go to the earlier
/// (stronger-regularized) grid point.
template <KernelFunction K>
OracleResult oracle_select(const K& kernel, const ExperimentConfig& c, std::vector<LambdaParam> grid) {
  c.validate();
  require(!grid.empty(), "oracle_select: empty grid");
  std::vector<std::vector<double>> per_run(c.runs);
  parallel_for(c.runs, c.workers, [&](std::size_t run) {
    const Dataset data = gen_data(c.target, c.n, c.sigma, c.seed, run, Stream::Oracle);
    per_run[run] = hk_error_path(kernel, c.filter, data, c.target, grid);
  });
  OracleResult res;
  res.grid = std::move(grid);
  res.rms_error.assign(res.grid.size(), 0.0);
  for (const auto& errs : per_run)
    for (std::size_t i = 0; i < errs.size(); ++i) res.rms_error[i] += errs[i];
  for (double& e : res.rms_error) e = std::sqrt(e / static_cast<double>(c.runs));
  for (std::size_t i = 1; i < res.rms_error.size(); ++i)
    if (res.rms_error[i] < res.rms_error[res.best_index]) res.best_index = i;
  res.best = res.grid[res.best_index];
  return res;
}

template <KernelFunction K>
OracleResult oracle_select(const K& kernel, const ExperimentConfig& c) {
  return oracle_select(kernel, c, oracle_grid(c));
}

/// Regularization parameter for a config: explicit, oracle (whole sample) or
/// the a-priori rule lambda_n.
template <KernelFunction K>
LambdaParam resolve_parameter(const K& kernel, const ExperimentConfig& c) {
  switch (c.lambda_mode) {
    case LambdaMode::Explicit:
      if (c.k) return LambdaParam::from_iterations(c.filter, *c.k);
      return LambdaParam::make(c.filter, c.lambda);
    case LambdaMode::Oracle: return oracle_select(kernel, c).best;
    case LambdaMode::Theory: {
      TheoryParams tp;
      tp.r = c.r;
      tp.b = c.b;
      tp.R = c.R;
      tp.sigma = c.sigma;
      tp.n = static_cast<double>(c.n);
      require(c.sigma > 0.0, "theory rule needs sigma > 0");
      return LambdaParam::make(c.filter, lambda_choice(tp));
    }
  }
  throw InputError("unknown lambda mode");
}

struct RunRecord {
  std::size_t n = 0, m = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  int k = 0;  // 0 for non-iterative filters
  std::size_t run = 0;
  double hk_error = 0.0, l2_error = 0.0;
  double wall_ms = 0.0;  // mean fit time per block; 0 unless timing is on
};

/// `runs` repetitions of the averaged estimator with m blocks at parameter p.
template <KernelFunction K>
std::vector<RunRecord> simulate(const K& kernel, const ExperimentConfig& c, const LambdaParam& p) {
  c.validate();
  const std::size_t m = c.blocks();
  const double alpha = c.alpha ? *c.alpha
                       : c.n > 1 ? std::log(static_cast<double>(m)) / std::log(static_cast<double>(c.n))
                                 : 0.0;
  std::vector<RunRecord> records(c.runs);
  const Partition part = partition(c.n, m);
  parallel_for(c.runs, c.workers, [&](std::size_t run) {
    const Dataset data = gen_data(c.target, c.n, c.sigma, c.seed, run, Stream::Assessment);
    const auto start = std::chrono::steady_clock::now();
    const auto avg = fit_distributed(kernel, c.filter, p, data, part, {c.method(), 1});
    const auto stop = std::chrono::steady_clock::now();
    const auto combined = avg.combined();
    RunRecord& rec = records[run];
    rec.n = c.n;
    rec.m = m;
    rec.alpha = alpha;
    rec.lambda = p.lambda;
    rec.k = c.filter.is_iterative() ? p.k : 0;
    rec.run = run;
    rec.hk_error = hk_error(combined, c.target);
    rec.l2_error = l2_error(combined, c.target, c.quad_nodes);
    if (c.timing)
      rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count() / static_cast<double>(m);
  });
  return records;
}

struct SummaryRow {
  std::size_t n = 0, m = 0;
  double alpha = 0.0, lambda = 0.0;
  int k = 0;
  std::size_t runs = 0;
  double hk_mean = 0.0, hk_se = 0.0, l2_mean = 0.0, l2_se = 0.0;
};

/// Mean and standard error over a group of runs sharing (n, m, parameter).
inline SummaryRow summarize(const std::vector<RunRecord>& group) {
  require(!group.empty(), "summarize: no runs");
  SummaryRow s;
  s.n = group.front().n;
  s.m = group.front().m;
  s.alpha = group.front().alpha;
  s.lambda = group.front().lambda;
  s.k = group.front().k;
  s.runs = group.size();
  auto mean_se = [&](auto field, double& mean, double& se) {
    double sum = 0.0;
    for (const auto& r : group) sum += r.*field;
    mean = sum / static_cast<double>(group.size());
    if (group.size() < 2) {
      se = 0.0;
      return;
    }
    double ss = 0.0;
    for (const auto& r : group) ss += (r.*field - mean) * (r.*field - mean);
    se = std::sqrt(ss / static_cast<double>(group.size() - 1) / static_cast<double>(group.size()));
  };
  mean_se(&RunRecord::hk_error, s.hk_mean, s.hk_se);
  mean_se(&RunRecord::l2_error, s.l2_mean, s.l2_se);
  return s;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need >= 2 paired values");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct SweepResult {
  std::vector<RunRecord> records;
  std::vector<SummaryRow> summary;
  std::vector<LambdaParam> parameters;  // one per n (sweep_n) or a single entry (sweep_alpha)
  std::optional<double> slope_alpha0;   // sweep_n only
};

/// Runs every alpha with the parameter chosen once from the full sample.
template <KernelFunction K>
SweepResult sweep_alpha(const K& kernel, ExperimentConfig c, const std::vector<double>& alpha_grid) {
  require(!alpha_grid.empty(), "sweep_alpha: empty alpha grid");
  c.validate();
  const LambdaParam p = resolve_parameter(kernel, c);
  SweepResult out;
  out.parameters.push_back(p);
  for (double a : alpha_grid) {
    c.alpha = a;
    auto recs = simulate(kernel, c, p);
    out.summary.push_back(summarize(recs));
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  return out;
}

/// For each n: choose the parameter (oracle per n by default), then run every
/// alpha. Reports the log-log slope of mean H_K error against n at alpha = 0.
template <KernelFunction K>
SweepResult sweep_n(const K& kernel, ExperimentConfig c, const std::vector<std::size_t>& n_grid,
                    std::vector<double> alpha_grid) {
  require(!n_grid.empty(), "sweep_n: empty n grid");
  if (std::find(alpha_grid.begin(), alpha_grid.end(), 0.0) == alpha_grid.end())
    alpha_grid.insert(alpha_grid.begin(), 0.0);
  SweepResult out;
  std::vector<double> ns, errs;
  for (std::size_t n : n_grid) {
    c.n = n;
    c.alpha.reset();
    c.validate();
    const LambdaParam p = resolve_parameter(kernel, c);
    out.parameters.push_back(p);
    for (double a : alpha_grid) {
      c.alpha = a;
      auto recs = simulate(kernel, c, p);
      const SummaryRow row = summarize(recs);
      if (a == 0.0) {
        ns.push_back(static_cast<double>(n));
        errs.push_back(row.hk_mean);
      }
      out.summary.push_back(row);
      out.records.insert(out.records.end(), recs.begin(), recs.end());
    }
  }
  if (ns.size() >= 2) out.slope_alpha0 = loglog_slope(ns, errs);
  return out;
}

// ---------------------------------------------------------------- CSV output

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline constexpr const char* kRunsCsvHeader = "n,m,alpha,lambda,k,run,hk_error,l2_error,wall_ms";
inline constexpr const char* kSummaryCsvHeader = "n,m,alpha,lambda,k,runs,hk_mean,hk_se,l2_mean,l2_se";

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kRunsCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.n << ',' << r.m << ',' << format_number(r.alpha) << ',' << format_number(r.lambda) << ',' << r.k << ','
       << r.run << ',' << format_number(r.hk_error) << ',' << format_number(r.l2_error) << ','
       << format_number(r.wall_ms) << '\n';
  }
}

inline void write_summary(std::ostream& os, const SweepResult& res) {
  os << kSummaryCsvHeader << '\n';
  for (const auto& s : res.summary) {
    os << s.n << ',' << s.m << ',' << format_number(s.alpha) << ',' << format_number(s.lambda) << ',' << s.k << ','
       << s.runs << ',' << format_number(s.hk_mean) << ',' << format_number(s.hk_se) << ','
       << format_number(s.l2_mean) << ',' << format_number(s.l2_se) << '\n';
  }
  if (res.slope_alpha0) os << "# slope_hk_vs_n_alpha0=" << format_number(*res.slope_alpha0) << '\n';
}

}  // namespace dsr
