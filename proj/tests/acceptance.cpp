// Acceptance run: checks criteria 1-9 and prints one PASS/FAIL line each.
// Supporting CSVs go to --out (default ./acceptance_output).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsr/dsr.hpp"

namespace {

using namespace dsr;
const SobolevMinKernel kSob;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::filesystem::path out_dir;
  std::size_t workers = 0;
  // CSV text of the criterion 5 sweep, rerun with another worker count in criterion 9
  std::string plateau_csv;
  std::string adapt_csv;
};

std::string fmt(double v) { return format_number(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

Eigen::VectorXd uniform(Eigen::Index n, std::uint64_t seed) {
  return gen_data(TargetFunction::zero(), static_cast<std::size_t>(n), 0.0, seed).x;
}

Eigen::VectorXd gaussian(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::VectorXd v(n);
  for (auto& e : v) e = z(rng);
  return v;
}

// ----------------------------------------------------------------------------- 1

Outcome filter_axioms(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = log_grid(1e-6, 1.0, 100);
  std::ostringstream d;
  bool ok = true;
  auto run = [&](const FilterSpec& f, std::optional<double> q, double all_bound, double e_bound) {
    const auto rep = verify_axioms(f, grid, grid, q);
    const bool pass = rep.ok() && rep.max_tg <= all_bound && rep.max_g_lambda <= e_bound &&
                      rep.max_residual <= all_bound && (!rep.gamma_q || rep.max_qual_ratio <= *rep.gamma_q + 1e-12);
    ok = ok && pass;
    d << f.name() << "(q=" << fmt(rep.q) << "): tg=" << fmt(rep.max_tg) << " gl=" << fmt(rep.max_g_lambda)
      << " r=" << fmt(rep.max_residual) << " qual=" << fmt(rep.max_qual_ratio) << "; ";
  };
  const double one = 1.0 + 1e-12;
  run(FilterSpec::tikhonov(), std::nullopt, one, one);
  run(FilterSpec::landweber(), 1.0, one, one);
  const auto nu = FilterSpec::nu_method(1.0);
  run(nu, std::nullopt, nu.d_prime() + 1e-12, 2.0 + 1e-9);
  run(FilterSpec::cutoff(), 3.0, one, one);
  const double secs = seconds_since(t0);
  ok = ok && secs < 1.0;
  d << "time=" << fmt(secs) << "s";
  return {ok, d.str()};
}

// ----------------------------------------------------------------------------- 2

Outcome oracle_equivalences(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_ridge = 0.0, worst_lw = 0.0, worst_nu = 0.0;
  for (Eigen::Index n : {8, 64, 256}) {
    const Eigen::VectorXd x = uniform(n, 100 + static_cast<std::uint64_t>(n)), y = gaussian(n, 200 + static_cast<std::uint64_t>(n));
    const double nd = static_cast<double>(n);
    const Matrix m = gram(kSob, x).entries / (0.25 * nd);
    for (double lambda : {1e-1, 1e-3, 1e-5}) {
      const Eigen::VectorXd ridge = (m + lambda * Matrix::Identity(n, n)).partialPivLu().solve(y) / (0.25 * nd);
      const auto fit_result = fit_spectral(kSob, FilterSpec::tikhonov(), lambda, x, y);
      worst_ridge = std::max(worst_ridge, (fit_result.coefficients - ridge).cwiseAbs().maxCoeff());
    }
  }
  for (Eigen::Index n : {16, 64}) {
    const Eigen::VectorXd x = uniform(n, 300 + static_cast<std::uint64_t>(n)), y = gaussian(n, 400 + static_cast<std::uint64_t>(n));
    const SpectralModel<SobolevMinKernel> model(kSob, x);
    for (const auto& f : {FilterSpec::landweber(), FilterSpec::nu_method(1.0)}) {
      IterativeSolver<SobolevMinKernel> solver(kSob, f, x, y);
      for (int k = 1; k <= 100; ++k) {
        solver.run_to(k);
        const auto p = LambdaParam::from_iterations(f, k);
        const double diff = (solver.coefficients() - model.coefficients(f, p, y)).cwiseAbs().maxCoeff();
        (f.kind == FilterKind::Landweber ? worst_lw : worst_nu) = std::max(f.kind == FilterKind::Landweber ? worst_lw : worst_nu, diff);
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_ridge <= 1e-8 && worst_lw <= 1e-8 && worst_nu <= 1e-6 && secs < 5.0;
  return {ok, "ridge=" + fmt(worst_ridge) + " landweber=" + fmt(worst_lw) + " nu=" + fmt(worst_nu) +
                  " time=" + fmt(secs) + "s"};
}

// ----------------------------------------------------------------------------- 3

Outcome distribution_identities(Context&) {
  const auto target = TargetFunction::quadratic_bump();
  const auto data = gen_data(target, 512, 0.005, 7);
  bool m1_exact = true;
  for (const auto& f : {FilterSpec::tikhonov(), FilterSpec::nu_method(), FilterSpec::cutoff()}) {
    const auto p = LambdaParam::make(f, 1e-3);
    const auto avg = fit_distributed(kSob, f, p, data, partition(512, 1));
    const auto single = fit_spectral(kSob, f, p, data.x, data.y);
    m1_exact = m1_exact && avg.combined().coefficients == single.coefficients;
  }
  const auto f = FilterSpec::tikhonov();
  const auto p = LambdaParam::make(f, 1e-3);
  Partition part = partition(512, 8);
  const auto avg = fit_distributed(kSob, f, p, data, part);
  const auto combined = avg.combined();
  std::reverse(part.blocks.begin(), part.blocks.end());
  std::swap(part.blocks[1], part.blocks[5]);
  const auto permuted = fit_distributed(kSob, f, p, data, part);
  const Eigen::VectorXd xs = uniform(100, 99);
  double avg_gap = 0.0, perm_gap = 0.0;
  for (double x : xs) {
    double mean = 0.0;
    for (const auto& loc : avg.locals) mean += loc(x);
    mean /= static_cast<double>(avg.m());
    avg_gap = std::max(avg_gap, std::abs(combined(x) - mean));
    perm_gap = std::max(perm_gap, std::abs(permuted(x) - avg(x)));
  }
  const bool ok = m1_exact && avg_gap <= 1e-12 && perm_gap <= 1e-12;
  return {ok, std::string("m1_exact=") + (m1_exact ? "yes" : "no") + " avg_gap=" + fmt(avg_gap) +
                  " perm_gap=" + fmt(perm_gap)};
}

// ----------------------------------------------------------------------------- 4

ExperimentConfig low_smoothness(std::size_t workers) {
  ExperimentConfig c;
  c.target = TargetFunction::quadratic_bump();
  c.filter = FilterSpec::nu_method(1.0);
  c.sigma = 0.005;
  c.runs = 30;
  c.seed = 1;
  c.workers = workers;
  c.lambda_mode = LambdaMode::Oracle;
  return c;
}

Outcome rate_reproduction(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = sweep_n(kSob, low_smoothness(ctx.workers), {512, 1024, 2048, 4096, 8192}, {0.0});
  std::ostringstream runs, summary;
  write_runs_csv(runs, res.records);
  write_summary(summary, res);
  write_file(ctx.out_dir / "rate_runs.csv", runs.str());
  write_file(ctx.out_dir / "rate_summary.csv", summary.str());
  const double slope = res.slope_alpha0.value_or(std::nan(""));
  std::ostringstream d;
  d << "slope=" << fmt(slope) << " (target -0.25, band [-0.35, -0.15]); k_oracle=";
  for (std::size_t i = 0; i < res.parameters.size(); ++i) d << (i ? "," : "") << res.parameters[i].k;
  d << " hk_mean=";
  for (std::size_t i = 0; i < res.summary.size(); ++i) d << (i ? "," : "") << fmt(res.summary[i].hk_mean);
  d << " time=" << fmt(seconds_since(t0)) << "s";
  return {slope >= -0.35 && slope <= -0.15, d.str()};
}

// ----------------------------------------------------------------------------- 5

SweepResult plateau_sweep(std::size_t workers) {
  auto c = low_smoothness(workers);
  c.n = 4096;
  return sweep_alpha(kSob, c, {0.0, 0.1, 0.2, 0.3, 0.4, 0.8});
}

Outcome alpha_plateau(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = plateau_sweep(ctx.workers);
  std::ostringstream runs, summary;
  write_runs_csv(runs, res.records);
  write_summary(summary, res);
  ctx.plateau_csv = runs.str();
  write_file(ctx.out_dir / "plateau_runs.csv", runs.str());
  write_file(ctx.out_dir / "plateau_summary.csv", summary.str());
  const double base = res.summary.front().hk_mean;
  bool ok = true;
  std::ostringstream d;
  d << "k=" << res.parameters.front().k << " ratios:";
  for (const auto& row : res.summary) {
    const double ratio = row.hk_mean / base;
    d << " a=" << fmt(row.alpha) << ":" << fmt(ratio);
    if (row.alpha <= 0.4 + 1e-12) ok = ok && ratio <= 1.5;
    else ok = ok && ratio >= 2.0;
  }
  d << " (tolerances 1.5x / 2x are implementation-chosen) time=" << fmt(seconds_since(t0)) << "s";
  return {ok, d.str()};
}

// ----------------------------------------------------------------------------- 6

Outcome smoothness_reports(Context&) {
  const auto bump = TargetFunction::quadratic_bump();
  const auto sine = TargetFunction::scaled_sine();
  const auto rep_bump = max_smoothness(fourier_coefficients(bump, 200));
  const auto c_sine = fourier_coefficients(sine, 200);
  const auto rep_sine = max_smoothness(c_sine);
  bool single = rep_sine.nonzero == 1;
  for (std::size_t j = 0; j < c_sine.size(); ++j)
    if (j != 1) single = single && std::abs(c_sine[j]) < 1e-10;
  auto parseval = [](const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) s += c[i] * c[i];
    return s;
  };
  const double p_bump = parseval(fourier_coefficients(bump, 10000));
  const double p_sine = parseval(fourier_coefficients(sine, 10000));
  const bool ok = std::abs(rep_bump.r_max - 0.75) <= 0.02 && single && std::isinf(rep_sine.r_max) &&
                  std::abs(p_bump - 1.0 / 12.0) <= 1e-6 && std::abs(p_sine - 0.5) <= 1e-6;
  return {ok, "bump r_max=" + fmt(rep_bump.r_max) + " sine r_max=" + fmt(rep_sine.r_max) + " sine nonzero=" +
                  std::to_string(rep_sine.nonzero) + " parseval=" + fmt(p_bump) + "," + fmt(p_sine)};
}

// ----------------------------------------------------------------------------- 7

Outcome theory_formulas(Context&) {
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  TheoryParams p;
  p.sigma = 1.0, p.R = 1.0, p.b = 2.0, p.r = 0.5, p.n = 1024;
  const double e_lambda = rel(lambda_choice(p), 1.0 / 16.0);
  const double e_rate = rel(rate(p), 0.25);
  const double e_alpha04 = rel(alpha_bound(p), 0.4);
  p.r = 0.75;
  const double e_alpha05 = rel(alpha_bound(p), 0.5);
  bool decreasing = true;
  double prev = alpha_bound(p);
  for (double r : {1.0, 2.0, 10.0, 100.0, 1000.0}) {
    p.r = r;
    decreasing = decreasing && alpha_bound(p) < prev;
    prev = alpha_bound(p);
  }
  decreasing = decreasing && prev < 1e-3;

  double worst_trace = 0.0;
  for (Eigen::Index n : {16, 64, 128}) {
    const SpectralModel<SobolevMinKernel> model(kSob, uniform(n, 500 + static_cast<std::uint64_t>(n)));
    const std::vector<double> mu(model.eigenvalues().begin(), model.eigenvalues().end());
    const Matrix m = gram(kSob, model.points()).entries / (0.25 * static_cast<double>(n));
    for (double lambda : {1e-1, 1e-2, 1e-4}) {
      const double trace = (m + lambda * Matrix::Identity(n, n)).partialPivLu().solve(m).trace();
      worst_trace = std::max(worst_trace, std::abs(effective_dimension(SpectrumModel::empirical(mu), lambda).value - trace));
    }
  }
  bool bracket = true;
  const double beta = 4.0 / (std::numbers::pi * std::numbers::pi);
  for (double lambda : log_grid(1e-4, 1e-1, 31)) {
    const double v = effective_dimension(SpectrumModel::sobolev(), lambda).value;
    bracket = bracket && v >= 0.5 && v <= effective_dimension_upper_bound(beta, 2.0, 0.5, lambda);
  }
  const double worst_rel = std::max({e_lambda, e_rate, e_alpha04, e_alpha05});
  const bool ok = worst_rel <= 1e-12 && decreasing && worst_trace <= 1e-10 && bracket;
  return {ok, "formula_rel=" + fmt(worst_rel) + " alpha_decreasing=" + (decreasing ? "yes" : "no") +
                  " trace_gap=" + fmt(worst_trace) + " bracket=" + (bracket ? "yes" : "no")};
}

// ----------------------------------------------------------------------------- 8

std::optional<std::size_t> brute_force_stop(const std::vector<double>& err, double delta) {
  for (std::size_t k = 3; k <= err.size(); ++k) {
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 2; j < k; ++j) inf = std::min(inf, std::abs(err[j - 1] - err[j - 2]));
    if (std::abs(err[k - 1] - err[k - 2]) <= delta * inf) return k;
  }
  return std::nullopt;
}

Outcome adaptivity(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(3, 15);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> err(static_cast<std::size_t>(len(rng)));
    for (double& e : err) e = u(rng);
    const double delta = 0.05 + 0.9 * u(rng);
    if (stopping_index(err, delta) != brute_force_stop(err, delta)) ++mismatches;
  }

  // end to end: low smoothness, Tikhonov, n = 1024, lattice = the oracle grid
  ExperimentConfig c;
  c.target = TargetFunction::quadratic_bump();
  c.filter = FilterSpec::tikhonov();
  c.n = 1024;
  c.sigma = 0.005;
  c.runs = 30;
  c.workers = ctx.workers;
  const auto oracle = oracle_select(kSob, c);
  std::vector<double> lattice;
  for (const auto& p : oracle.grid) lattice.push_back(p.lambda);
  const auto oracle_index = static_cast<long>(oracle.best_index);

  const int seeds = 20;
  int within = 0;
  std::ostringstream trace_csv;
  trace_csv << "seed," << kAdaptTraceCsvHeader << '\n';
  std::ostringstream picks;
  for (int s = 0; s < seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(1000 + s);
    const auto data = gen_data(c.target, c.n, c.sigma, seed);
    AdaptOptions opts;
    opts.workers = resolve_workers(ctx.workers);
    const auto res = adapt(kSob, c.filter, data, lattice, opts, seed);
    const long idx = static_cast<long>(res.lambda_index);
    if (std::abs(idx - oracle_index) <= 1) ++within;
    picks << (s ? "," : "") << idx;
    for (const auto& row : res.trace)
      trace_csv << seed << ',' << row.k << ',' << row.m_k << ',' << fmt(row.lambda_hat) << ',' << fmt(row.err) << ','
                << (std::isnan(row.delta_k) ? "" : fmt(row.delta_k)) << '\n';
  }
  ctx.adapt_csv = trace_csv.str();
  write_file(ctx.out_dir / "adapt_traces.csv", trace_csv.str());
  const double share = static_cast<double>(within) / seeds;
  std::ostringstream d;
  d << "stopping-rule mismatches=" << mismatches << "/1000; oracle lambda=" << fmt(oracle.best.lambda)
    << " (index " << oracle_index << "); picks=" << picks.str() << "; within one step: " << within << "/" << seeds;
  bool ok = mismatches == 0;
  if (share >= 0.6) {
    d << " (>= 60%)";
  } else if (share >= 0.4) {
    d << " (soft band 40-60%: reported, not asserted)";
  } else {
    d << " (< 40%)";
    ok = false;
  }
  d << " time=" << fmt(seconds_since(t0)) << "s";
  return {ok, d.str()};
}

// ----------------------------------------------------------------------------- 9

Outcome determinism(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream d;
  bool ok = true;
  // rerun the plateau sweep with a different worker count
  if (!ctx.plateau_csv.empty()) {
    const std::size_t other = resolve_workers(ctx.workers) == 1 ? 4 : 1;
    std::ostringstream again;
    write_runs_csv(again, plateau_sweep(other).records);
    const bool same = again.str() == ctx.plateau_csv;
    ok = ok && same;
    d << "plateau sweep workers " << resolve_workers(ctx.workers) << " vs " << other << ": "
      << (same ? "identical" : "DIFFERENT") << "; ";
  }
  // a smaller sweep at several worker counts, each twice
  auto small = [](std::size_t workers) {
    ExperimentConfig c;
    c.n = 600;
    c.runs = 8;
    c.workers = workers;
    std::ostringstream os;
    write_runs_csv(os, sweep_alpha(kSob, c, {0.0, 0.3, 0.6}).records);
    return os.str();
  };
  const std::string ref = small(1);
  for (std::size_t w : {1, 2, 3, 8}) {
    const bool same = small(w) == ref;
    ok = ok && same;
    d << "small sweep workers=" << w << ": " << (same ? "identical" : "DIFFERENT") << "; ";
  }
  // adaptive traces: workers only parallelize block fits
  {
    const auto data = gen_data(TargetFunction::quadratic_bump(), 500, 0.005, 3);
    auto trace = [&](std::size_t workers) {
      AdaptOptions opts;
      opts.workers = workers;
      const auto res = adapt(kSob, FilterSpec::tikhonov(), data, log_grid(1e-6, 1.0, 20), opts, 3);
      std::ostringstream os;
      for (const auto& row : res.trace) os << row.k << ',' << row.m_k << ',' << fmt(row.lambda_hat) << ',' << fmt(row.err) << '\n';
      return os.str();
    };
    const bool same = trace(1) == trace(4);
    ok = ok && same;
    d << "adapt trace workers 1 vs 4: " << (same ? "identical" : "DIFFERENT") << "; ";
  }
  d << "time=" << fmt(seconds_since(t0)) << "s";
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  std::string out = "acceptance_output";
  std::vector<int> only;
  std::size_t workers = 0;
  app.add_option("--out", out, "directory for supporting CSVs");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--workers", workers, "worker threads (0 = all cores)");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.out_dir = out;
  ctx.workers = workers;
  std::filesystem::create_directories(ctx.out_dir);

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"filter axioms", filter_axioms},
      {"oracle equivalences", oracle_equivalences},
      {"distribution identities", distribution_identities},
      {"rate reproduction", rate_reproduction},
      {"alpha plateau", alpha_plateau},
      {"smoothness reports", smoothness_reports},
      {"theory formulas", theory_formulas},
      {"adaptivity", adaptivity},
      {"determinism", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
