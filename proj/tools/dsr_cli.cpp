// Command-line front end: theory tables, smoothness reports, Monte-Carlo runs
// and the hold-out adaptive procedure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsr/dsr.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

/// Flags shared by the experiment subcommands. Every flag is forwarded to the
/// config parser so the command line and config files accept the same values.
struct ExperimentFlags {
  std::string config_path;
  std::vector<std::string> settings;
  std::map<std::string, std::string> direct;
  std::string out_path, summary_path;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "config file (key = value lines, optional [sections])")
        ->check(CLI::ExistingFile);
    app->add_option("--set", settings, "extra key=value setting, applied after the config file");
    for (const char* key : {"target", "filter", "nu", "n", "alpha", "m", "sigma", "lambda", "k", "runs", "seed",
                            "workers", "lambda_min", "lambda_max", "grid_points", "k_max", "quad_nodes", "r", "b",
                            "R", "timing"}) {
      const std::string flag = std::string("--") + key;
      app->add_option(flag, direct[key], std::string("config key '") + key + "'");
    }
    app->add_option("-o,--out", out_path, "runs CSV (default: stdout)");
    app->add_option("--summary", summary_path, "summary CSV (default: stderr)");
  }

  dsr::ExperimentConfig build(CLI::App* app) const {
    dsr::ExperimentConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw dsr::InputError("cannot open config file " + config_path);
      dsr::load_config(in, c);
    }
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw dsr::InputError("--set expects key=value, got '" + s + "'");
      dsr::apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
    }
    // `filter` before `nu`, so `--filter nu-method --nu 2` keeps nu = 2
    for (const char* key : {"filter", "nu"})
      if (app->count(std::string("--") + key) > 0) dsr::apply_setting(c, key, direct.at(key));
    for (const auto& [key, value] : direct) {
      if (key == "filter" || key == "nu") continue;
      if (app->count("--" + key) > 0) dsr::apply_setting(c, key, value);
    }
    c.validate();
    return c;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw dsr::InputError("cannot write " + path);
  return out;
}

template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  auto out = open_output(path);
  write(out);
}

std::vector<double> parse_lattice(const std::string& text) {
  // "lo:hi:count" (log-spaced) or a comma-separated list
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string a, b, c;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, c);
    try {
      return dsr::log_grid(std::stod(a), std::stod(b), std::stoi(c));
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const dsr::InputError*>(&e)) throw;
      throw dsr::InputError("bad --lattice '" + text + "'");
    }
  }
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw dsr::InputError("bad --lattice entry '" + item + "'");
    }
  }
  return out;
}

void print_parameter(std::ostream& os, const dsr::FilterSpec& f, const dsr::LambdaParam& p) {
  os << "# filter=" << f.name() << " lambda=" << dsr::format_number(p.lambda);
  if (f.is_iterative()) os << " k=" << p.k;
  os << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed spectral regularization for kernel regression"};
  app.require_subcommand(1);

  // theory
  auto* theory = app.add_subcommand("theory", "parameter-choice table");
  std::vector<double> th_n{1024}, th_m{1}, th_r{0.5}, th_s{0.0};
  double th_b = 2.0, th_beta = 4.0 / (M_PI * M_PI), th_sigma = 1.0, th_R = 1.0;
  std::string th_out;
  theory->add_option("--n", th_n, "sample sizes")->delimiter(',');
  theory->add_option("--m", th_m, "block counts")->delimiter(',');
  theory->add_option("--r", th_r, "source exponents")->delimiter(',');
  theory->add_option("--s", th_s, "norm exponents in [0, 1/2]")->delimiter(',');
  theory->add_option("--b", th_b, "eigenvalue decay exponent");
  theory->add_option("--beta", th_beta, "eigenvalue constant");
  theory->add_option("--sigma", th_sigma, "noise level");
  theory->add_option("--R", th_R, "source radius");
  theory->add_option("-o,--out", th_out, "CSV file (default: stdout)");

  // smoothness
  auto* smooth = app.add_subcommand("smoothness", "Fourier source-condition report");
  std::string sm_target = "quadratic-bump", sm_method = "auto", sm_csv;
  int sm_max_j = 200;
  smooth->add_option("--target", sm_target, "quadratic-bump | scaled-sine | zero");
  smooth->add_option("--max-j", sm_max_j, "number of coefficients");
  smooth->add_option("--method", sm_method, "auto | analytic | quadrature");
  smooth->add_option("--csv", sm_csv, "write (j, c_j) here instead of stdout");

  // experiments
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo runs for one config");
  ExperimentFlags sim_flags;
  sim_flags.attach(sim);

  auto* swa = app.add_subcommand("sweep-alpha", "errors over alpha = log m / log n");
  ExperimentFlags swa_flags;
  swa_flags.attach(swa);
  std::vector<double> swa_alphas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  swa->add_option("--alphas", swa_alphas, "alpha grid")->delimiter(',');

  auto* swn = app.add_subcommand("sweep-n", "errors over sample sizes");
  ExperimentFlags swn_flags;
  swn_flags.attach(swn);
  std::vector<std::size_t> swn_ns{512, 1024, 2048, 4096};
  std::vector<double> swn_alphas{0.0};
  swn->add_option("--ns", swn_ns, "sample sizes")->delimiter(',');
  swn->add_option("--alphas", swn_alphas, "alpha values (0 is always included)")->delimiter(',');

  auto* orc = app.add_subcommand("oracle", "oracle parameter over the grid");
  ExperimentFlags orc_flags;
  orc_flags.attach(orc);

  // adapt
  auto* ad = app.add_subcommand("adapt", "hold-out adaptive choice of m and lambda");
  ExperimentFlags ad_flags;
  ad_flags.attach(ad);
  double ad_delta = 0.5, ad_split = 0.8;
  std::string ad_lattice = "1e-6:1:40";
  std::vector<std::size_t> ad_m_seq;
  bool ad_refit = false;
  ad->add_option("--delta", ad_delta, "stopping threshold in (0, 1)");
  ad->add_option("--lattice", ad_lattice, "lambda lattice: lo:hi:count (log-spaced) or a comma list");
  ad->add_option("--split", ad_split, "training fraction");
  ad->add_option("--m-sequence", ad_m_seq, "strictly decreasing block counts")->delimiter(',');
  ad->add_flag("--refit-all", ad_refit, "refit the final estimator on all data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const dsr::SobolevMinKernel kernel;
  try {
    if (*theory) {
      emit(th_out, std::cout, [&](std::ostream& os) {
        os << dsr::kTheoryCsvHeader << '\n';
        for (double n : th_n)
          for (double m : th_m)
            for (double r : th_r)
              for (double s : th_s) {
                dsr::TheoryParams p;
                p.n = n, p.r = r, p.s = s, p.b = th_b, p.beta = th_beta, p.sigma = th_sigma, p.R = th_R;
                const auto row = dsr::theory_row(p, m);
                using dsr::format_number;
                os << format_number(row.n) << ',' << format_number(row.m) << ',' << format_number(row.b) << ','
                   << format_number(row.r) << ',' << format_number(row.s) << ',' << format_number(row.sigma) << ','
                   << format_number(row.R) << ',' << format_number(row.lambda_n) << ',' << format_number(row.a_n)
                   << ',' << format_number(row.alpha_max) << ',' << format_number(row.n_lambda) << ','
                   << format_number(row.b_block) << '\n';
              }
      });
    } else if (*smooth) {
      const auto target = dsr::parse_target(sm_target);
      dsr::CoefficientMethod method = dsr::CoefficientMethod::Auto;
      if (sm_method == "analytic") method = dsr::CoefficientMethod::Analytic;
      else if (sm_method == "quadrature") method = dsr::CoefficientMethod::Quadrature;
      else if (sm_method != "auto") throw dsr::InputError("unknown --method '" + sm_method + "'");
      const auto coeffs = dsr::fourier_coefficients(target, sm_max_j, method);
      const auto rep = dsr::max_smoothness(coeffs);
      double parseval = 0.0;
      for (double c : coeffs) parseval += c * c;
      std::cout << "# target=" << target.name << " J=" << sm_max_j << '\n'
                << "# nonzero=" << rep.nonzero << " odd_only=" << (rep.odd_only ? "yes" : "no") << '\n'
                << "# decay_exponent=" << dsr::format_number(rep.decay_exponent)
                << " fit_residual=" << dsr::format_number(rep.fit_residual) << '\n'
                << "# r_max=" << dsr::format_number(rep.r_max) << '\n'
                << "# sum_c2=" << dsr::format_number(parseval);
      if (target.rkhs_norm_sq) std::cout << " norm_sq=" << dsr::format_number(*target.rkhs_norm_sq);
      std::cout << '\n' << "# verdict: " << rep.verdict << '\n';
      emit(sm_csv, std::cout, [&](std::ostream& os) {
        os << "j,c_j,c_j_alt\n";
        for (std::size_t j = 0; j < coeffs.size(); ++j)
          os << j + 1 << ',' << dsr::format_number(coeffs[j]) << ',' << dsr::format_number(rep.alternate_convention[j])
             << '\n';
      });
    } else if (*sim) {
      const auto c = sim_flags.build(sim);
      const auto p = dsr::resolve_parameter(kernel, c);
      dsr::SweepResult res;
      res.records = dsr::simulate(kernel, c, p);
      res.summary.push_back(dsr::summarize(res.records));
      res.parameters.push_back(p);
      emit(sim_flags.out_path, std::cout, [&](std::ostream& os) { dsr::write_runs_csv(os, res.records); });
      emit(sim_flags.summary_path, std::cerr, [&](std::ostream& os) { dsr::write_summary(os, res); });
    } else if (*swa) {
      const auto c = swa_flags.build(swa);
      const auto res = dsr::sweep_alpha(kernel, c, swa_alphas);
      emit(swa_flags.out_path, std::cout, [&](std::ostream& os) { dsr::write_runs_csv(os, res.records); });
      emit(swa_flags.summary_path, std::cerr, [&](std::ostream& os) { dsr::write_summary(os, res); });
    } else if (*swn) {
      const auto c = swn_flags.build(swn);
      const auto res = dsr::sweep_n(kernel, c, swn_ns, swn_alphas);
      emit(swn_flags.out_path, std::cout, [&](std::ostream& os) { dsr::write_runs_csv(os, res.records); });
      emit(swn_flags.summary_path, std::cerr, [&](std::ostream& os) { dsr::write_summary(os, res); });
    } else if (*orc) {
      const auto c = orc_flags.build(orc);
      const auto res = dsr::oracle_select(kernel, c);
      emit(orc_flags.out_path, std::cout, [&](std::ostream& os) {
        print_parameter(os, c.filter, res.best);
        os << "lambda,k,rms_hk_error\n";
        for (std::size_t i = 0; i < res.grid.size(); ++i)
          os << dsr::format_number(res.grid[i].lambda) << ',' << res.grid[i].k << ','
             << dsr::format_number(res.rms_error[i]) << '\n';
      });
    } else if (*ad) {
      const auto c = ad_flags.build(ad);
      const auto lattice = parse_lattice(ad_lattice);
      const auto data = dsr::gen_data(c.target, c.n, c.sigma, c.seed);
      dsr::AdaptOptions opts;
      opts.delta = ad_delta;
      opts.train_fraction = ad_split;
      opts.m_sequence = ad_m_seq;
      opts.refit_on_all = ad_refit;
      opts.workers = dsr::resolve_workers(c.workers);
      const auto res = dsr::adapt(kernel, c.filter, data, lattice, opts, c.seed);
      emit(ad_flags.out_path, std::cout, [&](std::ostream& os) {
        os << dsr::kAdaptTraceCsvHeader << '\n';
        for (const auto& row : res.trace) {
          os << row.k << ',' << row.m_k << ',' << dsr::format_number(row.lambda_hat) << ','
             << dsr::format_number(row.err) << ',';
          if (!std::isnan(row.delta_k)) os << dsr::format_number(row.delta_k);
          os << '\n';
        }
      });
      std::ostream& os = std::cerr;
      os << "# k_star=" << res.k_star << " m=" << res.trace[res.k_star - 1].m_k
         << " lambda_hat=" << dsr::format_number(res.lambda_hat) << " triggered=" << (res.triggered ? "yes" : "no")
         << '\n';
      if (c.target.rkhs_norm_sq)
        os << "# hk_error=" << dsr::format_number(dsr::hk_error(res.estimator.combined(), c.target)) << '\n';
    }
  } catch (const dsr::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const dsr::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
