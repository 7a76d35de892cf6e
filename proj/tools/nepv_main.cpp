// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness for the nepv shared library: single SCF runs with
// history capture, convergence-rate reports, and parameter sweeps emitting
// plot-ready CSV/JSON.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nepv/nepv.h"

namespace {

using nlohmann::json;

struct ProblemConfig {
  std::string problem = "ks";
  int n = 10;
  int k = 2;
  double alpha = 0.0;
  int grid_n = 10;
  double ell = 1.0;
  double omega = 0.85;
  double beta = 0.0;
  std::string potential = "radial";
};

struct RunConfig {
  double sigma = 0.0;
  double tol = 1e-13;
  int max_iter = 5000;
  int window = 30;
  unsigned long long seed = 0;
  std::string out;
  std::string format = "csv";
};

double radial_potential(double x, double y, void*) { return 0.5 * (x * x + y * y); }
double nonradial_potential(double x, double y, void*) { return 0.5 * (x * x + 100.0 * y * y); }

struct ProblemDeleter {
  void operator()(nepv_problem* p) const { nepv_problem_free(p); }
};
struct CertDeleter {
  void operator()(nepv_certificate* c) const { nepv_certificate_free(c); }
};
struct HistoryDeleter {
  void operator()(nepv_history* h) const { nepv_history_free(h); }
};

using ProblemPtr = std::unique_ptr<nepv_problem, ProblemDeleter>;
using CertPtr = std::unique_ptr<nepv_certificate, CertDeleter>;
using HistoryPtr = std::unique_ptr<nepv_history, HistoryDeleter>;

[[noreturn]] void fail(const std::string& context, nepv_error code) {
  std::cerr << "error: " << context << ": " << nepv_error_name(code);
  const std::string detail = nepv_last_error();
  if (!detail.empty()) std::cerr << " (" << detail << ")";
  std::cerr << "\n";
  std::exit(1);
}

void check(nepv_error code, const std::string& context) {
  if (code != NEPV_OK) fail(context, code);
}

ProblemPtr make_problem(const ProblemConfig& cfg) {
  nepv_problem* raw = nullptr;
  if (cfg.problem == "ks") {
    check(nepv_problem_kohn_sham(cfg.n, cfg.k, cfg.alpha, &raw), "kohn-sham setup");
  } else if (cfg.problem == "gpe") {
    auto* potential = cfg.potential == "radial" ? radial_potential : nonradial_potential;
    check(nepv_problem_gpe(cfg.grid_n, cfg.ell, cfg.omega, cfg.beta, potential, nullptr, &raw),
          "gpe setup");
  } else {
    std::cerr << "error: unknown problem '" << cfg.problem << "'\n";
    std::exit(1);
  }
  return ProblemPtr(raw);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    std::exit(1);
  }
  out << content;
}

void add_problem_flags(CLI::App* cmd, ProblemConfig& cfg) {
  cmd->add_option("--problem", cfg.problem, "Problem family: ks | gpe")
      ->check(CLI::IsMember({"ks", "gpe"}));
  cmd->add_option("--n", cfg.n, "Kohn-Sham ambient dimension");
  cmd->add_option("--k", cfg.k, "Kohn-Sham subspace dimension");
  cmd->add_option("--alpha", cfg.alpha, "Kohn-Sham coupling strength");
  cmd->add_option("--grid-n", cfg.grid_n, "GPE grid points per axis");
  cmd->add_option("--ell", cfg.ell, "GPE domain half width");
  cmd->add_option("--omega", cfg.omega, "GPE rotation speed");
  cmd->add_option("--beta", cfg.beta, "GPE coupling strength");
  cmd->add_option("--potential", cfg.potential, "GPE potential: radial | nonradial")
      ->check(CLI::IsMember({"radial", "nonradial"}));
}

void add_run_flags(CLI::App* cmd, RunConfig& run, double default_tol) {
  run.tol = default_tol;
  cmd->add_option("--sigma", run.sigma, "Level shift (0 = plain SCF)");
  cmd->add_option("--tol", run.tol, "Residual stopping tolerance");
  cmd->add_option("--max-iter", run.max_iter, "Iteration cap");
  cmd->add_option("--window", run.window, "Observed-rate fit window");
  cmd->add_option("--seed", run.seed, "Seed for randomized starts");
  cmd->add_option("--out", run.out, "Output path (stdout when omitted)");
  cmd->add_option("--format", run.format, "Output format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
}

// --- solve ----------------------------------------------------------------

int cmd_solve(const ProblemConfig& pcfg, const RunConfig& run, bool certify) {
  ProblemPtr problem = make_problem(pcfg);
  int n = 0, k = 0;
  nepv_problem_dims(problem.get(), &n, &k);

  nepv_scf_options opts;
  nepv_scf_options_init(&opts);
  opts.max_iter = run.max_iter;
  opts.tol_residual = run.tol;
  opts.sigma = run.sigma;

  nepv_history* raw = nullptr;
  check(nepv_scf_run(problem.get(), nullptr, run.seed, &opts, &raw), "scf run");
  HistoryPtr history(raw);

  CertPtr cert;
  if (certify && nepv_history_status(history.get()) == NEPV_SCF_CONVERGED) {
    std::vector<nepv_complex> v(static_cast<std::size_t>(n) * k);
    check(nepv_history_final_v(history.get(), v.data()), "final iterate");
    nepv_certificate* craw = nullptr;
    check(nepv_certify(problem.get(), v.data(), std::max(run.tol * 10, 1e-12), &craw),
          "certify");
    cert.reset(craw);
    opts.record_subspace_errors = 1;
    opts.reference = cert.get();
    nepv_history* rerun = nullptr;
    check(nepv_scf_run(problem.get(), nullptr, run.seed, &opts, &rerun), "recording rerun");
    history.reset(rerun);
  }

  const int len = nepv_history_length(history.get());
  const nepv_scf_status status = nepv_history_status(history.get());

  double observed = std::numeric_limits<double>::quiet_NaN();
  bool has_observed = false;
  {
    int window = run.window;
    if (len < window + 1) window = len - 11;
    double rate = 0;
    if (window >= 1 &&
        nepv_observed_rate(history.get(), window, &rate) == NEPV_OK) {
      observed = rate;
      has_observed = true;
    }
  }

  std::ostringstream body;
  if (run.format == "csv") {
    body << "iter,residual,gap,subspace_error\n";
    for (int i = 0; i < len; ++i) {
      double err = 0;
      const bool has_err = nepv_history_subspace_error(history.get(), i, &err) != 0;
      body << i << ',' << fmt17(nepv_history_residual(history.get(), i)) << ','
           << fmt17(nepv_history_gap(history.get(), i)) << ','
           << (has_err ? fmt17(err) : "") << '\n';
    }
  } else {
    json rows = json::array();
    for (int i = 0; i < len; ++i) {
      double err = 0;
      const bool has_err = nepv_history_subspace_error(history.get(), i, &err) != 0;
      json row = {{"iter", i},
                  {"residual", nepv_history_residual(history.get(), i)},
                  {"gap", nepv_history_gap(history.get(), i)}};
      row["subspace_error"] = has_err ? json(err) : json(nullptr);
      rows.push_back(std::move(row));
    }
    json doc = {{"problem", nepv_problem_label(problem.get())},
                {"sigma", run.sigma},
                {"status", nepv_scf_status_name(status)},
                {"iterations", nepv_history_iterations(history.get())},
                {"observed_rate", has_observed ? json(observed) : json(nullptr)},
                {"history", std::move(rows)}};
    body << doc.dump(2) << '\n';
  }
  write_output(run.out, body.str());

  std::cerr << "status: " << nepv_scf_status_name(status)
            << "  iterations: " << nepv_history_iterations(history.get())
            << "  final residual: " << fmt17(nepv_history_residual(history.get(), len - 1))
            << "  observed rate: " << (has_observed ? fmt17(observed) : "n/a") << "\n";

  switch (status) {
    case NEPV_SCF_CONVERGED: return 0;
    case NEPV_SCF_DIVERGED: return 2;
    case NEPV_SCF_MAX_ITER: return 3;
    case NEPV_SCF_GAP_COLLAPSE: return 4;
  }
  return 1;
}

// --- rates ------------------------------------------------------------------

json report_to_json(const nepv_rate_report& r) {
  json doc = {{"eta_sup_infty", r.eta_sup_infty},
              {"eta_sup", r.eta_sup},
              {"eta_czbl", r.eta_czbl},
              {"observed", r.has_observed ? json(r.observed) : json(nullptr)},
              {"delta_star", r.delta_star},
              {"s_star", r.s_star},
              {"mu_min", r.mu_min},
              {"mu_max", r.mu_max},
              {"sigma_used_for_truth", r.sigma_used_for_truth},
              {"plain_converged", r.plain_converged != 0},
              {"normality_defect", r.normality_defect}};
  return doc;
}

int cmd_rates(const ProblemConfig& pcfg, const RunConfig& run) {
  ProblemPtr problem = make_problem(pcfg);
  nepv_rate_report report;
  check(nepv_compute_rates(problem.get(), run.sigma, run.tol, run.max_iter, run.window,
                           run.seed, &report),
        "rates");
  json doc = report_to_json(report);
  doc["problem"] = nepv_problem_label(problem.get());
  doc["sigma"] = run.sigma;
  write_output(run.out, doc.dump(2) + "\n");
  return 0;
}

// --- sweep ------------------------------------------------------------------

struct SweepRow {
  double value = 0.0;
  nepv_rate_report report{};
  bool ok = false;
  std::string status;
};

std::string row_status(const SweepRow& row) {
  if (!row.ok) return row.status;
  return row.report.has_observed ? "ok" : "no-observed";
}

int cmd_sweep(const ProblemConfig& pcfg, const RunConfig& run, const std::string& param,
              double from, double to, int steps) {
  if (steps < 1) {
    std::cerr << "error: --steps must be >= 1\n";
    return 1;
  }
  if (param != "alpha" && param != "beta" && param != "sigma") {
    std::cerr << "error: --sweep-param must be alpha, beta or sigma\n";
    return 1;
  }

  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    grid[static_cast<std::size_t>(i)] =
        steps == 1 ? from : from + (to - from) * static_cast<double>(i) / (steps - 1);
  }

  std::vector<SweepRow> rows(grid.size());
  json markers;

  if (param == "sigma") {
    // One ground truth serves every shift.
    ProblemPtr problem = make_problem(pcfg);
    nepv_certificate* craw = nullptr;
    double sigma_used = 0;
    int plain = 0;
    check(nepv_ground_truth(problem.get(), 1e-14, run.max_iter, run.seed, &craw, &sigma_used,
                            &plain),
          "ground truth");
    CertPtr cert(craw);

    double mu_min = 0, mu_max = 0;
    check(nepv_q_extremes(problem.get(), cert.get(), &mu_min, &mu_max), "q extremes");
    double sigma_lower = 0;
    check(nepv_sigma_lower_bound(mu_max, nepv_certificate_delta(cert.get()), &sigma_lower),
          "sigma lower bound");
    markers["sigma_lower"] = sigma_lower;
    markers["sigma_apriori"] = nepv_problem_apriori_sigma(problem.get());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) {
        SweepRow& row = rows[i];
        row.value = grid[i];
        const nepv_error code = nepv_rates_with_certificate(
            problem.get(), cert.get(), grid[i], run.tol, run.max_iter, run.window, run.seed,
            /*with_observed=*/1, &row.report);
        if (code == NEPV_OK) {
          row.ok = true;
          row.report.sigma_used_for_truth = sigma_used;
          row.report.plain_converged = plain;
        } else {
          row.status = std::string("error:") + nepv_error_name(code);
        }
      }
    };
    const unsigned pool =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(grid.size())));
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    double best = std::numeric_limits<double>::infinity();
    double best_sigma = std::numeric_limits<double>::quiet_NaN();
    for (const SweepRow& row : rows) {
      if (row.ok && row.report.eta_sup_infty < best) {
        best = row.report.eta_sup_infty;
        best_sigma = row.value;
      }
    }
    markers["rho_argmin"] = best_sigma;
    markers["rho_min"] = best;
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) {
        SweepRow& row = rows[i];
        row.value = grid[i];
        ProblemConfig point = pcfg;
        if (param == "alpha") {
          point.alpha = grid[i];
        } else {
          point.beta = grid[i];
        }
        ProblemPtr problem = make_problem(point);
        const nepv_error code = nepv_compute_rates(problem.get(), run.sigma, run.tol,
                                                   run.max_iter, run.window, run.seed,
                                                   &row.report);
        if (code == NEPV_OK) {
          row.ok = true;
        } else {
          row.status = std::string("error:") + nepv_error_name(code);
        }
      }
    };
    const unsigned pool =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(grid.size())));
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::ostringstream body;
  if (run.format == "csv") {
    for (auto it = markers.begin(); it != markers.end(); ++it) {
      body << "# " << it.key() << '=' << fmt17(it.value().get<double>()) << '\n';
    }
    body << "param_value,eta_sup_infty,eta_sup,eta_czbl,observed,rho_sigma_bound,status\n";
    for (const SweepRow& row : rows) {
      body << fmt17(row.value) << ',';
      if (row.ok) {
        body << fmt17(row.report.eta_sup_infty) << ',' << fmt17(row.report.eta_sup) << ','
             << fmt17(row.report.eta_czbl) << ','
             << (row.report.has_observed ? fmt17(row.report.observed) : "") << ','
             << (std::isnan(row.report.rho_sigma_bound) ? ""
                                                        : fmt17(row.report.rho_sigma_bound));
      } else {
        body << ",,,,";
      }
      body << ',' << row_status(row) << '\n';
    }
  } else {
    json rows_json = json::array();
    for (const SweepRow& row : rows) {
      json entry = {{"param_value", row.value}, {"status", row_status(row)}};
      if (row.ok) {
        entry["eta_sup_infty"] = row.report.eta_sup_infty;
        entry["eta_sup"] = row.report.eta_sup;
        entry["eta_czbl"] = row.report.eta_czbl;
        entry["observed"] = row.report.has_observed ? json(row.report.observed) : json(nullptr);
        entry["rho_sigma_bound"] = std::isnan(row.report.rho_sigma_bound)
                                       ? json(nullptr)
                                       : json(row.report.rho_sigma_bound);
      }
      rows_json.push_back(std::move(entry));
    }
    json doc = {{"param", param}, {"rows", std::move(rows_json)}};
    if (!markers.empty()) doc["markers"] = markers;
    body << doc.dump(2) << '\n';
  }
  write_output(run.out, body.str());
  if (!markers.empty()) {
    std::cerr << "markers: " << markers.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCF solver and convergence-rate analysis for nonlinear eigenvector problems"};
  app.require_subcommand(1);

  ProblemConfig solve_p, rates_p, sweep_p;
  RunConfig solve_r, rates_r, sweep_r;
  bool solve_certify = false;
  std::string sweep_param = "alpha";
  double sweep_from = 0.0, sweep_to = 1.0;
  int sweep_steps = 41;

  CLI::App* solve = app.add_subcommand("solve", "Run one SCF iteration and dump its history");
  add_problem_flags(solve, solve_p);
  add_run_flags(solve, solve_r, 1e-14);
  solve->add_flag("--certify", solve_certify,
                  "Certify the solution and record subspace errors");

  CLI::App* rates = app.add_subcommand("rates", "Convergence-rate estimates for one configuration");
  add_problem_flags(rates, rates_p);
  add_run_flags(rates, rates_r, 1e-13);

  CLI::App* sweep = app.add_subcommand("sweep", "Rate estimates over a parameter grid");
  add_problem_flags(sweep, sweep_p);
  add_run_flags(sweep, sweep_r, 1e-13);
  sweep->add_option("--sweep-param", sweep_param, "Grid parameter: alpha | beta | sigma")
      ->check(CLI::IsMember({"alpha", "beta", "sigma"}));
  sweep->add_option("--from", sweep_from, "Grid start");
  sweep->add_option("--to", sweep_to, "Grid end");
  sweep->add_option("--steps", sweep_steps, "Number of grid points");

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return cmd_solve(solve_p, solve_r, solve_certify);
  if (rates->parsed()) return cmd_rates(rates_p, rates_r);
  return cmd_sweep(sweep_p, sweep_r, sweep_param, sweep_from, sweep_to, sweep_steps);
}
