// dcflow: command-line driver for the experiment harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcflow/experiments.hpp"

using namespace dcflow;
using experiments::ExperimentConfig;

namespace {

constexpr int kExitFailedRow = 2;

struct Flags {
  std::string example = "1";
  std::vector<int> levels{16};
  std::optional<double> alpha, beta_frac, beta1, beta2;
  std::string accel = "nesterov";
  double gamma = 0.5;
  double eps0 = 1.0;
  double tol = 1e-6;
  int max_iter = 20;
  std::string out = "out";
  std::string config;
  bool no_compare = false;
  bool plain_baseline = false;
  std::size_t toy_n = 64;
  int subsolver_max_iter = 100;
  std::vector<double> fractions{0.0, 0.1, 0.2, 0.5};
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--example", f.example, "1, 2 or toy");
  app->add_option("--levels", f.levels, "mesh levels m (cells per side)")->delimiter(',');
  app->add_option("--alpha", f.alpha, "control cost");
  app->add_option("--beta-frac", f.beta_frac, "beta as a fraction of beta_c");
  app->add_option("--beta1", f.beta1, "lower control bound");
  app->add_option("--beta2", f.beta2, "upper control bound");
  app->add_option("--accel", f.accel, "none, nesterov or heavyball");
  app->add_option("--gamma", f.gamma, "eps shrink factor");
  app->add_option("--eps0", f.eps0, "initial eps");
  app->add_option("--tol", f.tol, "relative-change stopping tolerance");
  app->add_option("--max-iter", f.max_iter, "outer iteration cap");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--config", f.config, "JSON file; its keys override flags");
  app->add_option("--toy-n", f.toy_n, "unknowns of the toy problem");
  app->add_option("--subsolver-max-iter", f.subsolver_max_iter, "active-set iteration cap");
}

// JSON keys use the flag names with underscores: beta_frac, max_iter, ...
void apply_config_file(Flags& f) {
  if (f.config.empty()) return;
  std::ifstream in(f.config);
  if (!in) throw std::runtime_error("cannot read config '" + f.config + "'");
  const nlohmann::json j = nlohmann::json::parse(in);
  if (!j.is_object()) throw std::runtime_error("config '" + f.config + "' is not an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "example") f.example = v.is_string() ? v.get<std::string>() : v.dump();
    else if (key == "levels") f.levels = v.get<std::vector<int>>();
    else if (key == "alpha") f.alpha = v.get<double>();
    else if (key == "beta_frac") f.beta_frac = v.get<double>();
    else if (key == "beta1") f.beta1 = v.get<double>();
    else if (key == "beta2") f.beta2 = v.get<double>();
    else if (key == "accel") f.accel = v.get<std::string>();
    else if (key == "gamma") f.gamma = v.get<double>();
    else if (key == "eps0") f.eps0 = v.get<double>();
    else if (key == "tol") f.tol = v.get<double>();
    else if (key == "max_iter") f.max_iter = v.get<int>();
    else if (key == "out") f.out = v.get<std::string>();
    else if (key == "compare") f.no_compare = !v.get<bool>();
    else if (key == "plain_baseline") f.plain_baseline = v.get<bool>();
    else if (key == "toy_n") f.toy_n = v.get<std::size_t>();
    else if (key == "subsolver_max_iter") f.subsolver_max_iter = v.get<int>();
    else if (key == "fractions") f.fractions = v.get<std::vector<double>>();
    else throw std::runtime_error("config: unknown key '" + key + "'");
  }
}

ExperimentConfig to_config(const Flags& f) {
  ExperimentConfig c;
  c.example = experiments::parse_example(f.example);
  c.levels = f.levels;
  c.alpha = f.alpha;
  c.beta_fraction = f.beta_frac;
  c.beta1 = f.beta1;
  c.beta2 = f.beta2;
  c.accel = parse_accel_mode(f.accel);
  c.gamma = f.gamma;
  c.eps0 = f.eps0;
  c.stop.rel_tol = f.tol;
  c.stop.max_iterations = f.max_iter;
  c.compare = !f.no_compare;
  c.baseline_adaptive = !f.plain_baseline;
  c.toy_n = f.toy_n;
  c.subsolver_max_iterations = f.subsolver_max_iter;
  c.out_dir = f.out;
  c.validate();
  return c;
}

int cmd_run(const ExperimentConfig& cfg) {
  const experiments::RunReport report = experiments::run_example(cfg);
  experiments::emit_report(report, cfg.out_dir);
  experiments::write_table_csv(report, std::cout);
  for (const auto& r : report.rows) {
    if (r.failed) std::cerr << "failed: " << r.method << " m=" << r.m << ": " << r.error << '\n';
  }
  return report.any_failed() ? kExitFailedRow : 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& fractions) {
  const experiments::SweepReport report = experiments::beta_sweep(cfg, fractions);
  experiments::emit_report(report, cfg.out_dir);
  std::printf("fraction,beta,support_fraction,f,iters\n");
  for (const auto& r : report.rows) {
    std::printf("%g,%.6g,%.6f,%.10g,%d\n", r.fraction, r.beta, r.support_fraction, r.final_f,
                r.iterations);
    if (r.failed) std::fprintf(stderr, "failed: fraction %g: %s\n", r.fraction, r.error.c_str());
  }
  return report.any_failed() ? kExitFailedRow : 0;
}

int cmd_refine(const ExperimentConfig& cfg) {
  const experiments::RefinementReport report = experiments::refinement_study(cfg, cfg.levels);
  experiments::emit_report(report, cfg.out_dir);
  std::printf("m,h,linf_error,l2_error,order_linf,order_l2\n");
  for (const auto& r : report.rows) {
    std::printf("%d,%g,%.6e,%.6e,%.3f,%.3f\n", r.m, r.h, r.linf_error, r.l2_error, r.order_linf,
                r.order_l2);
  }
  std::printf("reference m=%d, fitted order linf %.3f, l2 %.3f\n", report.reference_m,
              report.fitted_order_linf, report.fitted_order_l2);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact adaptive DCA for sparse elliptic optimal control"};
  app.require_subcommand(1);

  Flags run_flags, sweep_flags, refine_flags;
  refine_flags.levels = {8, 16, 32, 64, 128};
  refine_flags.example = "1";

  CLI::App* run = app.add_subcommand("run", "solve an example on one or more meshes");
  add_common(run, run_flags);
  run->add_flag("--no-compare", run_flags.no_compare, "skip the plain DCA baseline");
  run->add_flag("--plain-baseline", run_flags.plain_baseline,
                "run the baseline without the adaptive eps loop");

  CLI::App* sweep = app.add_subcommand("sweep-beta", "support of the control against beta");
  add_common(sweep, sweep_flags);
  sweep->add_option("--fractions", sweep_flags.fractions, "fractions of beta_c, ascending")
      ->delimiter(',');

  CLI::App* refine = app.add_subcommand("refine", "mesh-refinement rate of one subproblem");
  add_common(refine, refine_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      apply_config_file(run_flags);
      return cmd_run(to_config(run_flags));
    }
    if (sweep->parsed()) {
      apply_config_file(sweep_flags);
      return cmd_sweep(to_config(sweep_flags), sweep_flags.fractions);
    }
    apply_config_file(refine_flags);
    ExperimentConfig cfg = to_config(refine_flags);
    return cmd_refine(cfg);
  } catch (const std::exception& e) {
    std::cerr << "dcflow: " << e.what() << '\n';
    return 1;
  }
}
