#include "dcflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dcflow/subsolver.hpp"
#include "dcflow/toy.hpp"

namespace dcflow::experiments {

const char* const version = "dcflow 0.1.0";

namespace {

using json = nlohmann::json;
using fem::P0Field;
using fem::P1Field;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create directory '" + dir.string() + "': " + ec.message());
  }
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out = open_out(path);
  writer(out);
  close_out(out, path);
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["example"] = to_string(cfg.example);
  j["levels"] = cfg.levels;
  j["alpha"] = cfg.resolved_alpha();
  if (cfg.example != ExampleId::toy) {
    const pdeco::ProblemData data = cfg.data();
    j["beta_fraction"] = cfg.resolved_beta_fraction();
    j["beta1"] = data.beta1;
    j["beta2"] = data.beta2;
  }
  j["accel"] = to_string(cfg.accel);
  j["gamma"] = cfg.gamma;
  j["eps0"] = cfg.eps0;
  j["tol"] = cfg.stop.rel_tol;
  j["max_iter"] = cfg.stop.max_iterations;
  j["compare"] = cfg.compare;
  j["baseline_adaptive"] = cfg.baseline_adaptive;
  j["subsolver_max_iter"] = cfg.subsolver_max_iterations;
  if (cfg.example == ExampleId::toy) j["toy_n"] = cfg.toy_n;
  return j;
}

json manifest_base(const ExperimentConfig& cfg, const char* kind) {
  json j;
  j["kind"] = kind;
  j["version"] = version;
  j["config"] = config_json(cfg);
  return j;
}

struct MethodSpec {
  std::string name;
  AccelMode accel;
  bool adaptive;
};

std::vector<MethodSpec> methods(const ExperimentConfig& cfg) {
  std::vector<MethodSpec> out{{"iadca", cfg.accel, true}};
  if (cfg.compare) out.push_back({"dca", AccelMode::none, cfg.baseline_adaptive});
  return out;
}

IadcaOptions iadca_options(const ExperimentConfig& cfg, bool adaptive) {
  IadcaOptions o;
  o.gamma = cfg.gamma;
  o.eps0 = cfg.eps0;
  o.adaptive = adaptive;
  return o;
}

void fill_from_trace(RunRow& row, IterationTrace trace) {
  row.iterations = static_cast<int>(trace.records.size());
  row.final_f = trace.final_objective();
  row.stop_reason = to_string(trace.reason);
  row.descent_violations = verify_descent(trace).size();
  row.adaptive_violations = verify_adaptive(trace).size();
  row.trace = std::move(trace);
}

void mark_failed(RunRow& row, const std::string& what) {
  row.failed = true;
  row.error = what;
  row.e2 = row.e2_vs_best = row.residual = row.final_f = kNan;
}

std::vector<RunRow> run_toy(const ExperimentConfig& cfg) {
  const double alpha = cfg.resolved_alpha();
  std::vector<RunRow> rows;
  for (const MethodSpec& ms : methods(cfg)) {
    RunRow row;
    row.method = ms.name;
    row.m = static_cast<int>(cfg.toy_n);
    row.h = 1.0 / static_cast<double>(cfg.toy_n);
    row.dofs = static_cast<long>(cfg.toy_n);
    toy::ToyProblem problem(alpha, cfg.toy_n);
    AccelerationState accel;
    accel.mode = ms.accel;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      IterationTrace trace =
          run_iadca(problem, problem.e(), accel, cfg.stop, iadca_options(cfg, ms.adaptive));
      row.cpu_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.e2 = problem.norm(trace.final_iterate());
      row.residual = problem.norm(problem.gradient(trace.final_iterate()));
      row.control = P0Field(trace.final_iterate());
      fill_from_trace(row, std::move(trace));
    } catch (const std::exception& e) {
      mark_failed(row, e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RunRow> run_level(const ExperimentConfig& cfg, int m) {
  const pdeco::ProblemData data = cfg.data();
  pdeco::ControlProblem p = pdeco::make_control_problem(m, data, cfg.resolved_alpha());
  const double bc = pdeco::beta_c(p);
  p.beta = cfg.resolved_beta_fraction() * bc;
  auto mesh = std::make_shared<const fem::Triangulation>(p.mesh);

  std::vector<RunRow> rows;
  for (const MethodSpec& ms : methods(cfg)) {
    RunRow row;
    row.method = ms.name;
    row.m = m;
    row.h = mesh->h();
    row.dofs = static_cast<long>(mesh->interior_count());
    row.beta = p.beta;
    row.beta_c = bc;
    row.mesh = mesh;
    row.desired = p.y_d;

    subsolver::ActiveSetSolver solver(p, {cfg.subsolver_max_iterations});
    pdeco::PdecoDcProblem problem(p, solver);
    AccelerationState accel;
    accel.mode = ms.accel;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      IterationTrace trace = run_iadca(problem, Vector(mesh->triangle_count()), accel, cfg.stop,
                                       iadca_options(cfg, ms.adaptive));
      row.cpu_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.control = P0Field(trace.final_iterate());
      row.state = pdeco::solve_state(p, row.control);
      row.e2 = fem::norm_l2_p1(p.mass, P1Field(row.state - p.y_d));
      row.residual = problem.last_residual();
      fill_from_trace(row, std::move(trace));
    } catch (const std::exception& e) {
      mark_failed(row, e.what());
    }
    std::ostringstream log;
    solver.write_log_csv(log);
    row.subsolver_log = log.str();
    rows.push_back(std::move(row));
  }

  const RunRow* best = nullptr;
  for (const RunRow& r : rows) {
    if (!r.failed && (best == nullptr || r.final_f < best->final_f)) best = &r;
  }
  if (best != nullptr) {
    const P1Field best_state = best->state;
    for (RunRow& r : rows) {
      if (!r.failed) r.e2_vs_best = fem::norm_l2_p1(p.mass, P1Field(r.state - best_state));
    }
  }
  return rows;
}

std::string row_stem(const RunRow& r) { return r.method + "_m" + std::to_string(r.m); }

}  // namespace

std::string to_string(ExampleId id) {
  switch (id) {
    case ExampleId::example1: return "example1";
    case ExampleId::example2: return "example2";
    case ExampleId::toy: return "toy";
  }
  return "?";
}

ExampleId parse_example(const std::string& name) {
  if (name == "1" || name == "example1") return ExampleId::example1;
  if (name == "2" || name == "example2") return ExampleId::example2;
  if (name == "toy") return ExampleId::toy;
  throw std::invalid_argument("unknown example '" + name + "' (expected 1, 2 or toy)");
}

void ExperimentConfig::validate() const {
  if (levels.empty()) throw std::invalid_argument("config: no mesh levels");
  if (example != ExampleId::toy) {
    for (int m : levels) {
      if (!power_of_two(m) || m < 4 || m > 256) {
        throw std::invalid_argument("config: mesh level " + std::to_string(m) +
                                    " is not a power of two in [4, 256]");
      }
    }
  }
  if (!(resolved_alpha() > 0.0)) throw std::invalid_argument("config: alpha must be positive");
  if (example == ExampleId::toy && !(resolved_alpha() < 1.0)) {
    throw std::invalid_argument("config: toy alpha must lie in (0, 1)");
  }
  if (!(resolved_beta_fraction() >= 0.0)) {
    throw std::invalid_argument("config: beta fraction must be >= 0");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("config: gamma must be in (0,1)");
  if (!(eps0 > 0.0)) throw std::invalid_argument("config: eps0 must be positive");
  if (!(stop.rel_tol >= 0.0)) throw std::invalid_argument("config: tol must be >= 0");
  if (stop.max_iterations < 1) throw std::invalid_argument("config: max_iter must be >= 1");
  if (example == ExampleId::toy && toy_n < 1) throw std::invalid_argument("config: toy_n < 1");
  if (subsolver_max_iterations < 1) {
    throw std::invalid_argument("config: subsolver iteration cap must be >= 1");
  }
  if (example != ExampleId::toy) {
    const pdeco::ProblemData d = data();
    if (!(d.beta1 < 0.0 && 0.0 < d.beta2)) {
      throw std::invalid_argument("config: bounds must satisfy beta1 < 0 < beta2");
    }
  }
}

double ExperimentConfig::resolved_alpha() const {
  if (alpha) return *alpha;
  switch (example) {
    case ExampleId::example1: return 1e-2;
    case ExampleId::example2: return 1e-4;
    case ExampleId::toy: return 0.5;
  }
  return 0.0;
}

double ExperimentConfig::resolved_beta_fraction() const {
  if (beta_fraction) return *beta_fraction;
  return example == ExampleId::example2 ? 0.01 : 0.1;
}

pdeco::ProblemData ExperimentConfig::data() const {
  if (example == ExampleId::toy) throw std::invalid_argument("toy problem has no PDE data");
  pdeco::ProblemData d = example == ExampleId::example1 ? pdeco::example1() : pdeco::example2();
  if (beta1) d.beta1 = *beta1;
  if (beta2) d.beta2 = *beta2;
  d.alpha = resolved_alpha();
  return d;
}

bool RunReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const RunRow& r) { return r.failed; });
}

bool SweepReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.failed; });
}

RunReport run_example(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport report;
  report.config = cfg;
  if (cfg.example == ExampleId::toy) {
    report.rows = run_toy(cfg);
    return report;
  }
  std::vector<int> levels = cfg.levels;
  std::sort(levels.begin(), levels.end());
  for (int m : levels) {
    std::vector<RunRow> rows = run_level(cfg, m);
    for (RunRow& r : rows) report.rows.push_back(std::move(r));
  }
  return report;
}

double support_fraction(const fem::Triangulation& mesh, const P0Field& u, double threshold) {
  double s = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (std::abs(u[t]) > threshold) s += mesh.area(t);
  }
  return s;
}

SweepReport beta_sweep(const ExperimentConfig& cfg, const std::vector<double>& fractions) {
  cfg.validate();
  if (cfg.example == ExampleId::toy) throw std::invalid_argument("beta_sweep: needs PDE data");
  if (!std::is_sorted(fractions.begin(), fractions.end())) {
    throw std::invalid_argument("beta_sweep: fractions must be sorted ascending");
  }
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("beta_sweep: fractions must be >= 0");
  }

  SweepReport report;
  report.config = cfg;
  report.m = cfg.levels.front();
  pdeco::ControlProblem p =
      pdeco::make_control_problem(report.m, cfg.data(), cfg.resolved_alpha());
  report.beta_c = pdeco::beta_c(p);
  report.mesh = std::make_shared<const fem::Triangulation>(p.mesh);

  for (double fraction : fractions) {
    SweepRow row;
    row.fraction = fraction;
    row.beta = fraction * report.beta_c;
    p.beta = row.beta;
    subsolver::ActiveSetSolver solver(p, {cfg.subsolver_max_iterations});
    pdeco::PdecoDcProblem problem(p, solver);
    AccelerationState accel;
    accel.mode = cfg.accel;
    try {
      const IterationTrace trace = run_iadca(problem, Vector(p.mesh.triangle_count()), accel,
                                             cfg.stop, iadca_options(cfg, true));
      row.control = P0Field(trace.final_iterate());
      row.support_fraction = support_fraction(p.mesh, row.control);
      row.final_f = trace.final_objective();
      row.iterations = static_cast<int>(trace.records.size());
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.support_fraction = row.final_f = kNan;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw linalg::DimensionError("fitted_order: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (err[i] > 0.0 && h[i] > 0.0) {
      xs.push_back(std::log(h[i]));
      ys.push_back(std::log(err[i]));
    }
  }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return 0.0;
  return (n * sxy - sx * sy) / den;
}

RefinementReport refinement_study(const ExperimentConfig& cfg, std::vector<int> levels) {
  cfg.validate();
  if (cfg.example == ExampleId::toy) {
    throw std::invalid_argument("refinement_study: needs PDE data");
  }
  if (levels.size() < 3) throw std::invalid_argument("refinement_study: need >= 3 levels");
  std::sort(levels.begin(), levels.end());
  if (levels.front() == levels.back()) {
    throw std::invalid_argument("refinement_study: finest level must be strictly larger");
  }
  for (int m : levels) {
    if (!power_of_two(m) || m < 2) {
      throw std::invalid_argument("refinement_study: levels must be powers of two");
    }
  }

  RefinementReport report;
  report.config = cfg;
  report.reference_m = levels.back();
  const pdeco::ProblemData data = cfg.data();
  const double alpha = cfg.resolved_alpha();

  auto solve_level = [&](int m, double beta) {
    pdeco::ControlProblem p = pdeco::make_control_problem(m, data, alpha, beta);
    P0Field d = fem::project_p0(p.mesh, [](double x, double y) {
      return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    });
    d *= 1.0 / fem::norm_l2_p0(p.mesh, d);
    subsolver::ActiveSetSolver solver(p, {cfg.subsolver_max_iterations});
    subsolver::SubproblemSpec spec = subsolver::make_spec(p, std::move(d), 0.0);
    subsolver::SubproblemResult r = solver.solve(spec);
    if (!r.converged) {
      throw subsolver::SubsolverError("refinement_study: subproblem did not converge on m=" +
                                          std::to_string(m),
                                      r.state.eta);
    }
    return std::make_pair(std::move(p), std::move(r.state.u));
  };

  const fem::Triangulation fine_mesh(report.reference_m);
  {
    const pdeco::ControlProblem probe = pdeco::make_control_problem(report.reference_m, data,
                                                                    alpha);
    report.beta = cfg.resolved_beta_fraction() * pdeco::beta_c(probe);
  }
  const P0Field reference = solve_level(report.reference_m, report.beta).second;

  std::vector<double> hs, linf, l2;
  // the last entry is the reference; a repeated finest level yields zero error
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const int m = levels[i];
    RefinementRow row;
    row.m = m;
    const auto solved = solve_level(m, report.beta);
    const fem::Triangulation& mesh = solved.first.mesh;
    row.h = mesh.h();
    const P0Field diff(solved.second - fem::restrict_p0(fine_mesh, mesh, reference));
    row.linf_error = fem::norm_linf_p0(diff);
    row.l2_error = fem::norm_l2_p0(mesh, diff);
    if (!report.rows.empty()) {
      const RefinementRow& prev = report.rows.back();
      if (row.linf_error > 0.0 && prev.linf_error > 0.0) {
        row.order_linf = std::log2(prev.linf_error / row.linf_error);
      }
      if (row.l2_error > 0.0 && prev.l2_error > 0.0) {
        row.order_l2 = std::log2(prev.l2_error / row.l2_error);
      }
    }
    hs.push_back(row.h);
    linf.push_back(row.linf_error);
    l2.push_back(row.l2_error);
    report.rows.push_back(row);
  }
  report.fitted_order_linf = fitted_order(hs, linf);
  report.fitted_order_l2 = fitted_order(hs, l2);
  return report;
}

void write_table_csv(const RunReport& report, std::ostream& out) {
  out << "h,dofs,E2,residual,iters,cpu_s,method\n";
  for (const RunRow& r : report.rows) {
    out << fmt(r.h) << ',' << r.dofs << ',' << fmt(r.e2) << ',' << fmt(r.residual) << ','
        << r.iterations << ',' << fmt(r.cpu_seconds) << ',' << r.method << '\n';
  }
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  prepare_dir(dir);
  write_file(dir / "table.csv", [&](std::ostream& out) { write_table_csv(report, out); });

  json manifest = manifest_base(report.config, "run");
  manifest["rows"] = json::array();
  std::vector<int> desired_written;
  for (const RunRow& r : report.rows) {
    const std::string stem = row_stem(r);
    json jr;
    jr["method"] = r.method;
    jr["m"] = r.m;
    jr["h"] = r.h;
    jr["dofs"] = r.dofs;
    jr["failed"] = r.failed;
    if (r.failed) {
      jr["error"] = r.error;
      manifest["rows"].push_back(jr);
      continue;
    }
    jr["E2"] = r.e2;
    jr["E2_column"] = r.mesh ? "||y^h - y_d^h||_L2" : "||u^K||";
    if (r.mesh) jr["E2_vs_best_method"] = r.e2_vs_best;
    jr["residual"] = r.residual;
    jr["iters"] = r.iterations;
    jr["final_f"] = r.final_f;
    jr["stop_reason"] = r.stop_reason;
    jr["descent_violations"] = r.descent_violations;
    jr["adaptive_violations"] = r.adaptive_violations;
    if (r.mesh) {
      jr["beta"] = r.beta;
      jr["beta_c"] = r.beta_c;
      jr["support_fraction"] = support_fraction(*r.mesh, r.control);
    }
    manifest["rows"].push_back(jr);

    write_file(dir / ("trace_" + stem + ".csv"),
               [&](std::ostream& out) { write_trace_csv(r.trace, out); });
    if (!r.mesh) continue;
    write_file(dir / ("control_" + stem + ".csv"),
               [&](std::ostream& out) { fem::write_p0_csv(*r.mesh, r.control, out); });
    write_file(dir / ("state_" + stem + ".csv"),
               [&](std::ostream& out) { fem::write_p1_csv(*r.mesh, r.state, out); });
    write_file(dir / ("subsolver_" + stem + ".csv"),
               [&](std::ostream& out) { out << r.subsolver_log; });
    if (std::find(desired_written.begin(), desired_written.end(), r.m) == desired_written.end()) {
      desired_written.push_back(r.m);
      write_file(dir / ("desired_m" + std::to_string(r.m) + ".csv"),
                 [&](std::ostream& out) { fem::write_p1_csv(*r.mesh, r.desired, out); });
    }
  }
  write_file(dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

void emit_report(const SweepReport& report, const std::filesystem::path& dir) {
  prepare_dir(dir);
  write_file(dir / "sweep.csv", [&](std::ostream& out) {
    out << "fraction,beta,support_fraction,f,iters\n";
    for (const SweepRow& r : report.rows) {
      out << fmt(r.fraction) << ',' << fmt(r.beta) << ',' << fmt(r.support_fraction) << ','
          << fmt(r.final_f) << ',' << r.iterations << '\n';
    }
  });
  json manifest = manifest_base(report.config, "sweep-beta");
  manifest["m"] = report.m;
  manifest["beta_c"] = report.beta_c;
  manifest["rows"] = json::array();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const SweepRow& r = report.rows[i];
    json jr{{"fraction", r.fraction}, {"beta", r.beta}, {"failed", r.failed}};
    if (r.failed) {
      jr["error"] = r.error;
    } else {
      jr["support_fraction"] = r.support_fraction;
      jr["final_f"] = r.final_f;
      jr["iters"] = r.iterations;
      write_file(dir / ("control_frac" + std::to_string(i) + ".csv"),
                 [&](std::ostream& out) { fem::write_p0_csv(*report.mesh, r.control, out); });
    }
    manifest["rows"].push_back(jr);
  }
  write_file(dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

void emit_report(const RefinementReport& report, const std::filesystem::path& dir) {
  prepare_dir(dir);
  write_file(dir / "refine.csv", [&](std::ostream& out) {
    out << "m,h,linf_error,l2_error,order_linf,order_l2\n";
    for (const RefinementRow& r : report.rows) {
      out << r.m << ',' << fmt(r.h) << ',' << fmt(r.linf_error) << ',' << fmt(r.l2_error) << ','
          << fmt(r.order_linf) << ',' << fmt(r.order_l2) << '\n';
    }
  });
  json manifest = manifest_base(report.config, "refine");
  manifest["reference_m"] = report.reference_m;
  manifest["beta"] = report.beta;
  manifest["fitted_order_linf"] = report.fitted_order_linf;
  manifest["fitted_order_l2"] = report.fitted_order_l2;
  write_file(dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

}  // namespace dcflow::experiments
