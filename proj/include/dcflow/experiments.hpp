#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dcflow/dc_core.hpp"
#include "dcflow/fem.hpp"
#include "dcflow/pdeco.hpp"

namespace dcflow::experiments {

enum class ExampleId { example1, example2, toy };

std::string to_string(ExampleId id);
/// Accepts "1", "2", "toy", "example1", "example2".
ExampleId parse_example(const std::string& name);

struct ExperimentConfig {
  ExampleId example = ExampleId::example1;
  std::vector<int> levels{16};
  /// Unset values fall back to the per-example defaults below.
  std::optional<double> alpha;
  std::optional<double> beta_fraction;
  std::optional<double> beta1;
  std::optional<double> beta2;
  AccelMode accel = AccelMode::nesterov;
  double gamma = 0.5;
  double eps0 = 1.0;
  StopRule stop;
  /// Also run the plain DCA baseline (w^k = u^k).
  bool compare = true;
  /// Keep the adaptive loop in the baseline.
  bool baseline_adaptive = true;
  /// Unknowns of the toy problem.
  std::size_t toy_n = 64;
  /// Active-set iteration cap per subproblem.
  int subsolver_max_iterations = 100;
  std::filesystem::path out_dir;

  /// Throws std::invalid_argument.
  void validate() const;
  /// example1: 0.01, example2: 1e-4, toy: 0.5.
  double resolved_alpha() const;
  /// example1: 0.1, example2: 0.01, toy: unused.
  double resolved_beta_fraction() const;
  pdeco::ProblemData data() const;
};

struct RunRow {
  std::string method;  ///< "iadca" or "dca"
  int m = 0;
  double h = 0.0;
  long dofs = 0;
  /// ||y^h - y_d^h||_{L2}; for the toy problem ||u^K||.
  double e2 = 0.0;
  /// ||y^h - y_best^h||_{L2} against the lower-f method on the same level.
  double e2_vs_best = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double cpu_seconds = 0.0;
  double final_f = 0.0;
  double beta = 0.0;
  double beta_c = 0.0;
  std::string stop_reason;
  std::size_t descent_violations = 0;
  std::size_t adaptive_violations = 0;
  bool failed = false;
  std::string error;

  // artifacts
  std::shared_ptr<const fem::Triangulation> mesh;  ///< null for the toy problem
  fem::P0Field control;
  fem::P1Field state;
  fem::P1Field desired;
  IterationTrace trace;
  std::string subsolver_log;  ///< CSV text
};

struct RunReport {
  ExperimentConfig config;
  std::vector<RunRow> rows;  ///< ordered by m, then method

  bool any_failed() const;
};

RunReport run_example(const ExperimentConfig& cfg);

struct SweepRow {
  double fraction = 0.0;
  double beta = 0.0;
  double support_fraction = 0.0;
  double final_f = 0.0;
  int iterations = 0;
  bool failed = false;
  std::string error;
  fem::P0Field control;
};

struct SweepReport {
  ExperimentConfig config;
  int m = 0;
  double beta_c = 0.0;
  std::shared_ptr<const fem::Triangulation> mesh;
  std::vector<SweepRow> rows;

  bool any_failed() const;
};

/// Area of the triangles with |u| > threshold.
double support_fraction(const fem::Triangulation& mesh, const fem::P0Field& u,
                        double threshold = 1e-8);

/// Runs the accelerated method on cfg.levels.front() for each fraction of beta_c.
SweepReport beta_sweep(const ExperimentConfig& cfg, const std::vector<double>& fractions);

struct RefinementRow {
  int m = 0;
  double h = 0.0;
  double linf_error = 0.0;
  double l2_error = 0.0;
  /// log2 of the error ratio against the previous level; 0 on the first.
  double order_linf = 0.0;
  double order_l2 = 0.0;
};

struct RefinementReport {
  ExperimentConfig config;
  int reference_m = 0;
  double beta = 0.0;
  std::vector<RefinementRow> rows;  ///< excludes the reference level
  /// Least-squares slope of log(error) against log(h), over nonzero errors.
  double fitted_order_linf = 0.0;
  double fitted_order_l2 = 0.0;
};

/// Solves one fixed subproblem, min g(u) - beta <d, u> with d the normalized
/// P0 projection of sin(pi x) sin(pi y), on every level. beta is the given
/// fraction of beta_c on the finest level, which also serves as reference.
RefinementReport refinement_study(const ExperimentConfig& cfg, std::vector<int> levels);

/// Fitted slope of log(err) against log(h); pairs with err <= 0 are skipped.
double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

/// Files: table.csv, per-row control/state/trace/subsolver CSVs,
/// desired-state CSVs and manifest.json. Throws std::runtime_error with the
/// offending path on I/O failure.
void emit_report(const RunReport& report, const std::filesystem::path& dir);
void emit_report(const SweepReport& report, const std::filesystem::path& dir);
void emit_report(const RefinementReport& report, const std::filesystem::path& dir);

/// The table alone, header h,dofs,E2,residual,iters,cpu_s,method.
void write_table_csv(const RunReport& report, std::ostream& out);

extern const char* const version;

}  // namespace dcflow::experiments
