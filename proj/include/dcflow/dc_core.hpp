#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcflow/linalg.hpp"

namespace dcflow {

using linalg::Vector;

/// Statistics a subproblem solver attaches to an iterate. The engine does not
/// interpret them; they are carried into the trace.
struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
  std::vector<long> counts;
};

struct ArgminResult {
  Vector u;
  /// Accuracy actually certified for u; never above the requested epsilon.
  double certified_eps = 0.0;
  SolveStats stats;
};

/// Minimize f = g - h over an inner-product space, with g, h convex.
/// Implementations expose inexact oracles for the two DCA steps.
class DcProblem {
 public:
  virtual ~DcProblem() = default;

  virtual double sigma_g() const = 0;
  virtual double sigma_h() const = 0;
  virtual double objective(const Vector& u) const = 0;
  /// Some v in the eps-subdifferential of h at w.
  virtual Vector eps_subgradient_h(const Vector& w, double eps) const = 0;
  /// An eps-solution of inf_u [g(u) - <v, u>].
  virtual ArgminResult eps_argmin_linearized(const Vector& v, double eps) = 0;
  virtual double inner_product(const Vector& x, const Vector& y) const = 0;

  double norm(const Vector& x) const;
};

enum class AccelMode { none, nesterov, heavy_ball };

std::string to_string(AccelMode mode);
AccelMode parse_accel_mode(const std::string& name);

/// Extrapolation state for choosing w^k.
struct AccelerationState {
  AccelMode mode = AccelMode::none;
  double t = 1.0;
  double momentum = 0.5;
  Vector previous;  ///< u^{k-1}; empty means u^{-1} = u^0
};

struct StopRule {
  double rel_tol = 1e-6;
  int max_iterations = 20;
};

struct IterationRecord {
  int k = 0;
  double f_prev = 0.0;  ///< f(u^k)
  double f_w = 0.0;     ///< f(w^k)
  double f = 0.0;       ///< f(u^{k+1})
  double eps = 0.0;     ///< accepted eps_k (the requested accuracy)
  double eps_effective = 0.0;  ///< accuracy used in the adaptive test
  double step_norm = 0.0;      ///< ||u^{k+1} - w^k||
  int restarts = 0;
  bool accel_accepted = false;
  SolveStats stats;
};

enum class StopReason { relative_change, eps_floor, max_iterations };

std::string to_string(StopReason reason);

struct IterationTrace {
  double sigma_g = 0.0;
  double sigma_h = 0.0;
  double f0 = 0.0;
  std::vector<IterationRecord> records;
  /// u^0, u^1, ..., one more than records.
  std::vector<Vector> iterates;
  StopReason reason = StopReason::max_iterations;

  const Vector& final_iterate() const { return iterates.back(); }
  double final_objective() const { return records.empty() ? f0 : records.back().f; }
};

/// Thrown when the Step-4 loop does not accept within the restart cap.
class CriticalPointError : public std::runtime_error {
 public:
  CriticalPointError(const std::string& what, double step_norm, int k)
      : std::runtime_error(what), step_norm_(step_norm), k_(k) {}
  double step_norm() const { return step_norm_; }
  int iteration() const { return k_; }

 private:
  double step_norm_;
  int k_;
};

struct IadcaOptions {
  double gamma = 0.5;
  double eps0 = 1.0;
  int restart_cap = 200;
  double eps_floor = 1e-12;
  /// Skip the adaptive loop entirely (plain inexact DCA reading).
  bool adaptive = true;
  /// Subgradient accuracy is eps_k^exponent; 1 is the default algorithm.
  double subgradient_eps_exponent = 1.0;
  /// Optional per-iteration callback, called after each accepted iterate.
  std::function<void(const IterationRecord&, const Vector&)> on_iterate;
};

/// eps_k <= ((sigma_g + sigma_h) / 32) * dist^2
bool adaptive_accept(double eps_k, double sigma_g, double sigma_h, double dist);

/// Chooses w^k from u^k according to the acceleration mode, guarding
/// f(w) <= f(u^k). Advances the state (t and the stored previous iterate is
/// left to the caller). Sets `accepted` when the extrapolated point was used.
Vector select_w(const Vector& u_k, AccelerationState& accel,
                const std::function<double(const Vector&)>& f_eval, double f_uk,
                bool* accepted = nullptr);

IterationTrace run_iadca(DcProblem& problem, const Vector& u0, AccelerationState accel,
                         const StopRule& stop, const IadcaOptions& options = {});

/// Indices k that violate the per-step descent estimate
/// ((sg+sh)/8)||u^{k+1}-w^k||^2 <= f(w^k) - f(u^{k+1}) <= f(u^k) - f(u^{k+1}).
std::vector<int> verify_descent(const IterationTrace& trace, double slack_rel = 1e-9);

/// Indices k whose iterate fails the adaptive acceptance rule.
std::vector<int> verify_adaptive(const IterationTrace& trace);

struct PlDiagnostic {
  bool available = false;
  double theta_hat = 0.0;
  double c_hat = 0.0;
  /// Geometric mean of (f_{k+1} - f_bar) / (f_k - f_bar).
  double rate = 0.0;
  /// Slope of log(f_{k+1}-f_bar) against log(f_k-f_bar).
  double loglog_slope = 0.0;
  bool linear_regime = false;
};

/// Empirical Polyak-Lojasiewicz diagnostic from a trace; no guarantee implied.
PlDiagnostic pl_estimate(const IterationTrace& trace, double f_bar);

/// CSV with header k,f,eps,step_norm,restarts,accel_accepted; f is f(u^{k+1}).
void write_trace_csv(const IterationTrace& trace, std::ostream& out);

}  // namespace dcflow
