#pragma once

#include <string>

#include "dcflow/dc_core.hpp"
#include "dcflow/fem.hpp"

namespace dcflow::pdeco {

using fem::P0Field;
using fem::P1Field;
using fem::ScalarFunction;

/// Analytic data of a distributed control problem on the unit square.
struct ProblemData {
  std::string name;
  ScalarFunction y_d;
  ScalarFunction u_d;
  ScalarFunction phi;
  double beta1 = -1.0;
  double beta2 = 1.0;
  /// Regularization stated alongside the data set.
  double alpha = 1e-4;
};

/// y_d = sin(2 pi x) sin(2 pi y) exp(2x) / 6, phi = 0, bounds [-20, 20].
ProblemData example1();
/// y_d = sin(4 pi x) cos(8 pi x) exp(2x), phi = 10 cos(8 pi x) cos(8 pi y),
/// bounds [-40, 40]. y_d depends on x only, as printed in the source data.
ProblemData example2();
ProblemData custom_data(const std::string& y_d, const std::string& u_d, const std::string& phi,
                        double beta1, double beta2);
/// Resolves "example1" / "example2" (also "1" / "2").
ProblemData named_data(const std::string& name);

/// Discretized problem
///   min 1/2 ||y - y_d||^2 + alpha/2 ||u - u_d||^2 + beta (||u||_1 - ||u||_2)
///   s.t. -Laplace y = phi + u, beta1 <= u <= beta2.
struct ControlProblem {
  fem::Triangulation mesh;
  linalg::SparseMatrix stiffness;  ///< A-bar
  linalg::SparseMatrix mass;       ///< M
  linalg::SparseMatrix control;    ///< M-bar
  linalg::Vector areas;            ///< |T|, the P0 mass
  linalg::Vector lumped_mass;      ///< row sums of the full P1 mass, interior rows
  P1Field y_d;
  P0Field u_d;
  linalg::Vector load;  ///< phi^h, the P1 load vector of phi
  double alpha = 1e-2;
  double beta = 0.0;
  double beta1 = -1.0;
  double beta2 = 1.0;

  void validate() const;
};

ControlProblem make_control_problem(int m, const ProblemData& data, double alpha,
                                    double beta = 0.0);

struct ReducedEvaluation {
  P0Field u;
  P1Field y;
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
  /// g carries the indicator of the box; false means g = f = +inf.
  bool feasible = true;
};

/// A-bar y = M-bar u + phi^h.
P1Field solve_state(const ControlProblem& p, const P0Field& u);
/// A-bar^T z = M (y - y_d).
P1Field solve_adjoint(const ControlProblem& p, const P1Field& y);
ReducedEvaluation objective(const ControlProblem& p, const P0Field& u);
bool feasible(const ControlProblem& p, const P0Field& u);
/// beta w / ||w|| for w != 0, else 0.
P0Field h_subgradient(const ControlProblem& p, const P0Field& w);
/// ||A-bar^{-T} (M^T (y_d - A-bar^{-1} phi^h))||_inf
double beta_c(const ControlProblem& p);

}  // namespace dcflow::pdeco

namespace dcflow::subsolver {
class ActiveSetSolver;
}

namespace dcflow::pdeco {

/// DcProblem view of a ControlProblem: g strongly convex with modulus alpha,
/// h = beta ||.|| with modulus 0. Subproblems go to the active-set solver,
/// which keeps its partition between calls.
class PdecoDcProblem final : public DcProblem {
 public:
  PdecoDcProblem(const ControlProblem& p, subsolver::ActiveSetSolver& solver);

  double sigma_g() const override { return p_.alpha; }
  double sigma_h() const override { return 0.0; }
  double objective(const Vector& u) const override;
  Vector eps_subgradient_h(const Vector& w, double eps) const override;
  ArgminResult eps_argmin_linearized(const Vector& v, double eps) override;
  double inner_product(const Vector& x, const Vector& y) const override;

  const ControlProblem& problem() const { return p_; }
  /// KKT residual of the most recent subproblem solve.
  double last_residual() const { return last_residual_; }

 private:
  const ControlProblem& p_;
  subsolver::ActiveSetSolver& solver_;
  double last_residual_ = 0.0;
};

PdecoDcProblem make_dc_problem(const ControlProblem& p, subsolver::ActiveSetSolver& solver);

}  // namespace dcflow::pdeco
