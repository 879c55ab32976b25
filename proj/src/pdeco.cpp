#include "dcflow/pdeco.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dcflow/expression.hpp"
#include "dcflow/subsolver.hpp"

namespace dcflow::pdeco {

namespace {

constexpr double kStateTol = 1e-12;
constexpr double pi = std::numbers::pi;

double zero(double, double) { return 0.0; }

}  // namespace

ProblemData example1() {
  ProblemData d;
  d.name = "example1";
  d.y_d = [](double x, double y) {
    return std::sin(2 * pi * x) * std::sin(2 * pi * y) * std::exp(2 * x) / 6.0;
  };
  d.u_d = zero;
  d.phi = zero;
  d.beta1 = -20.0;
  d.beta2 = 20.0;
  d.alpha = 1e-4;
  return d;
}

ProblemData example2() {
  ProblemData d;
  d.name = "example2";
  d.y_d = [](double x, double) {
    return std::sin(4 * pi * x) * std::cos(8 * pi * x) * std::exp(2 * x);
  };
  d.u_d = zero;
  d.phi = [](double x, double y) { return 10.0 * std::cos(8 * pi * x) * std::cos(8 * pi * y); };
  d.beta1 = -40.0;
  d.beta2 = 40.0;
  d.alpha = 1e-4;
  return d;
}

ProblemData custom_data(const std::string& y_d, const std::string& u_d, const std::string& phi,
                        double beta1, double beta2) {
  ProblemData d;
  d.name = "custom";
  d.y_d = compile_expression(y_d);
  d.u_d = compile_expression(u_d);
  d.phi = compile_expression(phi);
  d.beta1 = beta1;
  d.beta2 = beta2;
  return d;
}

ProblemData named_data(const std::string& name) {
  if (name == "example1" || name == "1") return example1();
  if (name == "example2" || name == "2") return example2();
  throw std::invalid_argument("unknown data set '" + name + "'");
}

void ControlProblem::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("ControlProblem: alpha must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("ControlProblem: beta must be >= 0");
  if (!(beta1 < 0.0 && 0.0 < beta2 && std::isfinite(beta1) && std::isfinite(beta2))) {
    throw std::invalid_argument("ControlProblem: need finite bounds beta1 < 0 < beta2");
  }
  const std::size_t nv = mesh.interior_count();
  const std::size_t nt = mesh.triangle_count();
  if (y_d.size() != nv || load.size() != nv || u_d.size() != nt || areas.size() != nt ||
      stiffness.rows() != nv || control.rows() != nv || control.cols() != nt) {
    throw linalg::DimensionError("ControlProblem: data inconsistent with mesh");
  }
}

ControlProblem make_control_problem(int m, const ProblemData& data, double alpha, double beta) {
  ControlProblem p{fem::build_mesh(m), {}, {}, {}, {}, {}, {}, {}, {}, alpha, beta,
                   data.beta1, data.beta2};
  p.stiffness = fem::assemble_stiffness(p.mesh);
  p.mass = fem::assemble_mass(p.mesh);
  p.control = fem::assemble_control_operator(p.mesh);
  p.areas = fem::triangle_areas(p.mesh);
  // every P1 basis function integrates to the sum of its M-bar row
  p.lumped_mass = linalg::spmv(p.control, linalg::Vector(p.mesh.triangle_count(), 1.0));
  p.y_d = fem::interpolate_p1(p.mesh, data.y_d);
  p.u_d = fem::project_p0(p.mesh, data.u_d);
  p.load = fem::load_vector(p.mesh, data.phi);
  p.validate();
  return p;
}

P1Field solve_state(const ControlProblem& p, const P0Field& u) {
  linalg::Vector rhs = linalg::spmv(p.control, u);
  rhs += p.load;
  return P1Field(linalg::solve_spd(p.stiffness, rhs, kStateTol));
}

P1Field solve_adjoint(const ControlProblem& p, const P1Field& y) {
  const linalg::Vector rhs = linalg::spmv(p.mass, y - p.y_d);
  // A-bar is symmetric for the Laplacian, so A-bar^T = A-bar
  return P1Field(linalg::solve_spd(p.stiffness, rhs, kStateTol));
}

bool feasible(const ControlProblem& p, const P0Field& u) {
  for (double v : u) {
    if (!(v >= p.beta1 && v <= p.beta2)) return false;
  }
  return true;
}

ReducedEvaluation objective(const ControlProblem& p, const P0Field& u) {
  if (u.size() != p.mesh.triangle_count()) {
    throw linalg::DimensionError("objective: control length does not match mesh");
  }
  ReducedEvaluation ev;
  ev.u = u;
  ev.y = solve_state(p, u);
  const P1Field misfit(ev.y - p.y_d);
  const P0Field deviation(u - p.u_d);
  const double tracking = fem::norm_l2_p1(p.mass, misfit);
  const double l2 = fem::norm_l2_p0(p.mesh, u);
  ev.h = p.beta * l2;
  ev.feasible = feasible(p, u);
  if (!ev.feasible) {
    ev.g = std::numeric_limits<double>::infinity();
    ev.f = ev.g;
    return ev;
  }
  ev.g = 0.5 * tracking * tracking +
         0.5 * p.alpha * fem::inner_p0(p.mesh, deviation, deviation) +
         p.beta * fem::norm_l1_p0(p.mesh, u);
  ev.f = ev.g - ev.h;
  return ev;
}

P0Field h_subgradient(const ControlProblem& p, const P0Field& w) {
  const double nw = fem::norm_l2_p0(p.mesh, w);
  if (nw == 0.0) return P0Field(w.size());
  return P0Field((p.beta / nw) * w);
}

double beta_c(const ControlProblem& p) {
  const linalg::Vector w1 = linalg::solve_spd(p.stiffness, p.load, kStateTol);
  // M is symmetric, M^T = M
  const linalg::Vector rhs = linalg::spmv(p.mass, p.y_d - w1);
  return linalg::norm_inf(linalg::solve_spd(p.stiffness, rhs, kStateTol));
}

PdecoDcProblem::PdecoDcProblem(const ControlProblem& p, subsolver::ActiveSetSolver& solver)
    : p_(p), solver_(solver) {}

double PdecoDcProblem::objective(const Vector& u) const {
  return pdeco::objective(p_, P0Field(u)).f;
}

Vector PdecoDcProblem::eps_subgradient_h(const Vector& w, double) const {
  return h_subgradient(p_, P0Field(w));
}

ArgminResult PdecoDcProblem::eps_argmin_linearized(const Vector& v, double eps) {
  // v = beta d with ||d|| in {0, 1}
  P0Field d(v.size());
  if (p_.beta > 0.0) d = P0Field((1.0 / p_.beta) * v);
  subsolver::SubproblemResult r = solver_.solve(subsolver::make_spec(p_, std::move(d), eps));
  last_residual_ = r.state.eta;

  ArgminResult out;
  out.u = std::move(r.state.u);
  // After exact convergence the certificate is at round-off level and may
  // sit above a tiny requested eps; the discrete solution is exact there.
  out.certified_eps = r.converged ? std::min(r.certified_eps, eps) : r.certified_eps;
  out.stats.iterations = r.iterations;
  out.stats.residual = r.state.eta;
  const subsolver::PartitionCounts c = subsolver::count(r.state.partition);
  out.stats.counts = {c.lower, c.zero, c.upper, c.neg, c.pos};
  return out;
}

double PdecoDcProblem::inner_product(const Vector& x, const Vector& y) const {
  return fem::inner_p0(p_.mesh, P0Field(x), P0Field(y));
}

PdecoDcProblem make_dc_problem(const ControlProblem& p, subsolver::ActiveSetSolver& solver) {
  return PdecoDcProblem(p, solver);
}

}  // namespace dcflow::pdeco
