#include "dcflow/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace dcflow::subsolver {

using linalg::SparseMatrix;
using linalg::Triplet;
using linalg::Vector;

namespace {

constexpr double kResolveTol = 1e-13;

bool pins_control(SetLabel s) {
  return s == SetLabel::lower || s == SetLabel::zero || s == SetLabel::upper;
}

double pinned_control(SetLabel s, const ControlProblem& p) {
  switch (s) {
    case SetLabel::lower: return p.beta1;
    case SetLabel::upper: return p.beta2;
    default: return 0.0;
  }
}

// (M-bar^T z)_l / |T_l|: the average of z over triangle l
Vector triangle_average(const ControlProblem& p, const Vector& z) {
  Vector s = linalg::spmv_transpose(p.control, z);
  for (std::size_t l = 0; l < s.size(); ++l) s[l] /= p.areas[l];
  return s;
}

std::string describe(const Partition& partition) {
  const PartitionCounts c = count(partition);
  return "partition |L|=" + std::to_string(c.lower) + " |Z|=" + std::to_string(c.zero) +
         " |U|=" + std::to_string(c.upper) + " |N|=" + std::to_string(c.neg) +
         " |P|=" + std::to_string(c.pos);
}

}  // namespace

PartitionCounts count(const Partition& partition) {
  PartitionCounts c;
  for (SetLabel s : partition) {
    switch (s) {
      case SetLabel::lower: ++c.lower; break;
      case SetLabel::zero: ++c.zero; break;
      case SetLabel::upper: ++c.upper; break;
      case SetLabel::neg: ++c.neg; break;
      case SetLabel::pos: ++c.pos; break;
    }
  }
  return c;
}

double KktResiduals::eta() const {
  return std::max({state, adjoint, stationarity, complementarity});
}

SubproblemSpec make_spec(const ControlProblem& p, P0Field d, double eps) {
  SubproblemSpec spec;
  spec.d = std::move(d);
  spec.eps = eps;
  spec.target_eta = 0.9 * std::sqrt(2.0 * p.alpha * std::max(eps, 0.0));
  return spec;
}

Vector complementarity_row(const P0Field& u, const P0Field& mu, double alpha, double beta,
                           Bounds b) {
  Vector r(u.size());
  for (std::size_t l = 0; l < u.size(); ++l) {
    const double up = (mu[l] - beta) / alpha;
    const double dn = (mu[l] + beta) / alpha;
    r[l] = u[l] - std::max(0.0, u[l] + up) - std::min(0.0, u[l] + dn) +
           std::max(0.0, (u[l] - b.upper) + up) + std::min(0.0, (u[l] - b.lower) + dn);
  }
  return r;
}

Partition active_set_partition(const P0Field& u, const P0Field& mu, double alpha, double beta,
                               Bounds b) {
  Partition part(u.size(), SetLabel::zero);
  for (std::size_t l = 0; l < u.size(); ++l) {
    const double up = (mu[l] - beta) / alpha;
    const double dn = (mu[l] + beta) / alpha;
    // strict tests: ties fall through to the interior / zero branches
    if ((u[l] - b.upper) + up > 0.0) {
      part[l] = SetLabel::upper;
    } else if ((u[l] - b.lower) + dn < 0.0) {
      part[l] = SetLabel::lower;
    } else if (u[l] + up > 0.0) {
      part[l] = SetLabel::pos;
    } else if (u[l] + dn < 0.0) {
      part[l] = SetLabel::neg;
    }
  }
  return part;
}

KktResiduals kkt_residual(const ControlProblem& p, const KktState& s, const P0Field& d) {
  KktResiduals r;
  const auto dual_p1 = [&](const Vector& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * v[i] / p.lumped_mass[i];
    return std::sqrt(acc);
  };
  const auto dual_p0 = [&](const Vector& v) {
    double acc = 0.0;
    for (std::size_t l = 0; l < v.size(); ++l) acc += v[l] * v[l] / p.areas[l];
    return std::sqrt(acc);
  };

  Vector r_state = linalg::spmv(p.stiffness, s.y);
  r_state -= linalg::spmv(p.control, s.u);
  r_state -= p.load;
  r.state = dual_p1(r_state);

  Vector r_adj = linalg::spmv(p.mass, s.y);
  r_adj += linalg::spmv_transpose(p.stiffness, s.z);
  r_adj -= linalg::spmv(p.mass, p.y_d);
  r.adjoint = dual_p1(r_adj);

  Vector r_stat(s.u.size());
  const Vector mz = linalg::spmv_transpose(p.control, s.z);
  for (std::size_t l = 0; l < r_stat.size(); ++l) {
    r_stat[l] = p.alpha * p.areas[l] * (s.u[l] - p.u_d[l]) - mz[l] + p.areas[l] * s.mu[l] -
                p.beta * p.areas[l] * d[l];
  }
  r.stationarity = dual_p0(r_stat);

  Vector r_comp = complementarity_row(s.u, s.mu, p.alpha, p.beta, {p.beta1, p.beta2});
  for (std::size_t l = 0; l < r_comp.size(); ++l) r_comp[l] *= p.areas[l];
  r.complementarity = dual_p0(r_comp);
  return r;
}

double certify_epsilon(const ControlProblem& p, const KktState& s, const P0Field& d) {
  if (!pdeco::feasible(p, s.u)) return std::numeric_limits<double>::infinity();
  Vector rhs = linalg::spmv(p.control, s.u);
  rhs += p.load;
  const Vector y = linalg::solve_spd(p.stiffness, rhs, kResolveTol);
  const Vector z = linalg::solve_spd(p.stiffness, linalg::spmv(p.mass, p.y_d - y), kResolveTol);
  const Vector avg_z = triangle_average(p, z);

  // distance from 0 to the subdifferential of F at u, triangle by triangle
  double dist2 = 0.0;
  for (std::size_t l = 0; l < s.u.size(); ++l) {
    const double u = s.u[l];
    const double g = p.alpha * (u - p.u_d[l]) - avg_z[l] - p.beta * d[l];
    double r = 0.0;
    if (u == 0.0) {
      r = std::copysign(std::max(std::abs(g) - p.beta, 0.0), g);
    } else if (u == p.beta2) {
      r = std::max(g + p.beta, 0.0);
    } else if (u == p.beta1) {
      r = std::min(g - p.beta, 0.0);
    } else {
      r = g + (u > 0.0 ? p.beta : -p.beta);
    }
    dist2 += p.areas[l] * r * r;
  }
  return dist2 / (2.0 * p.alpha);
}

NewtonSystem assemble_newton_system(const ControlProblem& p, const Partition& partition,
                                    const P0Field& d) {
  const std::size_t nv = p.mesh.interior_count();
  const std::size_t nt = p.mesh.triangle_count();
  if (partition.size() != nt || d.size() != nt) {
    throw linalg::DimensionError("assemble_newton_system: partition or direction length");
  }

  std::vector<Triplet> t;
  t.reserve(2 * p.stiffness.nnz() + p.mass.nnz() + 9 * nt);
  const auto rs = p.stiffness.row_start();
  const auto ci = p.stiffness.col_index();
  const auto va = p.stiffness.values();
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t q = rs[i]; q < rs[i + 1]; ++q) {
      t.push_back({i, ci[q], va[q]});            // A-bar y
      t.push_back({nv + ci[q], nv + i, va[q]});  // A-bar^T z
    }
  }
  const auto ms = p.mass.row_start();
  const auto mc = p.mass.col_index();
  const auto mv = p.mass.values();
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t q = ms[i]; q < ms[i + 1]; ++q) t.push_back({nv + i, mc[q], mv[q]});
  }

  Vector rhs(2 * nv);
  for (std::size_t i = 0; i < nv; ++i) rhs[i] = p.load[i];
  const Vector myd = linalg::spmv(p.mass, p.y_d);
  for (std::size_t i = 0; i < nv; ++i) rhs[nv + i] = myd[i];

  // Column view of M-bar: interior vertices of each triangle.
  const SparseMatrix control_t = p.control.transpose();
  const auto cs = control_t.row_start();
  const auto cc = control_t.col_index();
  const auto cv = control_t.values();
  for (std::size_t l = 0; l < nt; ++l) {
    const SetLabel s = partition[l];
    if (pins_control(s)) {
      const double u = pinned_control(s, p);
      for (std::size_t q = cs[l]; q < cs[l + 1]; ++q) rhs[cc[q]] += cv[q] * u;
      continue;
    }
    // u_l = avg_l(z) / alpha + c_l with mu_l = +-beta
    const double sign = s == SetLabel::pos ? 1.0 : -1.0;
    const double c = (p.beta * d[l] + p.alpha * p.u_d[l] - sign * p.beta) / p.alpha;
    const double scale = 1.0 / (p.alpha * p.areas[l]);
    for (std::size_t a = cs[l]; a < cs[l + 1]; ++a) {
      rhs[cc[a]] += cv[a] * c;
      for (std::size_t b = cs[l]; b < cs[l + 1]; ++b) {
        t.push_back({cc[a], nv + cc[b], -scale * cv[a] * cv[b]});
      }
    }
  }
  return {SparseMatrix::from_triplets(2 * nv, 2 * nv, std::move(t)), std::move(rhs)};
}

KktState recover_state(const ControlProblem& p, const Partition& partition, const P0Field& d,
                       Vector yz) {
  const std::size_t nv = p.mesh.interior_count();
  const std::size_t nt = p.mesh.triangle_count();
  KktState s;
  s.y = P1Field(Vector(std::vector<double>(yz.begin(), yz.begin() + static_cast<long>(nv))));
  s.z = P1Field(Vector(std::vector<double>(yz.begin() + static_cast<long>(nv), yz.end())));
  s.u = P0Field(nt);
  s.mu = P0Field(nt);
  s.partition = partition;
  const Vector avg_z = triangle_average(p, s.z);
  for (std::size_t l = 0; l < nt; ++l) {
    const SetLabel lab = partition[l];
    if (pins_control(lab)) {
      s.u[l] = pinned_control(lab, p);
      s.mu[l] = avg_z[l] + p.beta * d[l] - p.alpha * (s.u[l] - p.u_d[l]);
    } else {
      const double sign = lab == SetLabel::pos ? 1.0 : -1.0;
      s.mu[l] = sign * p.beta;
      s.u[l] = (avg_z[l] + p.beta * d[l] + p.alpha * p.u_d[l] - s.mu[l]) / p.alpha;
    }
  }
  return s;
}

ActiveSetSolver::ActiveSetSolver(const ControlProblem& p, ActiveSetOptions options)
    : p_(p), options_(options) {}

Partition ActiveSetSolver::initial_partition() const {
  const std::size_t nt = p_.mesh.triangle_count();
  if (p_.beta > 0.0) return Partition(nt, SetLabel::zero);
  Partition part(nt);
  for (std::size_t l = 0; l < nt; ++l) {
    part[l] = p_.u_d[l] < 0.0 ? SetLabel::neg : SetLabel::pos;
  }
  return part;
}

SubproblemResult ActiveSetSolver::solve(const SubproblemSpec& spec) {
  return solve(spec, warm_.empty() ? initial_partition() : warm_);
}

SubproblemResult ActiveSetSolver::solve(const SubproblemSpec& spec, const Partition& initial) {
  if (spec.d.size() != p_.mesh.triangle_count() || initial.size() != p_.mesh.triangle_count()) {
    throw linalg::DimensionError("ActiveSetSolver::solve: spec does not match mesh");
  }
  SubproblemResult result;
  Partition partition = initial;
  const Bounds bounds{p_.beta1, p_.beta2};
  for (int it = 1; it <= options_.max_iterations; ++it) {
    NewtonSystem sys = assemble_newton_system(p_, partition, spec.d);
    Vector yz;
    try {
      yz = linalg::solve_general(sys.matrix, sys.rhs);
    } catch (const linalg::SolverError& e) {
      throw SubsolverError(std::string("active-set Newton system singular for ") +
                               describe(partition) + ": " + e.what(),
                           result.state.eta);
    }
    KktState state = recover_state(p_, partition, spec.d, std::move(yz));
    Partition next = active_set_partition(state.u, state.mu, p_.alpha, p_.beta, bounds);
    state.eta = kkt_residual(p_, state, spec.d).eta();
    const double cert = certify_epsilon(p_, state, spec.d);

    result.iterations = it;
    result.history.push_back({it, state.eta, cert, count(state.partition)});
    result.certified_eps = cert;
    result.converged = next == partition;
    result.state = std::move(state);

    const bool certified = result.state.eta <= spec.target_eta && cert <= spec.eps;
    if (result.converged || certified) break;
    partition = std::move(next);
    if (it == options_.max_iterations) {
      throw SubsolverError("active-set method: no convergence after " +
                               std::to_string(options_.max_iterations) +
                               " iterations, eta = " + std::to_string(result.state.eta),
                           result.state.eta);
    }
  }
  warm_ = result.state.partition;
  log_.push_back({static_cast<int>(log_.size()), result.iterations, result.state.eta,
                  result.certified_eps, count(result.state.partition)});
  return result;
}

void ActiveSetSolver::write_log_csv(std::ostream& out) const {
  out << "outer,iterations,eta,certified_eps,lower,zero,upper,neg,pos\n";
  char buf[256];
  for (const LogLine& l : log_) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%ld,%ld,%ld,%ld,%ld\n", l.outer,
                  l.iterations, l.eta, l.certified_eps, l.counts.lower, l.counts.zero,
                  l.counts.upper, l.counts.neg, l.counts.pos);
    out << buf;
  }
}

SubproblemResult solve_subproblem(const ControlProblem& p, const SubproblemSpec& spec) {
  ActiveSetSolver solver(p);
  return solver.solve(spec);
}

}  // namespace dcflow::subsolver
