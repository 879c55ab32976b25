#pragma once

// Dense reduced form of a discretized control problem, used as an oracle for
// the sparse pipeline. Only the assembled matrices are taken from the
// library; every solve is dense.

#include <cmath>
#include <limits>

#include "dcflow/pdeco.hpp"
#include "oracles.hpp"

namespace oracle {

struct DenseProblem {
  Dense a, mass, control;
  Vec areas, y_d, u_d, load;
  double alpha = 0.0, beta = 0.0, beta1 = 0.0, beta2 = 0.0;
  Dense s;  ///< A^{-1} M-bar
  Vec w;    ///< A^{-1} phi^h
};

inline DenseProblem dense_problem(const dcflow::pdeco::ControlProblem& p) {
  DenseProblem d;
  d.a = p.stiffness.to_dense();
  d.mass = p.mass.to_dense();
  d.control = p.control.to_dense();
  d.areas = p.areas.raw();
  d.y_d = p.y_d.raw();
  d.u_d = p.u_d.raw();
  d.load = p.load.raw();
  d.alpha = p.alpha;
  d.beta = p.beta;
  d.beta1 = p.beta1;
  d.beta2 = p.beta2;
  d.s = solve_columns(d.a, d.control);
  d.w = cholesky_solve(d.a, d.load);
  return d;
}

inline Vec state(const DenseProblem& d, const Vec& u) {
  Vec y = matvec(d.s, u);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += d.w[i];
  return y;
}

/// Subproblem objective g(u) - beta <dir, u>_{L2}; +inf outside the box.
inline double subproblem_objective(const DenseProblem& d, const Vec& u, const Vec& dir) {
  for (double v : u) {
    if (v < d.beta1 || v > d.beta2) return std::numeric_limits<double>::infinity();
  }
  Vec r = state(d, u);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= d.y_d[i];
  const Vec mr = matvec(d.mass, r);
  double f = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) f += 0.5 * r[i] * mr[i];
  for (std::size_t l = 0; l < u.size(); ++l) {
    f += d.areas[l] * (0.5 * d.alpha * (u[l] - d.u_d[l]) * (u[l] - d.u_d[l]) +
                       d.beta * std::abs(u[l]) - d.beta * dir[l] * u[l]);
  }
  return f;
}

/// Projected proximal gradient in the P0 mass metric.
inline Vec prox_gradient(const DenseProblem& d, const Vec& dir, int max_iter = 400000,
                         double step_tol = 1e-14) {
  const std::size_t nt = d.areas.size();
  // Hessian of the smooth part, premultiplied by M0^{-1}
  const Dense ms = [&] {
    Dense out = zeros(d.mass.size(), nt);
    for (std::size_t j = 0; j < nt; ++j) {
      Vec col(d.s.size());
      for (std::size_t i = 0; i < col.size(); ++i) col[i] = d.s[i][j];
      const Vec mc = matvec(d.mass, col);
      for (std::size_t i = 0; i < col.size(); ++i) out[i][j] = mc[i];
    }
    return out;
  }();
  Dense h = zeros(nt, nt);
  for (std::size_t a = 0; a < nt; ++a) {
    for (std::size_t b = 0; b < nt; ++b) {
      double v = 0.0;
      for (std::size_t i = 0; i < d.s.size(); ++i) v += d.s[i][a] * ms[i][b];
      h[a][b] = v / d.areas[a];
    }
    h[a][a] += d.alpha;
  }
  // largest eigenvalue by power iteration
  Vec x(nt, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vec y = matvec(h, x);
    double n = 0.0;
    for (double v : y) n += v * v;
    n = std::sqrt(n);
    lambda = n;
    for (std::size_t i = 0; i < nt; ++i) x[i] = y[i] / n;
  }
  const double t = 1.0 / (1.05 * lambda);

  // affine part of the metric gradient
  Vec off(d.y_d.size());
  for (std::size_t i = 0; i < off.size(); ++i) off[i] = d.w[i] - d.y_d[i];
  const Vec moff = matvec(d.mass, off);
  const Vec soff = matvec_t(d.s, moff);
  Vec c(nt);
  for (std::size_t l = 0; l < nt; ++l) {
    c[l] = soff[l] / d.areas[l] - d.alpha * d.u_d[l] - d.beta * dir[l];
  }

  Vec u(nt, 0.0);
  for (int it = 0; it < max_iter; ++it) {
    const Vec hu = matvec(h, u);
    double change = 0.0;
    for (std::size_t l = 0; l < nt; ++l) {
      const double v = u[l] - t * (hu[l] + c[l]);
      double shrunk = std::copysign(std::max(std::abs(v) - t * d.beta, 0.0), v);
      shrunk = std::clamp(shrunk, d.beta1, d.beta2);
      change = std::max(change, std::abs(shrunk - u[l]));
      u[l] = shrunk;
    }
    if (change < step_tol) break;
  }
  return u;
}

inline double l2_p0(const DenseProblem& d, const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) s += d.areas[l] * (a[l] - b[l]) * (a[l] - b[l]);
  return std::sqrt(s);
}

}  // namespace oracle
