#pragma once

// Independent reference computations for the tests. Everything here is dense
// and written from first principles; none of it calls the library solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, Vec(c, 0.0)); }

inline Vec matvec(const Dense& a, const Vec& x) {
  Vec y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

inline Vec matvec_t(const Dense& a, const Vec& x) {
  Vec y(a.empty() ? 0 : a[0].size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += a[i][j] * x[i];
  }
  return y;
}

/// Gaussian elimination with partial pivoting.
inline Vec lu_solve(Dense a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (a[piv][k] == 0.0) throw std::runtime_error("oracle::lu_solve: singular");
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

inline Vec cholesky_solve(const Dense& a, const Vec& b) {
  const std::size_t n = b.size();
  Dense l = zeros(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (!(d > 0.0)) throw std::runtime_error("oracle::cholesky_solve: not SPD");
    l[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  Vec y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k][i] * x[k];
    x[i] = s / l[i][i];
  }
  return x;
}

/// Columns of A^{-1} B.
inline Dense solve_columns(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  const std::size_t c = b.empty() ? 0 : b[0].size();
  Dense x = zeros(n, c);
  for (std::size_t j = 0; j < c; ++j) {
    Vec col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = b[i][j];
    const Vec s = cholesky_solve(a, col);
    for (std::size_t i = 0; i < n; ++i) x[i][j] = s[i];
  }
  return x;
}

/// Series solution of -Laplace y = 1 on the unit square, odd modes up to 2*modes-1.
inline double poisson_series(double x, double y, int modes = 200) {
  const double pi = std::numbers::pi;
  std::vector<double> sx(modes), sy(modes);
  for (int k = 0; k < modes; ++k) {
    const int n = 2 * k + 1;
    sx[k] = std::sin(n * pi * x) / n;
    sy[k] = std::sin(n * pi * y) / n;
  }
  double s = 0.0;
  for (int a = 0; a < modes; ++a) {
    const double na = 2 * a + 1;
    for (int b = 0; b < modes; ++b) {
      const double nb = 2 * b + 1;
      s += sx[a] * sy[b] / (na * na + nb * nb);
    }
  }
  return 16.0 / (pi * pi * pi * pi) * s;
}

/// Element-by-element P1/P0 operators on the anti-diagonal split of the unit
/// square with m cells per side, built from vertex coordinates alone.
struct ElementOperators {
  int m = 0;
  std::size_t nv = 0;  ///< interior vertices
  std::size_t nt = 0;
  Dense stiffness, mass, control;
  Vec areas;
  std::vector<std::array<std::array<double, 2>, 3>> coords;
  std::vector<std::array<long, 3>> interior;  ///< -1 on the boundary
};

inline ElementOperators element_operators(int m) {
  ElementOperators e;
  e.m = m;
  e.nv = static_cast<std::size_t>((m - 1) * (m - 1));
  e.nt = static_cast<std::size_t>(2 * m * m);
  e.stiffness = zeros(e.nv, e.nv);
  e.mass = zeros(e.nv, e.nv);
  e.control = zeros(e.nv, e.nt);
  const double h = 1.0 / m;
  auto idx = [m](int i, int j) -> long {
    if (i <= 0 || j <= 0 || i >= m || j >= m) return -1;
    return (i - 1) + static_cast<long>(j - 1) * (m - 1);
  };
  e.coords.resize(e.nt);
  e.interior.resize(e.nt);
  e.areas.resize(e.nt);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const std::array<std::array<int, 2>, 3> t0{{{i, j}, {i + 1, j}, {i, j + 1}}};
      const std::array<std::array<int, 2>, 3> t1{{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
      for (int s = 0; s < 2; ++s) {
        const auto& tv = s == 0 ? t0 : t1;
        const std::size_t t = static_cast<std::size_t>(2 * (i + j * m) + s);
        for (int a = 0; a < 3; ++a) {
          e.coords[t][a] = {tv[a][0] * h, tv[a][1] * h};
          e.interior[t][a] = idx(tv[a][0], tv[a][1]);
        }
      }
    }
  }
  for (std::size_t t = 0; t < e.nt; ++t) {
    const auto& c = e.coords[t];
    const double x1 = c[1][0] - c[0][0], y1 = c[1][1] - c[0][1];
    const double x2 = c[2][0] - c[0][0], y2 = c[2][1] - c[0][1];
    const double det = x1 * y2 - x2 * y1;
    const double area = std::abs(det) / 2.0;
    e.areas[t] = area;
    // gradients of the barycentric coordinates
    std::array<std::array<double, 2>, 3> g;
    g[1] = {y2 / det, -x2 / det};
    g[2] = {-y1 / det, x1 / det};
    g[0] = {-g[1][0] - g[2][0], -g[1][1] - g[2][1]};
    // barycentric coordinates at the edge midpoints; exact for quadratics
    const double mid[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    for (int a = 0; a < 3; ++a) {
      const long ia = e.interior[t][a];
      if (ia < 0) continue;
      // one-point centroid rule is exact for the linear basis function
      e.control[ia][t] += area * (1.0 / 3.0);
      for (int b = 0; b < 3; ++b) {
        const long ib = e.interior[t][b];
        if (ib < 0) continue;
        e.stiffness[ia][ib] += area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        double q = 0.0;
        for (const auto& pt : mid) q += pt[a] * pt[b];
        e.mass[ia][ib] += area * q / 3.0;
      }
    }
  }
  return e;
}

}  // namespace oracle
