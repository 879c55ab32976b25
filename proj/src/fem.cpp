#include "dcflow/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace dcflow::fem {

Triangulation::Triangulation(int m) : m_(m), h_(0.0), area_(0.0) {
  if (m < 2) throw std::invalid_argument("Triangulation: m must be >= 2");
  h_ = 1.0 / m;
  area_ = 0.5 * h_ * h_;
  const std::size_t side = static_cast<std::size_t>(m) + 1;
  vertices_.reserve(side * side);
  interior_index_.assign(side * side, -1);
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      // i * h drifts at i = m; keep the boundary exactly at 1
      vertices_.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
      if (i > 0 && j > 0 && i + 1 < side && j + 1 < side) {
        interior_index_[i + j * side] = static_cast<long>(interior_vertices_.size());
        interior_vertices_.push_back(i + j * side);
      }
    }
  }
  const auto mm = static_cast<std::size_t>(m);
  triangles_.reserve(2 * mm * mm);
  for (std::size_t j = 0; j < mm; ++j) {
    for (std::size_t i = 0; i < mm; ++i) {
      const std::size_t v00 = i + j * side;
      const std::size_t v10 = v00 + 1;
      const std::size_t v01 = v00 + side;
      const std::size_t v11 = v01 + 1;
      triangles_.push_back({v00, v10, v01});
      triangles_.push_back({v10, v11, v01});
    }
  }
}

Point Triangulation::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  Point c;
  for (std::size_t v : tri) {
    c.x += vertices_[v].x;
    c.y += vertices_[v].y;
  }
  c.x /= 3.0;
  c.y /= 3.0;
  return c;
}

std::size_t Triangulation::locate(Point p) const {
  const int i = std::clamp(static_cast<int>(std::floor(p.x * m_)), 0, m_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.y * m_)), 0, m_ - 1);
  const double lx = p.x * m_ - i;
  const double ly = p.y * m_ - j;
  const std::size_t cell = static_cast<std::size_t>(i + j * m_);
  return 2 * cell + (lx + ly < 1.0 ? 0 : 1);
}

Triangulation build_mesh(int m) { return Triangulation(m); }

EllipticCoefficients EllipticCoefficients::laplacian() {
  return {[](double, double) { return std::array<double, 3>{1.0, 0.0, 1.0}; },
          [](double, double) { return 0.0; }};
}

namespace {

// Gradients of the three barycentric coordinates on a triangle.
std::array<std::array<double, 2>, 3> barycentric_gradients(const Point& p0, const Point& p1,
                                                            const Point& p2) {
  const double b00 = p1.x - p0.x, b01 = p2.x - p0.x;
  const double b10 = p1.y - p0.y, b11 = p2.y - p0.y;
  const double det = b00 * b11 - b01 * b10;
  // rows of B^{-1}
  const std::array<double, 2> g1{b11 / det, -b01 / det};
  const std::array<double, 2> g2{-b10 / det, b00 / det};
  return {{{-g1[0] - g2[0], -g1[1] - g2[1]}, g1, g2}};
}

template <class Local>
SparseMatrix assemble_p1_pairs(const Triangulation& mesh, Local&& local) {
  std::vector<linalg::Triplet> t;
  t.reserve(9 * mesh.triangle_count());
  for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
    const auto& tri = mesh.triangle(k);
    const auto ke = local(k);
    for (std::size_t a = 0; a < 3; ++a) {
      const long ia = mesh.interior_index(tri[a]);
      if (ia < 0) continue;
      for (std::size_t b = 0; b < 3; ++b) {
        const long ib = mesh.interior_index(tri[b]);
        if (ib < 0) continue;
        t.push_back({static_cast<std::size_t>(ia), static_cast<std::size_t>(ib), ke[a][b]});
      }
    }
  }
  const std::size_t n = mesh.interior_count();
  return SparseMatrix::from_triplets(n, n, std::move(t), true);
}

using Local3 = std::array<std::array<double, 3>, 3>;

Local3 element_mass(double area) {
  Local3 me{};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) me[a][b] = area / 12.0 * (a == b ? 2.0 : 1.0);
  }
  return me;
}

}  // namespace

SparseMatrix assemble_stiffness(const Triangulation& mesh, const EllipticCoefficients& coeff) {
  return assemble_p1_pairs(mesh, [&](std::size_t k) {
    const auto& tri = mesh.triangle(k);
    const auto grads =
        barycentric_gradients(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
    const Point c = mesh.centroid(k);
    const auto d = coeff.diffusion(c.x, c.y);
    const double a0 = coeff.reaction(c.x, c.y);
    const double area = mesh.area(k);
    Local3 ke = element_mass(area);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        const auto& ga = grads[a];
        const auto& gb = grads[b];
        const double flux = ga[0] * (d[0] * gb[0] + d[1] * gb[1]) +
                            ga[1] * (d[1] * gb[0] + d[2] * gb[1]);
        ke[a][b] = area * flux + a0 * ke[a][b];
      }
    }
    return ke;
  });
}

SparseMatrix assemble_mass(const Triangulation& mesh) {
  return assemble_p1_pairs(mesh, [&](std::size_t k) { return element_mass(mesh.area(k)); });
}

SparseMatrix assemble_control_operator(const Triangulation& mesh) {
  std::vector<linalg::Triplet> t;
  t.reserve(3 * mesh.triangle_count());
  for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
    for (std::size_t v : mesh.triangle(k)) {
      const long i = mesh.interior_index(v);
      if (i >= 0) t.push_back({static_cast<std::size_t>(i), k, mesh.area(k) / 3.0});
    }
  }
  return SparseMatrix::from_triplets(mesh.interior_count(), mesh.triangle_count(), std::move(t));
}

P1Field interpolate_p1(const Triangulation& mesh, const ScalarFunction& f) {
  P1Field y(mesh.interior_count());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Point& p = mesh.vertex(mesh.interior_vertex(i));
    y[i] = f(p.x, p.y);
  }
  return y;
}

P0Field project_p0(const Triangulation& mesh, const ScalarFunction& f) {
  P0Field u(mesh.triangle_count());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Point c = mesh.centroid(k);
    u[k] = f(c.x, c.y);
  }
  return u;
}

Vector load_vector(const Triangulation& mesh, const ScalarFunction& f) {
  std::vector<double> nodal(mesh.vertex_count());
  for (std::size_t v = 0; v < nodal.size(); ++v) nodal[v] = f(mesh.vertex(v).x, mesh.vertex(v).y);
  Vector b(mesh.interior_count());
  for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
    const auto& tri = mesh.triangle(k);
    const Local3 me = element_mass(mesh.area(k));
    for (std::size_t a = 0; a < 3; ++a) {
      const long ia = mesh.interior_index(tri[a]);
      if (ia < 0) continue;
      for (std::size_t c = 0; c < 3; ++c) b[static_cast<std::size_t>(ia)] += me[a][c] * nodal[tri[c]];
    }
  }
  return b;
}

Vector triangle_areas(const Triangulation& mesh) {
  Vector a(mesh.triangle_count());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = mesh.area(k);
  return a;
}

double norm_l2_p1(const SparseMatrix& mass, const P1Field& y) {
  return std::sqrt(std::max(0.0, linalg::dot(y, linalg::spmv(mass, y))));
}

double norm_l2_p1(const Triangulation& mesh, const P1Field& y) {
  return norm_l2_p1(assemble_mass(mesh), y);
}

double inner_p0(const Triangulation& mesh, const P0Field& a, const P0Field& b) {
  if (a.size() != mesh.triangle_count() || b.size() != mesh.triangle_count()) {
    throw linalg::DimensionError("inner_p0: field length does not match mesh");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k] * mesh.area(k);
  return s;
}

double norm_l2_p0(const Triangulation& mesh, const P0Field& u) {
  return std::sqrt(inner_p0(mesh, u, u));
}

double norm_l1_p0(const Triangulation& mesh, const P0Field& u) {
  if (u.size() != mesh.triangle_count()) {
    throw linalg::DimensionError("norm_l1_p0: field length does not match mesh");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += std::abs(u[k]) * mesh.area(k);
  return s;
}

double norm_linf_p0(const P0Field& u) { return linalg::norm_inf(u); }

P0Field restrict_p0(const Triangulation& fine, const Triangulation& coarse, const P0Field& u) {
  if (fine.m() % coarse.m() != 0) {
    throw std::invalid_argument("restrict_p0: meshes are not nested");
  }
  if (u.size() != fine.triangle_count()) {
    throw linalg::DimensionError("restrict_p0: field length does not match fine mesh");
  }
  P0Field out(coarse.triangle_count());
  Vector weight(coarse.triangle_count());
  for (std::size_t k = 0; k < fine.triangle_count(); ++k) {
    const std::size_t c = coarse.locate(fine.centroid(k));
    out[c] += u[k] * fine.area(k);
    weight[c] += fine.area(k);
  }
  for (std::size_t c = 0; c < out.size(); ++c) out[c] /= weight[c];
  return out;
}

void write_p1_csv(const Triangulation& mesh, const P1Field& y, std::ostream& out) {
  out << "x,y,value\n";
  char buf[128];
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const long i = mesh.interior_index(v);
    const double value = i < 0 ? 0.0 : y[static_cast<std::size_t>(i)];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", mesh.vertex(v).x, mesh.vertex(v).y,
                  value);
    out << buf;
  }
}

void write_p0_csv(const Triangulation& mesh, const P0Field& u, std::ostream& out) {
  out << "x,y,value\n";
  char buf[128];
  for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
    const Point c = mesh.centroid(k);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", c.x, c.y, u[k]);
    out << buf;
  }
}

}  // namespace dcflow::fem
