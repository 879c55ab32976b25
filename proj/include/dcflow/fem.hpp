#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dcflow/linalg.hpp"

namespace dcflow::fem {

using linalg::SparseMatrix;
using linalg::Vector;

/// Coefficients of a P1 state on interior vertices; boundary values are 0.
struct P1Field : Vector {
  using Vector::Vector;
  explicit P1Field(Vector v) : Vector(std::move(v)) {}
};

/// One coefficient per triangle.
struct P0Field : Vector {
  using Vector::Vector;
  explicit P0Field(Vector v) : Vector(std::move(v)) {}
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform triangulation of the unit square with m cells per side. Each cell
/// is split along its anti-diagonal into two right triangles with legs h.
///
/// Vertices are numbered row-major, v = i + j (m + 1) for the vertex at
/// (i h, j h). Cell (i, j) owns triangles 2 (i + j m) (lower-left) and
/// 2 (i + j m) + 1 (upper-right). Interior vertices are numbered row-major
/// over 1 <= i, j <= m - 1.
class Triangulation {
 public:
  explicit Triangulation(int m);

  int m() const { return m_; }
  double h() const { return h_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t interior_count() const { return interior_vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  const Point& vertex(std::size_t v) const { return vertices_[v]; }
  const std::array<std::size_t, 3>& triangle(std::size_t t) const { return triangles_[t]; }
  double area(std::size_t) const { return area_; }
  Point centroid(std::size_t t) const;

  /// Interior index of a vertex, or -1 on the boundary.
  long interior_index(std::size_t v) const { return interior_index_[v]; }
  std::size_t interior_vertex(std::size_t i) const { return interior_vertices_[i]; }

  /// Triangle containing a point strictly inside the unit square.
  std::size_t locate(Point p) const;

 private:
  int m_;
  double h_;
  double area_;
  std::vector<Point> vertices_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<long> interior_index_;
  std::vector<std::size_t> interior_vertices_;
};

Triangulation build_mesh(int m);

/// General operator -div(a grad y) + a0 y. The diffusion tensor (a11, a12,
/// a22) and a0 are sampled at triangle centroids.
struct EllipticCoefficients {
  std::function<std::array<double, 3>(double, double)> diffusion;
  std::function<double(double, double)> reaction;

  static EllipticCoefficients laplacian();
};

SparseMatrix assemble_stiffness(const Triangulation& mesh,
                                const EllipticCoefficients& coeff = EllipticCoefficients::laplacian());
SparseMatrix assemble_mass(const Triangulation& mesh);
/// (interior vertices) x (triangles), entry |T|/3 where the vertex belongs to T.
SparseMatrix assemble_control_operator(const Triangulation& mesh);

using ScalarFunction = std::function<double(double, double)>;

P1Field interpolate_p1(const Triangulation& mesh, const ScalarFunction& f);
P0Field project_p0(const Triangulation& mesh, const ScalarFunction& f);
/// Load vector (int f_I psi_i) of the nodal interpolant of f, boundary
/// values included.
Vector load_vector(const Triangulation& mesh, const ScalarFunction& f);

Vector triangle_areas(const Triangulation& mesh);

double norm_l2_p1(const SparseMatrix& mass, const P1Field& y);
double norm_l2_p1(const Triangulation& mesh, const P1Field& y);
double norm_l2_p0(const Triangulation& mesh, const P0Field& u);
double norm_l1_p0(const Triangulation& mesh, const P0Field& u);
double norm_linf_p0(const P0Field& u);
double inner_p0(const Triangulation& mesh, const P0Field& a, const P0Field& b);

/// Area-weighted average of a fine P0 field onto a nested coarse mesh.
P0Field restrict_p0(const Triangulation& fine, const Triangulation& coarse, const P0Field& u);

/// x,y,value at every vertex (boundary rows carry 0).
void write_p1_csv(const Triangulation& mesh, const P1Field& y, std::ostream& out);
/// x,y,value at every triangle centroid.
void write_p0_csv(const Triangulation& mesh, const P0Field& u, std::ostream& out);

}  // namespace dcflow::fem
