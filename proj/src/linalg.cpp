#include "dcflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace dcflow::linalg {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw DimensionError(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

Vector& Vector::operator+=(const Vector& other) {
  require_same_size(size(), other.size(), "Vector::operator+=");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_size(size(), other.size(), "Vector::operator-=");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double s, Vector a) { return a *= s; }

double dot(const Vector& a, const Vector& b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double a, const Vector& x, Vector& y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

bool all_finite(const Vector& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_start,
                           std::vector<std::size_t> col_index, std::vector<double> values,
                           bool symmetric)
    : rows_(rows),
      cols_(cols),
      row_start_(std::move(row_start)),
      col_index_(std::move(col_index)),
      values_(std::move(values)),
      symmetric_(symmetric) {
  if (row_start_.size() != rows_ + 1 || row_start_.front() != 0 ||
      row_start_.back() != col_index_.size() || col_index_.size() != values_.size()) {
    throw DimensionError("SparseMatrix: inconsistent CSR arrays");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_start_[i] > row_start_[i + 1]) {
      throw std::invalid_argument("SparseMatrix: row offsets decrease at row " +
                                  std::to_string(i));
    }
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      if (col_index_[p] >= cols_ || (p > row_start_[i] && col_index_[p] <= col_index_[p - 1])) {
        throw std::invalid_argument("SparseMatrix: bad column order in row " +
                                    std::to_string(i));
      }
      if (!std::isfinite(values_[p])) {
        throw std::invalid_argument("SparseMatrix: non-finite value in row " +
                                    std::to_string(i));
      }
    }
  }
  if (symmetric_ && rows_ != cols_) {
    throw std::invalid_argument("SparseMatrix: rectangular matrix flagged symmetric");
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets, bool symmetric) {
  // stable: duplicates are summed in insertion order, so (i,j) and (j,i) match bitwise
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_start(rows + 1, 0);
  std::vector<std::size_t> col_index;
  std::vector<double> values;
  col_index.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    const Triplet& e = triplets[t];
    if (e.row >= rows || e.col >= cols) {
      throw DimensionError("SparseMatrix::from_triplets: entry out of range");
    }
    if (t > 0 && triplets[t - 1].row == e.row && triplets[t - 1].col == e.col) {
      values.back() += e.value;
      continue;
    }
    col_index.push_back(e.col);
    values.push_back(e.value);
    ++row_start[e.row + 1];
  }
  std::partial_sum(row_start.begin(), row_start.end(), row_start.begin());
  return SparseMatrix(rows, cols, std::move(row_start), std::move(col_index), std::move(values),
                      symmetric);
}

SparseMatrix SparseMatrix::identity(std::size_t n) { return diagonal(Vector(n, 1.0)); }

SparseMatrix SparseMatrix::diagonal(const Vector& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> row_start(n + 1);
  std::iota(row_start.begin(), row_start.end(), std::size_t{0});
  std::vector<std::size_t> col_index(n);
  std::iota(col_index.begin(), col_index.end(), std::size_t{0});
  return SparseMatrix(n, n, std::move(row_start), std::move(col_index), d.raw(), true);
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_index_.begin() + static_cast<std::ptrdiff_t>(row_start_[i]);
  const auto last = col_index_.begin() + static_cast<std::ptrdiff_t>(row_start_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_index_.begin())];
}

Vector SparseMatrix::diag() const {
  Vector d(std::min(rows_, cols_));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      t.push_back({col_index_[p], i, values_[p]});
    }
  }
  return from_triplets(cols_, rows_, std::move(t), symmetric_);
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      d[i][col_index_[p]] = values_[p];
    }
  }
  return d;
}

Vector spmv(const SparseMatrix& a, const Vector& x) {
  require_same_size(a.cols(), x.size(), "spmv");
  const auto rs = a.row_start();
  const auto ci = a.col_index();
  const auto v = a.values();
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t p = rs[i]; p < rs[i + 1]; ++p) s += v[p] * x[ci[p]];
    y[i] = s;
  }
  return y;
}

Vector spmv_transpose(const SparseMatrix& a, const Vector& x) {
  require_same_size(a.rows(), x.size(), "spmv_transpose");
  const auto rs = a.row_start();
  const auto ci = a.col_index();
  const auto v = a.values();
  Vector y(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = rs[i]; p < rs[i + 1]; ++p) y[ci[p]] += v[p] * x[i];
  }
  return y;
}

Vector solve_spd(const SparseMatrix& a, const Vector& b, double tol) {
  if (a.rows() != a.cols()) throw DimensionError("solve_spd: matrix not square");
  require_same_size(a.rows(), b.size(), "solve_spd");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_spd: tol must be positive");

  const std::size_t n = b.size();
  const double target = tol * std::max(norm2(b), 1.0);
  Vector inv_diag = a.diag();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0)) {
      throw SolverError("solve_spd: nonpositive diagonal at row " + std::to_string(i), 0.0);
    }
    inv_diag[i] = 1.0 / inv_diag[i];
  }

  Vector x(n);
  Vector r = b;
  double rnorm = norm2(r);
  if (rnorm <= target) return x;

  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  Vector p = z;
  double rz = dot(r, z);
  const std::size_t cap = 10 * std::max<std::size_t>(n, 1);
  for (std::size_t it = 0; it < cap; ++it) {
    const Vector ap = spmv(a, p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      throw SolverError("solve_spd: matrix not positive definite", rnorm);
    }
    const double step = rz / pap;
    axpy(step, p, x);
    axpy(-step, ap, r);
    rnorm = norm2(r);
    if (rnorm <= target) {
      // recurrence drift: confirm against the true residual
      Vector true_r = b - spmv(a, x);
      const double true_norm = norm2(true_r);
      if (true_norm <= target) return x;
      r = std::move(true_r);
      rnorm = true_norm;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("solve_spd: no convergence after " + std::to_string(cap) +
                        " iterations, residual " + std::to_string(rnorm),
                    rnorm);
}

Vector solve_general(const SparseMatrix& a, const Vector& b) {
  if (a.rows() != a.cols()) throw DimensionError("solve_general: matrix not square");
  require_same_size(a.rows(), b.size(), "solve_general");
  const auto n = static_cast<Eigen::Index>(a.rows());

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nnz());
  const auto rs = a.row_start();
  const auto ci = a.col_index();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = rs[i]; p < rs[i + 1]; ++p) {
      t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ci[p]), v[p]);
    }
  }
  Eigen::SparseMatrix<double> mat(n, n);
  mat.setFromTriplets(t.begin(), t.end());
  mat.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(mat);
  lu.factorize(mat);
  if (lu.info() != Eigen::Success) {
    throw SolverError("solve_general: singular matrix (" + lu.lastErrorMessage() + ")", 0.0);
  }

  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
  Eigen::VectorXd sol = lu.solve(rhs);
  const double target = 1e-10 * std::max(rhs.norm(), 1.0);
  double res = (rhs - mat * sol).norm();
  for (int refine = 0; refine < 3 && res > target && std::isfinite(res); ++refine) {
    sol += lu.solve(rhs - mat * sol);
    res = (rhs - mat * sol).norm();
  }
  if (!(res <= target)) {
    throw SolverError("solve_general: residual " + std::to_string(res) +
                          " above bound (matrix numerically singular)",
                      res);
  }
  return Vector(std::vector<double>(sol.data(), sol.data() + n));
}

}  // namespace dcflow::linalg
