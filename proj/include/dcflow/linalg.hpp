#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcflow::linalg {

/// Fixed-length dense vector of real coefficients.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0) : data_(n, value) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& raw() const { return data_; }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s);

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double s, Vector a);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);
/// y <- y + a*x
void axpy(double a, const Vector& x, Vector& y);
bool all_finite(const Vector& a);

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; explicit zeros are kept only if assembled.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_start,
               std::vector<std::size_t> col_index, std::vector<double> values,
               bool symmetric = false);

  /// Sums duplicate entries. `symmetric` asserts A == A^T; it is not verified.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets, bool symmetric = false);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(const Vector& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool symmetric() const { return symmetric_; }

  std::span<const std::size_t> row_start() const { return row_start_; }
  std::span<const std::size_t> col_index() const { return col_index_; }
  std::span<const double> values() const { return values_; }

  /// Entry lookup by binary search; zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  Vector diag() const;
  SparseMatrix transpose() const;
  std::vector<std::vector<double>> to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

Vector spmv(const SparseMatrix& a, const Vector& x);
/// y = A^T x without forming the transpose.
Vector spmv_transpose(const SparseMatrix& a, const Vector& x);

/// Jacobi-preconditioned conjugate gradients. Returns x with
/// ||Ax - b|| <= tol * max(||b||, 1); iteration cap 10 n.
Vector solve_spd(const SparseMatrix& a, const Vector& b, double tol);

/// Direct solve of a square nonsingular system. Guarantees
/// ||Ax - b|| <= 1e-10 * max(||b||, 1) or throws.
Vector solve_general(const SparseMatrix& a, const Vector& b);

}  // namespace dcflow::linalg
