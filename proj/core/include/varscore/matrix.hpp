#pragma once

// Dense linear-algebra kernels for moderate sizes (up to a few thousand).
// Row-major storage, value semantics, no external dependencies.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace varscore {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix diag(const std::vector<double>& d);
  static Matrix column(const std::vector<double>& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  // Rectangular gather: result(i,j) = (*this)(row_idx[i], col_idx[j]).
  Matrix submatrix(const std::vector<std::size_t>& row_idx,
                   const std::vector<std::size_t>& col_idx) const;

  std::vector<double> row_vector(std::size_t i) const;
  std::vector<double> col_vector(std::size_t j) const;

  double max_abs() const;  // entry-wise infinity norm
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SymEig {
  std::vector<double> eigenvalues;  // sorted descending
  Matrix eigenvectors;              // orthogonal, columns match eigenvalues
};

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(std::size_t pivot, double magnitude);
  std::size_t pivot_index;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations);
  std::size_t iterations;
};

Matrix mat_mul(const Matrix& a, const Matrix& b);

// Matrix times vector, returned as a plain vector.
std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x);

// Partial-pivot LU solve of a x = b (b may have several columns).
// Throws SingularMatrixError when a pivot falls below 1e-12 * ||a||_inf.
Matrix solve_linear(const Matrix& a, const Matrix& b);

Matrix inverse(const Matrix& a);

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
// Input must be symmetric within sym_tol; at most 100 sweeps.
SymEig sym_eig(const Matrix& s, double sym_tol = 1e-10);

// Symmetric PSD square root via sym_eig; eigenvalues in [-1e-10, 0) are
// clamped to zero, anything lower is rejected.
Matrix sym_sqrt(const Matrix& s);

// Largest singular value by power iteration on a^T a.
double operator_norm(const Matrix& a, double tol = 1e-10);

// Spectral-radius estimate via ||a^k||_2^{1/k} with repeated squaring.
double spectral_radius_estimate(const Matrix& a, std::size_t squarings = 6);

// Discrete Lyapunov fixed point S = f S f^T + q by doubling iteration.
// Requires spectral radius of f below one and symmetric PSD q.
Matrix lyapunov_solve(const Matrix& f, const Matrix& q, double tol = 1e-12);

}  // namespace varscore
