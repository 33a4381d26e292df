#include "varscore/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace varscore {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: entries length does not match rows*cols");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const std::vector<double>& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::column(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw std::out_of_range("Matrix::block out of range");
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

Matrix Matrix::submatrix(const std::vector<std::size_t>& row_idx,
                         const std::vector<std::size_t>& col_idx) const {
  Matrix b(row_idx.size(), col_idx.size());
  for (std::size_t i = 0; i < row_idx.size(); ++i) {
    if (row_idx[i] >= rows_) throw std::out_of_range("Matrix::submatrix row index");
    for (std::size_t j = 0; j < col_idx.size(); ++j) {
      if (col_idx[j] >= cols_) throw std::out_of_range("Matrix::submatrix col index");
      b(i, j) = (*this)(row_idx[i], col_idx[j]);
    }
  }
  return b;
}

std::vector<double> Matrix::row_vector(std::size_t i) const {
  return std::vector<double>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
}

std::vector<double> Matrix::col_vector(std::size_t j) const {
  std::vector<double> v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::fabs(x));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

SingularMatrixError::SingularMatrixError(std::size_t pivot, double magnitude)
    : std::runtime_error("singular matrix: pivot " + std::to_string(pivot) +
                         " has magnitude " + std::to_string(magnitude)),
      pivot_index(pivot) {}

ConvergenceError::ConvergenceError(const std::string& what, std::size_t iters)
    : std::runtime_error(what + " (after " + std::to_string(iters) + " iterations)"),
      iterations(iters) {}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("mat_mul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("mat_vec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_linear: matrix not square");
  if (a.rows() != b.rows()) throw std::invalid_argument("solve_linear: rhs rows mismatch");
  const std::size_t n = a.rows();
  const double scale = a.max_abs();
  const double pivot_floor = 1e-12 * (scale > 0.0 ? scale : 1.0);

  Matrix lu = a;
  Matrix x = b;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(lu(i, k));
      if (v > best) { best = v; piv = i; }
    }
    if (best <= pivot_floor) throw SingularMatrixError(k, best);
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    const double inv_piv = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu(i, k) * inv_piv;
      lu(i, k) = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= m * x(k, j);
    }
  }
  // back substitution
  for (std::size_t jc = 0; jc < x.cols(); ++jc) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, jc);
      for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * x(j, jc);
      x(ii, jc) = s / lu(ii, ii);
    }
  }
  return x;
}

Matrix inverse(const Matrix& a) { return solve_linear(a, Matrix::identity(a.rows())); }

SymEig sym_eig(const Matrix& s, double sym_tol) {
  if (s.rows() != s.cols()) throw std::invalid_argument("sym_eig: matrix not square");
  const std::size_t n = s.rows();
  const double scale = s.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(s(i, j) - s(j, i)) > sym_tol * std::max(1.0, scale))
        throw std::invalid_argument("sym_eig: input not symmetric");

  Matrix a = s;
  Matrix q = Matrix::identity(n);
  const std::size_t max_sweeps = 100;
  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-14 * std::max(1.0, scale)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apq = a(p, r);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akr = a(k, r);
          a(k, p) = c * akp - sn * akr;
          a(k, r) = sn * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), ark = a(r, k);
          a(p, k) = c * apk - sn * ark;
          a(r, k) = sn * apk + c * ark;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p), qkr = q(k, r);
          q(k, p) = c * qkp - sn * qkr;
          q(k, r) = sn * qkp + c * qkr;
        }
      }
    }
  }
  if (sweep == max_sweeps) throw ConvergenceError("sym_eig: Jacobi sweeps exhausted", sweep);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = q(i, order[j]);
  }
  return out;
}

Matrix sym_sqrt(const Matrix& s) {
  SymEig eig = sym_eig(s);
  const std::size_t n = s.rows();
  std::vector<double> roots(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = eig.eigenvalues[i];
    if (lam < -1e-10 * std::max(1.0, s.max_abs()))
      throw std::invalid_argument("sym_sqrt: matrix is not positive semi-definite");
    roots[i] = std::sqrt(std::max(lam, 0.0));
  }
  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += eig.eigenvectors(i, k) * roots[k] * eig.eigenvectors(j, k);
      r(i, j) = acc;
    }
  return r;
}

double operator_norm(const Matrix& a, double tol) {
  if (a.max_abs() == 0.0) return 0.0;
  const std::size_t n = a.cols();
  // power iteration on a^T a with a deterministic start
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.001 * static_cast<double>(i % 17);
  double norm_v = 0.0;
  for (double x : v) norm_v += x * x;
  norm_v = std::sqrt(norm_v);
  for (double& x : v) x /= norm_v;

  double prev = 0.0;
  const std::size_t max_iter = 100000;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<double> av = mat_vec(a, v);
    // w = a^T (a v)
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double avi = av[i];
      if (avi == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) w[j] += a(i, j) * avi;
    }
    double nw = 0.0;
    for (double x : w) nw += x * x;
    nw = std::sqrt(nw);
    if (nw == 0.0) return 0.0;
    const double sigma2 = nw;  // Rayleigh quotient since ||v|| = 1
    for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / nw;
    const double sigma = std::sqrt(sigma2);
    if (it > 0 && std::fabs(sigma - prev) <= tol * std::max(1.0, sigma)) return sigma;
    prev = sigma;
  }
  return prev;  // best estimate; power iteration stalls only on ties, where prev is exact
}

double spectral_radius_estimate(const Matrix& a, std::size_t squarings) {
  if (a.rows() != a.cols()) throw std::invalid_argument("spectral_radius_estimate: not square");
  // rho(a) ~ ||a^(2^s)||_2^(1/2^s); track a^power = exp(log_scale) * p to avoid overflow
  Matrix p = a;
  double log_scale = 0.0;
  double power = 1.0;
  for (std::size_t s = 0; s < squarings; ++s) {
    const double c = p.max_abs();
    if (c == 0.0) return 0.0;
    p *= 1.0 / c;
    log_scale += std::log(c);
    p = mat_mul(p, p);
    log_scale *= 2.0;
    power *= 2.0;
  }
  const double nm = operator_norm(p);
  if (nm == 0.0) return 0.0;
  return std::exp((std::log(nm) + log_scale) / power);
}

Matrix lyapunov_solve(const Matrix& f, const Matrix& q, double tol) {
  if (f.rows() != f.cols() || q.rows() != q.cols() || f.rows() != q.rows())
    throw std::invalid_argument("lyapunov_solve: shape mismatch");
  Matrix s = q;
  Matrix fk = f;
  const double q_scale = std::max(1.0, q.max_abs());
  std::size_t grow_streak = 0;
  double prev_update = -1.0;
  const std::size_t max_iter = 200;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Matrix update = mat_mul(fk, mat_mul(s, fk.transpose()));
    const double unorm = update.max_abs();
    s += update;
    if (unorm <= tol * q_scale) {
      // symmetrize against drift
      Matrix sym(s.rows(), s.cols());
      for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) sym(i, j) = 0.5 * (s(i, j) + s(j, i));
      return sym;
    }
    if (prev_update >= 0.0 && unorm > prev_update) {
      if (++grow_streak >= 5)
        throw ConvergenceError("lyapunov_solve: iteration diverging (unstable f)", it);
    } else {
      grow_streak = 0;
    }
    prev_update = unorm;
    fk = mat_mul(fk, fk);
    if (!fk.all_finite() || !s.all_finite())
      throw ConvergenceError("lyapunov_solve: overflow (unstable f)", it);
  }
  throw ConvergenceError("lyapunov_solve: no convergence", max_iter);
}

}  // namespace varscore
