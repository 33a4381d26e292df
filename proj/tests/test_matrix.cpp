#include <doctest.h>

#include <initializer_list>

#include <cmath>
#include <vector>

#include "varscore/matrix.hpp"
#include "varscore/rng.hpp"

using namespace varscore;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

Matrix random_symmetric(std::size_t n, Rng& rng) {
  Matrix m = random_matrix(n, n, rng);
  return 0.5 * (m + m.transpose());
}

// independent entry-wise triple-loop product
Matrix naive_mul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

Matrix worked_two_node_a() {
  return Matrix(2, 2, {0.25, 0.5, 0.5, 0.25});
}

}  // namespace

TEST_CASE("mat_mul: identity passes through") {
  Rng rng(11);
  const Matrix x = random_matrix(3, 4, rng);
  CHECK(mat_mul(Matrix::identity(3), x).max_abs() == doctest::Approx(x.max_abs()));
  const Matrix y = mat_mul(Matrix::identity(3), x);
  CHECK((y - x).max_abs() == 0.0);
}

TEST_CASE("mat_mul: hand arithmetic 2x2 by column") {
  const Matrix a(2, 2, {1, 2, 3, 4});
  const Matrix v(2, 1, {0, 1});
  const Matrix out = mat_mul(a, v);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 0) == 4.0);
}

TEST_CASE("mat_mul: matches triple-loop oracle on random 5x5 pairs") {
  Rng rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix a = random_matrix(5, 5, rng);
    const Matrix b = random_matrix(5, 5, rng);
    CHECK((mat_mul(a, b) - naive_mul(a, b)).max_abs() < 1e-12);
  }
}

TEST_CASE("mat_mul: associative on random triples") {
  Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix a = random_matrix(4, 6, rng);
    const Matrix b = random_matrix(6, 3, rng);
    const Matrix c = random_matrix(3, 5, rng);
    const Matrix lhs = mat_mul(mat_mul(a, b), c);
    const Matrix rhs = mat_mul(a, mat_mul(b, c));
    CHECK((lhs - rhs).max_abs() < 1e-10 * std::max(1.0, lhs.max_abs()));
  }
}

TEST_CASE("mat_vec agrees with mat_mul on a column") {
  Rng rng(3);
  const Matrix a = random_matrix(4, 4, rng);
  std::vector<double> x{1.0, -2.0, 0.5, 3.0};
  const auto y = mat_vec(a, x);
  const Matrix ym = mat_mul(a, Matrix::column(x));
  for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(ym(i, 0)));
}

TEST_CASE("solve_linear: identity and diagonal cases") {
  const Matrix v(2, 1, {3.0, -1.0});
  CHECK((solve_linear(Matrix::identity(2), v) - v).max_abs() < 1e-14);

  const Matrix d(2, 2, {2, 0, 0, 4});
  const Matrix b(2, 1, {2, 8});
  const Matrix x = solve_linear(d, b);
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("solve_linear: residual oracle on 100 random well-conditioned systems") {
  Rng rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    Matrix a = random_matrix(8, 8, rng);
    // diagonal dominance keeps the system well conditioned
    for (std::size_t i = 0; i < 8; ++i) a(i, i) += 8.0;
    const Matrix b = random_matrix(8, 2, rng);
    const Matrix x = solve_linear(a, b);
    CHECK((mat_mul(a, x) - b).max_abs() < 1e-9);
  }
}

TEST_CASE("solve_linear: singular matrix is rejected with the pivot position") {
  const Matrix a(2, 2, {1, 2, 2, 4});
  const Matrix b(2, 1, {1, 1});
  CHECK_THROWS_AS(solve_linear(a, b), SingularMatrixError);
}

TEST_CASE("inverse: matches solve against identity") {
  Rng rng(5);
  Matrix a = random_matrix(6, 6, rng);
  for (std::size_t i = 0; i < 6; ++i) a(i, i) += 6.0;
  const Matrix inv = inverse(a);
  CHECK((mat_mul(a, inv) - Matrix::identity(6)).max_abs() < 1e-10);
}

TEST_CASE("sym_eig: diag(3,1) is axis aligned") {
  const SymEig e = sym_eig(Matrix::diag({3.0, 1.0}));
  CHECK(e.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(std::fabs(e.eigenvectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::fabs(e.eigenvectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig: two-node block matrix has eigenvalues 3/4 and -1/4") {
  const SymEig e = sym_eig(worked_two_node_a());
  CHECK(e.eigenvalues[0] == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(e.eigenvalues[1] == doctest::Approx(-0.25).epsilon(1e-10));
}

TEST_CASE("sym_eig: reconstruction and orthogonality on random symmetric 6x6") {
  Rng rng(13);
  const Matrix s = random_symmetric(6, rng);
  const SymEig e = sym_eig(s);
  const Matrix v = e.eigenvectors;
  CHECK((mat_mul(v.transpose(), v) - Matrix::identity(6)).max_abs() < 1e-9);
  const Matrix recon = mat_mul(mat_mul(v, Matrix::diag(e.eigenvalues)), v.transpose());
  CHECK((recon - s).max_abs() < 1e-9);
  for (std::size_t i = 1; i < e.eigenvalues.size(); ++i)
    CHECK(e.eigenvalues[i - 1] >= e.eigenvalues[i]);
}

TEST_CASE("sym_eig: rejects asymmetric input") {
  const Matrix a(2, 2, {1, 2, 0, 1});
  CHECK_THROWS_AS(sym_eig(a), std::invalid_argument);
}

TEST_CASE("sym_sqrt: identity, diagonal, and squaring oracle") {
  CHECK((sym_sqrt(Matrix::identity(3)) - Matrix::identity(3)).max_abs() < 1e-12);

  const Matrix r = sym_sqrt(Matrix::diag({4.0, 9.0}));
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));

  // squaring oracle on a dense SPD matrix
  Rng rng(77);
  Matrix base = random_matrix(4, 4, rng);
  const Matrix s = mat_mul(base, base.transpose()) + Matrix::identity(4);
  const Matrix root = sym_sqrt(s);
  CHECK((mat_mul(root, root) - s).max_abs() <= 1e-8 * s.max_abs());
  CHECK((root - root.transpose()).max_abs() < 1e-10);
}

TEST_CASE("sym_sqrt: rejects clearly indefinite input") {
  CHECK_THROWS(sym_sqrt(Matrix::diag({1.0, -0.5})));
}

TEST_CASE("operator_norm: diagonal, worked block, and SVD oracle") {
  CHECK(operator_norm(Matrix::diag({0.75, 0.2})) == doctest::Approx(0.75));
  CHECK(operator_norm(worked_two_node_a()) == doctest::Approx(0.75).epsilon(1e-9));

  Rng rng(101);
  const Matrix a = random_matrix(10, 10, rng);
  // oracle: largest eigenvalue of a^T a through the dense eigensolver
  const SymEig e = sym_eig(mat_mul(a.transpose(), a));
  CHECK(operator_norm(a) == doctest::Approx(std::sqrt(e.eigenvalues[0])).epsilon(1e-8));
}

TEST_CASE("operator_norm: zero matrix returns 0") {
  CHECK(operator_norm(Matrix(3, 3)) == 0.0);
}

TEST_CASE("spectral_radius_estimate: agrees with known eigenstructure") {
  CHECK(spectral_radius_estimate(Matrix::diag({0.6, -0.3})) == doctest::Approx(0.6).epsilon(1e-3));
  CHECK(spectral_radius_estimate(worked_two_node_a()) == doctest::Approx(0.75).epsilon(1e-3));
  // defective-direction sanity: strictly upper triangular is nilpotent
  Matrix n(2, 2);
  n(0, 1) = 5.0;
  CHECK(spectral_radius_estimate(n) < 1e-3);
}

TEST_CASE("lyapunov_solve: f = 0 returns q") {
  Rng rng(19);
  Matrix q = random_symmetric(3, rng);
  q += 4.0 * Matrix::identity(3);
  CHECK((lyapunov_solve(Matrix(3, 3), q) - q).max_abs() < 1e-12);
}

TEST_CASE("lyapunov_solve: scalar geometric series") {
  const Matrix f(1, 1, {0.5});
  const Matrix q(1, 1, {1.0});
  CHECK(lyapunov_solve(f, q)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("lyapunov_solve: worked symmetric two-node closed form (I - A^2)^{-1}") {
  const Matrix a = worked_two_node_a();
  const Matrix s = lyapunov_solve(a, Matrix::identity(2));
  CHECK(s(0, 0) == doctest::Approx(1.676190476190476).epsilon(1e-9));
  CHECK(s(0, 1) == doctest::Approx(0.609523809523809).epsilon(1e-9));
  CHECK(s(1, 0) == doctest::Approx(0.609523809523809).epsilon(1e-9));
  CHECK(s(1, 1) == doctest::Approx(1.676190476190476).epsilon(1e-9));

  // cross-check by closed form and by direct fixed-point iteration
  const Matrix closed = inverse(Matrix::identity(2) - mat_mul(a, a));
  CHECK((s - closed).max_abs() < 1e-9);
  Matrix iter(2, 2);
  for (int k = 0; k < 400; ++k) iter = mat_mul(mat_mul(a, iter), a.transpose()) + Matrix::identity(2);
  CHECK((s - iter).max_abs() < 1e-9);
}

TEST_CASE("lyapunov_solve: fixed-point residual bound on a random stable f") {
  Rng rng(23);
  Matrix f = random_matrix(5, 5, rng);
  f *= 0.8 / operator_norm(f);
  Matrix base = random_matrix(5, 5, rng);
  const Matrix q = mat_mul(base, base.transpose());
  const Matrix s = lyapunov_solve(f, q);
  CHECK((s - (mat_mul(mat_mul(f, s), f.transpose()) + q)).max_abs() < 1e-10);
  CHECK((s - s.transpose()).max_abs() < 1e-12);
}

TEST_CASE("lyapunov_solve: diverges on an unstable f") {
  const Matrix f(1, 1, {1.1});
  const Matrix q(1, 1, {1.0});
  CHECK_THROWS_AS(lyapunov_solve(f, q), ConvergenceError);
}

TEST_CASE("Matrix: block, submatrix, and norms") {
  Matrix m(3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) m(i, j) = 10.0 * static_cast<double>(i) + static_cast<double>(j);
  const Matrix b = m.block(1, 1, 2, 2);
  CHECK(b(0, 0) == 11.0);
  CHECK(b(1, 1) == 22.0);
  const Matrix g = m.submatrix({0, 2}, {3, 0});
  CHECK(g(0, 0) == 3.0);
  CHECK(g(1, 1) == 20.0);
  CHECK(m.max_abs() == 23.0);
  CHECK(m.all_finite());
}
