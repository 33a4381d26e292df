#include "varscore/simplex.hpp"

#include <cmath>
#include <limits>

namespace varscore {

namespace {

constexpr double kPivotEps = 1e-11;

// Tableau rows: one per constraint, columns: structural + slack + artificial
// + rhs. Objective row kept separately in reduced-cost form.
struct Tableau {
  std::size_t m, n_total;
  std::vector<double> t;          // m x (n_total + 1), row-major
  std::vector<std::size_t> basis; // basic variable per row

  double& at(std::size_t i, std::size_t j) { return t[i * (n_total + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t[i * (n_total + 1) + j]; }
  double& rhs(std::size_t i) { return t[i * (n_total + 1) + n_total]; }
  double rhs(std::size_t i) const { return t[i * (n_total + 1) + n_total]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = at(pr, pc);
    const double inv = 1.0 / pv;
    for (std::size_t j = 0; j <= n_total; ++j) at(pr, j) *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_total; ++j) at(i, j) -= f * at(pr, j);
    }
    basis[pr] = pc;
  }
};

// Runs simplex on the tableau for objective coefficients obj (size n_total),
// minimizing. Returns the optimal objective value.
double run_simplex(Tableau& tb, const std::vector<double>& obj, std::size_t active_cols) {
  const std::size_t m = tb.m;
  // reduced costs z_j = obj_j - obj_B^T B^{-1} A_j, maintained by recompute
  // from the basis each iteration block; recomputing is O(m * n) which is
  // acceptable at these sizes and avoids drift.
  for (std::size_t iter = 0; iter < 200000; ++iter) {
    // reduced cost row
    std::size_t enter = active_cols;
    for (std::size_t j = 0; j < active_cols; ++j) {
      double zj = obj[j];
      for (std::size_t i = 0; i < m; ++i) {
        const double cb = obj[tb.basis[i]];
        if (cb != 0.0) zj -= cb * tb.at(i, j);
      }
      if (zj < -1e-9) { enter = j; break; }  // Bland: first improving column
    }
    if (enter == active_cols) {
      double val = 0.0;
      for (std::size_t i = 0; i < m; ++i) val += obj[tb.basis[i]] * tb.rhs(i);
      return val;
    }
    // ratio test, Bland tie-break on smallest basis index
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = tb.at(i, enter);
      if (a > kPivotEps) {
        const double ratio = tb.rhs(i) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (leave == m || tb.basis[i] < tb.basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave == m) throw std::runtime_error("simplex: problem is unbounded");
    tb.pivot(leave, enter);
  }
  throw std::runtime_error("simplex: iteration cap reached");
}

}  // namespace

LpResult solve_lp_inequality(const Matrix& a, const std::vector<double>& b,
                             const std::vector<double>& c) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m || c.size() != n)
    throw std::invalid_argument("solve_lp_inequality: dimension mismatch");

  // normalize rows so b >= 0; slack coefficient is +1 or -1 accordingly
  std::vector<int> sign(m, 1);
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < 0.0) sign[i] = -1;

  // columns: n structural, m slacks, then artificials for rows with flipped
  // slack (their slack enters with -1 and cannot seed the basis)
  std::vector<std::size_t> art_rows;
  for (std::size_t i = 0; i < m; ++i)
    if (sign[i] < 0) art_rows.push_back(i);
  const std::size_t n_art = art_rows.size();
  const std::size_t n_total = n + m + n_art;

  Tableau tb;
  tb.m = m;
  tb.n_total = n_total;
  tb.t.assign(m * (n_total + 1), 0.0);
  tb.basis.assign(m, 0);

  for (std::size_t i = 0; i < m; ++i) {
    const double s = static_cast<double>(sign[i]);
    for (std::size_t j = 0; j < n; ++j) tb.at(i, j) = s * a(i, j);
    tb.at(i, n + i) = s;  // slack
    tb.rhs(i) = s * b[i];
    tb.basis[i] = n + i;
  }
  for (std::size_t k = 0; k < n_art; ++k) {
    const std::size_t i = art_rows[k];
    tb.at(i, n + m + k) = 1.0;
    tb.basis[i] = n + m + k;
  }

  if (n_art > 0) {
    std::vector<double> phase1(n_total, 0.0);
    for (std::size_t k = 0; k < n_art; ++k) phase1[n + m + k] = 1.0;
    const double p1 = run_simplex(tb, phase1, n_total);
    if (p1 > 1e-7) throw InfeasibleError("simplex: no feasible point");
    // drive any degenerate artificials out of the basis
    for (std::size_t i = 0; i < m; ++i) {
      if (tb.basis[i] >= n + m) {
        std::size_t j = 0;
        for (; j < n + m; ++j)
          if (std::fabs(tb.at(i, j)) > kPivotEps) break;
        if (j < n + m) tb.pivot(i, j);
        // a fully zero row is redundant; its artificial stays basic at zero
      }
    }
  }

  std::vector<double> phase2(n_total, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  run_simplex(tb, phase2, n + m);  // artificials beyond n+m cannot re-enter

  LpResult out;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tb.basis[i] < n) out.x[tb.basis[i]] = tb.rhs(i);
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
  return out;
}

}  // namespace varscore
