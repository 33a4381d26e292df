#pragma once

// VAR(p) model representation, population quantities, stability diagnostics
// and simulation. The observation model is
//   X_{t+1} = A(1) X_t + ... + A(p) X_{t-p+1} + eps_t,
// with entry-wise independent noise. All indices are 0-based in code; file
// formats use the 1-based convention and convert at the boundary.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "varscore/matrix.hpp"
#include "varscore/rng.hpp"

namespace varscore {

struct VarModel {
  std::size_t p = 1;                // lag order
  std::size_t M = 0;                // node count
  std::vector<Matrix> coeffs;       // A(1..p), each M x M
  double noise_sigma = 1.0;         // noise standard deviation

  // M x pM stacked coefficient matrix (A(1) A(2) ... A(p)).
  Matrix stacked() const;
  // pM x pM companion matrix with identity sub-blocks.
  Matrix companion() const;
  void validate() const;
};

struct PsiSeries {
  std::vector<Matrix> terms;        // Psi_0 = I, Psi_1, ..., Psi_H
  std::size_t truncation_horizon = 0;
  double tail_bound = 0.0;          // estimate of sum_{j>H} ||Psi_j||_2
};

struct PopulationCov {
  Matrix upsilon;                   // pM x pM, Cov of the stacked lag vector
  Matrix sigma_x;                   // M x M, Cov(X_t)
};

struct TestEntry {
  std::size_t row = 0;              // tested row m
  std::vector<std::size_t> cols;    // D_m, distinct columns in [0, pM)
  std::vector<double> null_values;  // hypothesized values, aligned with cols
};

struct TestSpec {
  std::vector<TestEntry> entries;
  double alpha = 0.05;

  std::size_t total_dim() const;    // d = sum of |D_m|
  void validate(std::size_t p, std::size_t M) const;
};

struct LaggedSample {
  // series row s holds X_t with t = s - p + 1, s = 0 .. T+p-1
  Matrix series;
  Matrix lag_vectors;               // T x pM, row t is (X_t^T, ..., X_{t-p+1}^T)
  Matrix responses;                 // T x M, row t is X_{t+1}
  Matrix noise;                     // T x M when simulated in diagnostic mode, else empty
  std::size_t p = 1;
  std::size_t M = 0;
  std::size_t T = 0;
};

class InstabilityError : public std::runtime_error {
 public:
  explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Moving-average coefficients Psi_j of the stationary solution, truncated at
// the first ||Psi_H||_2 < tol or at max_horizon. Throws InstabilityError when
// the term norms grow for p consecutive steps.
PsiSeries psi_series(const VarModel& model, double tol = 1e-12, std::size_t max_horizon = 10000);

// Stability functional beta = sum_i (sum_j ||Psi_{i+j}||_2^2)^{1/2},
// computed from the truncated series with a geometric tail extension.
double stability_beta(const VarModel& model, double tol = 1e-12);

// Upsilon = Cov(stacked lags) via the companion-form Lyapunov equation,
// Sigma = Cov(X_t) is its top-left block.
PopulationCov population_cov(const VarModel& model, double tol = 1e-12);

// w* = (Upsilon_{cc})^{-1} Upsilon_{cD}: the (pM-d_m) x d_m weight matrix that
// decorrelates the tested coordinates from the rest.
Matrix decorrelation_weights(const PopulationCov& cov, const std::vector<std::size_t>& d_set);

// Schur complement Upsilon_{DD} - Upsilon_{Dc} (Upsilon_{cc})^{-1} Upsilon_{cD}.
Matrix partial_covariance(const PopulationCov& cov, const std::vector<std::size_t>& d_set);

struct SparsityLevels {
  std::vector<std::size_t> rho;     // row sparsity of the stacked A, all M rows
  std::vector<std::size_t> s;       // ||w*_m||_0 per TestSpec entry
};

SparsityLevels sparsity_levels(const VarModel& model, const PopulationCov& cov,
                               const TestSpec& spec);

// Simulate T transitions after burn_in steps from a zero initial state.
// keep_noise stores the realized eps_t for diagnostic use.
LaggedSample simulate(const VarModel& model, std::size_t T, const NoiseSpec& noise,
                      std::size_t burn_in, std::uint64_t seed, bool keep_noise = false);

// Rebuild the stacked lag representation from a plain (n x M) series whose
// rows are X_{1-p}, ..., X_T in order.
LaggedSample build_lagged(const Matrix& series, std::size_t p);

// Plain-text model format: header "p M", then p blocks of M rows of M values.
void write_model(std::ostream& os, const VarModel& model);
VarModel read_model(std::istream& is);
void save_model(const std::string& path, const VarModel& model);
VarModel load_model(const std::string& path);

// Complement of d_set in [0, n).
std::vector<std::size_t> complement_indices(const std::vector<std::size_t>& d_set, std::size_t n);

}  // namespace varscore
