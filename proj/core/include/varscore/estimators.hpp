#pragma once

// Row-wise Lasso / Dantzig-selector estimation for the VAR coefficient
// matrix and the decorrelation weights, sample partial covariances, noise
// variance estimation, and consecutive-split cross-validation for the
// penalty level.
//
// Regressions are solved in covariance (Gram) form: with
//   G = (1/T) sum_t x_t x_t^T  and  c = (1/T) sum_t x_t y_t,
// the Lasso objective (1/T) sum (y_t - x_t^T b)^2 + lambda ||b||_1 has
// coordinate minimizer b_j = soft(c_j - sum_{k != j} G_jk b_k, lambda/2) / G_jj.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "varscore/matrix.hpp"
#include "varscore/var_model.hpp"

namespace varscore {

struct LassoConfig {
  double lambda = 0.0;
  std::size_t max_iters = 100000;  // coordinate sweeps
  double tol = 1e-8;               // max coordinate change threshold
};

enum class FitMethod { lasso, dantzig };
enum class FitTarget { coefficients, weights };

struct RegressionResult {
  std::vector<double> beta;
  bool converged = true;
  std::size_t iterations = 0;
};

// Lasso by cyclic coordinate descent with active-set sweeps.
RegressionResult lasso_regress(const Matrix& design, const std::vector<double>& response,
                               const LassoConfig& cfg);
// Same solver on a precomputed Gram matrix and correlation vector;
// warm_start, when given, seeds the iterate.
RegressionResult lasso_regress_gram(const Matrix& gram, const std::vector<double>& corr,
                                    const LassoConfig& cfg,
                                    const std::vector<double>* warm_start = nullptr);

// Dantzig selector: min ||b||_1 s.t. ||c - G b||_inf <= lambda, solved as a
// linear program. Throws InfeasibleError when lambda is below the minimal
// achievable correlation norm.
std::vector<double> dantzig_regress(const Matrix& design, const std::vector<double>& response,
                                    double lambda);
std::vector<double> dantzig_regress_gram(const Matrix& gram, const std::vector<double>& corr,
                                         double lambda);

// (1/T) X^T X over the lag vectors and (1/T) X^T Y against the responses.
Matrix gram_matrix(const LaggedSample& sample);
Matrix cross_moments(const LaggedSample& sample);

// Row-wise estimation of the stacked coefficient matrix (M x pM).
Matrix estimate_A(const LaggedSample& sample, const LassoConfig& cfg, FitMethod method);

// Decorrelation-weight estimate for one tested row: (pM - d_m) x d_m, one
// independent regression per tested column.
Matrix estimate_w(const LaggedSample& sample, const std::vector<std::size_t>& d_set,
                  const LassoConfig& cfg, FitMethod method);

// Sample partial covariances from residuals r_t = X_{t,D} - w^T X_{t,Dc}:
// first = (1/T) sum r r^T, second = (1/T) sum r X_{t,D}^T.
std::pair<Matrix, Matrix> sample_partial_cov(const LaggedSample& sample,
                                             const std::vector<std::size_t>& d_set,
                                             const Matrix& w_hat);

// sigma2_hat = (1/(M T)) sum_t || X_{t+1} - A_hat X_t ||^2
double estimate_variance(const LaggedSample& sample, const Matrix& a_hat);

// Conventional default lambda = scale * sqrt(log(pM) / T).
double default_lambda(const LaggedSample& sample, double scale = 2.0);

// 20 log-spaced values in [0.05, 5] * sqrt(log(pM)/T).
std::vector<double> default_lambda_grid(const LaggedSample& sample);

// Fit on the first 90% (consecutive), score mean squared prediction error on
// the final 10%, return the grid value with the smallest test error; ties go
// to the larger lambda. d_set is required for the weights target.
double cv_select_lambda(const LaggedSample& sample, const std::vector<double>& grid,
                        FitMethod method, FitTarget target,
                        const std::vector<std::size_t>* d_set = nullptr);

struct FitResult {
  Matrix a_hat;                    // M x pM
  std::vector<Matrix> w_hat;       // per tested row
  std::vector<Matrix> ups_hat;     // per tested row, d_m x d_m
  std::vector<Matrix> ups_tilde;   // per tested row, d_m x d_m
  double sigma2_hat = 0.0;
  double lambda_a = 0.0;
  double lambda_w = 0.0;
  FitMethod method = FitMethod::lasso;
};

struct FitOptions {
  FitMethod method = FitMethod::lasso;
  bool cross_validate = true;
  double lambda_a = 0.0;  // used when cross_validate is false; 0 = default rule
  double lambda_w = 0.0;
  double lambda_scale = 2.0;
};

// Full estimation pass for a test spec: A_hat, per-row weights and partial
// covariances, and the variance estimate.
FitResult fit_var(const LaggedSample& sample, const TestSpec& spec, const FitOptions& opts);

}  // namespace varscore
