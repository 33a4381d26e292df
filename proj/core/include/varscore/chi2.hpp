#pragma once

// Central and noncentral chi-square CDFs plus the central quantile.
// Self-contained; built on the regularized incomplete gamma function.

#include <cstddef>

namespace varscore {

// Regularized lower incomplete gamma P(a, x). Series for x < a+1,
// continued fraction otherwise; 1e-12 relative target.
double regularized_gamma_p(double a, double x);

// F_d(x) = P(d/2, x/2); 0 for x <= 0.
double chi2_cdf(std::size_t df, double x);

// Inverse of chi2_cdf in x, |F(x) - q| <= 1e-9. Requires q in (0,1).
double chi2_quantile(std::size_t df, double q);

// Poisson-mixture noncentral chi-square CDF with noncentrality lambda >= 0.
double noncentral_chi2_cdf(std::size_t df, double lambda, double x);

}  // namespace varscore
