#include "varscore/chi2.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace varscore {

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0) throw std::invalid_argument("regularized_gamma_p: a must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_cdf(std::size_t df, double x) {
  if (df == 0) throw std::invalid_argument("chi2_cdf: df must be >= 1");
  if (!(x > 0.0)) return 0.0;
  return regularized_gamma_p(0.5 * static_cast<double>(df), 0.5 * x);
}

double chi2_quantile(std::size_t df, double q) {
  if (df == 0) throw std::invalid_argument("chi2_quantile: df must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("chi2_quantile: q must be in (0,1)");
  // bracket then bisect; the CDF is monotone so this is unconditionally safe
  double lo = 0.0;
  double hi = static_cast<double>(df) + 10.0;
  while (chi2_cdf(df, hi) < q) {
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(df, mid) < q)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double noncentral_chi2_cdf(std::size_t df, double lambda, double x) {
  if (df == 0) throw std::invalid_argument("noncentral_chi2_cdf: df must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("noncentral_chi2_cdf: lambda must be >= 0");
  if (lambda == 0.0) return chi2_cdf(df, x);
  if (!(x > 0.0)) return 0.0;
  const double half = 0.5 * lambda;
  double weight = std::exp(-half);  // Poisson(k=0) mass
  double cum_weight = 0.0;
  double cdf = 0.0;
  for (std::size_t k = 0; k < 100000; ++k) {
    cdf += weight * chi2_cdf(df + 2 * k, x);
    cum_weight += weight;
    if (1.0 - cum_weight < 1e-12) break;
    weight *= half / static_cast<double>(k + 1);
  }
  return std::min(cdf, 1.0);
}

}  // namespace varscore
