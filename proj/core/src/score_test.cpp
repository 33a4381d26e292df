#include "varscore/score_test.hpp"

#include <cmath>
#include <stdexcept>

#include "varscore/chi2.hpp"

namespace varscore {

namespace {

double quad_form(const Matrix& m, const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) acc += v[i] * m(i, j) * v[j];
  return acc;
}

TestReport finalize(StatisticKind kind, double value, const TestSpec& spec, double sigma2) {
  TestReport rep;
  rep.statistic_kind = kind;
  rep.value = value;
  rep.df = spec.total_dim();
  rep.alpha = spec.alpha;
  rep.sigma2_used = sigma2;
  rep.p_value = 1.0 - chi2_cdf(rep.df, value);
  // one source of truth for the decision: the quantile
  rep.reject = value > chi2_quantile(rep.df, 1.0 - spec.alpha);
  return rep;
}

void check_shapes(const ScoreParts& parts, const FitResult& fit, const TestSpec& spec) {
  if (parts.s_hat.size() != spec.entries.size() || fit.ups_hat.size() != spec.entries.size())
    throw std::invalid_argument("score statistic: parts/fit/spec size mismatch");
  for (std::size_t i = 0; i < spec.entries.size(); ++i)
    if (parts.s_hat[i].size() != spec.entries[i].cols.size())
      throw std::invalid_argument("score statistic: score dimension mismatch");
}

}  // namespace

ScoreParts decorrelated_score(const LaggedSample& sample, const FitResult& fit,
                              const TestSpec& spec) {
  spec.validate(sample.p, sample.M);
  if (fit.w_hat.size() != spec.entries.size())
    throw std::invalid_argument("decorrelated_score: fit does not match spec");

  ScoreParts parts;
  parts.T = sample.T;
  const std::size_t q = sample.lag_vectors.cols();
  const double inv_t = 1.0 / static_cast<double>(sample.T);

  for (std::size_t ei = 0; ei < spec.entries.size(); ++ei) {
    const TestEntry& entry = spec.entries[ei];
    const std::size_t m = entry.row;
    const std::size_t d = entry.cols.size();
    const auto comp = complement_indices(entry.cols, q);
    const Matrix& w = fit.w_hat[ei];

    std::vector<double> s_hat(d, 0.0), s_tilde(d, 0.0), r(d);
    for (std::size_t t = 0; t < sample.T; ++t) {
      // decorrelated regressor residual
      for (std::size_t i = 0; i < d; ++i) {
        double v = sample.lag_vectors(t, entry.cols[i]);
        for (std::size_t k = 0; k < comp.size(); ++k)
          v -= w(k, i) * sample.lag_vectors(t, comp[k]);
        r[i] = v;
      }
      // response residual against the nuisance part of A_hat, with the
      // hypothesized values on the tested coordinates
      double resid_null = sample.responses(t, m);
      for (std::size_t i = 0; i < d; ++i)
        resid_null -= entry.null_values[i] * sample.lag_vectors(t, entry.cols[i]);
      for (std::size_t k = 0; k < comp.size(); ++k)
        resid_null -= fit.a_hat(m, comp[k]) * sample.lag_vectors(t, comp[k]);
      // full-fit residual, A_hat on all coordinates
      double resid_full = sample.responses(t, m);
      for (std::size_t j = 0; j < q; ++j)
        resid_full -= fit.a_hat(m, j) * sample.lag_vectors(t, j);

      for (std::size_t i = 0; i < d; ++i) {
        s_hat[i] -= resid_null * r[i];
        s_tilde[i] -= resid_full * r[i];
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      s_hat[i] *= inv_t;
      s_tilde[i] *= inv_t;
    }

    // one-step estimate a(m) = (A_hat_m)_{D_m} - (ups_tilde)^{-1} s_tilde
    const Matrix correction =
        solve_linear(fit.ups_tilde[ei], Matrix::column(s_tilde));
    std::vector<double> a_one(d);
    for (std::size_t i = 0; i < d; ++i)
      a_one[i] = fit.a_hat(m, entry.cols[i]) - correction(i, 0);

    parts.s_hat.push_back(std::move(s_hat));
    parts.s_tilde.push_back(std::move(s_tilde));
    parts.a_onestep.push_back(std::move(a_one));
  }
  return parts;
}

TestReport statistic_u_hat(const ScoreParts& parts, const FitResult& fit, const TestSpec& spec,
                           double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("statistic_u_hat: sigma2 must be positive");
  check_shapes(parts, fit, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    const Matrix sol = solve_linear(fit.ups_hat[i], Matrix::column(parts.s_hat[i]));
    for (std::size_t j = 0; j < parts.s_hat[i].size(); ++j)
      acc += parts.s_hat[i][j] * sol(j, 0);
  }
  const double value = static_cast<double>(parts.T) * acc / sigma2;
  return finalize(StatisticKind::u_hat, value, spec, sigma2);
}

TestReport statistic_u_tilde(const ScoreParts& parts, const FitResult& fit,
                             const TestSpec& spec) {
  if (!(fit.sigma2_hat > 0.0))
    throw std::invalid_argument("statistic_u_tilde: degenerate fit, sigma2_hat is zero");
  TestReport rep = statistic_u_hat(parts, fit, spec, fit.sigma2_hat);
  rep.statistic_kind = StatisticKind::u_tilde;
  return rep;
}

TestReport statistic_r_hat(const ScoreParts& parts, const FitResult& fit, const TestSpec& spec) {
  if (!(fit.sigma2_hat > 0.0))
    throw std::invalid_argument("statistic_r_hat: degenerate fit, sigma2_hat is zero");
  check_shapes(parts, fit, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    const std::size_t d = spec.entries[i].cols.size();
    std::vector<double> diff(d);
    for (std::size_t j = 0; j < d; ++j)
      diff[j] = parts.a_onestep[i][j] - spec.entries[i].null_values[j];
    acc += quad_form(fit.ups_hat[i], diff);
  }
  const double value = static_cast<double>(parts.T) * acc / fit.sigma2_hat;
  return finalize(StatisticKind::r_hat, value, spec, fit.sigma2_hat);
}

bool ConfidenceRegion::contains(const std::vector<std::vector<double>>& theta) const {
  if (theta.size() != centers.size()) throw std::invalid_argument("contains: wrong row count");
  double acc = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (theta[i].size() != centers[i].size())
      throw std::invalid_argument("contains: wrong dimension");
    std::vector<double> diff(centers[i].size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = centers[i][j] - theta[i][j];
    double q = 0.0;
    for (std::size_t a = 0; a < diff.size(); ++a)
      for (std::size_t b = 0; b < diff.size(); ++b) q += diff[a] * shapes[i](a, b) * diff[b];
    acc += q;
  }
  return acc <= radius2;
}

ConfidenceRegion confidence_region(const ScoreParts& parts, const FitResult& fit,
                                   const TestSpec& spec) {
  if (!(fit.sigma2_hat > 0.0))
    throw std::invalid_argument("confidence_region: degenerate fit, sigma2_hat is zero");
  check_shapes(parts, fit, spec);
  ConfidenceRegion cr;
  cr.centers = parts.a_onestep;
  cr.shapes = fit.ups_hat;
  cr.alpha = spec.alpha;
  cr.sigma2 = fit.sigma2_hat;
  cr.T = parts.T;
  cr.radius2 = chi2_quantile(spec.total_dim(), 1.0 - spec.alpha) * fit.sigma2_hat /
               static_cast<double>(parts.T);
  return cr;
}

double noncentrality(const VarModel& model, const PopulationCov& cov, const TestSpec& spec,
                     const std::vector<double>& delta) {
  if (delta.size() != spec.total_dim())
    throw std::invalid_argument("noncentrality: delta has wrong length");
  double acc = 0.0;
  std::size_t off = 0;
  for (const auto& entry : spec.entries) {
    const Matrix ups = partial_covariance(cov, entry.cols);
    const std::size_t d = entry.cols.size();
    std::vector<double> dm(delta.begin() + off, delta.begin() + off + d);
    acc += quad_form(ups, dm);
    off += d;
  }
  // the statistic divides by the noise variance, so the limit's noncentrality
  // carries the same factor
  return acc / (model.noise_sigma * model.noise_sigma);
}

std::string statistic_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::u_hat: return "u-hat";
    case StatisticKind::u_tilde: return "u-tilde";
    case StatisticKind::r_hat: return "r-hat";
  }
  return "unknown";
}

}  // namespace varscore
