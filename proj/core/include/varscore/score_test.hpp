#pragma once

// Decorrelated score statistics, chi-square test decisions, one-step
// estimators and confidence regions.

#include <cstddef>
#include <string>
#include <vector>

#include "varscore/estimators.hpp"
#include "varscore/matrix.hpp"
#include "varscore/var_model.hpp"

namespace varscore {

struct ScoreParts {
  // per tested row: the score with the hypothesized values residualized out,
  // the full-fit score, and the one-step estimate of the tested coordinates
  std::vector<std::vector<double>> s_hat;
  std::vector<std::vector<double>> s_tilde;
  std::vector<std::vector<double>> a_onestep;
  std::size_t T = 0;
};

enum class StatisticKind { u_hat, u_tilde, r_hat };

struct TestReport {
  StatisticKind statistic_kind = StatisticKind::u_tilde;
  double value = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  double sigma2_used = 0.0;
  // ||Delta_tilde||^2 when the truth is known (simulation mode); < 0 = unset
  double noncentrality_reference = -1.0;
};

struct ConfidenceRegion {
  std::vector<std::vector<double>> centers;  // a_onestep per tested row
  std::vector<Matrix> shapes;                // ups_hat per tested row
  double radius2 = 0.0;                      // chi2_d(1-alpha) * sigma2 / T
  double alpha = 0.05;
  double sigma2 = 0.0;
  std::size_t T = 0;

  bool contains(const std::vector<std::vector<double>>& theta) const;
};

// Score sums over the sample. The hypothesized values enter through the
// response: X_{t+1,m} - mu_m^T X_{t,D_m} - (A_hat_m)_{D_m^c}^T X_{t,D_m^c},
// which reduces to the plain score at mu = 0.
ScoreParts decorrelated_score(const LaggedSample& sample, const FitResult& fit,
                              const TestSpec& spec);

// Known-variance statistic: T * sum_m S_m^T (ups_hat_m)^{-1} S_m / sigma2.
TestReport statistic_u_hat(const ScoreParts& parts, const FitResult& fit, const TestSpec& spec,
                           double sigma2);

// Same with the estimated variance from the fit.
TestReport statistic_u_tilde(const ScoreParts& parts, const FitResult& fit, const TestSpec& spec);

// Confidence-region statistic evaluated at the hypothesized values:
// (T/sigma2_hat) * sum_m (a(m) - mu_m)^T ups_hat_m (a(m) - mu_m).
TestReport statistic_r_hat(const ScoreParts& parts, const FitResult& fit, const TestSpec& spec);

ConfidenceRegion confidence_region(const ScoreParts& parts, const FitResult& fit,
                                   const TestSpec& spec);

// Population noncentrality sum_m Delta_m^T Ups^(m) Delta_m / sigma*^2 for a
// direction delta stacked in spec-entry order; this is the limit parameter of
// the score statistics when the tested entries sit at mu + Delta/sqrt(T).
double noncentrality(const VarModel& model, const PopulationCov& cov, const TestSpec& spec,
                     const std::vector<double>& delta);

std::string statistic_name(StatisticKind kind);

}  // namespace varscore
