#pragma once

// Empirical validation of the concentration behavior behind the estimation
// theory: tail curves for quadratic forms, cross-moment deviations and
// covariance max-norm deviations, at small scale.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "varscore/matrix.hpp"
#include "varscore/var_model.hpp"

namespace varscore {

struct TailCurve {
  std::string quantity;
  std::size_t T = 0;
  std::vector<double> deltas;        // threshold grid, nondecreasing
  std::vector<double> exceed_prob;   // empirical exceedance, nonincreasing
  std::size_t reps = 0;
  std::vector<double> samples;       // raw scaled statistics, sorted
};

// |(1/T) sum X_t^T B X_t - tr(B Upsilon)| scaled by sqrt(T), per replicate.
TailCurve quadratic_form_tail(const VarModel& model, const Matrix& b, std::size_t T,
                              std::size_t reps, std::uint64_t seed);

// ||(1/T) sum eps_t X_t^T||_inf scaled by sqrt(T / log M).
TailCurve deviation_tail(const VarModel& model, std::size_t T, std::size_t reps,
                         std::uint64_t seed);

// ||(1/T) sum X_t X_t^T - Upsilon||_inf scaled by sqrt(T / log M).
TailCurve cov_maxnorm_tail(const VarModel& model, std::size_t T, std::size_t reps,
                           std::uint64_t seed);

// Upper quantile of the raw scaled statistics (q in (0,1]).
double tail_quantile(const TailCurve& curve, double q);

// CSV schema: quantity,T,delta,exceed_prob,reps
void emit_tail_csv(const std::vector<TailCurve>& curves, std::ostream& os);
void emit_tail_csv(const std::vector<TailCurve>& curves, const std::string& path);

}  // namespace varscore
