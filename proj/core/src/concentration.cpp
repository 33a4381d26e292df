#include "varscore/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace varscore {

namespace {

// 30 log-spaced thresholds spanning the empirical [1st, 99th] percentiles.
TailCurve build_curve(std::string quantity, std::size_t T, std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("tail curve: reps must be >= 1");
  TailCurve curve;
  curve.quantity = std::move(quantity);
  curve.T = T;
  curve.reps = samples.size();
  std::sort(samples.begin(), samples.end());
  const auto pct = [&](double q) {
    const double pos = q * static_cast<double>(samples.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return samples[lo] * (1.0 - f) + samples[hi] * f;
  };
  double lo = std::max(pct(0.01), 1e-12);
  double hi = std::max(pct(0.99), lo * (1.0 + 1e-9));
  curve.deltas.resize(30);
  for (std::size_t i = 0; i < curve.deltas.size(); ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(curve.deltas.size() - 1);
    curve.deltas[i] = lo * std::pow(hi / lo, f);
  }
  curve.exceed_prob.resize(curve.deltas.size());
  for (std::size_t i = 0; i < curve.deltas.size(); ++i) {
    const auto it = std::upper_bound(samples.begin(), samples.end(), curve.deltas[i]);
    curve.exceed_prob[i] =
        static_cast<double>(samples.end() - it) / static_cast<double>(samples.size());
  }
  curve.samples = std::move(samples);
  return curve;
}

}  // namespace

TailCurve quadratic_form_tail(const VarModel& model, const Matrix& b, std::size_t T,
                              std::size_t reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("quadratic_form_tail: reps must be >= 1");
  const std::size_t n = model.p * model.M;
  if (b.rows() != n || b.cols() != n)
    throw std::invalid_argument("quadratic_form_tail: B must be pM x pM");
  if ((b - b.transpose()).max_abs() > 1e-10 * std::max(1.0, b.max_abs()))
    throw std::invalid_argument("quadratic_form_tail: B must be symmetric");

  const PopulationCov cov = population_cov(model);
  double trace_bu = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) trace_bu += b(i, j) * cov.upsilon(j, i);

  const NoiseSpec scaled{NoiseKind::gaussian, model.noise_sigma};

  const double scale = std::sqrt(static_cast<double>(T));
  std::vector<double> samples(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const LaggedSample s = simulate(model, T, scaled, 1000, derive_seed(seed, r));
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      double q = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double xi = s.lag_vectors(t, i);
        if (xi == 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += b(i, j) * s.lag_vectors(t, j);
        q += xi * row;
      }
      acc += q;
    }
    samples[r] = std::fabs(acc / static_cast<double>(T) - trace_bu) * scale;
  }
  return build_curve("quadratic_form", T, std::move(samples));
}

TailCurve deviation_tail(const VarModel& model, std::size_t T, std::size_t reps,
                         std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("deviation_tail: reps must be >= 1");
  NoiseSpec noise{NoiseKind::gaussian, model.noise_sigma};
  const std::size_t n = model.p * model.M;
  const double scale =
      std::sqrt(static_cast<double>(T) / std::log(static_cast<double>(std::max<std::size_t>(model.M, 2))));
  std::vector<double> samples(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const LaggedSample s = simulate(model, T, noise, 1000, derive_seed(seed, r), true);
    Matrix dev(model.M, n);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < model.M; ++i) {
        const double e = s.noise(t, i);
        if (e == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) dev(i, j) += e * s.lag_vectors(t, j);
      }
    dev *= 1.0 / static_cast<double>(T);
    samples[r] = dev.max_abs() * scale;
  }
  return build_curve("deviation", T, std::move(samples));
}

TailCurve cov_maxnorm_tail(const VarModel& model, std::size_t T, std::size_t reps,
                           std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("cov_maxnorm_tail: reps must be >= 1");
  NoiseSpec noise{NoiseKind::gaussian, model.noise_sigma};
  const PopulationCov cov = population_cov(model);
  const std::size_t n = model.p * model.M;
  const double scale =
      std::sqrt(static_cast<double>(T) / std::log(static_cast<double>(std::max<std::size_t>(model.M, 2))));
  std::vector<double> samples(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const LaggedSample s = simulate(model, T, noise, 1000, derive_seed(seed, r));
    Matrix acc(n, n);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < n; ++i) {
        const double xi = s.lag_vectors(t, i);
        if (xi == 0.0) continue;
        for (std::size_t j = i; j < n; ++j) acc(i, j) += xi * s.lag_vectors(t, j);
      }
    double max_dev = 0.0;
    const double inv_t = 1.0 / static_cast<double>(T);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        max_dev = std::max(max_dev, std::fabs(acc(i, j) * inv_t - cov.upsilon(i, j)));
    samples[r] = max_dev * scale;
  }
  return build_curve("cov_maxnorm", T, std::move(samples));
}

double tail_quantile(const TailCurve& curve, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("tail_quantile: q must be in (0,1]");
  const std::size_t n = curve.samples.size();
  const double pos = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double f = pos - static_cast<double>(lo);
  return curve.samples[lo] * (1.0 - f) + curve.samples[hi] * f;
}

void emit_tail_csv(const std::vector<TailCurve>& curves, std::ostream& os) {
  os << "quantity,T,delta,exceed_prob,reps\n";
  os.precision(17);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.deltas.size(); ++i)
      os << c.quantity << ',' << c.T << ',' << c.deltas[i] << ',' << c.exceed_prob[i] << ','
         << c.reps << "\n";
}

void emit_tail_csv(const std::vector<TailCurve>& curves, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_tail_csv: cannot open for writing: " + path);
  emit_tail_csv(curves, os);
}

}  // namespace varscore
