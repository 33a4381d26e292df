#include "varscore/var_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace varscore {

Matrix VarModel::stacked() const {
  Matrix a(M, p * M);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t r = 0; r < M; ++r)
      for (std::size_t c = 0; c < M; ++c) a(r, j * M + c) = coeffs[j](r, c);
  return a;
}

Matrix VarModel::companion() const {
  const std::size_t n = p * M;
  Matrix f(n, n);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t r = 0; r < M; ++r)
      for (std::size_t c = 0; c < M; ++c) f(r, j * M + c) = coeffs[j](r, c);
  for (std::size_t j = 1; j < p; ++j)
    for (std::size_t r = 0; r < M; ++r) f(j * M + r, (j - 1) * M + r) = 1.0;
  return f;
}

void VarModel::validate() const {
  if (p < 1) throw std::invalid_argument("VarModel: p must be >= 1");
  if (M < 1) throw std::invalid_argument("VarModel: M must be >= 1");
  if (coeffs.size() != p) throw std::invalid_argument("VarModel: need exactly p coefficient matrices");
  for (const auto& a : coeffs) {
    if (a.rows() != M || a.cols() != M)
      throw std::invalid_argument("VarModel: coefficient matrix must be M x M");
    if (!a.all_finite()) throw std::invalid_argument("VarModel: non-finite coefficient");
  }
  if (!(noise_sigma > 0.0)) throw std::invalid_argument("VarModel: noise_sigma must be positive");
}

std::size_t TestSpec::total_dim() const {
  std::size_t d = 0;
  for (const auto& e : entries) d += e.cols.size();
  return d;
}

void TestSpec::validate(std::size_t p, std::size_t M) const {
  if (entries.empty()) throw std::invalid_argument("TestSpec: no entries");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("TestSpec: alpha must be in (0,1)");
  std::set<std::size_t> rows;
  for (const auto& e : entries) {
    if (e.row >= M) throw std::invalid_argument("TestSpec: row out of range");
    if (!rows.insert(e.row).second) throw std::invalid_argument("TestSpec: duplicate tested row");
    if (e.cols.empty()) throw std::invalid_argument("TestSpec: empty column set");
    std::set<std::size_t> cols;
    for (std::size_t c : e.cols) {
      if (c >= p * M) throw std::invalid_argument("TestSpec: column out of range");
      if (!cols.insert(c).second) throw std::invalid_argument("TestSpec: duplicate column");
    }
    if (e.null_values.size() != e.cols.size())
      throw std::invalid_argument("TestSpec: null_values length mismatch");
  }
}

std::vector<std::size_t> complement_indices(const std::vector<std::size_t>& d_set, std::size_t n) {
  std::vector<bool> in(n, false);
  for (std::size_t i : d_set) {
    if (i >= n) throw std::out_of_range("complement_indices: index out of range");
    in[i] = true;
  }
  std::vector<std::size_t> out;
  out.reserve(n - d_set.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

PsiSeries psi_series(const VarModel& model, double tol, std::size_t max_horizon) {
  model.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("psi_series: tol must be positive");
  PsiSeries out;
  out.terms.push_back(Matrix::identity(model.M));
  std::vector<double> norms{1.0};
  std::size_t grow_streak = 0;
  for (std::size_t n = 1; n <= max_horizon; ++n) {
    Matrix psi(model.M, model.M);
    const std::size_t kmax = std::min(n, model.p);
    for (std::size_t i = 1; i <= kmax; ++i) psi += mat_mul(model.coeffs[i - 1], out.terms[n - i]);
    const double nm = operator_norm(psi, 1e-10);
    out.terms.push_back(std::move(psi));
    norms.push_back(nm);
    if (nm > norms[n - 1]) {
      if (++grow_streak >= model.p && n >= model.p + 2)
        throw InstabilityError("psi_series: term norms growing, model unstable");
    } else {
      grow_streak = 0;
    }
    if (nm < tol) break;
  }
  out.truncation_horizon = out.terms.size() - 1;
  if (norms.back() >= tol && out.truncation_horizon == max_horizon) {
    // decide by the fitted decay rate of the last stretch of term norms
    const std::size_t H = out.truncation_horizon;
    const std::size_t first = H >= 9 ? H - 9 : 0;
    double rate = 1.0;
    if (norms[first] > 0.0)
      rate = std::pow(norms[H] / norms[first], 1.0 / static_cast<double>(H - first));
    if (rate >= 0.9995)
      throw InstabilityError("psi_series: no decay up to max_horizon, model unstable");
  }

  // geometric tail estimate fitted on the last (up to) 10 nonzero norms
  const std::size_t H = out.truncation_horizon;
  double tail = 0.0;
  if (norms[H] > 0.0 && H >= 1) {
    const std::size_t first = H >= 9 ? H - 9 : 0;
    double rate = 0.5;
    if (norms[first] > 0.0 && H > first) {
      rate = std::pow(norms[H] / norms[first], 1.0 / static_cast<double>(H - first));
      rate = std::min(rate, 0.999);
    }
    tail = norms[H] * rate / (1.0 - rate);
  }
  out.tail_bound = tail;
  return out;
}

double stability_beta(const VarModel& model, double tol) {
  PsiSeries ps = psi_series(model, tol);
  std::vector<double> norms;
  norms.reserve(ps.terms.size());
  for (const auto& t : ps.terms) norms.push_back(operator_norm(t, 1e-10));

  // extend geometrically so truncation does not bias the double sum
  const std::size_t H = norms.size() - 1;
  if (norms[H] > 1e-300 && H >= 1) {
    const std::size_t first = H >= 9 ? H - 9 : 0;
    double rate = 0.5;
    if (norms[first] > 0.0 && H > first)
      rate = std::min(std::pow(norms[H] / norms[first], 1.0 / static_cast<double>(H - first)), 0.999);
    double v = norms[H];
    while (v > tol * 1e-3 && norms.size() < 100000) {
      v *= rate;
      norms.push_back(v);
    }
  }

  // suffix sums of squares: S_i = sum_{j >= i} norms[j]^2
  std::vector<double> suffix(norms.size() + 1, 0.0);
  for (std::size_t i = norms.size(); i-- > 0;) suffix[i] = suffix[i + 1] + norms[i] * norms[i];
  double beta = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) beta += std::sqrt(suffix[i]);
  return beta;
}

PopulationCov population_cov(const VarModel& model, double tol) {
  model.validate();
  const Matrix f = model.companion();
  if (spectral_radius_estimate(f) >= 1.0)
    throw InstabilityError("population_cov: companion spectral radius >= 1");
  const std::size_t n = model.p * model.M;
  Matrix q(n, n);
  const double s2 = model.noise_sigma * model.noise_sigma;
  for (std::size_t i = 0; i < model.M; ++i) q(i, i) = s2;
  PopulationCov out;
  out.upsilon = lyapunov_solve(f, q, tol);
  out.sigma_x = out.upsilon.block(0, 0, model.M, model.M);
  return out;
}

Matrix decorrelation_weights(const PopulationCov& cov, const std::vector<std::size_t>& d_set) {
  const std::size_t n = cov.upsilon.rows();
  if (d_set.empty() || d_set.size() >= n)
    throw std::invalid_argument("decorrelation_weights: d_set must be a nonempty proper subset");
  const auto comp = complement_indices(d_set, n);
  const Matrix ucc = cov.upsilon.submatrix(comp, comp);
  const Matrix ucd = cov.upsilon.submatrix(comp, d_set);
  return solve_linear(ucc, ucd);
}

Matrix partial_covariance(const PopulationCov& cov, const std::vector<std::size_t>& d_set) {
  const std::size_t n = cov.upsilon.rows();
  if (d_set.empty() || d_set.size() >= n)
    throw std::invalid_argument("partial_covariance: d_set must be a nonempty proper subset");
  const auto comp = complement_indices(d_set, n);
  const Matrix udd = cov.upsilon.submatrix(d_set, d_set);
  const Matrix udc = cov.upsilon.submatrix(d_set, comp);
  const Matrix w = decorrelation_weights(cov, d_set);
  Matrix out = udd - mat_mul(udc, w);
  // exact symmetry for downstream eigensolves
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = i + 1; j < out.cols(); ++j) {
      const double v = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

SparsityLevels sparsity_levels(const VarModel& model, const PopulationCov& cov,
                               const TestSpec& spec) {
  const Matrix a = model.stacked();
  SparsityLevels out;
  out.rho.resize(model.M, 0);
  for (std::size_t m = 0; m < model.M; ++m)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(m, j) != 0.0) ++out.rho[m];
  for (const auto& e : spec.entries) {
    const Matrix w = decorrelation_weights(cov, e.cols);
    std::size_t nz = 0;
    for (double v : w.data())
      if (std::fabs(v) > 1e-10) ++nz;
    out.s.push_back(nz);
  }
  return out;
}

LaggedSample simulate(const VarModel& model, std::size_t T, const NoiseSpec& noise,
                      std::size_t burn_in, std::uint64_t seed, bool keep_noise) {
  model.validate();
  if (T < 1) throw std::invalid_argument("simulate: T must be >= 1");
  const std::size_t p = model.p, M = model.M;
  Rng rng(seed);

  // lag state: lags[0] = X_t, lags[1] = X_{t-1}, ...
  std::vector<std::vector<double>> lags(p, std::vector<double>(M, 0.0));
  LaggedSample out;
  out.p = p;
  out.M = M;
  out.T = T;
  out.series = Matrix(T + p, M);
  if (keep_noise) out.noise = Matrix(T, M);

  const double guard = 1e100;
  std::size_t recorded = 0;
  const std::size_t record_total = T + p;
  // the first p recorded rows are the pre-sample lags X_{1-p..0}
  const std::size_t total_steps = burn_in + record_total;
  std::vector<double> x(M);
  for (std::size_t step = 0; step < total_steps; ++step) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      const Matrix& aj = model.coeffs[j];
      const std::vector<double>& lag = lags[j];
      for (std::size_t r = 0; r < M; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < M; ++c) s += aj(r, c) * lag[c];
        x[r] += s;
      }
    }
    for (std::size_t r = 0; r < M; ++r) {
      const double e = noise.draw(rng);
      x[r] += e;
      if (std::fabs(x[r]) > guard) throw InstabilityError("simulate: series overflow guard tripped");
      if (keep_noise && step >= burn_in + p && recorded >= p)
        out.noise(recorded - p, r) = e;
    }
    if (step >= burn_in) {
      for (std::size_t r = 0; r < M; ++r) out.series(recorded, r) = x[r];
      ++recorded;
    }
    for (std::size_t j = p; j-- > 1;) lags[j] = lags[j - 1];
    lags[0] = x;
  }

  LaggedSample built = build_lagged(out.series, p);
  built.noise = std::move(out.noise);
  return built;
}

LaggedSample build_lagged(const Matrix& series, std::size_t p) {
  if (p < 1) throw std::invalid_argument("build_lagged: p must be >= 1");
  if (series.rows() < p + 1) throw std::invalid_argument("build_lagged: need at least p+1 rows");
  if (!series.all_finite()) throw std::invalid_argument("build_lagged: non-finite series");
  const std::size_t M = series.cols();
  const std::size_t T = series.rows() - p;
  LaggedSample out;
  out.p = p;
  out.M = M;
  out.T = T;
  out.series = series;
  out.lag_vectors = Matrix(T, p * M);
  out.responses = Matrix(T, M);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t src = t + p - 1 - j;  // series row of X_{t-j}
      for (std::size_t c = 0; c < M; ++c) out.lag_vectors(t, j * M + c) = series(src, c);
    }
    for (std::size_t c = 0; c < M; ++c) out.responses(t, c) = series(t + p, c);
  }
  return out;
}

void write_model(std::ostream& os, const VarModel& model) {
  os << model.p << ' ' << model.M << '\n';
  os.precision(17);
  for (std::size_t j = 0; j < model.p; ++j) {
    for (std::size_t r = 0; r < model.M; ++r) {
      for (std::size_t c = 0; c < model.M; ++c) {
        if (c) os << ' ';
        os << model.coeffs[j](r, c);
      }
      os << '\n';
    }
  }
}

VarModel read_model(std::istream& is) {
  VarModel model;
  if (!(is >> model.p >> model.M)) throw std::runtime_error("model parse error: bad header");
  if (model.p < 1 || model.M < 1 || model.p > 100 || model.M > 100000)
    throw std::runtime_error("model parse error: implausible header");
  model.coeffs.assign(model.p, Matrix(model.M, model.M));
  for (std::size_t j = 0; j < model.p; ++j)
    for (std::size_t r = 0; r < model.M; ++r)
      for (std::size_t c = 0; c < model.M; ++c)
        if (!(is >> model.coeffs[j](r, c)))
          throw std::runtime_error("model parse error: truncated coefficient block");
  return model;
}

void save_model(const std::string& path, const VarModel& model) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_model(os, model);
  if (!os) throw std::runtime_error("write failed: " + path);
}

VarModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_model(is);
}

}  // namespace varscore
