#include "varscore/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "varscore/simplex.hpp"

namespace varscore {

namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

// Gram and correlation from an explicit design/response pair.
void build_gram(const Matrix& design, const std::vector<double>& response, Matrix& gram,
                std::vector<double>& corr) {
  const std::size_t t_len = design.rows();
  const std::size_t q = design.cols();
  if (response.size() != t_len) throw std::invalid_argument("design/response length mismatch");
  if (t_len < 2) throw std::invalid_argument("need at least two observations");
  gram = Matrix(q, q);
  corr.assign(q, 0.0);
  const double inv_t = 1.0 / static_cast<double>(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t j = 0; j < q; ++j) {
      const double xj = design(t, j);
      if (xj == 0.0) continue;
      corr[j] += xj * response[t];
      for (std::size_t k = j; k < q; ++k) gram(j, k) += xj * design(t, k);
    }
  }
  for (std::size_t j = 0; j < q; ++j) {
    corr[j] *= inv_t;
    for (std::size_t k = j; k < q; ++k) {
      gram(j, k) *= inv_t;
      gram(k, j) = gram(j, k);
    }
  }
}

// One cyclic sweep over the given coordinate list; returns max |change|.
double cd_sweep(const Matrix& gram, const std::vector<double>& corr, double half_lambda,
                const std::vector<std::size_t>& coords, std::vector<double>& beta,
                std::vector<double>& gb) {
  // gb holds G * beta and is updated incrementally
  const std::size_t q = beta.size();
  double max_change = 0.0;
  for (std::size_t j : coords) {
    const double gjj = gram(j, j);
    double next;
    if (gjj <= 0.0) {
      next = 0.0;
    } else {
      const double z = corr[j] - (gb[j] - gjj * beta[j]);
      next = soft_threshold(z, half_lambda) / gjj;
    }
    const double delta = next - beta[j];
    if (delta != 0.0) {
      beta[j] = next;
      for (std::size_t k = 0; k < q; ++k) gb[k] += delta * gram(j, k);
      max_change = std::max(max_change, std::fabs(delta));
    }
  }
  return max_change;
}

std::vector<double> fit_one(const Matrix& gram, const std::vector<double>& corr,
                            const LassoConfig& cfg, FitMethod method,
                            const std::vector<double>* warm) {
  if (method == FitMethod::lasso) {
    return lasso_regress_gram(gram, corr, cfg, warm).beta;
  }
  return dantzig_regress_gram(gram, corr, cfg.lambda);
}

}  // namespace

RegressionResult lasso_regress_gram(const Matrix& gram, const std::vector<double>& corr,
                                    const LassoConfig& cfg,
                                    const std::vector<double>* warm_start) {
  const std::size_t q = gram.rows();
  if (gram.cols() != q || corr.size() != q)
    throw std::invalid_argument("lasso_regress_gram: dimension mismatch");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("lasso_regress_gram: tol must be positive");
  if (cfg.lambda < 0.0) throw std::invalid_argument("lasso_regress_gram: negative lambda");

  RegressionResult out;
  out.beta.assign(q, 0.0);
  if (warm_start) {
    if (warm_start->size() != q) throw std::invalid_argument("warm start size mismatch");
    out.beta = *warm_start;
  }
  std::vector<double> gb = mat_vec(gram, out.beta);
  std::vector<std::size_t> all(q);
  for (std::size_t j = 0; j < q; ++j) all[j] = j;
  const double half_lambda = 0.5 * cfg.lambda;

  std::size_t sweeps = 0;
  bool converged = false;
  while (sweeps < cfg.max_iters) {
    // full sweep
    double change = cd_sweep(gram, corr, half_lambda, all, out.beta, gb);
    ++sweeps;
    if (change < cfg.tol) {
      converged = true;
      break;
    }
    // iterate on the active set until stable, then re-check with a full sweep
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < q; ++j)
      if (out.beta[j] != 0.0) active.push_back(j);
    while (sweeps < cfg.max_iters) {
      change = cd_sweep(gram, corr, half_lambda, active, out.beta, gb);
      ++sweeps;
      if (change < cfg.tol) break;
    }
  }
  out.converged = converged;
  out.iterations = sweeps;
  return out;
}

RegressionResult lasso_regress(const Matrix& design, const std::vector<double>& response,
                               const LassoConfig& cfg) {
  Matrix gram;
  std::vector<double> corr;
  build_gram(design, response, gram, corr);
  return lasso_regress_gram(gram, corr, cfg);
}

std::vector<double> dantzig_regress_gram(const Matrix& gram, const std::vector<double>& corr,
                                         double lambda) {
  const std::size_t q = gram.rows();
  if (gram.cols() != q || corr.size() != q)
    throw std::invalid_argument("dantzig_regress_gram: dimension mismatch");
  if (lambda < 0.0) throw std::invalid_argument("dantzig_regress_gram: negative lambda");

  // variables: u = b+, v = b- (q each); constraints G(u-v) <= c + lambda,
  // -G(u-v) <= lambda - c
  const std::size_t n = 2 * q;
  Matrix a(2 * q, n);
  std::vector<double> b(2 * q);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      a(i, j) = gram(i, j);
      a(i, q + j) = -gram(i, j);
      a(q + i, j) = -gram(i, j);
      a(q + i, q + j) = gram(i, j);
    }
    b[i] = corr[i] + lambda;
    b[q + i] = lambda - corr[i];
  }
  std::vector<double> cost(n, 1.0);
  LpResult lp = solve_lp_inequality(a, b, cost);
  std::vector<double> beta(q);
  for (std::size_t j = 0; j < q; ++j) beta[j] = lp.x[j] - lp.x[q + j];
  return beta;
}

std::vector<double> dantzig_regress(const Matrix& design, const std::vector<double>& response,
                                    double lambda) {
  Matrix gram;
  std::vector<double> corr;
  build_gram(design, response, gram, corr);
  return dantzig_regress_gram(gram, corr, lambda);
}

Matrix gram_matrix(const LaggedSample& sample) {
  const std::size_t q = sample.lag_vectors.cols();
  Matrix g(q, q);
  const double inv_t = 1.0 / static_cast<double>(sample.T);
  for (std::size_t t = 0; t < sample.T; ++t)
    for (std::size_t j = 0; j < q; ++j) {
      const double xj = sample.lag_vectors(t, j);
      if (xj == 0.0) continue;
      for (std::size_t k = j; k < q; ++k) g(j, k) += xj * sample.lag_vectors(t, k);
    }
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t k = j; k < q; ++k) {
      g(j, k) *= inv_t;
      g(k, j) = g(j, k);
    }
  return g;
}

Matrix cross_moments(const LaggedSample& sample) {
  const std::size_t q = sample.lag_vectors.cols();
  const std::size_t m = sample.responses.cols();
  Matrix c(q, m);
  const double inv_t = 1.0 / static_cast<double>(sample.T);
  for (std::size_t t = 0; t < sample.T; ++t)
    for (std::size_t j = 0; j < q; ++j) {
      const double xj = sample.lag_vectors(t, j);
      if (xj == 0.0) continue;
      for (std::size_t r = 0; r < m; ++r) c(j, r) += xj * sample.responses(t, r);
    }
  c *= inv_t;
  return c;
}

Matrix estimate_A(const LaggedSample& sample, const LassoConfig& cfg, FitMethod method) {
  const Matrix gram = gram_matrix(sample);
  const Matrix cross = cross_moments(sample);
  const std::size_t q = gram.rows();
  Matrix a_hat(sample.M, q);
  for (std::size_t m = 0; m < sample.M; ++m) {
    const std::vector<double> corr = cross.col_vector(m);
    const std::vector<double> beta = fit_one(gram, corr, cfg, method, nullptr);
    for (std::size_t j = 0; j < q; ++j) a_hat(m, j) = beta[j];
  }
  return a_hat;
}

Matrix estimate_w(const LaggedSample& sample, const std::vector<std::size_t>& d_set,
                  const LassoConfig& cfg, FitMethod method) {
  const std::size_t q = sample.lag_vectors.cols();
  if (d_set.empty() || d_set.size() >= q)
    throw std::invalid_argument("estimate_w: d_set must be a nonempty proper subset");
  const Matrix gram = gram_matrix(sample);
  const auto comp = complement_indices(d_set, q);
  const Matrix gcc = gram.submatrix(comp, comp);
  Matrix w(comp.size(), d_set.size());
  for (std::size_t jd = 0; jd < d_set.size(); ++jd) {
    std::vector<double> corr(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) corr[i] = gram(comp[i], d_set[jd]);
    const std::vector<double> beta = fit_one(gcc, corr, cfg, method, nullptr);
    for (std::size_t i = 0; i < comp.size(); ++i) w(i, jd) = beta[i];
  }
  return w;
}

std::pair<Matrix, Matrix> sample_partial_cov(const LaggedSample& sample,
                                             const std::vector<std::size_t>& d_set,
                                             const Matrix& w_hat) {
  const std::size_t q = sample.lag_vectors.cols();
  const std::size_t d = d_set.size();
  const auto comp = complement_indices(d_set, q);
  if (w_hat.rows() != comp.size() || w_hat.cols() != d)
    throw std::invalid_argument("sample_partial_cov: w_hat shape mismatch");

  Matrix ups_hat(d, d);
  Matrix ups_tilde(d, d);
  std::vector<double> r(d);
  const double inv_t = 1.0 / static_cast<double>(sample.T);
  for (std::size_t t = 0; t < sample.T; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      double v = sample.lag_vectors(t, d_set[i]);
      for (std::size_t k = 0; k < comp.size(); ++k)
        v -= w_hat(k, i) * sample.lag_vectors(t, comp[k]);
      r[i] = v;
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        ups_hat(i, j) += r[i] * r[j];
        ups_tilde(i, j) += r[i] * sample.lag_vectors(t, d_set[j]);
      }
    }
  }
  ups_hat *= inv_t;
  ups_tilde *= inv_t;
  return {ups_hat, ups_tilde};
}

double estimate_variance(const LaggedSample& sample, const Matrix& a_hat) {
  if (a_hat.rows() != sample.M || a_hat.cols() != sample.lag_vectors.cols())
    throw std::invalid_argument("estimate_variance: a_hat shape mismatch");
  double acc = 0.0;
  for (std::size_t t = 0; t < sample.T; ++t) {
    for (std::size_t m = 0; m < sample.M; ++m) {
      double pred = 0.0;
      for (std::size_t j = 0; j < a_hat.cols(); ++j)
        pred += a_hat(m, j) * sample.lag_vectors(t, j);
      const double res = sample.responses(t, m) - pred;
      acc += res * res;
    }
  }
  return acc / (static_cast<double>(sample.M) * static_cast<double>(sample.T));
}

double default_lambda(const LaggedSample& sample, double scale) {
  const double q = static_cast<double>(sample.lag_vectors.cols());
  return scale * std::sqrt(std::log(q) / static_cast<double>(sample.T));
}

std::vector<double> default_lambda_grid(const LaggedSample& sample) {
  const double base = default_lambda(sample, 1.0);
  std::vector<double> grid(20);
  const double lo = 0.05, hi = 5.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    grid[i] = base * lo * std::pow(hi / lo, f);
  }
  return grid;
}

namespace {

// Truncated view of the first n_train transitions.
LaggedSample head_sample(const LaggedSample& sample, std::size_t n_train) {
  LaggedSample head;
  head.p = sample.p;
  head.M = sample.M;
  head.T = n_train;
  head.lag_vectors = sample.lag_vectors.block(0, 0, n_train, sample.lag_vectors.cols());
  head.responses = sample.responses.block(0, 0, n_train, sample.responses.cols());
  return head;
}

}  // namespace

double cv_select_lambda(const LaggedSample& sample, const std::vector<double>& grid,
                        FitMethod method, FitTarget target,
                        const std::vector<std::size_t>* d_set) {
  if (grid.empty()) throw std::invalid_argument("cv_select_lambda: empty grid");
  if (sample.T < 20) throw std::invalid_argument("cv_select_lambda: T too small for a 90/10 split");
  if (target == FitTarget::weights && d_set == nullptr)
    throw std::invalid_argument("cv_select_lambda: weights target needs d_set");
  if (grid.size() == 1) return grid.front();

  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  if (!(sorted.front() >= 0.0)) throw std::invalid_argument("cv_select_lambda: negative lambda");

  const std::size_t n_train = sample.T - sample.T / 10;
  const std::size_t q = sample.lag_vectors.cols();
  const LaggedSample train = head_sample(sample, n_train);
  const Matrix gram = gram_matrix(train);

  double best_lambda = sorted.back();
  double best_err = std::numeric_limits<double>::infinity();

  auto consider = [&](double lambda, double err) {
    // ties (within fp noise) break toward larger lambda; iterate descending
    if (err < best_err && best_err - err > 1e-14 * std::max(1.0, err)) {
      best_err = err;
      best_lambda = lambda;
    }
  };

  if (target == FitTarget::coefficients) {
    const Matrix cross = cross_moments(train);
    // rows x lambdas, warm-started down the path
    std::vector<std::vector<double>> betas(sample.M, std::vector<double>(q, 0.0));
    for (std::size_t gi = sorted.size(); gi-- > 0;) {
      LassoConfig cfg;
      cfg.lambda = sorted[gi];
      double err = 0.0;
      for (std::size_t m = 0; m < sample.M; ++m) {
        const std::vector<double> corr = cross.col_vector(m);
        std::vector<double> beta;
        if (method == FitMethod::lasso)
          beta = lasso_regress_gram(gram, corr, cfg, &betas[m]).beta;
        else
          beta = dantzig_regress_gram(gram, corr, cfg.lambda);
        betas[m] = beta;
        for (std::size_t t = n_train; t < sample.T; ++t) {
          double pred = 0.0;
          for (std::size_t j = 0; j < q; ++j) pred += beta[j] * sample.lag_vectors(t, j);
          const double res = sample.responses(t, m) - pred;
          err += res * res;
        }
      }
      consider(sorted[gi], err);
    }
  } else {
    const auto comp = complement_indices(*d_set, q);
    const Matrix gcc = gram.submatrix(comp, comp);
    std::vector<std::vector<double>> betas(d_set->size(), std::vector<double>(comp.size(), 0.0));
    for (std::size_t gi = sorted.size(); gi-- > 0;) {
      LassoConfig cfg;
      cfg.lambda = sorted[gi];
      double err = 0.0;
      for (std::size_t jd = 0; jd < d_set->size(); ++jd) {
        std::vector<double> corr(comp.size());
        for (std::size_t i = 0; i < comp.size(); ++i) corr[i] = gram(comp[i], (*d_set)[jd]);
        std::vector<double> beta;
        if (method == FitMethod::lasso)
          beta = lasso_regress_gram(gcc, corr, cfg, &betas[jd]).beta;
        else
          beta = dantzig_regress_gram(gcc, corr, cfg.lambda);
        betas[jd] = beta;
        for (std::size_t t = n_train; t < sample.T; ++t) {
          double pred = 0.0;
          for (std::size_t i = 0; i < comp.size(); ++i)
            pred += beta[i] * sample.lag_vectors(t, comp[i]);
          const double res = sample.lag_vectors(t, (*d_set)[jd]) - pred;
          err += res * res;
        }
      }
      consider(sorted[gi], err);
    }
  }
  return best_lambda;
}

FitResult fit_var(const LaggedSample& sample, const TestSpec& spec, const FitOptions& opts) {
  spec.validate(sample.p, sample.M);
  FitResult out;
  out.method = opts.method;

  if (opts.cross_validate) {
    const std::vector<double> grid = default_lambda_grid(sample);
    out.lambda_a = cv_select_lambda(sample, grid, opts.method, FitTarget::coefficients);
  } else {
    out.lambda_a = opts.lambda_a > 0.0 ? opts.lambda_a : default_lambda(sample, opts.lambda_scale);
  }

  LassoConfig cfg_a;
  cfg_a.lambda = out.lambda_a;
  out.a_hat = estimate_A(sample, cfg_a, opts.method);
  out.sigma2_hat = estimate_variance(sample, out.a_hat);

  for (const auto& entry : spec.entries) {
    double lambda_w;
    if (opts.cross_validate) {
      const std::vector<double> grid = default_lambda_grid(sample);
      lambda_w = cv_select_lambda(sample, grid, opts.method, FitTarget::weights, &entry.cols);
    } else {
      lambda_w = opts.lambda_w > 0.0 ? opts.lambda_w : default_lambda(sample, opts.lambda_scale);
    }
    out.lambda_w = lambda_w;

    LassoConfig cfg_w;
    cfg_w.lambda = lambda_w;
    Matrix w = estimate_w(sample, entry.cols, cfg_w, opts.method);
    auto [ups_hat, ups_tilde] = sample_partial_cov(sample, entry.cols, w);
    out.w_hat.push_back(std::move(w));
    out.ups_hat.push_back(std::move(ups_hat));
    out.ups_tilde.push_back(std::move(ups_tilde));
  }
  return out;
}

}  // namespace varscore
