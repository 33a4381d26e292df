#include "varscore/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace varscore {

std::vector<std::pair<std::size_t, std::vector<std::size_t>>>
ExperimentConfig::default_spec_template() {
  // 1-based (1,3),(1,5),(3,3),(3,4),(5,4),(5,8) converted to 0-based
  return {{0, {2, 4}}, {2, {2, 3}}, {4, {3, 7}}};
}

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  if (M_list.empty()) errors.push_back("M_list is empty");
  if (T_list.empty()) errors.push_back("T_list is empty");
  if (reps < 1) errors.push_back("reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) errors.push_back("alpha must be in (0,1)");
  if (statistics.empty()) errors.push_back("statistics is empty");
  const auto tmpl = spec_template.empty() ? default_spec_template() : spec_template;
  for (std::size_t M : M_list) {
    if (graph == GraphKind::block && M % 2 != 0)
      errors.push_back("block graph needs even M (got " + std::to_string(M) + ")");
    for (const auto& [row, cols] : tmpl) {
      if (row >= M) errors.push_back("tested row out of range for M=" + std::to_string(M));
      for (std::size_t c : cols)
        if (c >= M) errors.push_back("tested column out of range for M=" + std::to_string(M));
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
}

Matrix gen_block_A(std::size_t M) {
  if (M % 2 != 0) throw std::invalid_argument("gen_block_A: M must be even");
  Matrix a(M, M);
  for (std::size_t b = 0; b + 1 < M; b += 2) {
    a(b, b) = 0.25;
    a(b, b + 1) = 0.5;
    a(b + 1, b) = 0.5;
    a(b + 1, b + 1) = 0.25;
  }
  return a;
}

Matrix gen_chain_A(std::size_t M) {
  if (M < 2) throw std::invalid_argument("gen_chain_A: M must be >= 2");
  auto build = [M](double c) {
    Matrix a(M, M);
    a(0, 0) = c;
    for (std::size_t i = 0; i + 1 < M; ++i) {
      a(i, i + 1) = c;
      a(i + 1, i) = c;
    }
    return a;
  };
  // operator norm is linear in c, so one norm evaluation would do; bisection
  // keeps the contract explicit and costs little
  double lo = 0.0, hi = 0.75;
  while (operator_norm(build(hi)) < 0.75) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (operator_norm(build(mid)) < 0.75)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12) break;
  }
  const double c = 0.5 * (lo + hi);
  return build(c);
}

Matrix gen_random_symmetric_A(std::size_t M, std::size_t rho, double norm_target,
                              std::uint64_t seed) {
  if (rho < 1 || rho > M) throw std::invalid_argument("gen_random_symmetric_A: bad rho");
  Rng rng(seed);
  const std::size_t target_edges = rho * M / 2;
  for (std::size_t attempt = 0; attempt < 100; ++attempt) {
    Matrix a(M, M);
    std::vector<std::size_t> degree(M, 0);
    std::size_t placed = 0;
    // sample undirected edges without replacement subject to the degree cap
    for (std::size_t tries = 0; tries < 50 * target_edges && placed < target_edges; ++tries) {
      const std::size_t i = static_cast<std::size_t>(rng.below(M));
      const std::size_t j = static_cast<std::size_t>(rng.below(M));
      if (i == j) {
        if (degree[i] + 1 > rho || a(i, i) != 0.0) continue;
        a(i, i) = rng.uniform(-1.0, 1.0);
        ++degree[i];
        ++placed;
      } else {
        if (degree[i] + 1 > rho || degree[j] + 1 > rho || a(i, j) != 0.0) continue;
        const double v = rng.uniform(-1.0, 1.0);
        a(i, j) = v;
        a(j, i) = v;
        ++degree[i];
        ++degree[j];
        ++placed;
      }
    }
    if (placed < target_edges) continue;
    // rescale so the largest-magnitude eigenvalue hits the target
    SymEig eig = sym_eig(a);
    double max_abs = 0.0;
    for (double lam : eig.eigenvalues) max_abs = std::max(max_abs, std::fabs(lam));
    if (max_abs < 1e-12) continue;
    a *= norm_target / max_abs;
    return a;
  }
  throw std::runtime_error("gen_random_symmetric_A: pattern construction failed");
}

Matrix apply_alternative(const Matrix& a,
                         const std::vector<std::pair<std::size_t, std::vector<std::size_t>>>& spec,
                         const std::vector<double>& delta, double phi, std::size_t T,
                         std::size_t* halvings) {
  std::size_t d = 0;
  for (const auto& [row, cols] : spec) d += cols.size();
  if (delta.size() != d) throw std::invalid_argument("apply_alternative: delta length mismatch");

  const double scale0 = std::pow(static_cast<double>(T), -phi);
  double factor = 1.0;
  for (std::size_t h = 0; h <= 20; ++h) {
    Matrix out = a;
    std::size_t off = 0;
    for (const auto& [row, cols] : spec)
      for (std::size_t c : cols) out(row, c) += scale0 * factor * delta[off++];
    if (spectral_radius_estimate(out) <= 0.98) {
      if (halvings) *halvings = h;
      return out;
    }
    factor *= 0.5;
  }
  throw InstabilityError("apply_alternative: perturbation unstable after 20 halvings");
}

std::string graph_name(GraphKind kind) {
  switch (kind) {
    case GraphKind::block: return "block";
    case GraphKind::chain: return "chain";
    case GraphKind::random_symmetric: return "random";
  }
  return "unknown";
}

namespace {

struct CellResult {
  std::vector<std::size_t> rejections;  // aligned with cfg.statistics
  std::size_t successes = 0;
  std::size_t failures = 0;
};

std::uint64_t cell_key(const ExperimentConfig& cfg, std::size_t M, std::size_t T) {
  std::uint64_t h = cfg.master_seed;
  h = splitmix64(h ^ static_cast<std::uint64_t>(M));
  h = splitmix64(h ^ static_cast<std::uint64_t>(T));
  h = splitmix64(h ^ static_cast<std::uint64_t>(cfg.graph));
  h = splitmix64(h ^ (cfg.hypothesis.alternative ? 0x9E37ULL : 0ULL));
  return h;
}

CellResult run_cell(const ExperimentConfig& cfg, std::size_t M, std::size_t T,
                    std::size_t workers) {
  const auto tmpl = cfg.spec_template.empty() ? ExperimentConfig::default_spec_template()
                                              : cfg.spec_template;
  // the tested matrix is fixed per cell
  Matrix a0;
  switch (cfg.graph) {
    case GraphKind::block: a0 = gen_block_A(M); break;
    case GraphKind::chain: a0 = gen_chain_A(M); break;
    case GraphKind::random_symmetric:
      a0 = gen_random_symmetric_A(M, cfg.rho, cfg.norm_target,
                                  splitmix64(cfg.master_seed ^ (0xA5A5ULL + M)));
      break;
  }

  // null values are the unperturbed tested entries
  TestSpec spec;
  spec.alpha = cfg.alpha;
  for (const auto& [row, cols] : tmpl) {
    TestEntry e;
    e.row = row;
    e.cols = cols;
    for (std::size_t c : cols) e.null_values.push_back(a0(row, c));
    spec.entries.push_back(std::move(e));
  }

  VarModel model;
  model.p = 1;
  model.M = M;
  model.noise_sigma = std::sqrt(cfg.noise.variance());

  if (cfg.hypothesis.alternative) {
    // delta drawn once per cell and normalized to unit transformed length
    Rng drng(splitmix64(cfg.hypothesis.delta_seed ^ cell_key(cfg, M, T)));
    const std::size_t d = spec.total_dim();
    std::vector<double> delta(d);
    for (double& v : delta) v = drng.gaussian();
    VarModel base = model;
    base.coeffs = {a0};
    const PopulationCov cov = population_cov(base);
    const double nc = noncentrality(base, cov, spec, delta);
    if (nc > 0.0)
      for (double& v : delta) v /= std::sqrt(nc);
    model.coeffs = {apply_alternative(a0, tmpl, delta, cfg.hypothesis.phi, T)};
  } else {
    model.coeffs = {a0};
  }
  model.validate();

  const std::size_t n_stats = cfg.statistics.size();
  const double sigma2_true = cfg.noise.variance();
  std::vector<std::vector<int>> verdicts(cfg.reps, std::vector<int>(n_stats, -1));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= cfg.reps) return;
      try {
        const std::uint64_t seed = derive_seed(cfg.master_seed ^ cell_key(cfg, M, T), r);
        const LaggedSample sample = simulate(model, T, cfg.noise, cfg.burn_in, seed);
        FitOptions opts;
        opts.method = FitMethod::lasso;
        opts.cross_validate = cfg.cross_validate;
        opts.lambda_scale = cfg.lambda_scale;
        const FitResult fit = fit_var(sample, spec, opts);
        const ScoreParts parts = decorrelated_score(sample, fit, spec);
        for (std::size_t si = 0; si < n_stats; ++si) {
          TestReport rep;
          switch (cfg.statistics[si]) {
            case StatisticKind::u_tilde: rep = statistic_u_tilde(parts, fit, spec); break;
            case StatisticKind::r_hat: rep = statistic_r_hat(parts, fit, spec); break;
            case StatisticKind::u_hat: rep = statistic_u_hat(parts, fit, spec, sigma2_true); break;
          }
          verdicts[r][si] = rep.reject ? 1 : 0;
        }
      } catch (const std::exception&) {
        for (std::size_t si = 0; si < n_stats; ++si) verdicts[r][si] = -1;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  CellResult res;
  res.rejections.assign(n_stats, 0);
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    if (verdicts[r][0] < 0) {
      ++res.failures;
      continue;
    }
    ++res.successes;
    for (std::size_t si = 0; si < n_stats; ++si)
      if (verdicts[r][si] == 1) ++res.rejections[si];
  }
  if (res.failures * 20 > cfg.reps)
    throw std::runtime_error("run_experiment: cell aborted, more than 5% replicate failures");
  return res;
}

std::string format_phi(const ExperimentConfig& cfg) {
  if (!cfg.hypothesis.alternative) return "null";
  std::ostringstream os;
  os.precision(17);
  os << cfg.hypothesis.phi;
  return os.str();
}

}  // namespace

RateTable run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  RateTable table;
  for (std::size_t M : cfg.M_list) {
    for (std::size_t T : cfg.T_list) {
      const CellResult cell = run_cell(cfg, M, T, workers);
      for (std::size_t si = 0; si < cfg.statistics.size(); ++si) {
        RateRow row;
        row.graph = graph_name(cfg.graph);
        row.M = M;
        row.T = T;
        row.rho = cfg.graph == GraphKind::random_symmetric ? cfg.rho : 2;
        row.phi = format_phi(cfg);
        row.statistic = statistic_name(cfg.statistics[si]);
        row.reps = cell.successes;
        row.failures = cell.failures;
        const double r = cell.successes > 0
                             ? static_cast<double>(cell.rejections[si]) /
                                   static_cast<double>(cell.successes)
                             : 0.0;
        row.rejection_rate = r;
        row.mc_stderr = cell.successes > 0
                            ? std::sqrt(r * (1.0 - r) / static_cast<double>(cell.successes))
                            : 0.0;
        table.rows.push_back(std::move(row));
      }
    }
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const RateRow& a, const RateRow& b) {
    return std::tie(a.graph, a.M, a.T, a.phi, a.statistic) <
           std::tie(b.graph, b.M, b.T, b.phi, b.statistic);
  });
  return table;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void emit_csv(const RateTable& table, std::ostream& os) {
  bool any_failures = false;
  for (const auto& r : table.rows)
    if (r.failures > 0) any_failures = true;
  os << "graph,M,T,rho,phi,statistic,rejection_rate,reps,mc_stderr";
  if (any_failures) os << ",failures";
  os << "\n";
  for (const auto& r : table.rows) {
    os << csv_quote(r.graph) << ',' << r.M << ',' << r.T << ',' << r.rho << ','
       << csv_quote(r.phi) << ',' << csv_quote(r.statistic) << ','
       << format_real(r.rejection_rate) << ',' << r.reps << ',' << format_real(r.mc_stderr);
    if (any_failures) os << ',' << r.failures;
    os << "\n";
  }
}

void emit_csv(const RateTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_csv: cannot open for writing: " + path);
  emit_csv(table, os);
  if (!os) throw std::runtime_error("emit_csv: write failed: " + path);
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& is) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    if (!kv.emplace(key, value).second)
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto parse_u64 = [&](const std::string& key, const std::string& v, std::uint64_t& out) {
    try {
      out = std::stoull(v);
    } catch (...) {
      errors.push_back(key + ": expected an integer, got '" + v + "'");
    }
  };
  auto parse_real = [&](const std::string& key, const std::string& v, double& out) {
    try {
      out = std::stod(v);
    } catch (...) {
      errors.push_back(key + ": expected a number, got '" + v + "'");
    }
  };

  if (auto v = take("graph")) {
    if (*v == "block") cfg.graph = GraphKind::block;
    else if (*v == "chain") cfg.graph = GraphKind::chain;
    else if (*v == "random") cfg.graph = GraphKind::random_symmetric;
    else errors.push_back("graph: expected block|chain|random, got '" + *v + "'");
  }
  if (auto v = take("rho")) {
    std::uint64_t u = 0;
    parse_u64("rho", *v, u);
    cfg.rho = static_cast<std::size_t>(u);
  }
  if (auto v = take("norm_target")) parse_real("norm_target", *v, cfg.norm_target);
  if (auto v = take("M_list")) {
    cfg.M_list.clear();
    for (const auto& tok : split_ws(*v)) {
      std::uint64_t u = 0;
      parse_u64("M_list", tok, u);
      cfg.M_list.push_back(static_cast<std::size_t>(u));
    }
  }
  if (auto v = take("T_list")) {
    cfg.T_list.clear();
    for (const auto& tok : split_ws(*v)) {
      std::uint64_t u = 0;
      parse_u64("T_list", tok, u);
      cfg.T_list.push_back(static_cast<std::size_t>(u));
    }
  }
  if (auto v = take("spec")) {
    // entries "row:col" in the 1-based convention, grouped by row
    std::map<std::size_t, std::vector<std::size_t>> by_row;
    std::vector<std::size_t> row_order;
    for (const auto& tok : split_ws(*v)) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        errors.push_back("spec: expected row:col, got '" + tok + "'");
        continue;
      }
      try {
        const std::size_t row = std::stoull(tok.substr(0, colon));
        const std::size_t col = std::stoull(tok.substr(colon + 1));
        if (row < 1 || col < 1) throw std::invalid_argument("zero");
        if (by_row.find(row - 1) == by_row.end()) row_order.push_back(row - 1);
        by_row[row - 1].push_back(col - 1);
      } catch (...) {
        errors.push_back("spec: bad entry '" + tok + "' (1-based row:col expected)");
      }
    }
    cfg.spec_template.clear();
    for (std::size_t row : row_order) cfg.spec_template.emplace_back(row, by_row[row]);
  }
  if (auto v = take("alpha")) parse_real("alpha", *v, cfg.alpha);
  if (auto v = take("hypothesis")) {
    if (*v == "null") cfg.hypothesis.alternative = false;
    else if (*v == "alternative") cfg.hypothesis.alternative = true;
    else errors.push_back("hypothesis: expected null|alternative, got '" + *v + "'");
  }
  if (auto v = take("phi")) parse_real("phi", *v, cfg.hypothesis.phi);
  if (auto v = take("delta_seed")) parse_u64("delta_seed", *v, cfg.hypothesis.delta_seed);
  if (auto v = take("reps")) {
    std::uint64_t u = 0;
    parse_u64("reps", *v, u);
    cfg.reps = static_cast<std::size_t>(u);
  }
  if (auto v = take("noise")) {
    if (*v == "gaussian") cfg.noise.kind = NoiseKind::gaussian;
    else if (*v == "uniform") cfg.noise.kind = NoiseKind::uniform;
    else if (*v == "rademacher") cfg.noise.kind = NoiseKind::rademacher;
    else errors.push_back("noise: expected gaussian|uniform|rademacher, got '" + *v + "'");
  }
  if (auto v = take("noise_scale")) parse_real("noise_scale", *v, cfg.noise.scale);
  if (auto v = take("statistics")) {
    cfg.statistics.clear();
    for (const auto& tok : split_ws(*v)) {
      if (tok == "u_tilde" || tok == "u-tilde") cfg.statistics.push_back(StatisticKind::u_tilde);
      else if (tok == "r_hat" || tok == "r-hat") cfg.statistics.push_back(StatisticKind::r_hat);
      else if (tok == "u_hat" || tok == "u-hat") cfg.statistics.push_back(StatisticKind::u_hat);
      else errors.push_back("statistics: unknown statistic '" + tok + "'");
    }
  }
  if (auto v = take("tuning")) {
    if (*v == "cv") cfg.cross_validate = true;
    else if (*v == "fixed") cfg.cross_validate = false;
    else errors.push_back("tuning: expected cv|fixed, got '" + *v + "'");
  }
  if (auto v = take("lambda_scale")) parse_real("lambda_scale", *v, cfg.lambda_scale);
  if (auto v = take("master_seed")) parse_u64("master_seed", *v, cfg.master_seed);
  if (auto v = take("burn_in")) {
    std::uint64_t u = 0;
    parse_u64("burn_in", *v, u);
    cfg.burn_in = static_cast<std::size_t>(u);
  }
  for (const auto& [key, value] : kv) errors.push_back("unknown key '" + key + "'");

  if (!errors.empty()) {
    std::string msg = "config errors:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  return parse_experiment_config(is);
}

}  // namespace varscore
