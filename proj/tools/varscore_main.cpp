// Command-line front end: simulate series, estimate coefficients, run score
// tests, drive Monte-Carlo experiments and concentration checks.
//
// Exit codes: 0 success, 1 input parse error, 2 unstable model,
// 3 numerical failure, 64 usage error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "varscore/chi2.hpp"
#include "varscore/concentration.hpp"
#include "varscore/estimators.hpp"
#include "varscore/experiments.hpp"
#include "varscore/matrix.hpp"
#include "varscore/score_test.hpp"
#include "varscore/var_model.hpp"

namespace {

using namespace varscore;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;

std::size_t default_workers() {
  if (const char* env = std::getenv("VARSCORE_WORKERS")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

NoiseSpec parse_noise(const std::string& text) {
  // forms: gaussian[:sigma], uniform[:a], rademacher[:scale]
  std::string kind = text;
  double scale = 1.0;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    kind = text.substr(0, colon);
    scale = std::stod(text.substr(colon + 1));
  }
  NoiseSpec spec;
  spec.scale = scale;
  if (kind == "gaussian") spec.kind = NoiseKind::gaussian;
  else if (kind == "uniform") spec.kind = NoiseKind::uniform;
  else if (kind == "rademacher") spec.kind = NoiseKind::rademacher;
  else throw std::invalid_argument("unknown noise kind: " + kind);
  return spec;
}

void write_series_csv(const std::string& path, const LaggedSample& sample) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << 't';
  for (std::size_t c = 0; c < sample.M; ++c) os << ",X" << (c + 1);
  os << '\n';
  os.precision(17);
  // rows X_{1-p} .. X_T so the lagged representation can be rebuilt
  for (std::size_t s = 0; s < sample.series.rows(); ++s) {
    os << (static_cast<long long>(s) - static_cast<long long>(sample.p) + 1);
    for (std::size_t c = 0; c < sample.M; ++c) os << ',' << sample.series(s, c);
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Matrix read_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open series: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("series file empty: " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;  // time column
        continue;
      }
      row.push_back(std::stod(cell));
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("series has no data rows: " + path);
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != out.cols()) throw std::runtime_error("ragged series row");
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

// spec entries "m:j" (1-based), grouped by row in first-seen order
std::vector<std::pair<std::size_t, std::vector<std::size_t>>> parse_spec_entries(
    const std::vector<std::string>& tokens) {
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> out;
  for (const auto& tok : tokens) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("bad spec entry '" + tok + "' (expected row:col, 1-based)");
    const std::size_t row = std::stoull(tok.substr(0, colon));
    const std::size_t col = std::stoull(tok.substr(colon + 1));
    if (row < 1 || col < 1) throw std::invalid_argument("spec indices are 1-based");
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& e) { return e.first == row - 1; });
    if (it == out.end())
      out.push_back({row - 1, {col - 1}});
    else
      it->second.push_back(col - 1);
  }
  return out;
}

int cmd_simulate(const std::string& model_path, std::size_t T, const std::string& noise_text,
                 std::uint64_t seed, std::size_t burn_in, const std::string& out_path) {
  VarModel model;
  try {
    model = load_model(model_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  }
  try {
    const NoiseSpec noise = parse_noise(noise_text);
    model.noise_sigma = std::sqrt(noise.variance());
    psi_series(model);  // stationarity gate
    const LaggedSample sample = simulate(model, T, noise, burn_in, seed);
    write_series_csv(out_path, sample);
  } catch (const InstabilityError& e) {
    std::cerr << "error: unstable model: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_estimate(const std::string& series_path, std::size_t p, const std::string& method_text,
                 double lambda, bool use_cv, const std::string& out_path) {
  try {
    const Matrix series = read_series_csv(series_path);
    const LaggedSample sample = build_lagged(series, p);
    const FitMethod method = method_text == "dantzig" ? FitMethod::dantzig : FitMethod::lasso;
    double lam = lambda;
    if (use_cv)
      lam = cv_select_lambda(sample, default_lambda_grid(sample), method,
                             FitTarget::coefficients);
    else if (!(lam > 0.0))
      lam = default_lambda(sample);
    LassoConfig cfg;
    cfg.lambda = lam;
    const Matrix a_hat = estimate_A(sample, cfg, method);
    const double sigma2 = estimate_variance(sample, a_hat);

    VarModel fitted;
    fitted.p = p;
    fitted.M = sample.M;
    fitted.noise_sigma = std::sqrt(std::max(sigma2, 1e-300));
    for (std::size_t j = 0; j < p; ++j)
      fitted.coeffs.push_back(a_hat.block(0, j * sample.M, sample.M, sample.M));
    save_model(out_path, fitted);

    std::cout.precision(6);
    std::cout << "estimate method=" << method_text << " lambda=" << lam
              << " sigma2_hat=" << sigma2 << " out=" << out_path << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_test(const std::string& series_path, std::size_t p, const std::string& model_path,
             const std::vector<std::string>& spec_tokens, const std::string& null_text,
             const std::string& method_text, const std::string& statistic_text, double alpha,
             double sigma2_known, bool use_cv, double lambda_fixed,
             const std::string& json_path) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::cerr << "error: --alpha must be in (0,1)\n";
    return kExitUsage;
  }
  if (statistic_text == "u-hat" && !(sigma2_known > 0.0)) {
    std::cerr << "error: --statistic u-hat needs --sigma2 > 0 (known-variance mode)\n";
    return kExitUsage;
  }
  try {
    const Matrix series = read_series_csv(series_path);
    const LaggedSample sample = build_lagged(series, p);

    const auto tmpl = parse_spec_entries(spec_tokens);
    TestSpec spec;
    spec.alpha = alpha;
    for (const auto& [row, cols] : tmpl) {
      TestEntry e;
      e.row = row;
      e.cols = cols;
      e.null_values.assign(cols.size(), 0.0);
      spec.entries.push_back(std::move(e));
    }
    if (!model_path.empty()) {
      // hypothesized values read off a reference model file
      const VarModel ref = load_model(model_path);
      const Matrix stacked = ref.stacked();
      for (auto& e : spec.entries)
        for (std::size_t i = 0; i < e.cols.size(); ++i)
          e.null_values[i] = stacked(e.row, e.cols[i]);
    } else if (!null_text.empty()) {
      std::stringstream ss(null_text);
      std::string cell;
      std::vector<double> vals;
      while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
      if (vals.size() != spec.total_dim())
        throw std::invalid_argument("--null needs exactly d values");
      std::size_t off = 0;
      for (auto& e : spec.entries)
        for (std::size_t i = 0; i < e.cols.size(); ++i) e.null_values[i] = vals[off++];
    }
    spec.validate(sample.p, sample.M);

    FitOptions opts;
    opts.method = method_text == "dantzig" ? FitMethod::dantzig : FitMethod::lasso;
    opts.cross_validate = use_cv;
    opts.lambda_a = lambda_fixed;
    opts.lambda_w = lambda_fixed;
    const FitResult fit = fit_var(sample, spec, opts);
    const ScoreParts parts = decorrelated_score(sample, fit, spec);

    TestReport rep;
    if (statistic_text == "u-hat")
      rep = statistic_u_hat(parts, fit, spec, sigma2_known);
    else if (statistic_text == "r-hat")
      rep = statistic_r_hat(parts, fit, spec);
    else
      rep = statistic_u_tilde(parts, fit, spec);

    std::cout.precision(6);
    std::cout << "statistic=" << statistic_name(rep.statistic_kind) << " value=" << rep.value
              << " df=" << rep.df << " p_value=" << rep.p_value
              << " reject=" << (rep.reject ? "true" : "false") << '\n';

    if (!json_path.empty()) {
      nlohmann::json j;
      j["statistic"] = statistic_name(rep.statistic_kind);
      j["value"] = rep.value;
      j["df"] = rep.df;
      j["p_value"] = rep.p_value;
      j["reject"] = rep.reject;
      j["alpha"] = rep.alpha;
      j["sigma2_used"] = rep.sigma2_used;
      j["lambda_a"] = fit.lambda_a;
      j["lambda_w"] = fit.lambda_w;
      std::ofstream os(json_path);
      if (!os) throw std::runtime_error("cannot open for writing: " + json_path);
      os << j.dump(2) << '\n';
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InstabilityError& e) {
    std::cerr << "error: unstable model: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_path,
                   std::size_t workers) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  }
  try {
    std::cerr << "experiment: " << cfg.M_list.size() * cfg.T_list.size() << " cells x "
              << cfg.reps << " reps, " << workers << " workers\n";
    const RateTable table = run_experiment(cfg, workers);
    emit_csv(table, out_path);
    std::cerr << "wrote " << table.rows.size() << " rows to " << out_path << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_concentration(const std::string& model_path, const std::vector<std::size_t>& T_list,
                      std::size_t reps, std::uint64_t seed, const std::string& out_path) {
  try {
    const VarModel model = [&] {
      VarModel m = load_model(model_path);
      m.noise_sigma = 1.0;
      return m;
    }();
    std::vector<TailCurve> curves;
    const std::size_t n = model.p * model.M;
    Matrix b = Matrix::identity(n);
    for (std::size_t T : T_list) {
      curves.push_back(quadratic_form_tail(model, b, T, reps, derive_seed(seed, 1)));
      curves.push_back(deviation_tail(model, T, reps, derive_seed(seed, 2)));
      curves.push_back(cov_maxnorm_tail(model, T, reps, derive_seed(seed, 3)));
    }
    emit_tail_csv(curves, out_path);
  } catch (const InstabilityError& e) {
    std::cerr << "error: unstable model: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"high-dimensional score tests for sparse VAR models"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a series from a model file");
  std::string sim_model, sim_noise = "gaussian:1", sim_out = "series.csv";
  std::size_t sim_T = 1000, sim_burn = 1000;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "model file (p M header + blocks)")->required();
  sim->add_option("-T,--length", sim_T, "number of transitions")->required();
  sim->add_option("--noise", sim_noise, "gaussian[:sigma] | uniform[:a] | rademacher[:s]");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--burn-in", sim_burn, "burn-in steps");
  sim->add_option("--out", sim_out, "output CSV path")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "sparse estimation of the coefficient matrix");
  std::string est_series, est_method = "lasso", est_out = "fit.model";
  std::size_t est_p = 1;
  double est_lambda = 0.0;
  bool est_cv = false;
  est->add_option("--series", est_series, "series CSV")->required();
  est->add_option("-p,--lag", est_p, "lag order");
  est->add_option("--method", est_method)->check(CLI::IsMember({"lasso", "dantzig"}));
  est->add_option("--lambda", est_lambda, "penalty (0 = default rule)");
  est->add_flag("--cv", est_cv, "select lambda by consecutive-split CV");
  est->add_option("--out", est_out, "output model file")->required();

  // test
  auto* tst = app.add_subcommand("test", "decorrelated score test on a series");
  std::string tst_series, tst_model, tst_null, tst_method = "lasso", tst_stat = "u-tilde",
              tst_json;
  std::vector<std::string> tst_spec;
  std::size_t tst_p = 1;
  double tst_alpha = 0.05, tst_sigma2 = 0.0, tst_lambda = 0.0;
  bool tst_cv = true;
  tst->add_option("--series", tst_series, "series CSV")->required();
  tst->add_option("-p,--lag", tst_p, "lag order");
  tst->add_option("--spec", tst_spec, "tested entries row:col (1-based), repeatable")->required();
  tst->add_option("--model", tst_model, "reference model file supplying null values");
  tst->add_option("--null", tst_null, "comma-separated null values (default zeros)");
  tst->add_option("--method", tst_method)->check(CLI::IsMember({"lasso", "dantzig"}));
  tst->add_option("--statistic", tst_stat)->check(CLI::IsMember({"u-tilde", "r-hat", "u-hat"}));
  tst->add_option("--alpha", tst_alpha, "significance level");
  tst->add_option("--sigma2", tst_sigma2, "known noise variance (u-hat mode)");
  tst->add_flag("--cv,!--no-cv", tst_cv, "cross-validate penalties (default on)");
  tst->add_option("--lambda", tst_lambda, "fixed penalty when CV is off");
  tst->add_option("--report-json", tst_json, "structured report path");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte-Carlo FPR/TPR experiment from a config");
  std::string exp_config, exp_out = "rates.csv";
  std::size_t exp_workers = default_workers();
  exp->add_option("--config", exp_config, "experiment config file")->required();
  exp->add_option("--out", exp_out, "output CSV")->required();
  exp->add_option("--workers", exp_workers, "worker threads");

  // concentration
  auto* con = app.add_subcommand("concentration", "empirical concentration tail curves");
  std::string con_model, con_out = "tails.csv";
  std::vector<std::size_t> con_T{250, 1000, 4000};
  std::size_t con_reps = 300;
  std::uint64_t con_seed = 1;
  con->add_option("--model", con_model, "model file")->required();
  con->add_option("-T,--lengths", con_T, "series lengths");
  con->add_option("--reps", con_reps, "replicates per length");
  con->add_option("--seed", con_seed, "rng seed");
  con->add_option("--out", con_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (sim->parsed())
    return cmd_simulate(sim_model, sim_T, sim_noise, sim_seed, sim_burn, sim_out);
  if (est->parsed()) return cmd_estimate(est_series, est_p, est_method, est_lambda, est_cv, est_out);
  if (tst->parsed())
    return cmd_test(tst_series, tst_p, tst_model, tst_spec, tst_null, tst_method, tst_stat,
                    tst_alpha, tst_sigma2, tst_cv, tst_lambda, tst_json);
  if (exp->parsed()) return cmd_experiment(exp_config, exp_out, exp_workers);
  if (con->parsed()) return cmd_concentration(con_model, con_T, con_reps, con_seed, con_out);
  return kExitUsage;
}
