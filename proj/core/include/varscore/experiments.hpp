#pragma once

// Monte-Carlo harness: network matrix generators, H0/HA replicate
// experiments over (graph, M, T, statistic), FPR/TPR aggregation, and CSV
// persistence. Fully deterministic given the master seed, at any worker
// count.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varscore/estimators.hpp"
#include "varscore/matrix.hpp"
#include "varscore/score_test.hpp"
#include "varscore/var_model.hpp"

namespace varscore {

enum class GraphKind { block, chain, random_symmetric };

struct Hypothesis {
  bool alternative = false;
  double phi = 0.5;
  std::uint64_t delta_seed = 1;
};

struct ExperimentConfig {
  GraphKind graph = GraphKind::random_symmetric;
  std::size_t rho = 2;            // random graph row sparsity
  double norm_target = 0.75;
  std::vector<std::size_t> M_list{30};
  std::vector<std::size_t> T_list{1000};
  // template: rows and columns (0-based); null values are filled per cell
  // from the generated matrix
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> spec_template;
  double alpha = 0.05;
  Hypothesis hypothesis;
  std::size_t reps = 500;
  NoiseSpec noise{NoiseKind::uniform, 1.0};
  std::vector<StatisticKind> statistics{StatisticKind::u_tilde, StatisticKind::r_hat};
  bool cross_validate = true;
  double lambda_scale = 2.0;      // fixed-tuning constant when CV is off
  std::uint64_t master_seed = 1;
  std::size_t burn_in = 1000;

  // The default tested set: rows 1,3,5 with columns {3,5},{3,4},{4,8} in
  // the 1-based convention.
  static std::vector<std::pair<std::size_t, std::vector<std::size_t>>> default_spec_template();
  void validate() const;
};

struct RateRow {
  std::string graph;
  std::size_t M = 0;
  std::size_t T = 0;
  std::size_t rho = 0;
  std::string phi;                // "null" for H0 rows
  std::string statistic;
  double rejection_rate = 0.0;
  std::size_t reps = 0;
  double mc_stderr = 0.0;
  std::size_t failures = 0;
};

struct RateTable {
  std::vector<RateRow> rows;
};

// Block-diagonal 2x2 blocks [[1/4,1/2],[1/2,1/4]]; M must be even.
Matrix gen_block_A(std::size_t M);

// Tridiagonal chain with an extra (0,0) entry, constant c tuned by bisection
// so the operator norm is 0.75 within 1e-8.
Matrix gen_chain_A(std::size_t M);

// Random symmetric matrix, at most rho nonzeros per row, rescaled so the
// largest-magnitude eigenvalue equals norm_target within 1e-8.
Matrix gen_random_symmetric_A(std::size_t M, std::size_t rho, double norm_target,
                              std::uint64_t seed);

// Adds T^{-phi} * delta to the tested entries. If the perturbed matrix
// leaves the stationarity guard (spectral radius <= 0.98) delta is halved,
// up to 20 times.
Matrix apply_alternative(const Matrix& a,
                         const std::vector<std::pair<std::size_t, std::vector<std::size_t>>>& spec,
                         const std::vector<double>& delta, double phi, std::size_t T,
                         std::size_t* halvings = nullptr);

RateTable run_experiment(const ExperimentConfig& cfg, std::size_t workers = 1);

void emit_csv(const RateTable& table, std::ostream& os);
void emit_csv(const RateTable& table, const std::string& path);

// Key-value config document; reports every violation at once.
ExperimentConfig parse_experiment_config(std::istream& is);
ExperimentConfig load_experiment_config(const std::string& path);

std::string graph_name(GraphKind kind);

}  // namespace varscore
