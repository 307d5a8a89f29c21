#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsnr/estimators.hpp"
#include "nsnr/metrics.hpp"
#include "nsnr/oracle.hpp"
#include "nsnr/randgen.hpp"

namespace nsnr {

// Redraw cap for singular estimates within one trial; exceeding it raises
// EstimatorSingularError instead of looping forever.
inline constexpr int kMaxRedraws = 100;

// One Monte Carlo experiment: ground truth scenario, sample count, estimator
// and trial budget under a single master seed.
struct ScenarioSpec {
  TruthScenario truth;
  int n_samples = 50;
  EstimatorSpec estimator;
  int n_trials = 1000;
  std::uint64_t master_seed = 0;
};

void validate(const ScenarioSpec& spec);

// All five metrics plus the raw worst-case NSNR for one trial.
struct TrialRecord {
  int trial_index = 0;
  double d_nsnr = 0.0;
  double d_kl = 0.0;
  double d_symkl = 0.0;
  double d_frobenius = 0.0;
  double d_spectral = 0.0;
  double nsnr_min = 1.0;
};

// Runs the scenario. Trial t draws everything from its own stream derived
// from (master_seed, t), so results are identical for any worker count.
// Singular estimates are redrawn (and counted to stderr at the end).
std::vector<TrialRecord> run_trials(const ScenarioSpec& spec, int workers = 1);

// Product-moment correlation. Throws DegenerateInputError on constant input,
// DimensionMismatchError on length mismatch.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of each competitor metric with d_nsnr, one column per
// scenario. Row order follows the tables: Frobenius, Spectral, KL, symKL.
struct CorrelationTable {
  std::vector<std::string> columns;
  std::vector<MetricKind> rows;
  std::vector<std::vector<double>> values;  // values[row][column]
};

CorrelationTable correlation_table(const std::vector<ScenarioSpec>& specs, int workers = 1);

// Shrinkage-coefficient tuning: run the base scenario once per lambda with
// common random numbers (trial t reuses the same draws at every lambda) and
// pick, for each metric, the grid point minimizing its mean.
struct TuneSpec {
  std::vector<double> lambda_grid;  // ascending, within [0, 1]
  ScenarioSpec base;                // estimator must be KnowledgeAided
};

void validate(const TuneSpec& spec);

struct TuneRow {
  MetricKind metric;
  double lambda_star = 0.0;
  double mean_nsnr_min = 0.0;  // mean worst-case NSNR at lambda_star
};

struct TuneResult {
  std::vector<double> lambda_grid;
  // Mean metric value per (row metric, lambda); row order matches rows.
  std::vector<std::vector<double>> mean_metric;
  std::vector<double> mean_nsnr_min;  // per lambda
  std::vector<TuneRow> rows;          // Frobenius, Spectral, KL, symKL, NSNR
};

TuneResult tune_lambda(const TuneSpec& spec, int workers = 1);

// 0.00, step, 2*step, ..., 1.00.
std::vector<double> make_lambda_grid(double step);

// Mean NSNR of the fixed all-ones target under an identity truth and the
// plain sample covariance; the sample-support rule-of-thumb check.
double mean_fixed_target_nsnr(int dim, int n_samples, int n_trials, std::uint64_t master_seed,
                              int workers = 1);

// ---------------------------------------------------------------------------
// Closed-form verification against the brute-force oracle.

struct VerifyOptions {
  int pairs = 100;       // oracle-checked pairs
  int dim = 0;           // 0 = cycle dimensions 2..10
  std::uint64_t seed = 0;
  int kl_pairs = 10000;  // extra pairs for the KL bound sweep (no oracle)
  OracleConfig oracle;
  int workers = 1;
  double eig_min = 1e-2;  // log-uniform eigenvalue range of the random pairs
  double eig_max = 1e2;
};

struct VerifyReport {
  int pairs = 0;
  int kl_pairs = 0;
  double max_oracle_gap = 0.0;     // max |oracle - closed form|
  double max_oracle_beat = 0.0;    // max (closed form - oracle); > 0 would beat the bound
  double max_target_gap = 0.0;     // max |nsnr(worst_case_target) - closed form|
  double max_symmetry_err = 0.0;   // relative, nsnr_min(C,Chat) vs nsnr_min(Chat,C)
  double max_scale_err = 0.0;      // |nsnr_min(C, alpha C) - 1|
  double max_kl_violation = 0.0;   // max (d_nsnr - d_kl) over all pairs

  bool ok() const;
  std::string to_text() const;
};

// Tolerances the verification enforces.
inline constexpr double kOracleAgreementTol = 1e-6;
inline constexpr double kOracleBeatTol = 1e-9;
inline constexpr double kTargetAttainTol = 1e-9;
inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kScaleEqualityTol = 1e-10;
inline constexpr double kKlBoundSlack = 1e-12;

VerifyReport run_verify(const VerifyOptions& opts);

// ---------------------------------------------------------------------------
// The three-dimensional counterexample pair C = diag(1, a, a^2),
// Chat = diag(1, a^2, a) whose ratio is diag(1, 1/a, a).

struct CounterexamplePair {
  SpdMatrix c;
  SpdMatrix chat;
};

CounterexamplePair make_example_pair(double alpha);

// ---------------------------------------------------------------------------
// CSV output. Every file starts with a comment block carrying the tool
// version, generator name, master seed and the full experiment config, so a
// result can always be regenerated.

struct CsvMeta {
  std::string tool;
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
};

std::vector<std::string> csv_comment_block(const CsvMeta& meta);

// Scatter export: header row plus one row per trial with all metric values at
// full (17 significant digit) precision.
std::string scatter_csv(const std::vector<TrialRecord>& records,
                        const std::vector<std::string>& comments = {});
void export_scatter(const std::vector<TrialRecord>& records, const std::string& path,
                    const std::vector<std::string>& comments = {});

std::string correlation_table_csv(const CorrelationTable& table,
                                  const std::vector<std::string>& comments = {});
// Two-decimal aligned text rendering for the terminal.
std::string correlation_table_text(const CorrelationTable& table);

std::string tune_csv(const TuneResult& result, const std::vector<std::string>& comments = {});
std::string tune_text(const TuneResult& result);

// Config key/value echoes used in CSV comment blocks.
std::vector<std::pair<std::string, std::string>> describe(const ScenarioSpec& spec);
std::vector<std::pair<std::string, std::string>> describe(const TuneSpec& spec);

void write_file(const std::string& path, const std::string& content);

}  // namespace nsnr
