#include "nsnr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "nsnr/version.hpp"

namespace nsnr {
namespace {

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Index-parallel loop. Work items pull indices from a shared counter; the
// first exception wins and is rethrown on the caller's thread after join.
void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) {
        return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  pool.reserve(count);
  for (int i = 0; i < count; ++i) {
    pool.emplace_back(work);
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

TrialRecord to_record(int trial, const MetricReport& m) {
  return TrialRecord{trial,       m.d_nsnr,     m.d_kl,    m.d_symkl,
                     m.d_frobenius, m.d_spectral, m.nsnr_min};
}

void check_kl_bound(const MetricReport& m, int trial) {
  if (m.d_nsnr > m.d_kl + kKlBoundSlack) {
    throw Error("trial " + std::to_string(trial) + ": d_nsnr " + fmt_full(m.d_nsnr) +
                " exceeds d_kl " + fmt_full(m.d_kl));
  }
}

TrialRecord run_one_trial(const ScenarioSpec& spec, const TruthDraw* fixed, int trial,
                          std::atomic<long>& redraws) {
  std::mt19937_64 rng = derive_trial_rng({spec.master_seed, static_cast<std::uint64_t>(trial)});

  std::optional<TruthDraw> local;
  if (fixed == nullptr) {
    local = make_truth(spec.truth, rng);
  }
  const TruthDraw& draw = fixed ? *fixed : *local;

  EstimatorSpec estimator = spec.estimator;
  if (estimator.kind == EstimatorKind::KnowledgeAided && !estimator.prior) {
    estimator.prior = draw.prior;
  }

  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    const SampleSet data = mvn_sample(draw.truth, spec.n_samples, rng);
    try {
      const SpdMatrix chat = build_estimate(estimator, data);
      const MetricReport m = evaluate_all(draw.truth, chat);
      check_kl_bound(m, trial);
      return to_record(trial, m);
    } catch (const NotPositiveDefiniteError&) {
      redraws.fetch_add(1, std::memory_order_relaxed);
    }
  }
  throw EstimatorSingularError("trial " + std::to_string(trial) + ": estimate stayed singular after " +
                               std::to_string(kMaxRedraws) + " redraws");
}

const std::vector<MetricKind> kTableRows = {MetricKind::Frobenius, MetricKind::Spectral,
                                            MetricKind::Kl, MetricKind::SymKl};
const std::vector<MetricKind> kTuneRows = {MetricKind::Frobenius, MetricKind::Spectral,
                                           MetricKind::Kl, MetricKind::SymKl,
                                           MetricKind::NsnrDist};

double record_metric(const TrialRecord& r, MetricKind kind) {
  switch (kind) {
    case MetricKind::NsnrDist:
      return r.d_nsnr;
    case MetricKind::Kl:
      return r.d_kl;
    case MetricKind::SymKl:
      return r.d_symkl;
    case MetricKind::Frobenius:
      return r.d_frobenius;
    case MetricKind::Spectral:
      return r.d_spectral;
  }
  return 0.0;
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  if (spec.truth.dim < 2) {
    throw ConfigError("scenario: dimension must be at least 2");
  }
  if (spec.n_samples < 1) {
    throw ConfigError("scenario: n_samples must be positive");
  }
  if (spec.n_trials < 2) {
    throw ConfigError("scenario: need at least 2 trials");
  }
  switch (spec.estimator.kind) {
    case EstimatorKind::DiagLoad:
      if (spec.estimator.lambda < 0.0) {
        throw ConfigError("scenario: diagonal loading needs lambda >= 0");
      }
      break;
    case EstimatorKind::KnowledgeAided:
      if (spec.estimator.lambda < 0.0 || spec.estimator.lambda > 1.0) {
        throw ConfigError("scenario: knowledge-aided lambda must be in [0, 1]");
      }
      // A missing prior is filled per trial with the scenario's E[C].
      if (spec.estimator.prior && spec.estimator.prior->dim() != spec.truth.dim) {
        throw DimensionMismatchError("scenario: prior dimension mismatch");
      }
      break;
    default:
      break;
  }
}

std::vector<TrialRecord> run_trials(const ScenarioSpec& spec, int workers) {
  validate(spec);

  std::optional<TruthDraw> fixed;
  if (spec.truth.kind != TruthKind::RandomLowRankPlusWishart) {
    // Deterministic truths consume no randomness; build them once.
    std::mt19937_64 rng = derive_trial_rng({spec.master_seed, 0});
    fixed = make_truth(spec.truth, rng);
  }

  std::vector<TrialRecord> records(spec.n_trials);
  std::atomic<long> redraws{0};
  parallel_for(spec.n_trials, workers, [&](int t) {
    records[t] = run_one_trial(spec, fixed ? &*fixed : nullptr, t, redraws);
  });
  if (redraws.load() > 0) {
    std::cerr << "run_trials: redrew " << redraws.load() << " singular estimate(s)\n";
  }
  return records;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionMismatchError("pearson: series lengths differ");
  }
  const std::size_t n = x.size();
  if (n < 2) {
    throw ConfigError("pearson: need at least two points");
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw DegenerateInputError("pearson: constant series");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationTable correlation_table(const std::vector<ScenarioSpec>& specs, int workers) {
  if (specs.empty()) {
    throw ConfigError("correlation_table: no scenarios");
  }
  CorrelationTable table;
  table.rows = kTableRows;
  table.values.assign(table.rows.size(), std::vector<double>(specs.size(), 0.0));

  for (std::size_t col = 0; col < specs.size(); ++col) {
    const ScenarioSpec& spec = specs[col];
    table.columns.push_back("N=" + std::to_string(spec.n_samples) + " " + spec.estimator.label());

    const std::vector<TrialRecord> records = run_trials(spec, workers);
    std::vector<double> dn(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      dn[i] = records[i].d_nsnr;
    }
    std::vector<double> series(records.size());
    for (std::size_t row = 0; row < table.rows.size(); ++row) {
      for (std::size_t i = 0; i < records.size(); ++i) {
        series[i] = record_metric(records[i], table.rows[row]);
      }
      table.values[row][col] = pearson(series, dn);
    }
  }
  return table;
}

void validate(const TuneSpec& spec) {
  if (spec.lambda_grid.empty()) {
    throw ConfigError("tune: lambda grid is empty");
  }
  for (std::size_t i = 0; i < spec.lambda_grid.size(); ++i) {
    const double l = spec.lambda_grid[i];
    if (l < 0.0 || l > 1.0) {
      throw ConfigError("tune: lambda grid must lie in [0, 1]");
    }
    if (i > 0 && l <= spec.lambda_grid[i - 1]) {
      throw ConfigError("tune: lambda grid must be strictly ascending");
    }
  }
  if (spec.base.estimator.kind != EstimatorKind::KnowledgeAided) {
    throw ConfigError("tune: base estimator must be knowledge-aided");
  }
  validate(spec.base);
}

TuneResult tune_lambda(const TuneSpec& spec, int workers) {
  validate(spec);
  const int n_lambda = static_cast<int>(spec.lambda_grid.size());
  const int n_trials = spec.base.n_trials;

  std::optional<TruthDraw> fixed;
  if (spec.base.truth.kind != TruthKind::RandomLowRankPlusWishart) {
    std::mt19937_64 rng = derive_trial_rng({spec.base.master_seed, 0});
    fixed = make_truth(spec.base.truth, rng);
  }

  // reports[t * n_lambda + l]; filled in parallel, reduced in trial order so
  // means are identical for any worker count.
  std::vector<MetricReport> reports(static_cast<std::size_t>(n_trials) * n_lambda);
  std::atomic<long> redraws{0};

  parallel_for(n_trials, workers, [&](int t) {
    std::mt19937_64 rng = derive_trial_rng({spec.base.master_seed, static_cast<std::uint64_t>(t)});
    std::optional<TruthDraw> local;
    if (!fixed) {
      local = make_truth(spec.base.truth, rng);
    }
    const TruthDraw& draw = fixed ? *fixed : *local;
    const SpdMatrix& prior =
        spec.base.estimator.prior ? *spec.base.estimator.prior : draw.prior;

    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
      const SampleSet data = mvn_sample(draw.truth, spec.base.n_samples, rng);
      try {
        // One sample covariance per trial: every lambda sees the same draws.
        const Eigen::MatrixXd s = sample_covariance(data);
        for (int l = 0; l < n_lambda; ++l) {
          const SpdMatrix chat = shrink_toward(s, spec.lambda_grid[l], prior);
          const MetricReport m = evaluate_all(draw.truth, chat);
          check_kl_bound(m, t);
          reports[static_cast<std::size_t>(t) * n_lambda + l] = m;
        }
        return;
      } catch (const NotPositiveDefiniteError&) {
        redraws.fetch_add(1, std::memory_order_relaxed);
      }
    }
    throw EstimatorSingularError("tune trial " + std::to_string(t) +
                                 ": estimate stayed singular after " +
                                 std::to_string(kMaxRedraws) + " redraws");
  });
  if (redraws.load() > 0) {
    std::cerr << "tune_lambda: redrew " << redraws.load() << " singular estimate(s)\n";
  }

  TuneResult result;
  result.lambda_grid = spec.lambda_grid;
  result.mean_metric.assign(kTuneRows.size(), std::vector<double>(n_lambda, 0.0));
  result.mean_nsnr_min.assign(n_lambda, 0.0);

  for (int l = 0; l < n_lambda; ++l) {
    for (int t = 0; t < n_trials; ++t) {
      const MetricReport& m = reports[static_cast<std::size_t>(t) * n_lambda + l];
      for (std::size_t row = 0; row < kTuneRows.size(); ++row) {
        result.mean_metric[row][l] += m.by_kind(kTuneRows[row]);
      }
      result.mean_nsnr_min[l] += m.nsnr_min;
    }
    for (std::size_t row = 0; row < kTuneRows.size(); ++row) {
      result.mean_metric[row][l] /= n_trials;
    }
    result.mean_nsnr_min[l] /= n_trials;
  }

  for (std::size_t row = 0; row < kTuneRows.size(); ++row) {
    int best = 0;
    for (int l = 1; l < n_lambda; ++l) {
      // strict comparison: ties resolve toward the smaller lambda
      if (result.mean_metric[row][l] < result.mean_metric[row][best]) {
        best = l;
      }
    }
    result.rows.push_back(
        TuneRow{kTuneRows[row], spec.lambda_grid[best], result.mean_nsnr_min[best]});
  }
  return result;
}

std::vector<double> make_lambda_grid(double step) {
  if (!(step > 0.0) || step > 1.0) {
    throw ConfigError("lambda grid step must be in (0, 1]");
  }
  std::vector<double> grid;
  const int count = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= count; ++i) {
    grid.push_back(std::min(1.0, i * step));
  }
  return grid;
}

double mean_fixed_target_nsnr(int dim, int n_samples, int n_trials, std::uint64_t master_seed,
                              int workers) {
  if (dim < 2 || n_samples < 1 || n_trials < 1) {
    throw ConfigError("mean_fixed_target_nsnr: invalid configuration");
  }
  const SpdMatrix truth = assert_spd(Eigen::MatrixXd::Identity(dim, dim));
  const TargetVector target(Eigen::VectorXd::Ones(dim));
  const EstimatorSpec estimator{EstimatorKind::Sample, 0.0, std::nullopt};

  std::vector<double> values(n_trials, 0.0);
  std::atomic<long> redraws{0};
  parallel_for(n_trials, workers, [&](int t) {
    std::mt19937_64 rng = derive_trial_rng({master_seed, static_cast<std::uint64_t>(t)});
    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
      const SampleSet data = mvn_sample(truth, n_samples, rng);
      try {
        const SpdMatrix chat = build_estimate(estimator, data);
        values[t] = nsnr(target, truth, chat);
        return;
      } catch (const NotPositiveDefiniteError&) {
        redraws.fetch_add(1, std::memory_order_relaxed);
      }
    }
    throw EstimatorSingularError("rmb trial " + std::to_string(t) + ": singular past redraw cap");
  });
  if (redraws.load() > 0) {
    std::cerr << "mean_fixed_target_nsnr: redrew " << redraws.load() << " singular estimate(s)\n";
  }

  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  return sum / n_trials;
}

bool VerifyReport::ok() const {
  return max_oracle_gap <= kOracleAgreementTol && max_oracle_beat <= kOracleBeatTol &&
         max_target_gap <= kTargetAttainTol && max_symmetry_err <= kSymmetryTol &&
         max_scale_err <= kScaleEqualityTol && max_kl_violation <= kKlBoundSlack;
}

std::string VerifyReport::to_text() const {
  std::ostringstream out;
  out << "pairs checked against oracle: " << pairs << "\n"
      << "pairs checked for KL bound:   " << pairs + kl_pairs << "\n"
      << "max |oracle - closed form|      = " << fmt_full(max_oracle_gap)
      << "  (tol " << fmt_short(kOracleAgreementTol) << ")\n"
      << "max (closed form - oracle)      = " << fmt_full(max_oracle_beat)
      << "  (tol " << fmt_short(kOracleBeatTol) << ")\n"
      << "max |nsnr(worst target) - min|  = " << fmt_full(max_target_gap)
      << "  (tol " << fmt_short(kTargetAttainTol) << ")\n"
      << "max symmetry error (relative)   = " << fmt_full(max_symmetry_err)
      << "  (tol " << fmt_short(kSymmetryTol) << ")\n"
      << "max |nsnr_min(C, aC) - 1|       = " << fmt_full(max_scale_err)
      << "  (tol " << fmt_short(kScaleEqualityTol) << ")\n"
      << "max (d_nsnr - d_kl)             = " << fmt_full(max_kl_violation)
      << "  (tol " << fmt_short(kKlBoundSlack) << ")\n"
      << (ok() ? "verify: OK" : "verify: VIOLATION") << "\n";
  return out.str();
}

namespace {

struct PairChecks {
  double oracle_gap = 0.0;
  double oracle_beat = 0.0;
  double target_gap = 0.0;
  double symmetry_err = 0.0;
  double scale_err = 0.0;
  double kl_violation = 0.0;
};

int pair_dim(const VerifyOptions& opts, std::uint64_t index) {
  return opts.dim > 0 ? opts.dim : 2 + static_cast<int>(index % 9);
}

PairChecks check_pair(const VerifyOptions& opts, std::uint64_t index, bool with_oracle) {
  std::mt19937_64 rng = derive_trial_rng({opts.seed, index});
  const int dim = pair_dim(opts, index);
  const SpdMatrix c = random_spd(dim, opts.eig_min, opts.eig_max, rng);
  const SpdMatrix chat = random_spd(dim, opts.eig_min, opts.eig_max, rng);

  PairChecks checks;
  const double closed = nsnr_min(c, chat);

  if (with_oracle) {
    const OracleResult oracle = brute_force_nsnr_min(c, chat, opts.oracle, rng);
    checks.oracle_gap = std::abs(oracle.value - closed);
    checks.oracle_beat = closed - oracle.value;
    checks.target_gap = std::abs(nsnr(worst_case_target(c, chat), c, chat) - closed);
  }

  checks.symmetry_err = std::abs(nsnr_min(chat, c) - closed) / closed;
  for (double alpha : {1e-3, 1.0, 1e3}) {
    const SpdMatrix scaled = assert_spd(alpha * c.matrix());
    checks.scale_err = std::max(checks.scale_err, std::abs(nsnr_min(c, scaled) - 1.0));
  }
  checks.kl_violation = d_nsnr(c, chat) - d_kl(c, chat);
  return checks;
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& opts) {
  if (opts.pairs < 1 || opts.kl_pairs < 0) {
    throw ConfigError("verify: pair counts must be positive");
  }
  const int total = opts.pairs + opts.kl_pairs;
  std::vector<PairChecks> checks(total);
  parallel_for(total, opts.workers, [&](int i) {
    checks[i] = check_pair(opts, static_cast<std::uint64_t>(i), i < opts.pairs);
  });

  VerifyReport report;
  report.pairs = opts.pairs;
  report.kl_pairs = opts.kl_pairs;
  for (const PairChecks& p : checks) {
    report.max_oracle_gap = std::max(report.max_oracle_gap, p.oracle_gap);
    report.max_oracle_beat = std::max(report.max_oracle_beat, p.oracle_beat);
    report.max_target_gap = std::max(report.max_target_gap, p.target_gap);
    report.max_symmetry_err = std::max(report.max_symmetry_err, p.symmetry_err);
    report.max_scale_err = std::max(report.max_scale_err, p.scale_err);
    report.max_kl_violation = std::max(report.max_kl_violation, p.kl_violation);
  }
  return report;
}

CounterexamplePair make_example_pair(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw ConfigError("example pair needs alpha in (0, 1)");
  }
  Eigen::Vector3d diag_c(1.0, alpha, alpha * alpha);
  Eigen::Vector3d diag_chat(1.0, alpha * alpha, alpha);
  return CounterexamplePair{
      assert_spd(diag_c.asDiagonal().toDenseMatrix()),
      assert_spd(diag_chat.asDiagonal().toDenseMatrix()),
  };
}

std::vector<std::string> csv_comment_block(const CsvMeta& meta) {
  std::vector<std::string> lines;
  lines.push_back(meta.tool + " v" + kVersion);
  lines.push_back("rng=" + std::string(kRngName));
  lines.push_back("master_seed=" + std::to_string(meta.master_seed));
  std::string config = "config:";
  for (const auto& [key, value] : meta.config) {
    config += " " + key + "=" + value;
  }
  lines.push_back(config);
  return lines;
}

std::string scatter_csv(const std::vector<TrialRecord>& records,
                        const std::vector<std::string>& comments) {
  if (records.empty()) {
    throw ConfigError("scatter: no records");
  }
  std::string out;
  for (const std::string& c : comments) {
    out += "# " + c + "\n";
  }
  out += "trial_index,nsnr_min,d_nsnr,d_kl,d_symkl,d_frobenius,d_spectral\n";
  for (const TrialRecord& r : records) {
    out += std::to_string(r.trial_index) + "," + fmt_full(r.nsnr_min) + "," +
           fmt_full(r.d_nsnr) + "," + fmt_full(r.d_kl) + "," + fmt_full(r.d_symkl) + "," +
           fmt_full(r.d_frobenius) + "," + fmt_full(r.d_spectral) + "\n";
  }
  return out;
}

void export_scatter(const std::vector<TrialRecord>& records, const std::string& path,
                    const std::vector<std::string>& comments) {
  write_file(path, scatter_csv(records, comments));
}

std::string correlation_table_csv(const CorrelationTable& table,
                                  const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& c : comments) {
    out += "# " + c + "\n";
  }
  out += "metric";
  for (const std::string& column : table.columns) {
    out += "," + column;
  }
  out += "\n";
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    out += to_string(table.rows[row]);
    for (double v : table.values[row]) {
      out += "," + fmt_full(v);
    }
    out += "\n";
  }
  return out;
}

std::string correlation_table_text(const CorrelationTable& table) {
  constexpr int kMetricWidth = 10;
  std::ostringstream out;
  out << std::left;
  out.width(kMetricWidth);
  out << "metric";
  for (const std::string& column : table.columns) {
    out << "  ";
    out.width(std::max<std::size_t>(column.size(), 5));
    out << column;
  }
  out << "\n";
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    out.width(kMetricWidth);
    out << to_string(table.rows[row]);
    for (std::size_t col = 0; col < table.columns.size(); ++col) {
      out << "  ";
      out.width(std::max<std::size_t>(table.columns[col].size(), 5));
      out << fmt2(table.values[row][col]);
    }
    out << "\n";
  }
  return out.str();
}

std::string tune_csv(const TuneResult& result, const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& c : comments) {
    out += "# " + c + "\n";
  }
  out += "metric,lambda_star,mean_nsnr_min\n";
  for (const TuneRow& row : result.rows) {
    out += to_string(row.metric) + "," + fmt_full(row.lambda_star) + "," +
           fmt_full(row.mean_nsnr_min) + "\n";
  }
  return out;
}

std::string tune_text(const TuneResult& result) {
  std::ostringstream out;
  out << std::left;
  out.width(10);
  out << "metric";
  out << "  lambda*  mean nsnr_min\n";
  for (const TuneRow& row : result.rows) {
    out.width(10);
    out << to_string(row.metric);
    out << "  " << fmt2(row.lambda_star) << "     " << fmt2(row.mean_nsnr_min) << "\n";
  }
  return out.str();
}

std::vector<std::pair<std::string, std::string>> describe(const ScenarioSpec& spec) {
  return {
      {"truth", to_string(spec.truth.kind)},
      {"dim", std::to_string(spec.truth.dim)},
      {"n_samples", std::to_string(spec.n_samples)},
      {"estimator", spec.estimator.label()},
      {"n_trials", std::to_string(spec.n_trials)},
  };
}

std::vector<std::pair<std::string, std::string>> describe(const TuneSpec& spec) {
  auto config = describe(spec.base);
  config[3].second = "knowledge-aided";  // lambda comes from the grid
  std::string grid;
  for (std::size_t i = 0; i < spec.lambda_grid.size(); ++i) {
    if (i > 0) {
      grid += ";";
    }
    grid += fmt_short(spec.lambda_grid[i]);
  }
  config.emplace_back("lambda_grid", grid);
  return config;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << content;
  if (!out) {
    throw IoError("failed writing " + path);
  }
}

}  // namespace nsnr
