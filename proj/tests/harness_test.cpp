#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nsnr/harness.hpp"
#include "nsnr/version.hpp"

using namespace nsnr;

namespace {

ScenarioSpec small_identity_spec() {
  ScenarioSpec spec;
  spec.truth = {TruthKind::Identity, 10};
  spec.n_samples = 50;
  spec.estimator = {EstimatorKind::DiagLoad, 0.0, std::nullopt};
  spec.n_trials = 2;
  spec.master_seed = 77;
  return spec;
}

bool records_equal(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].trial_index != b[i].trial_index || a[i].d_nsnr != b[i].d_nsnr ||
        a[i].d_kl != b[i].d_kl || a[i].d_symkl != b[i].d_symkl ||
        a[i].d_frobenius != b[i].d_frobenius || a[i].d_spectral != b[i].d_spectral ||
        a[i].nsnr_min != b[i].nsnr_min) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(Pearson, ExactLinearity) {
  const std::vector<double> x = {1, 2, 3};
  EXPECT_DOUBLE_EQ(pearson(x, std::vector<double>{2, 4, 6}), 1.0);
  EXPECT_DOUBLE_EQ(pearson(x, std::vector<double>{-1, -2, -3}), -1.0);
}

TEST(Pearson, HandArithmetic) {
  const std::vector<double> x = {1, 2, 3};
  const std::vector<double> y = {1, 2, 4};
  EXPECT_NEAR(pearson(x, y), 9.0 / std::sqrt(84.0), 1e-14);
}

TEST(Pearson, Errors) {
  const std::vector<double> x = {1, 2, 3};
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), DimensionMismatchError);
  EXPECT_THROW(pearson(x, std::vector<double>{5, 5, 5}), DegenerateInputError);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), ConfigError);
}

TEST(RunTrials, TwoTrialsDeterministic) {
  const ScenarioSpec spec = small_identity_spec();
  const std::vector<TrialRecord> a = run_trials(spec);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].trial_index, 0);
  EXPECT_EQ(a[1].trial_index, 1);
  EXPECT_TRUE(records_equal(a, run_trials(spec)));
}

TEST(RunTrials, WorkerCountDoesNotChangeRecords) {
  ScenarioSpec spec = small_identity_spec();
  spec.n_trials = 48;
  const std::vector<TrialRecord> serial = run_trials(spec, 1);
  const std::vector<TrialRecord> parallel = run_trials(spec, 4);
  EXPECT_TRUE(records_equal(serial, parallel));
}

TEST(RunTrials, RecordInvariants) {
  ScenarioSpec spec = small_identity_spec();
  spec.n_trials = 32;
  for (const TrialRecord& r : run_trials(spec, 2)) {
    EXPECT_GT(r.nsnr_min, 0.0);
    EXPECT_LE(r.nsnr_min, 1.0);
    EXPECT_NEAR(r.d_nsnr, -0.5 * std::log(r.nsnr_min), 1e-12);
    EXPECT_LE(r.d_nsnr, r.d_kl + 1e-12);
  }
}

TEST(RunTrials, RandomScenarioWithKnowledgeAidedPrior) {
  ScenarioSpec spec;
  spec.truth = {TruthKind::RandomLowRankPlusWishart, 6};
  spec.n_samples = 30;
  spec.estimator = {EstimatorKind::KnowledgeAided, 0.1, std::nullopt};  // prior auto-filled
  spec.n_trials = 4;
  spec.master_seed = 5;
  const std::vector<TrialRecord> records = run_trials(spec, 2);
  EXPECT_EQ(records.size(), 4u);
}

TEST(RunTrials, SingularEstimatesPastRedrawCap) {
  // rank-2 sample covariance can never pass the SPD gate at D = 4
  ScenarioSpec spec;
  spec.truth = {TruthKind::Identity, 4};
  spec.n_samples = 2;
  spec.estimator = {EstimatorKind::DiagLoad, 0.0, std::nullopt};
  spec.n_trials = 2;
  spec.master_seed = 1;
  EXPECT_THROW(run_trials(spec), EstimatorSingularError);
}

TEST(RunTrials, ConfigErrors) {
  ScenarioSpec spec = small_identity_spec();
  spec.n_trials = 1;
  EXPECT_THROW(run_trials(spec), ConfigError);
  spec = small_identity_spec();
  spec.truth.dim = 1;
  EXPECT_THROW(run_trials(spec), ConfigError);
  spec = small_identity_spec();
  spec.n_samples = 0;
  EXPECT_THROW(run_trials(spec), ConfigError);
}

TEST(CorrelationTable, SmallRunShape) {
  ScenarioSpec a = small_identity_spec();
  a.n_trials = 100;
  ScenarioSpec b = a;
  b.n_samples = 100;
  const CorrelationTable table = correlation_table({a, b}, 2);
  ASSERT_EQ(table.columns.size(), 2u);
  EXPECT_EQ(table.columns[0], "N=50 lambda=0");
  EXPECT_EQ(table.columns[1], "N=100 lambda=0");
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_EQ(table.rows[2], MetricKind::Kl);
  for (const auto& row : table.values) {
    for (double v : row) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ScatterCsv, HeaderPlusOneRowPerTrial) {
  ScenarioSpec spec = small_identity_spec();
  const std::vector<TrialRecord> records = run_trials(spec);
  const std::string csv = scatter_csv(records);
  int lines = 0;
  for (char c : csv) {
    lines += c == '\n';
  }
  EXPECT_EQ(lines, 3);  // header + 2 records
  EXPECT_EQ(csv.rfind("trial_index,nsnr_min,d_nsnr,d_kl,d_symkl,d_frobenius,d_spectral\n", 0), 0u);
}

TEST(ScatterCsv, RoundTripsFullPrecision) {
  ScenarioSpec spec = small_identity_spec();
  const std::vector<TrialRecord> records = run_trials(spec);
  std::istringstream in(scatter_csv(records));
  std::string line;
  std::getline(in, line);  // header
  for (const TrialRecord& r : records) {
    ASSERT_TRUE(static_cast<bool>(std::getline(in, line)));
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    int index = -1;
    double nsnr_min_v = 0, dn = 0, dkl = 0, dsym = 0, dfro = 0, dspec = 0;
    row >> index >> nsnr_min_v >> dn >> dkl >> dsym >> dfro >> dspec;
    EXPECT_EQ(index, r.trial_index);
    EXPECT_EQ(nsnr_min_v, r.nsnr_min);
    EXPECT_EQ(dn, r.d_nsnr);
    EXPECT_EQ(dkl, r.d_kl);
    EXPECT_EQ(dsym, r.d_symkl);
    EXPECT_EQ(dfro, r.d_frobenius);
    EXPECT_EQ(dspec, r.d_spectral);
  }
}

TEST(ScatterCsv, CommentBlockAndFileExport) {
  ScenarioSpec spec = small_identity_spec();
  const std::vector<TrialRecord> records = run_trials(spec);
  CsvMeta meta{"nsnr scatter", spec.master_seed, describe(spec)};
  const auto comments = csv_comment_block(meta);

  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "nsnr_scatter_test.csv";
  export_scatter(records, path.string(), comments);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# nsnr scatter v" + std::string(kVersion));
  std::filesystem::remove(path);

  EXPECT_THROW(export_scatter(records, "/nonexistent-dir/x.csv", comments), IoError);
  EXPECT_THROW(scatter_csv({}), ConfigError);
}

TEST(CsvCommentBlock, CarriesSeedAndRngName) {
  CsvMeta meta{"nsnr table", 123, {{"truth", "identity"}, {"n_trials", "10"}}};
  const auto lines = csv_comment_block(meta);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1], "rng=" + std::string(kRngName));
  EXPECT_EQ(lines[2], "master_seed=123");
  EXPECT_EQ(lines[3], "config: truth=identity n_trials=10");
}

TEST(MakeLambdaGrid, DefaultStep) {
  const std::vector<double> grid = make_lambda_grid(0.02);
  ASSERT_EQ(grid.size(), 51u);
  EXPECT_DOUBLE_EQ(grid.front(), 0.0);
  EXPECT_DOUBLE_EQ(grid.back(), 1.0);
  EXPECT_THROW(make_lambda_grid(0.0), ConfigError);
}

TEST(TuneLambda, SingletonGridPicksTheOnlyPoint) {
  TuneSpec spec;
  spec.lambda_grid = {0.5};
  spec.base.truth = {TruthKind::RandomLowRankPlusWishart, 5};
  spec.base.n_samples = 20;
  spec.base.estimator = {EstimatorKind::KnowledgeAided, 0.0, std::nullopt};
  spec.base.n_trials = 10;
  spec.base.master_seed = 3;
  const TuneResult result = tune_lambda(spec);
  ASSERT_EQ(result.rows.size(), 5u);
  for (const TuneRow& row : result.rows) {
    EXPECT_DOUBLE_EQ(row.lambda_star, 0.5);
  }
  EXPECT_EQ(result.rows[4].metric, MetricKind::NsnrDist);
}

TEST(TuneLambda, DeterministicAcrossWorkers) {
  TuneSpec spec;
  spec.lambda_grid = make_lambda_grid(0.1);
  spec.base.truth = {TruthKind::RandomLowRankPlusWishart, 6};
  spec.base.n_samples = 25;
  spec.base.estimator = {EstimatorKind::KnowledgeAided, 0.0, std::nullopt};
  spec.base.n_trials = 40;
  spec.base.master_seed = 4;
  const TuneResult serial = tune_lambda(spec, 1);
  const TuneResult parallel = tune_lambda(spec, 4);
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    EXPECT_EQ(serial.rows[i].lambda_star, parallel.rows[i].lambda_star);
    EXPECT_EQ(serial.rows[i].mean_nsnr_min, parallel.rows[i].mean_nsnr_min);
  }
  for (std::size_t l = 0; l < serial.mean_nsnr_min.size(); ++l) {
    EXPECT_EQ(serial.mean_nsnr_min[l], parallel.mean_nsnr_min[l]);
  }
}

TEST(TuneLambda, Validation) {
  TuneSpec spec;
  spec.base = small_identity_spec();
  spec.base.estimator = {EstimatorKind::KnowledgeAided, 0.0, std::nullopt};
  spec.lambda_grid = {};
  EXPECT_THROW(tune_lambda(spec), ConfigError);
  spec.lambda_grid = {0.2, 0.1};
  EXPECT_THROW(tune_lambda(spec), ConfigError);
  spec.lambda_grid = {0.5, 1.5};
  EXPECT_THROW(tune_lambda(spec), ConfigError);
  spec.lambda_grid = {0.5};
  spec.base.estimator = {EstimatorKind::DiagLoad, 0.0, std::nullopt};
  EXPECT_THROW(tune_lambda(spec), ConfigError);
}

TEST(MeanFixedTargetNsnr, DeterministicAndInRange) {
  const double a = mean_fixed_target_nsnr(10, 20, 100, 55, 1);
  const double b = mean_fixed_target_nsnr(10, 20, 100, 55, 4);
  EXPECT_EQ(a, b);
  EXPECT_GT(a, 0.0);
  EXPECT_LT(a, 1.0);
  EXPECT_THROW(mean_fixed_target_nsnr(1, 20, 10, 0), ConfigError);
}

TEST(TableRendering, CsvAndTextAgreeOnShape) {
  ScenarioSpec spec = small_identity_spec();
  spec.n_trials = 60;
  const CorrelationTable table = correlation_table({spec});
  const std::string csv = correlation_table_csv(table, {"hello"});
  EXPECT_EQ(csv.rfind("# hello\nmetric,", 0), 0u);
  int rows = 0;
  for (char c : csv) {
    rows += c == '\n';
  }
  EXPECT_EQ(rows, 6);  // comment + header + 4 metric rows

  const std::string text = correlation_table_text(table);
  EXPECT_NE(text.find("frobenius"), std::string::npos);
  EXPECT_NE(text.find("symkl"), std::string::npos);
}

TEST(TuneRendering, RowsInTableOrder) {
  TuneSpec spec;
  spec.lambda_grid = {0.0, 0.5, 1.0};
  spec.base.truth = {TruthKind::RandomLowRankPlusWishart, 5};
  spec.base.n_samples = 15;
  spec.base.estimator = {EstimatorKind::KnowledgeAided, 0.0, std::nullopt};
  spec.base.n_trials = 8;
  spec.base.master_seed = 6;
  const TuneResult result = tune_lambda(spec);
  const std::string csv = tune_csv(result);
  EXPECT_EQ(csv.rfind("metric,lambda_star,mean_nsnr_min\nfrobenius,", 0), 0u);
  EXPECT_NE(csv.find("\nnsnr,"), std::string::npos);
}

TEST(ExamplePair, RejectsAlphaOutsideUnitInterval) {
  EXPECT_THROW(make_example_pair(0.0), ConfigError);
  EXPECT_THROW(make_example_pair(1.0), ConfigError);
  EXPECT_NO_THROW(make_example_pair(0.3));
}

TEST(Verify, SmallRunPasses) {
  VerifyOptions opts;
  opts.pairs = 3;
  opts.kl_pairs = 50;
  opts.seed = 11;
  opts.oracle.n_random = 5000;
  opts.workers = 2;
  const VerifyReport report = run_verify(opts);
  EXPECT_TRUE(report.ok()) << report.to_text();
  EXPECT_NE(report.to_text().find("verify: OK"), std::string::npos);
}
