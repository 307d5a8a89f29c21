// Command-line harness: closed-form verification, the 3x3 counterexample,
// correlation tables, scatter export, shrinkage tuning and the sample-support
// rule-of-thumb check.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsnr/harness.hpp"
#include "nsnr/version.hpp"

namespace {

using nsnr::EstimatorKind;
using nsnr::EstimatorSpec;
using nsnr::ScenarioSpec;
using nsnr::TruthKind;

TruthKind parse_scenario(const std::string& name) {
  if (name == "identity") {
    return TruthKind::Identity;
  }
  if (name == "lowrank") {
    return TruthKind::ApproxLowRank;
  }
  if (name == "random") {
    return TruthKind::RandomLowRankPlusWishart;
  }
  throw nsnr::ConfigError("unknown scenario '" + name + "' (identity|lowrank|random)");
}

// "lw" or a numeric diagonal-loading amount.
EstimatorSpec parse_estimator(const std::string& item) {
  if (item == "lw") {
    return EstimatorSpec{EstimatorKind::LedoitWolf, 0.0, std::nullopt};
  }
  try {
    std::size_t used = 0;
    const double lambda = std::stod(item, &used);
    if (used != item.size()) {
      throw std::invalid_argument(item);
    }
    return EstimatorSpec{EstimatorKind::DiagLoad, lambda, std::nullopt};
  } catch (const std::exception&) {
    throw nsnr::ConfigError("bad estimator '" + item + "' (number or 'lw')");
  }
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      out += sep;
    }
    out += items[i];
  }
  return out;
}

struct TableArgs {
  std::string scenario = "identity";
  int dim = 10;
  std::vector<int> n_samples = {50, 100, 150, 200};
  std::vector<std::string> lambdas = {"0"};
  int trials = 1000;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;
};

int run_table(const TableArgs& args) {
  const TruthKind kind = parse_scenario(args.scenario);
  std::vector<EstimatorSpec> estimators;
  std::vector<std::string> estimator_labels;
  for (const std::string& item : args.lambdas) {
    estimators.push_back(parse_estimator(item));
    estimator_labels.push_back(estimators.back().label());
  }

  std::vector<ScenarioSpec> specs;
  for (int n : args.n_samples) {
    for (const EstimatorSpec& estimator : estimators) {
      ScenarioSpec spec;
      spec.truth = {kind, args.dim};
      spec.n_samples = n;
      spec.estimator = estimator;
      spec.n_trials = args.trials;
      spec.master_seed = args.seed;
      specs.push_back(std::move(spec));
    }
  }

  const nsnr::CorrelationTable table = nsnr::correlation_table(specs, args.workers);

  nsnr::CsvMeta meta;
  meta.tool = "nsnr table";
  meta.master_seed = args.seed;
  meta.config = {
      {"scenario", args.scenario},
      {"dim", std::to_string(args.dim)},
      {"n_samples", [&] {
         std::vector<std::string> ns;
         for (int n : args.n_samples) {
           ns.push_back(std::to_string(n));
         }
         return join(ns, ";");
       }()},
      {"estimators", join(estimator_labels, ";")},
      {"n_trials", std::to_string(args.trials)},
  };
  nsnr::write_file(args.out, nsnr::correlation_table_csv(table, nsnr::csv_comment_block(meta)));

  std::cout << "Pearson correlation with d_nsnr (" << args.scenario << " truth, " << args.trials
            << " trials)\n"
            << nsnr::correlation_table_text(table) << "wrote " << args.out << "\n";
  return 0;
}

struct ScatterArgs {
  std::string scenario = "identity";
  int dim = 10;
  int n_samples = 50;
  std::string lambda = "0";
  int trials = 1000;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;
};

int run_scatter(const ScatterArgs& args) {
  ScenarioSpec spec;
  spec.truth = {parse_scenario(args.scenario), args.dim};
  spec.n_samples = args.n_samples;
  spec.estimator = parse_estimator(args.lambda);
  spec.n_trials = args.trials;
  spec.master_seed = args.seed;

  const std::vector<nsnr::TrialRecord> records = nsnr::run_trials(spec, args.workers);

  nsnr::CsvMeta meta;
  meta.tool = "nsnr scatter";
  meta.master_seed = args.seed;
  meta.config = nsnr::describe(spec);
  nsnr::export_scatter(records, args.out, nsnr::csv_comment_block(meta));
  std::cout << "wrote " << records.size() << " records to " << args.out << "\n";
  return 0;
}

struct TuneArgs {
  double grid_step = 0.02;
  int dim = 10;
  int n_samples = 50;
  int trials = 1000;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;
};

int run_tune(const TuneArgs& args) {
  nsnr::TuneSpec spec;
  spec.lambda_grid = nsnr::make_lambda_grid(args.grid_step);
  spec.base.truth = {TruthKind::RandomLowRankPlusWishart, args.dim};
  spec.base.n_samples = args.n_samples;
  spec.base.estimator = EstimatorSpec{EstimatorKind::KnowledgeAided, 0.0, std::nullopt};
  spec.base.n_trials = args.trials;
  spec.base.master_seed = args.seed;

  const nsnr::TuneResult result = nsnr::tune_lambda(spec, args.workers);

  nsnr::CsvMeta meta;
  meta.tool = "nsnr tune";
  meta.master_seed = args.seed;
  meta.config = nsnr::describe(spec);
  nsnr::write_file(args.out, nsnr::tune_csv(result, nsnr::csv_comment_block(meta)));

  std::cout << "shrinkage coefficient chosen by each metric (" << args.trials << " trials)\n"
            << nsnr::tune_text(result) << "wrote " << args.out << "\n";
  return 0;
}

int run_example1(double alpha) {
  const nsnr::CounterexamplePair pair = nsnr::make_example_pair(alpha);
  const nsnr::MetricReport m = nsnr::evaluate_all(pair.c, pair.chat);
  const double kappa = nsnr::matrix_ratio(pair.c, pair.chat).spectrum.kappa;
  std::cout.precision(12);
  std::cout << "alpha        = " << alpha << "\n"
            << "kappa(Q)     = " << kappa << "\n"
            << "nsnr_min     = " << m.nsnr_min << "\n"
            << "d_nsnr       = " << m.d_nsnr << "\n"
            << "d_kl         = " << m.d_kl << "\n"
            << "d_symkl      = " << m.d_symkl << "\n"
            << "d_frobenius  = " << m.d_frobenius << "\n"
            << "d_spectral   = " << m.d_spectral << "\n";
  return 0;
}

struct VerifyArgs {
  int pairs = 100;
  int dim = 0;
  std::uint64_t seed = 0;
  int kl_pairs = 10000;
  int n_random = 100000;
  int refine_steps = 200;
  int workers = 1;
};

int run_verify_cmd(const VerifyArgs& args) {
  nsnr::VerifyOptions opts;
  opts.pairs = args.pairs;
  opts.dim = args.dim;
  opts.seed = args.seed;
  opts.kl_pairs = args.kl_pairs;
  opts.oracle.n_random = args.n_random;
  opts.oracle.refine_steps = args.refine_steps;
  opts.workers = args.workers;

  const nsnr::VerifyReport report = nsnr::run_verify(opts);
  std::cout << report.to_text();
  return report.ok() ? 0 : 2;
}

struct RmbArgs {
  int dim = 10;
  int n_samples = 20;
  int trials = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
};

int run_rmb(const RmbArgs& args) {
  const double mean =
      nsnr::mean_fixed_target_nsnr(args.dim, args.n_samples, args.trials, args.seed, args.workers);
  std::cout << "mean NSNR of the fixed all-ones target: " << mean << "\n"
            << "(dim=" << args.dim << " n_samples=" << args.n_samples << " trials=" << args.trials
            << " seed=" << args.seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case NSNR distance between covariance matrices: metrics, "
               "estimators and the Monte Carlo comparison harness"};
  app.set_version_flag("--version", nsnr::kVersion);
  app.set_config("--config", "", "Read options from a key=value file (flags override)");
  app.require_subcommand(1);

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Check the closed-form worst case against the brute-force oracle, "
                "the KL upper bound, symmetry and scale equality on random SPD pairs");
  verify->add_option("--pairs", verify_args.pairs, "Oracle-checked pairs");
  verify->add_option("--dim", verify_args.dim, "Fixed dimension (0 = cycle 2..10)");
  verify->add_option("--seed", verify_args.seed, "Master seed");
  verify->add_option("--kl-pairs", verify_args.kl_pairs, "Extra pairs for the KL bound sweep");
  verify->add_option("--n-random", verify_args.n_random, "Oracle random starts");
  verify->add_option("--refine-steps", verify_args.refine_steps, "Oracle refinement steps");
  verify->add_option("--workers", verify_args.workers, "Worker threads");

  double alpha = 0.1;
  CLI::App* example1 = app.add_subcommand(
      "example1", "Print all metrics for the 3x3 diagonal counterexample pair");
  example1->add_option("--alpha", alpha, "Scale parameter in (0, 1)");

  TableArgs table_args;
  CLI::App* table = app.add_subcommand(
      "table", "Pearson correlation of each metric with the NSNR distance");
  table->add_option("--scenario", table_args.scenario, "identity|lowrank");
  table->add_option("--dim", table_args.dim, "Covariance dimension");
  table->add_option("--n-samples", table_args.n_samples, "Sample counts, comma separated")
      ->delimiter(',');
  table->add_option("--lambda", table_args.lambdas,
                    "Estimators: loading amounts and/or 'lw', comma separated")
      ->delimiter(',');
  table->add_option("--trials", table_args.trials, "Trials per column");
  table->add_option("--seed", table_args.seed, "Master seed");
  table->add_option("--out", table_args.out, "Output CSV path")->required();
  table->add_option("--workers", table_args.workers, "Worker threads");

  ScatterArgs scatter_args;
  CLI::App* scatter = app.add_subcommand("scatter", "Per-trial metric values as CSV");
  scatter->add_option("--scenario", scatter_args.scenario, "identity|lowrank");
  scatter->add_option("--dim", scatter_args.dim, "Covariance dimension");
  scatter->add_option("--n-samples", scatter_args.n_samples, "Samples per trial");
  scatter->add_option("--lambda", scatter_args.lambda, "Estimator: loading amount or 'lw'");
  scatter->add_option("--trials", scatter_args.trials, "Trial count");
  scatter->add_option("--seed", scatter_args.seed, "Master seed");
  scatter->add_option("--out", scatter_args.out, "Output CSV path")->required();
  scatter->add_option("--workers", scatter_args.workers, "Worker threads");

  TuneArgs tune_args;
  CLI::App* tune = app.add_subcommand(
      "tune", "Pick the knowledge-aided shrinkage coefficient by minimizing each metric "
              "over random-truth trials (common random numbers across the grid)");
  tune->add_option("--grid-step", tune_args.grid_step, "Lambda grid step");
  tune->add_option("--dim", tune_args.dim, "Covariance dimension");
  tune->add_option("--n-samples", tune_args.n_samples, "Samples per trial");
  tune->add_option("--trials", tune_args.trials, "Trial count");
  tune->add_option("--seed", tune_args.seed, "Master seed");
  tune->add_option("--out", tune_args.out, "Output CSV path")->required();
  tune->add_option("--workers", tune_args.workers, "Worker threads");

  RmbArgs rmb_args;
  CLI::App* rmb = app.add_subcommand(
      "rmb", "Mean NSNR of a fixed target under the plain sample covariance");
  rmb->add_option("--dim", rmb_args.dim, "Covariance dimension");
  rmb->add_option("--n-samples", rmb_args.n_samples, "Samples per trial");
  rmb->add_option("--trials", rmb_args.trials, "Trial count");
  rmb->add_option("--seed", rmb_args.seed, "Master seed");
  rmb->add_option("--workers", rmb_args.workers, "Worker threads");

  try {
    app.parse(argc, argv);
    if (*verify) {
      return run_verify_cmd(verify_args);
    }
    if (*example1) {
      return run_example1(alpha);
    }
    if (*table) {
      return run_table(table_args);
    }
    if (*scatter) {
      return run_scatter(scatter_args);
    }
    if (*tune) {
      return run_tune(tune_args);
    }
    if (*rmb) {
      return run_rmb(rmb_args);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
