#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "nsnr/spd_matrix.hpp"

namespace nsnr {

// Degrees of freedom of the Wishart perturbation in the random truth
// scenario, and the magnitude of the rank-one low-rank component.
inline constexpr int kWishartDof = 20;
inline constexpr double kLowRankMagnitude = 100.0;

// Identifies one trial's random stream. The stream is a pure function of
// (master_seed, trial_index), so trials are reproducible independently of
// execution order and worker count.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;
};

// Derives the per-trial generator. Identical SeedSpec -> identical stream;
// different trial indices -> statistically independent streams.
std::mt19937_64 derive_trial_rng(const SeedSpec& seed);

enum class TruthKind { Identity, ApproxLowRank, RandomLowRankPlusWishart };

std::string to_string(TruthKind kind);

struct TruthScenario {
  TruthKind kind = TruthKind::Identity;
  int dim = 10;
};

// N i.i.d. noise realizations of length D, one draw per column.
struct SampleSet {
  Eigen::MatrixXd samples;  // dim x n

  Eigen::Index n() const { return samples.cols(); }
  Eigen::Index dim() const { return samples.rows(); }
};

// n zero-mean multivariate normal draws with covariance c (via Cholesky).
SampleSet mvn_sample(const SpdMatrix& c, int n, std::mt19937_64& rng);

// Normalized Wishart draw (1/dof) sum_k z_k z_k^T with z_k ~ MVN(0, scale),
// so the expectation equals scale. Symmetric PSD; SPD a.s. when dof >= dim.
Eigen::MatrixXd wishart_sample(const SpdMatrix& scale, int dof, std::mt19937_64& rng);

// A ground-truth covariance plus the prior mean E[C] used by the
// knowledge-aided estimator. The prior equals the truth for deterministic
// scenarios and C0 + I for the random one.
struct TruthDraw {
  SpdMatrix truth;
  SpdMatrix prior;
};

TruthDraw make_truth(const TruthScenario& scenario, std::mt19937_64& rng);

// Random SPD matrix with eigenvalues log-uniform in [eig_min, eig_max] and a
// Haar-random orthogonal eigenbasis.
SpdMatrix random_spd(int dim, double eig_min, double eig_max, std::mt19937_64& rng);

}  // namespace nsnr
