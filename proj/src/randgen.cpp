#include "nsnr/randgen.hpp"

#include <array>
#include <cmath>
#include <iostream>
#include <string>
#include <utility>

namespace nsnr {
namespace {

// splitmix64 step; used only to expand the (master_seed, trial_index) pair
// into seed material for the trial generator.
std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr int kTruthRedrawCap = 100;

}  // namespace

std::mt19937_64 derive_trial_rng(const SeedSpec& seed) {
  std::uint64_t state = seed.master_seed;
  (void)splitmix64_next(state);  // decorrelate nearby master seeds
  state += seed.trial_index;

  std::array<std::uint32_t, 16> words{};
  for (int i = 0; i < 8; ++i) {
    const std::uint64_t w = splitmix64_next(state);
    words[2 * i] = static_cast<std::uint32_t>(w);
    words[2 * i + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

std::string to_string(TruthKind kind) {
  switch (kind) {
    case TruthKind::Identity:
      return "identity";
    case TruthKind::ApproxLowRank:
      return "lowrank";
    case TruthKind::RandomLowRankPlusWishart:
      return "random";
  }
  return "?";
}

SampleSet mvn_sample(const SpdMatrix& c, int n, std::mt19937_64& rng) {
  if (n < 1) {
    throw ConfigError("mvn_sample: need at least one draw");
  }
  const Eigen::Index d = c.dim();
  const Eigen::MatrixXd l = cholesky(c);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(d, n);
  for (int j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      z(i, j) = normal(rng);
    }
  }
  return SampleSet{l * z};
}

Eigen::MatrixXd wishart_sample(const SpdMatrix& scale, int dof, std::mt19937_64& rng) {
  if (dof < 1) {
    throw ConfigError("wishart_sample: dof must be positive");
  }
  const SampleSet z = mvn_sample(scale, dof, rng);
  Eigen::MatrixXd w = (z.samples * z.samples.transpose()) / static_cast<double>(dof);
  return 0.5 * (w + w.transpose());
}

TruthDraw make_truth(const TruthScenario& scenario, std::mt19937_64& rng) {
  if (scenario.dim < 2) {
    throw ConfigError("make_truth: dimension must be at least 2");
  }
  const int d = scenario.dim;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  switch (scenario.kind) {
    case TruthKind::Identity: {
      SpdMatrix truth = assert_spd(identity);
      return TruthDraw{truth, truth};
    }
    case TruthKind::ApproxLowRank: {
      Eigen::MatrixXd m = identity;
      m(0, 0) += kLowRankMagnitude;
      SpdMatrix truth = assert_spd(m);
      return TruthDraw{truth, truth};
    }
    case TruthKind::RandomLowRankPlusWishart: {
      Eigen::MatrixXd base = Eigen::MatrixXd::Zero(d, d);
      base(0, 0) = kLowRankMagnitude;
      SpdMatrix prior = assert_spd(base + identity);
      SpdMatrix unit = assert_spd(identity);
      for (int attempt = 0; attempt < kTruthRedrawCap; ++attempt) {
        const Eigen::MatrixXd delta = wishart_sample(unit, kWishartDof, rng);
        try {
          return TruthDraw{assert_spd(base + delta), prior};
        } catch (const NotPositiveDefiniteError&) {
          std::cerr << "make_truth: redrawing non-PD Wishart perturbation (attempt "
                    << attempt + 1 << ")\n";
        }
      }
      throw ConvergenceError("make_truth: random truth failed the PD check " +
                             std::to_string(kTruthRedrawCap) + " times");
    }
  }
  throw ConfigError("make_truth: unknown scenario kind");
}

SpdMatrix random_spd(int dim, double eig_min, double eig_max, std::mt19937_64& rng) {
  if (dim < 1) {
    throw ConfigError("random_spd: dimension must be positive");
  }
  if (!(eig_min > 0.0) || !(eig_max >= eig_min)) {
    throw ConfigError("random_spd: need 0 < eig_min <= eig_max");
  }

  std::uniform_real_distribution<double> log_eig(std::log(eig_min), std::log(eig_max));
  Eigen::VectorXd values(dim);
  for (int i = 0; i < dim; ++i) {
    values(i) = std::exp(log_eig(rng));
  }

  // Haar-distributed orthogonal basis: QR of a Gaussian matrix with the R
  // diagonal signs folded into Q.
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gauss(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      gauss(i, j) = normal(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd basis = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) {
      basis.col(j) *= -1.0;
    }
  }

  Eigen::MatrixXd m = basis * values.asDiagonal() * basis.transpose();
  return assert_spd(0.5 * (m + m.transpose()));
}

}  // namespace nsnr
