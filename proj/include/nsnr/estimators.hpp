#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "nsnr/randgen.hpp"
#include "nsnr/spd_matrix.hpp"

namespace nsnr {

enum class EstimatorKind { Sample, DiagLoad, LedoitWolf, KnowledgeAided };

// Which estimator a trial builds from its sample set. lambda is the loading
// amount for DiagLoad and the shrinkage coefficient for KnowledgeAided; prior
// is the E[C] target of the knowledge-aided combination.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::DiagLoad;
  double lambda = 0.0;
  std::optional<SpdMatrix> prior;

  // Short label used in table columns and CSV headers, e.g. "lambda=0.01",
  // "lw", "ka-lambda=0.5".
  std::string label() const;
};

// Throws ConfigError when the spec violates its own invariants
// (KnowledgeAided needs a prior of matching dimension and lambda in [0,1];
// DiagLoad needs lambda >= 0).
void validate(const EstimatorSpec& spec, int dim);

// Plain sample covariance (1/N) sum v_i v_i^T. No mean subtraction: the
// noise model is zero-mean and the estimators are defined on raw outer
// products. Always symmetric PSD; SPD only when the draws span R^D.
Eigen::MatrixXd sample_covariance(const SampleSet& data);

// S + lambda I. Throws NotPositiveDefiniteError when lambda == 0 and S is
// singular.
SpdMatrix diagonal_loading(const Eigen::MatrixXd& s, double lambda);

struct LedoitWolfResult {
  SpdMatrix estimate;
  double intensity = 0.0;  // shrinkage weight on the scaled-identity target
};

// Shrinkage toward the scaled identity m*I with the data-adaptive intensity
// of the well-conditioned estimator:
//   m = Tr(S)/D, d2 = |S - mI|_F^2/D,
//   b2 = (1/N^2) sum_k |v_k v_k^T - S|_F^2/D, b2bar = min(b2, d2),
//   estimate = (b2bar/d2) m I + ((d2 - b2bar)/d2) S.
// When the dispersion d2 vanishes (S already proportional to I) the estimate
// is m*I with intensity 1.
LedoitWolfResult ledoit_wolf(const SampleSet& data);

// Convex combination (1-lambda) S + lambda prior of a sample covariance with
// a fixed SPD target. Exposed so the tuning loop can reuse one S across the
// whole lambda grid.
SpdMatrix shrink_toward(const Eigen::MatrixXd& sample_cov, double lambda, const SpdMatrix& prior);

// Knowledge-aided estimator (1-lambda) (1/N) sum v_i v_i^T + lambda E[C].
SpdMatrix knowledge_aided(const SampleSet& data, double lambda, const SpdMatrix& prior);

// Dispatches on spec.kind. NotPositiveDefiniteError propagates so callers can
// redraw singular trials.
SpdMatrix build_estimate(const EstimatorSpec& spec, const SampleSet& data);

}  // namespace nsnr
