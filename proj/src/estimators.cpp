#include "nsnr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace nsnr {
namespace {

std::string format_lambda(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", lambda);
  return buf;
}

}  // namespace

std::string EstimatorSpec::label() const {
  switch (kind) {
    case EstimatorKind::Sample:
      return "sample";
    case EstimatorKind::DiagLoad:
      return "lambda=" + format_lambda(lambda);
    case EstimatorKind::LedoitWolf:
      return "lw";
    case EstimatorKind::KnowledgeAided:
      return "ka-lambda=" + format_lambda(lambda);
  }
  return "?";
}

void validate(const EstimatorSpec& spec, int dim) {
  switch (spec.kind) {
    case EstimatorKind::Sample:
    case EstimatorKind::LedoitWolf:
      return;
    case EstimatorKind::DiagLoad:
      if (spec.lambda < 0.0) {
        throw ConfigError("diagonal loading needs lambda >= 0");
      }
      return;
    case EstimatorKind::KnowledgeAided:
      if (spec.lambda < 0.0 || spec.lambda > 1.0) {
        throw ConfigError("knowledge-aided shrinkage needs lambda in [0, 1]");
      }
      if (!spec.prior) {
        throw ConfigError("knowledge-aided shrinkage needs a prior");
      }
      if (spec.prior->dim() != dim) {
        throw DimensionMismatchError("knowledge-aided prior dimension " +
                                     std::to_string(spec.prior->dim()) + " vs data dimension " +
                                     std::to_string(dim));
      }
      return;
  }
  throw ConfigError("unknown estimator kind");
}

Eigen::MatrixXd sample_covariance(const SampleSet& data) {
  if (data.n() < 1) {
    throw ConfigError("sample_covariance: need at least one sample");
  }
  Eigen::MatrixXd s = (data.samples * data.samples.transpose()) / static_cast<double>(data.n());
  return 0.5 * (s + s.transpose());
}

SpdMatrix diagonal_loading(const Eigen::MatrixXd& s, double lambda) {
  if (lambda < 0.0) {
    throw ConfigError("diagonal_loading: lambda must be >= 0");
  }
  if (s.rows() != s.cols()) {
    throw DimensionMismatchError("diagonal_loading: matrix must be square");
  }
  Eigen::MatrixXd loaded = s;
  loaded.diagonal().array() += lambda;
  return assert_spd(loaded);
}

LedoitWolfResult ledoit_wolf(const SampleSet& data) {
  if (data.n() < 2) {
    throw ConfigError("ledoit_wolf: need at least two samples");
  }
  const double d = static_cast<double>(data.dim());
  const double n = static_cast<double>(data.n());
  const Eigen::MatrixXd s = sample_covariance(data);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(data.dim(), data.dim());

  const double m = s.trace() / d;
  const double d2 = (s - m * identity).squaredNorm() / d;
  if (d2 <= 1e-15 * m * m) {
    // Sample covariance already proportional to the identity.
    return LedoitWolfResult{assert_spd(m * identity), 1.0};
  }

  double b2 = 0.0;
  for (Eigen::Index k = 0; k < data.n(); ++k) {
    const Eigen::VectorXd v = data.samples.col(k);
    b2 += (v * v.transpose() - s).squaredNorm() / d;
  }
  b2 /= n * n;

  const double b2bar = std::min(b2, d2);
  const double a2 = d2 - b2bar;
  const double intensity = b2bar / d2;
  Eigen::MatrixXd estimate = (b2bar / d2) * m * identity + (a2 / d2) * s;
  return LedoitWolfResult{assert_spd(estimate), intensity};
}

SpdMatrix shrink_toward(const Eigen::MatrixXd& sample_cov, double lambda,
                        const SpdMatrix& prior) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("shrink_toward: lambda must be in [0, 1]");
  }
  if (sample_cov.rows() != prior.dim() || sample_cov.cols() != prior.dim()) {
    throw DimensionMismatchError("shrink_toward: sample covariance and prior dimensions differ");
  }
  return assert_spd((1.0 - lambda) * sample_cov + lambda * prior.matrix());
}

SpdMatrix knowledge_aided(const SampleSet& data, double lambda, const SpdMatrix& prior) {
  return shrink_toward(sample_covariance(data), lambda, prior);
}

SpdMatrix build_estimate(const EstimatorSpec& spec, const SampleSet& data) {
  validate(spec, static_cast<int>(data.dim()));
  switch (spec.kind) {
    case EstimatorKind::Sample:
      return assert_spd(sample_covariance(data));
    case EstimatorKind::DiagLoad:
      return diagonal_loading(sample_covariance(data), spec.lambda);
    case EstimatorKind::LedoitWolf:
      return ledoit_wolf(data).estimate;
    case EstimatorKind::KnowledgeAided:
      return knowledge_aided(data, spec.lambda, *spec.prior);
  }
  throw ConfigError("unknown estimator kind");
}

}  // namespace nsnr
