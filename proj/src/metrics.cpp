#include "nsnr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace nsnr {
namespace {

void check_same_dim(const SpdMatrix& c, const SpdMatrix& chat, const char* op) {
  if (c.dim() != chat.dim()) {
    throw DimensionMismatchError(std::string(op) + ": dimensions " + std::to_string(c.dim()) +
                                 " and " + std::to_string(chat.dim()) + " differ");
  }
}

void check_target_dim(const TargetVector& s, const SpdMatrix& c, const char* op) {
  if (s.dim() != c.dim()) {
    throw DimensionMismatchError(std::string(op) + ": target length " + std::to_string(s.dim()) +
                                 " vs matrix dimension " + std::to_string(c.dim()));
  }
}

double nsnr_min_from_kappa(double kappa) {
  const double r = 4.0 * kappa / ((kappa + 1.0) * (kappa + 1.0));
  return std::min(1.0, r);
}

// 1/2 sum_i (q_i - 1 - log q_i); the per-term form keeps near-identical pairs
// from cancelling through the trace and log-determinant separately.
double kl_from_spectrum(const Eigen::VectorXd& q) {
  return 0.5 * (q.array() - 1.0 - q.array().log()).sum();
}

double spectral_norm_of_difference(const SpdMatrix& c, const SpdMatrix& chat) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c.matrix() - chat.matrix(),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("d_spectral: eigendecomposition did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::NsnrDist:
      return "nsnr";
    case MetricKind::Kl:
      return "kl";
    case MetricKind::SymKl:
      return "symkl";
    case MetricKind::Frobenius:
      return "frobenius";
    case MetricKind::Spectral:
      return "spectral";
  }
  return "?";
}

TargetVector::TargetVector(Eigen::VectorXd v) : v_(std::move(v)) {
  if (v_.size() == 0 || !(v_.norm() > 0.0)) {
    throw DegenerateInputError("TargetVector: must be a nonzero vector");
  }
}

MatrixRatio matrix_ratio(const SpdMatrix& c, const SpdMatrix& chat) {
  check_same_dim(c, chat, "matrix_ratio");
  // Q = Chat^{-1/2} C Chat^{-1/2} = W W^T with W = Chat^{-1/2} C^{1/2}.
  // The spectrum comes from the SVD of W (eigenvalues are the squared
  // singular values): forming W W^T first would square the condition number
  // and cost the small eigenvalues half their digits, which the symmetry of
  // the worst case then exposes.
  const Eigen::MatrixXd w = mat_power(chat, -0.5).matrix() * mat_power(c, 0.5).matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullU);
  const Eigen::VectorXd& sigma = svd.singularValues();  // descending
  const Eigen::Index d = sigma.size();

  EigenPair eig;
  eig.values.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    eig.values(i) = sigma(d - 1 - i) * sigma(d - 1 - i);
  }
  eig.vectors = svd.matrixU().rowwise().reverse();

  SpdMatrix q = spd_from_spectrum(std::move(eig));
  const EigenPair& e = q.eigen();
  const Eigen::Index last = d - 1;
  RatioSpectrum spectrum{e.values, e.vectors.col(0), e.vectors.col(last),
                         e.values(last) / e.values(0)};
  return MatrixRatio{std::move(q), std::move(spectrum)};
}

double snr(const TargetVector& s, const SpdMatrix& c) {
  check_target_dim(s, c, "snr");
  const EigenPair& e = c.eigen();
  Eigen::VectorXd w = e.vectors.transpose() * s.vec();
  return (w.array().square() / e.values.array()).sum();
}

double nsnr(const TargetVector& s, const SpdMatrix& c, const SpdMatrix& chat) {
  check_target_dim(s, c, "nsnr");
  check_same_dim(c, chat, "nsnr");
  // Change of variables y = Chat^{-1/2} s, normalized to unit length, so the
  // three quadratic forms never underflow together:
  //   nsnr = 1 / ((y^T Q y)(y^T Q^{-1} y)).
  MatrixRatio ratio = matrix_ratio(c, chat);
  Eigen::VectorXd y = mat_power(chat, -0.5).matrix() * s.vec();
  y.normalize();
  Eigen::VectorXd w = ratio.q.eigen().vectors.transpose() * y;
  const Eigen::ArrayXd w2 = w.array().square();
  const Eigen::ArrayXd q = ratio.spectrum.q.array();
  const double forward = (q * w2).sum();
  const double inverse = (w2 / q).sum();
  return std::min(1.0, 1.0 / (forward * inverse));
}

double nsnr_min(const SpdMatrix& c, const SpdMatrix& chat) {
  check_same_dim(c, chat, "nsnr_min");
  return nsnr_min_from_kappa(matrix_ratio(c, chat).spectrum.kappa);
}

TargetVector worst_case_target(const SpdMatrix& c, const SpdMatrix& chat) {
  check_same_dim(c, chat, "worst_case_target");
  MatrixRatio ratio = matrix_ratio(c, chat);
  const Eigen::MatrixXd chat_half = mat_power(chat, 0.5).matrix();
  if (ratio.spectrum.kappa <= 1.0) {
    return TargetVector(chat_half * ratio.spectrum.u_min);
  }
  const Eigen::VectorXd y = (ratio.spectrum.u_min + ratio.spectrum.u_max) / std::sqrt(2.0);
  return TargetVector(chat_half * y);
}

double d_nsnr(const SpdMatrix& c, const SpdMatrix& chat) {
  return -0.5 * std::log(nsnr_min(c, chat));
}

double d_kl(const SpdMatrix& c, const SpdMatrix& chat) {
  check_same_dim(c, chat, "d_kl");
  return kl_from_spectrum(matrix_ratio(c, chat).spectrum.q);
}

double d_symkl(const SpdMatrix& c, const SpdMatrix& chat) {
  return 0.5 * (d_kl(c, chat) + d_kl(chat, c));
}

double d_frobenius(const SpdMatrix& c, const SpdMatrix& chat) {
  check_same_dim(c, chat, "d_frobenius");
  return (c.matrix() - chat.matrix()).norm();
}

double d_spectral(const SpdMatrix& c, const SpdMatrix& chat) {
  check_same_dim(c, chat, "d_spectral");
  return spectral_norm_of_difference(c, chat);
}

double MetricReport::by_kind(MetricKind kind) const {
  switch (kind) {
    case MetricKind::NsnrDist:
      return d_nsnr;
    case MetricKind::Kl:
      return d_kl;
    case MetricKind::SymKl:
      return d_symkl;
    case MetricKind::Frobenius:
      return d_frobenius;
    case MetricKind::Spectral:
      return d_spectral;
  }
  return 0.0;
}

MetricReport evaluate_all(const SpdMatrix& c, const SpdMatrix& chat) {
  check_same_dim(c, chat, "evaluate_all");
  MatrixRatio forward = matrix_ratio(c, chat);
  MatrixRatio reverse = matrix_ratio(chat, c);

  MetricReport report;
  report.nsnr_min = nsnr_min_from_kappa(forward.spectrum.kappa);
  report.d_nsnr = -0.5 * std::log(report.nsnr_min);
  report.d_kl = kl_from_spectrum(forward.spectrum.q);
  report.d_symkl = 0.5 * (report.d_kl + kl_from_spectrum(reverse.spectrum.q));
  report.d_frobenius = (c.matrix() - chat.matrix()).norm();
  report.d_spectral = spectral_norm_of_difference(c, chat);
  return report;
}

}  // namespace nsnr
