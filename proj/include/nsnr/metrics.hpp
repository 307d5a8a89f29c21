#pragma once

#include <string>

#include <Eigen/Dense>

#include "nsnr/spd_matrix.hpp"

namespace nsnr {

// The five distances the harness compares. NsnrDist is the worst-case NSNR
// distance; the others are the competitors it is correlated against.
enum class MetricKind { NsnrDist, Kl, SymKl, Frobenius, Spectral };

std::string to_string(MetricKind kind);

// Signal/steering vector of length D. Must not be the zero vector.
class TargetVector {
 public:
  explicit TargetVector(Eigen::VectorXd v);

  Eigen::Index dim() const { return v_.size(); }
  const Eigen::VectorXd& vec() const { return v_; }

 private:
  Eigen::VectorXd v_;
};

// Spectrum of the matrix ratio Q = Chat^{-1/2} C Chat^{-1/2}. The worst-case
// NSNR depends on C and Chat only through this spectrum.
struct RatioSpectrum {
  Eigen::VectorXd q;      // ascending eigenvalues, all > 0
  Eigen::VectorXd u_min;  // eigenvector of q(0)
  Eigen::VectorXd u_max;  // eigenvector of q(D-1)
  double kappa = 1.0;     // q(D-1) / q(0), >= 1
};

struct MatrixRatio {
  SpdMatrix q;
  RatioSpectrum spectrum;
};

// Q = Chat^{-1/2} C Chat^{-1/2} together with its spectrum.
MatrixRatio matrix_ratio(const SpdMatrix& c, const SpdMatrix& chat);

// Output SNR of the matched filter w = c^{-1} s: s^T c^{-1} s.
double snr(const TargetVector& s, const SpdMatrix& c);

// Normalized SNR: the SNR of the filter built from chat divided by the SNR of
// the clairvoyant filter built from c, for target s. Always in (0, 1], and
// invariant to separate rescaling of s, c and chat.
double nsnr(const TargetVector& s, const SpdMatrix& c, const SpdMatrix& chat);

// Worst-case NSNR over all targets: 4*kappa(Q) / (kappa(Q) + 1)^2.
// Symmetric in its arguments; equals 1 iff c is a positive multiple of chat.
double nsnr_min(const SpdMatrix& c, const SpdMatrix& chat);

// A target attaining the worst case: s = Chat^{1/2} (u_min + u_max)/sqrt(2).
// When kappa == 1 every target attains 1; Chat^{1/2} u_min is returned so the
// operation stays a function.
TargetVector worst_case_target(const SpdMatrix& c, const SpdMatrix& chat);

// Worst-case NSNR distance: -1/2 log nsnr_min. Zero iff c = alpha * chat.
// Does not satisfy the triangle inequality.
double d_nsnr(const SpdMatrix& c, const SpdMatrix& chat);

// Zero-mean Gaussian KL divergence 1/2 Tr(Q) - D/2 - 1/2 log|Q|, evaluated
// through the ratio spectrum. Upper-bounds d_nsnr.
double d_kl(const SpdMatrix& c, const SpdMatrix& chat);

// Symmetrized KL: mean of the two directions.
double d_symkl(const SpdMatrix& c, const SpdMatrix& chat);

// Frobenius norm of the difference c - chat.
double d_frobenius(const SpdMatrix& c, const SpdMatrix& chat);

// Spectral norm of the difference: largest absolute eigenvalue of c - chat.
double d_spectral(const SpdMatrix& c, const SpdMatrix& chat);

// All metrics for one covariance pair, sharing the two ratio decompositions.
// Each field matches its standalone operation bit for bit.
struct MetricReport {
  double d_nsnr = 0.0;
  double d_kl = 0.0;
  double d_symkl = 0.0;
  double d_frobenius = 0.0;
  double d_spectral = 0.0;
  double nsnr_min = 1.0;

  double by_kind(MetricKind kind) const;
};

MetricReport evaluate_all(const SpdMatrix& c, const SpdMatrix& chat);

}  // namespace nsnr
