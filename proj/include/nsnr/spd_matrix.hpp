#pragma once

#include <Eigen/Dense>

#include "nsnr/errors.hpp"

namespace nsnr {

// Relative tolerances used by the SPD gate. Absolute thresholds do not
// survive the scale-invariance of the problem, so both are relative.
inline constexpr double kAsymmetryTol = 1e-12;  // vs. max |entry|
inline constexpr double kPdTol = 1e-10;         // smallest vs. largest eigenvalue

// Full spectral decomposition of a symmetric matrix. Eigenvalues are in
// ascending order, eigenvector columns are aligned with them.
struct EigenPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// Dense real symmetric positive-definite matrix.
//
// Construction goes through assert_spd(), which symmetrizes the input and
// validates positive definiteness. The spectral decomposition is computed
// once at construction and cached; every matrix function (inverse, roots,
// condition number, log-determinant) is derived from that single
// decomposition. Instances are immutable and safe to share across threads.
class SpdMatrix {
 public:
  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXd& matrix() const { return mat_; }
  const EigenPair& eigen() const { return eig_; }

 private:
  SpdMatrix(Eigen::MatrixXd mat, EigenPair eig)
      : mat_(std::move(mat)), eig_(std::move(eig)) {}

  friend SpdMatrix assert_spd(const Eigen::MatrixXd& m);
  friend SpdMatrix mat_power(const SpdMatrix& m, double p);
  friend SpdMatrix spd_from_spectrum(EigenPair eig);

  Eigen::MatrixXd mat_;
  EigenPair eig_;
};

// Assembles an SpdMatrix from an externally computed decomposition
// (ascending positive values, orthonormal columns), for callers that obtain
// the spectrum by a more accurate route than the generic solver — e.g. the
// matrix ratio, whose small eigenvalues come out of an SVD. The dense matrix
// is reconstructed as V diag(values) V^T.
SpdMatrix spd_from_spectrum(EigenPair eig);

// Validates that m is (numerically) symmetric positive definite and returns
// the symmetrized copy (m + m^T)/2 wrapped as an SpdMatrix.
//
// Throws NotSymmetricError when the asymmetry exceeds kAsymmetryTol * max|m|,
// NotPositiveDefiniteError when the smallest eigenvalue is not strictly
// above kPdTol times the largest.
SpdMatrix assert_spd(const Eigen::MatrixXd& m);

// Spectral decomposition (values ascending); returns a copy of the pair
// cached at construction.
EigenPair eig_sym(const SpdMatrix& m);

// Lower-triangular factor L with L L^T = m.
Eigen::MatrixXd cholesky(const SpdMatrix& m);

// m^p through the cached eigendecomposition: eigenvalues raised to p, same
// eigenvectors. Needs p in {-1, -1/2, 1/2, ...}; any real p works.
SpdMatrix mat_power(const SpdMatrix& m, double p);

// Condition number: largest eigenvalue over smallest.
double cond(const SpdMatrix& m);

// Natural log of the determinant (sum of eigenvalue logs).
double logdet(const SpdMatrix& m);

}  // namespace nsnr
