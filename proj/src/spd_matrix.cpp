#include "nsnr/spd_matrix.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace nsnr {

SpdMatrix assert_spd(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DimensionMismatchError("assert_spd: matrix must be square and non-empty, got " +
                                 std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw NotPositiveDefiniteError("assert_spd: matrix has non-finite entries");
  }

  const double max_abs = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol * max_abs) {
    throw NotSymmetricError("assert_spd: asymmetry " + std::to_string(asym) +
                            " exceeds tolerance " + std::to_string(kAsymmetryTol * max_abs));
  }

  // Accumulated rounding asymmetry is repaired rather than rejected.
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("assert_spd: eigendecomposition did not converge");
  }
  EigenPair eig{solver.eigenvalues(), solver.eigenvectors()};

  const double lo = eig.values(0);
  const double hi = eig.values(eig.values.size() - 1);
  if (!(hi > 0.0) || !(lo > kPdTol * hi)) {
    throw NotPositiveDefiniteError("assert_spd: smallest eigenvalue " + std::to_string(lo) +
                                   " below relative tolerance (largest " + std::to_string(hi) +
                                   ")");
  }
  return SpdMatrix(std::move(sym), std::move(eig));
}

SpdMatrix spd_from_spectrum(EigenPair eig) {
  const Eigen::Index d = eig.values.size();
  if (d == 0 || eig.vectors.rows() != d || eig.vectors.cols() != d) {
    throw DimensionMismatchError("spd_from_spectrum: values and vectors sizes disagree");
  }
  for (Eigen::Index i = 1; i < d; ++i) {
    if (eig.values(i) < eig.values(i - 1)) {
      throw ConfigError("spd_from_spectrum: values must be ascending");
    }
  }
  const double lo = eig.values(0);
  const double hi = eig.values(d - 1);
  if (!(hi > 0.0) || !(lo > kPdTol * hi)) {
    throw NotPositiveDefiniteError("spd_from_spectrum: spectrum fails the PD gate");
  }
  const double ortho_err =
      (eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(d, d))
          .cwiseAbs()
          .maxCoeff();
  if (!(ortho_err <= 1e-10)) {
    throw ConfigError("spd_from_spectrum: vectors are not orthonormal");
  }
  Eigen::MatrixXd rec = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  Eigen::MatrixXd sym = 0.5 * (rec + rec.transpose());
  return SpdMatrix(std::move(sym), std::move(eig));
}

EigenPair eig_sym(const SpdMatrix& m) { return m.eigen(); }

Eigen::MatrixXd cholesky(const SpdMatrix& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("cholesky: non-positive pivot");
  }
  return llt.matrixL();
}

SpdMatrix mat_power(const SpdMatrix& m, double p) {
  const EigenPair& e = m.eigen();
  Eigen::VectorXd values = e.values.array().pow(p);
  Eigen::MatrixXd vectors = e.vectors;
  if (p < 0.0) {
    // x -> x^p reverses the eigenvalue ordering; keep the pair aligned and
    // ascending.
    values.reverseInPlace();
    vectors = vectors.rowwise().reverse().eval();
  }
  Eigen::MatrixXd rec = vectors * values.asDiagonal() * vectors.transpose();
  Eigen::MatrixXd sym = 0.5 * (rec + rec.transpose());
  return SpdMatrix(std::move(sym), EigenPair{std::move(values), std::move(vectors)});
}

double cond(const SpdMatrix& m) {
  const Eigen::VectorXd& v = m.eigen().values;
  return v(v.size() - 1) / v(0);
}

double logdet(const SpdMatrix& m) { return m.eigen().values.array().log().sum(); }

}  // namespace nsnr
