#pragma once

#include <random>

#include "nsnr/metrics.hpp"
#include "nsnr/spd_matrix.hpp"

namespace nsnr {

struct OracleConfig {
  int n_random = 100000;   // uniform unit-sphere starts
  int refine_steps = 200;  // pairwise-rotation refinement iterations
  double tol = 1e-10;      // relative-improvement stopping tolerance
};

struct OracleResult {
  double value = 1.0;   // smallest NSNR found
  TargetVector target;  // a target attaining it
};

// Brute-force minimizer of the NSNR over targets, independent of the
// closed-form solution it is used to validate.
//
// Works in whitened coordinates: with chat = L L^T and s = L y the NSNR
// becomes (y^T y)^2 / ((y^T G y)(y^T G^{-1} y)) with G = L^{-1} C L^{-T},
// which is scanned over n_random uniform unit directions and then refined by
// rotations in the plane of the current point and a random direction. Both G
// and G^{-1} come from triangular solves; no spectral information is used.
//
// Deterministic given (cfg, rng state). Never returns a value below the true
// minimum beyond rounding, and reaches it to ~1e-8 for D <= 10.
OracleResult brute_force_nsnr_min(const SpdMatrix& c, const SpdMatrix& chat,
                                  const OracleConfig& cfg, std::mt19937_64& rng);

}  // namespace nsnr
