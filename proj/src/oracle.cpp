#include "nsnr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace nsnr {
namespace {

// Quadratic form of the rotated point y(t) = y cos t + d sin t against one
// matrix, parameterized by the three scalars a = y^T M y, b = y^T M d,
// c = d^T M d.
struct PlaneForm {
  double a, b, c;

  double at(double cos_t, double sin_t) const {
    return a * cos_t * cos_t + 2.0 * b * cos_t * sin_t + c * sin_t * sin_t;
  }
};

double plane_objective(const PlaneForm& fwd, const PlaneForm& inv, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return fwd.at(c, s) * inv.at(c, s);
}

// Maximizes the rotation objective over one period [0, pi): coarse grid scan
// followed by golden-section refinement around the best cell.
double maximize_rotation(const PlaneForm& fwd, const PlaneForm& inv) {
  constexpr int kGrid = 64;
  constexpr double kPi = std::numbers::pi;

  double best_theta = 0.0;
  double best_value = plane_objective(fwd, inv, 0.0);
  for (int i = 1; i < kGrid; ++i) {
    const double theta = kPi * i / kGrid;
    const double value = plane_objective(fwd, inv, theta);
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
    }
  }

  double lo = best_theta - kPi / kGrid;
  double hi = best_theta + kPi / kGrid;
  constexpr double kGolden = 0.6180339887498949;
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = plane_objective(fwd, inv, x1);
  double f2 = plane_objective(fwd, inv, x2);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = plane_objective(fwd, inv, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = plane_objective(fwd, inv, x1);
    }
  }
  const double theta = 0.5 * (lo + hi);
  return plane_objective(fwd, inv, theta) > best_value ? theta : best_theta;
}

struct Candidate {
  double value = 0.0;  // (y^T G y)(y^T G^{-1} y), to be maximized
  Eigen::VectorXd y;
};

}  // namespace

OracleResult brute_force_nsnr_min(const SpdMatrix& c, const SpdMatrix& chat,
                                  const OracleConfig& cfg, std::mt19937_64& rng) {
  if (c.dim() != chat.dim()) {
    throw DimensionMismatchError("brute_force_nsnr_min: dimensions differ");
  }
  if (cfg.n_random < 1) {
    throw ConfigError("brute_force_nsnr_min: n_random must be positive");
  }
  const Eigen::Index dim = c.dim();

  // Whitened ratio G = L^{-1} C L^{-T} and its inverse G^{-1} = K^T K with
  // K = M^{-1} L, where chat = L L^T and c = M M^T. Triangular solves only.
  const Eigen::MatrixXd l = cholesky(chat);
  const Eigen::MatrixXd m = cholesky(c);
  const auto l_view = l.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd half = l_view.solve(c.matrix());
  Eigen::MatrixXd g_raw = l_view.solve(half.transpose());
  const Eigen::MatrixXd g = 0.5 * (g_raw + g_raw.transpose());
  const Eigen::MatrixXd k = m.triangularView<Eigen::Lower>().solve(l);
  Eigen::MatrixXd ginv_raw = k.transpose() * k;
  const Eigen::MatrixXd ginv = 0.5 * (ginv_raw + ginv_raw.transpose());

  const auto objective = [&](const Eigen::VectorXd& y) {
    return y.dot(g * y) * y.dot(ginv * y);
  };

  std::normal_distribution<double> normal(0.0, 1.0);
  const auto random_direction = [&] {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      v(i) = normal(rng);
    }
    return v;
  };

  // Scan: keep the best few starts so refinement is not hostage to a single
  // basin.
  constexpr int kKeep = 4;
  std::vector<Candidate> best;
  for (int i = 0; i < cfg.n_random; ++i) {
    Eigen::VectorXd y = random_direction();
    const double norm = y.norm();
    if (norm == 0.0) {
      continue;
    }
    y /= norm;
    const double value = objective(y);
    if (static_cast<int>(best.size()) < kKeep || value > best.back().value) {
      best.push_back(Candidate{value, std::move(y)});
      std::sort(best.begin(), best.end(),
                [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
      if (static_cast<int>(best.size()) > kKeep) {
        best.pop_back();
      }
    }
  }

  // Refinement: exact line search along rotations in span{y, random d}.
  const int stall_cap = 3 * static_cast<int>(dim);
  Candidate winner;
  for (Candidate& cand : best) {
    Eigen::VectorXd y = cand.y;
    double value = cand.value;
    int stall = 0;
    for (int step = 0; step < cfg.refine_steps && stall < stall_cap; ++step) {
      Eigen::VectorXd d = random_direction();
      d -= d.dot(y) * y;
      const double dnorm = d.norm();
      if (dnorm < 1e-12) {
        continue;
      }
      d /= dnorm;

      const Eigen::VectorXd gy = g * y;
      const Eigen::VectorXd gd = g * d;
      const Eigen::VectorXd iy = ginv * y;
      const Eigen::VectorXd id = ginv * d;
      const PlaneForm fwd{y.dot(gy), y.dot(gd), d.dot(gd)};
      const PlaneForm inv{y.dot(iy), y.dot(id), d.dot(id)};

      const double theta = maximize_rotation(fwd, inv);
      const Eigen::VectorXd rotated = std::cos(theta) * y + std::sin(theta) * d;
      const double rotated_value = objective(rotated);
      if (rotated_value > value * (1.0 + cfg.tol)) {
        y = rotated;
        y.normalize();
        value = rotated_value;
        stall = 0;
      } else {
        if (rotated_value > value) {
          y = rotated;
          y.normalize();
          value = rotated_value;
        }
        ++stall;
      }
    }
    if (value > winner.value) {
      winner = Candidate{value, std::move(y)};
    }
  }

  return OracleResult{std::min(1.0, 1.0 / winner.value), TargetVector(l * winner.y)};
}

}  // namespace nsnr
