#pragma once

// Multi-mode Gaussian states in the quadrature covariance formalism.
//
// Conventions, fixed for the whole library:
//  * quadrature vector ordering is (x_0 .. x_{N-1}, p_0 .. p_{N-1});
//  * variances are shot-noise normalised, vacuum covariance = identity;
//  * a = (x + i p) / 2, so the rotated quadrature x cos(t) + p sin(t) has
//    vacuum variance one for every t;
//  * "X dB of squeezing" means a quadrature variance of 10^(-X/10).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hgsqz/modes.hpp"

namespace hgsqz {

struct QuadratureState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  std::size_t n_modes() const { return static_cast<std::size_t>(mean.size() / 2); }

  // 2x2 covariance of a single mode, (x_k, p_k).
  Eigen::Matrix2d mode_block(std::size_t k) const;
};

// A single-mode squeezed-light source. The squeezed quadrature is
// x cos(angle) + p sin(angle).
struct SqueezerSpec {
  ModeIndex mode;
  double squeeze_db = 0.0;
  double angle = 0.0;
  double injection_loss = 0.0;
  // Anti-squeezing level in dB. When set, the source is modelled as a pure
  // squeezer followed by the effective loss that reproduces the pair
  // (squeeze_db, antisqueeze_db); unset means a pure state.
  std::optional<double> antisqueeze_db;

  double squeeze_parameter() const;
  // Throws ConfigError naming `prefix`.field on violated invariants.
  void validate(const std::string& prefix = "") const;
};

struct LossChannel {
  std::vector<double> per_mode_loss;

  static LossChannel uniform(std::size_t n_modes, double epsilon);
};

// Pure squeeze parameter and lumped loss reproducing a measured
// (squeezed, anti-squeezed) variance pair under V = (1-eps) e^{-/+2r} + eps.
struct SqueezeLossPair {
  double r = 0.0;
  double epsilon = 0.0;
};

// Closed-form inversion. Requires 0 < v_sqz <= 1 <= v_anti and not both
// equal to one; callers validate.
SqueezeLossPair invert_squeeze_loss(double v_sqz, double v_anti);

QuadratureState vacuum(std::size_t n_modes);

// Squeeze one mode (by basis position) with parameter r along `angle`.
QuadratureState squeeze_mode(const QuadratureState& state, std::size_t mode, double r, double angle);

QuadratureState apply_squeeze(const QuadratureState& state, const ModeBasis& basis,
                              const SqueezerSpec& spec);

QuadratureState apply_loss(const QuadratureState& state, const LossChannel& channel);

// Passive linear map a_out = T a_in with vacuum environment filling the
// deficit I - T T^dagger. Throws PhysicsError on dimension mismatch or if T
// is not a contraction.
QuadratureState apply_basis_change(const QuadratureState& state, const Eigen::MatrixXcd& transfer);
QuadratureState apply_basis_change(const QuadratureState& state, const CouplingMatrix& coupling);

// Real symplectic embedding [[Re T, -Im T], [Im T, Re T]].
Eigen::MatrixXd symplectic_embedding(const Eigen::MatrixXcd& transfer);

struct PhysicalityReport {
  double symmetry_defect = 0.0;
  bool positive_definite = false;
  // NaN when the covariance is not positive definite.
  double min_symplectic_eigenvalue = 0.0;
  bool valid = false;
};

// Ascending symplectic spectrum; requires a positive-definite covariance.
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& cov);

PhysicalityReport check_physical(const QuadratureState& state);

double db_to_variance(double db);
// Throws PhysicsError for v <= 0.
double variance_to_db(double v);

}  // namespace hgsqz
