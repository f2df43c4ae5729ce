#pragma once

// Balanced homodyne readout of a multi-mode Gaussian state.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hgsqz/gaussian.hpp"
#include "hgsqz/modes.hpp"

namespace hgsqz {

inline constexpr std::size_t kDefaultSweepSamples = 512;

// Spatial mode of the local oscillator, expanded in the measurement basis,
// and the readout phase. The measured quadrature at phase phi is
// b e^{-i phi} + h.c. with b = sum_i conj(coeffs_i) a_i.
struct LocalOscillator {
  Eigen::VectorXcd coeffs;
  double phase = 0.0;

  static LocalOscillator in_mode(const ModeBasis& basis, ModeIndex mode, double phase = 0.0);
};

// Unit vector p over the 2N quadratures such that the measured variance is
// p^T cov p. Throws PhysicsError if coeffs is not normalised.
Eigen::VectorXd projection_vector(const Eigen::VectorXcd& coeffs, double phase);

double measured_variance(const QuadratureState& state, const LocalOscillator& lo);

// Exact extrema over the readout phase, from the 2x2 reduced covariance of
// the LO mode. phase_min lies in [0, pi).
struct QuadratureExtrema {
  double v_min = 1.0;
  double v_max = 1.0;
  double phase_min = 0.0;
};

QuadratureExtrema quadrature_extrema(const QuadratureState& state, const Eigen::VectorXcd& lo_coeffs);

struct VarianceTrace {
  std::vector<double> phases;
  std::vector<double> variances;
  std::vector<double> variances_db;
};

// Uniform grid over [0, 2 pi), n_samples >= 2.
VarianceTrace phase_sweep(const QuadratureState& state, const Eigen::VectorXcd& lo_coeffs,
                          std::size_t n_samples = kDefaultSweepSamples);

struct SqueezingExtraction {
  double v_min = 1.0;
  double v_max = 1.0;
  double phase_min = 0.0;
  bool degenerate = false;  // flat trace; phase_min is the first sample
};

// Global extrema with three-point parabolic refinement on the periodic grid.
SqueezingExtraction extract_sqz_antisqz(const VarianceTrace& trace);

struct LossEstimate {
  std::optional<double> epsilon;  // empty when the input pair is at shot noise
  double r = 0.0;
  bool degenerate = false;
};

// Inverts V_-/+ = (1 - eps) e^{-/+2r} + eps for a (squeezed, anti-squeezed)
// variance pair. Throws PhysicsError for pairs violating the uncertainty
// relation or the ordering V_sqz <= 1 <= V_anti.
LossEstimate estimate_loss(double v_sqz, double v_anti);

// Partial derivatives of the inferred loss with respect to each variance.
struct LossSensitivity {
  double d_eps_d_vsqz = 0.0;
  double d_eps_d_vanti = 0.0;
};

LossSensitivity loss_sensitivity(double v_sqz, double v_anti);

// Fixed 12-significant-digit scientific notation, locale independent.
std::string format_scientific(double value);

// Header `phase_rad,variance,variance_db`, one row per sample.
void write_trace_csv(std::ostream& out, const VarianceTrace& trace);

}  // namespace hgsqz
