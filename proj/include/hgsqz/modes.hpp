#pragma once

// Hermite-Gaussian mode mathematics: waist-plane field profiles, overlaps
// between a reference basis and a geometrically distorted copy of it,
// truncated coupling matrices and classical mode-content reports.
//
// All lengths are dimensionless. Transverse coordinates are in units of the
// reference waist radius w0, tilts in units of the far-field divergence
// angle lambda/(pi w0), axial offsets in units of the Rayleigh range.

#include <complex>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hgsqz {

// Highest Hermite order evaluated; above this the polynomial recurrences and
// quadrature orders get impractical.
inline constexpr int kMaxHermiteOrder = 32;

struct ModeIndex {
  int m = 0;  // horizontal order
  int n = 0;  // vertical order

  constexpr int order() const { return m + n; }
  friend constexpr auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

// Canonical truncated basis: every (m, n) with m + n <= cutoff, ordered by
// total order and then by m descending. Index 0 is always (0, 0).
class ModeBasis {
 public:
  explicit ModeBasis(int cutoff = 6);

  int cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  const ModeIndex& operator[](std::size_t i) const { return modes_[i]; }
  std::span<const ModeIndex> modes() const { return modes_; }

  std::optional<std::size_t> index_of(ModeIndex mode) const;
  bool contains(ModeIndex mode) const { return index_of(mode).has_value(); }

  friend bool operator==(const ModeBasis& a, const ModeBasis& b) {
    return a.cutoff_ == b.cutoff_;
  }

 private:
  int cutoff_;
  std::vector<ModeIndex> modes_;
};

// Per-axis geometric mismatch of the source beam against the reference beam.
struct AxisDistortion {
  double d = 0.0;     // beam-centre offset / w0
  double g = 0.0;     // tilt / divergence angle
  double eta = 1.0;   // source waist / reference waist
  double zeta = 0.0;  // source waist position offset / Rayleigh range

  bool is_identity() const { return d == 0.0 && g == 0.0 && eta == 1.0 && zeta == 0.0; }

  // Parameters of the operator inverse, such that
  // coupling_1d(i, j, a.inverse()) == conj(coupling_1d(j, i, a)).
  AxisDistortion inverse() const;
};

struct BeamDistortion {
  double dx = 0.0, dy = 0.0;
  double gx = 0.0, gy = 0.0;
  double etax = 1.0, etay = 1.0;
  double zetax = 0.0, zetay = 0.0;

  AxisDistortion x_axis() const { return {dx, gx, etax, zetax}; }
  AxisDistortion y_axis() const { return {dy, gy, etay, zetay}; }
  bool is_identity() const { return x_axis().is_identity() && y_axis().is_identity(); }
  BeamDistortion inverse() const;

  // Throws ConfigError on non-finite fields or non-positive waist ratios.
  void validate() const;
};

// entries(i, j) = <reference mode i | distorted source mode j>. Power that
// the distorted source mode j sends beyond the cutoff is kept in leakage(j);
// it is never renormalised away.
struct CouplingMatrix {
  ModeBasis basis;
  Eigen::MatrixXcd entries;
  Eigen::VectorXd leakage;

  double max_singular_value() const;
};

// Normalised waist-plane HG amplitude psi_m(u) ~ H_m(sqrt(2) u) exp(-u^2),
// with integral of psi_m^2 over u equal to one.
double hg_amplitude_1d(int m, double u);

// <psi_{m_ref} | D psi_{m_src}> for a single axis, by Gauss-Hermite
// quadrature with a point-doubling convergence check. Throws PhysicsError
// ("quadrature-not-converged") if the distortion is too large to resolve.
std::complex<double> coupling_1d(int m_ref, int m_src, const AxisDistortion& axis);

// All single-axis overlaps with orders 0..max_order on both sides, evaluated
// on one shared quadrature grid. Element (i, j) = coupling_1d(i, j, axis).
Eigen::MatrixXcd coupling_table_1d(int max_order, const AxisDistortion& axis);

CouplingMatrix coupling_matrix(const ModeBasis& basis, const BeamDistortion& distortion);

// Closed form for a displaced fundamental: c_k = a^k exp(-a^2/2) / sqrt(k!).
std::vector<double> displaced_fundamental_coeffs(double a, int k_max);

// Displacement a for which the displaced fundamental puts `power` into
// higher-order modes, i.e. the inverse of 1 - exp(-a^2).
double displacement_for_higher_order_power(double power);

struct ModePower {
  ModeIndex mode;
  double power = 0.0;
};

// Classical mode content of a distorted fundamental beam as a mode analyser
// cavity would show it.
struct ModePowerReport {
  std::vector<ModePower> modes;
  double leakage = 0.0;

  double fundamental_power() const { return modes.empty() ? 0.0 : modes.front().power; }
  // Everything not in (0,0), including truncation leakage.
  double higher_order_power() const;
  double power_of(ModeIndex mode) const;
};

ModePowerReport mode_power_report(const BeamDistortion& distortion, const ModeBasis& basis);
// Same report from an already computed coupling matrix (its column 0).
ModePowerReport mode_power_report(const CouplingMatrix& coupling);

}  // namespace hgsqz
