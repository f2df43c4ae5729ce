#include "hgsqz/readout.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "hgsqz/error.hpp"

namespace hgsqz {
namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kPhysicalSlack = 1e-9;
constexpr double kShotNoiseSlack = 1e-12;

double wrap(double phase, double period) {
  double w = std::fmod(phase, period);
  if (w < 0.0) w += period;
  if (w >= period) w = 0.0;
  return w;
}

void check_dimensions(const QuadratureState& state, const Eigen::VectorXcd& coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != state.n_modes()) {
    throw PhysicsError("dimension-mismatch", "local oscillator has " + std::to_string(coeffs.size()) +
                                                 " coefficients but the state has " +
                                                 std::to_string(state.n_modes()) + " modes");
  }
}

}  // namespace

LocalOscillator LocalOscillator::in_mode(const ModeBasis& basis, ModeIndex mode, double phase) {
  const auto index = basis.index_of(mode);
  if (!index) {
    throw PhysicsError("mode-out-of-range", "local oscillator mode (" + std::to_string(mode.m) + "," +
                                                std::to_string(mode.n) + ") is outside the basis");
  }
  LocalOscillator lo{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size())), phase};
  lo.coeffs(static_cast<Eigen::Index>(*index)) = 1.0;
  return lo;
}

Eigen::VectorXd projection_vector(const Eigen::VectorXcd& coeffs, double phase) {
  if (std::abs(coeffs.norm() - 1.0) > kNormTolerance) {
    throw PhysicsError("lo-not-normalised", "local oscillator coefficients must have unit norm");
  }
  const Eigen::Index n = coeffs.size();
  const Eigen::VectorXcd w = coeffs.conjugate() * std::polar(1.0, -phase);
  Eigen::VectorXd p(2 * n);
  p.head(n) = w.real();
  p.tail(n) = -w.imag();
  return p;
}

double measured_variance(const QuadratureState& state, const LocalOscillator& lo) {
  check_dimensions(state, lo.coeffs);
  const Eigen::VectorXd p = projection_vector(lo.coeffs, lo.phase);
  return p.dot(state.cov * p);
}

QuadratureExtrema quadrature_extrema(const QuadratureState& state, const Eigen::VectorXcd& lo_coeffs) {
  check_dimensions(state, lo_coeffs);
  Eigen::Matrix<double, Eigen::Dynamic, 2> q(2 * lo_coeffs.size(), 2);
  q.col(0) = projection_vector(lo_coeffs, 0.0);
  q.col(1) = projection_vector(lo_coeffs, 0.5 * std::numbers::pi);
  const Eigen::Matrix2d reduced = q.transpose() * state.cov * q;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(reduced);
  const Eigen::Vector2d v = es.eigenvectors().col(0);
  return {es.eigenvalues()(0), es.eigenvalues()(1), wrap(std::atan2(v(1), v(0)), std::numbers::pi)};
}

VarianceTrace phase_sweep(const QuadratureState& state, const Eigen::VectorXcd& lo_coeffs,
                          std::size_t n_samples) {
  if (n_samples < 2) throw PhysicsError("invalid-sweep", "a phase sweep needs at least 2 samples");
  check_dimensions(state, lo_coeffs);
  VarianceTrace trace;
  trace.phases.resize(n_samples);
  trace.variances.resize(n_samples);
  trace.variances_db.resize(n_samples);
  const Eigen::VectorXd p0 = projection_vector(lo_coeffs, 0.0);
  const Eigen::VectorXd p1 = projection_vector(lo_coeffs, 0.5 * std::numbers::pi);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_samples);
    const Eigen::VectorXd p = std::cos(phi) * p0 + std::sin(phi) * p1;
    trace.phases[k] = phi;
    trace.variances[k] = p.dot(state.cov * p);
    trace.variances_db[k] = variance_to_db(trace.variances[k]);
  }
  return trace;
}

SqueezingExtraction extract_sqz_antisqz(const VarianceTrace& trace) {
  const auto& y = trace.variances;
  if (y.empty()) throw PhysicsError("empty-trace", "cannot extract extrema from an empty trace");

  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double y_min = *lo_it;
  const double y_max = *hi_it;
  SqueezingExtraction out{y_min, y_max, trace.phases.front(), false};
  if (y_max - y_min <= kShotNoiseSlack * std::max(1.0, std::abs(y_max))) {
    out.degenerate = true;
    return out;
  }

  // First sample within rounding of each extremum, so that the pi-periodic
  // copies of the minimum resolve to the earlier phase.
  const auto first_within = [&](double target, bool below) {
    const double slack = 1e-12 * std::abs(target) + 1e-15;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (below ? y[k] <= target + slack : y[k] >= target - slack) return k;
    }
    return std::size_t{0};
  };
  const std::size_t n = y.size();
  const double step = n > 1 ? trace.phases[1] - trace.phases[0] : 0.0;

  // Three-point parabola through the periodic neighbours.
  const auto refine = [&](std::size_t k, double& value, double* phase) {
    if (n < 3) return;
    const double ym = y[(k + n - 1) % n];
    const double y0 = y[k];
    const double yp = y[(k + 1) % n];
    const double curvature = ym - 2.0 * y0 + yp;
    if (curvature == 0.0) return;
    const double offset = std::clamp(0.5 * (ym - yp) / curvature, -1.0, 1.0);
    value = y0 - 0.25 * (ym - yp) * offset;
    if (phase) *phase = wrap(trace.phases[k] + offset * step, 2.0 * std::numbers::pi);
  };

  const std::size_t k_min = first_within(y_min, true);
  out.phase_min = trace.phases[k_min];
  refine(k_min, out.v_min, &out.phase_min);
  refine(first_within(y_max, false), out.v_max, nullptr);
  return out;
}

LossEstimate estimate_loss(double v_sqz, double v_anti) {
  if (!std::isfinite(v_sqz) || !std::isfinite(v_anti) || v_sqz <= 0.0 || v_anti <= 0.0) {
    throw PhysicsError("invalid-pair", "variances must be positive and finite");
  }
  if (std::abs(v_sqz - 1.0) <= kShotNoiseSlack && std::abs(v_anti - 1.0) <= kShotNoiseSlack) {
    return {std::nullopt, 0.0, true};
  }
  if (v_sqz * v_anti < 1.0 - kPhysicalSlack) {
    throw PhysicsError("unphysical-pair", "V_sqz * V_anti = " + std::to_string(v_sqz * v_anti) +
                                              " < 1 violates the uncertainty relation");
  }
  if (v_sqz > 1.0 + kShotNoiseSlack || v_anti < 1.0 - kShotNoiseSlack) {
    throw PhysicsError("invalid-pair", "expected V_sqz <= 1 <= V_anti");
  }
  if (v_sqz >= 1.0) {
    throw PhysicsError("unrepresentable-pair",
                       "squeezed variance at shot noise with excess anti-squeezing implies total loss");
  }
  const SqueezeLossPair fit = invert_squeeze_loss(v_sqz, v_anti);
  return {fit.epsilon, fit.r, false};
}

LossSensitivity loss_sensitivity(double v_sqz, double v_anti) {
  const double denom = v_sqz + v_anti - 2.0;
  const double eps = (v_sqz * v_anti - 1.0) / denom;
  return {(v_anti - eps) / denom, (v_sqz - eps) / denom};
}

std::string format_scientific(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 11);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const VarianceTrace& trace) {
  out << "phase_rad,variance,variance_db\n";
  for (std::size_t k = 0; k < trace.phases.size(); ++k) {
    out << format_scientific(trace.phases[k]) << ',' << format_scientific(trace.variances[k]) << ','
        << format_scientific(trace.variances_db[k]) << '\n';
  }
}

}  // namespace hgsqz
