#include "hgsqz/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gauss_hermite.hpp"
#include "hgsqz/error.hpp"

namespace hgsqz {
namespace {

using cplx = std::complex<double>;

constexpr double kQuadratureTolerance = 1e-10;
constexpr double kLeakageSlack = 1e-9;

void check_order(int m) {
  if (m < 0) {
    throw PhysicsError("invalid-order", "mode order must be non-negative, got " + std::to_string(m));
  }
  if (m > kMaxHermiteOrder) {
    throw PhysicsError("unsupported-order", "mode order " + std::to_string(m) +
                                                " exceeds the supported maximum of " +
                                                std::to_string(kMaxHermiteOrder));
  }
}

// phi_k(x) = H_k(x) / sqrt(2^k k!) for k = 0..max_order, written into out.
void hermite_normalised(int max_order, double x, std::vector<double>& out) {
  out.resize(max_order + 1);
  out[0] = 1.0;
  if (max_order == 0) return;
  out[1] = std::sqrt(2.0) * x;
  for (int k = 1; k < max_order; ++k) {
    out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] -
                 std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
  }
}

// Overlap table on an n-point rule. The quadrature weight is matched to the
// real Gaussian envelope of the integrand, exp(-u^2 - (u - d)^2 / W^2); the
// Gouy, curvature and tilt phases ride along as complex factors.
Eigen::MatrixXcd overlap_table(int max_ref, int max_src, const AxisDistortion& a, int n) {
  const cplx q(a.zeta, a.eta * a.eta);
  const double w = std::abs(q) / a.eta;  // source beam radius at the reference plane
  const double b = 1.0 / (w * w);
  const double big_a = 1.0 + b;
  const double centre = b * a.d / big_a;
  const double gouy = std::atan2(a.zeta, a.eta * a.eta);
  const double root_a = std::sqrt(big_a);
  const cplx i_over_q = cplx(0.0, 1.0) / q;

  const auto& rule = detail::gauss_hermite(n);

  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(max_ref + 1, max_src + 1);
  std::vector<double> ref_poly, src_poly;
  Eigen::VectorXcd src_col(max_src + 1);
  for (int k = 0; k < n; ++k) {
    const double s = rule.nodes[k];
    const double u = centre + s / root_a;
    const double up = u - a.d;
    const cplx exponent = rule.log_weights[k] + s * s - u * u - i_over_q * (up * up) +
                          cplx(0.0, 2.0 * a.g * (u - 0.5 * a.d));
    const cplx weight = std::exp(exponent);
    if (weight == 0.0) continue;
    hermite_normalised(max_ref, std::numbers::sqrt2 * u, ref_poly);
    hermite_normalised(max_src, std::numbers::sqrt2 * up / w, src_poly);
    for (int j = 0; j <= max_src; ++j) src_col[j] = weight * src_poly[j];
    for (int i = 0; i <= max_ref; ++i) acc.row(i) += ref_poly[i] * src_col.transpose();
  }

  const double norm = std::sqrt(2.0 / std::numbers::pi) / std::sqrt(w) / root_a;
  for (int j = 0; j <= max_src; ++j) {
    acc.col(j) *= norm * std::polar(1.0, (j + 0.5) * gouy);
  }
  return acc;
}

Eigen::MatrixXcd converged_overlap(int max_ref, int max_src, const AxisDistortion& a) {
  if (a.is_identity()) {
    return Eigen::MatrixXcd::Identity(max_ref + 1, max_src + 1);
  }
  int n = 2 * (max_ref + max_src) + 33;
  Eigen::MatrixXcd coarse = overlap_table(max_ref, max_src, a, n);
  double change = 0.0;
  while (2 * n <= detail::kMaxQuadraturePoints) {
    n *= 2;
    Eigen::MatrixXcd fine = overlap_table(max_ref, max_src, a, n);
    change = (fine - coarse).cwiseAbs().maxCoeff();
    if (change <= kQuadratureTolerance) return fine;
    coarse = std::move(fine);
  }
  throw PhysicsError("quadrature-not-converged",
                     "mode overlap did not converge (change " + std::to_string(change) +
                         " at " + std::to_string(n) + " points); distortion too large");
}

void validate_axis(const AxisDistortion& a, const char* axis) {
  const std::string tag(axis);
  if (!std::isfinite(a.d)) throw ConfigError("d" + tag, "displacement must be finite");
  if (!std::isfinite(a.g)) throw ConfigError("g" + tag, "tilt must be finite");
  if (!std::isfinite(a.zeta)) throw ConfigError("zeta" + tag, "waist offset must be finite");
  if (!std::isfinite(a.eta) || a.eta <= 0.0) {
    throw ConfigError("eta" + tag, "waist ratio must be positive and finite");
  }
}

}  // namespace

ModeBasis::ModeBasis(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 0) throw ConfigError("basis_cutoff", "basis cutoff must be non-negative");
  modes_.reserve(static_cast<std::size_t>(cutoff + 1) * (cutoff + 2) / 2);
  for (int order = 0; order <= cutoff; ++order) {
    for (int m = order; m >= 0; --m) modes_.push_back({m, order - m});
  }
}

std::optional<std::size_t> ModeBasis::index_of(ModeIndex mode) const {
  if (mode.m < 0 || mode.n < 0 || mode.order() > cutoff_) return std::nullopt;
  const int order = mode.order();
  return static_cast<std::size_t>(order * (order + 1) / 2 + (order - mode.m));
}

AxisDistortion AxisDistortion::inverse() const {
  return {-(d + zeta * g) / eta, -g * eta, 1.0 / eta, -zeta / (eta * eta)};
}

BeamDistortion BeamDistortion::inverse() const {
  const AxisDistortion x = x_axis().inverse();
  const AxisDistortion y = y_axis().inverse();
  return {x.d, y.d, x.g, y.g, x.eta, y.eta, x.zeta, y.zeta};
}

void BeamDistortion::validate() const {
  validate_axis(x_axis(), "x");
  validate_axis(y_axis(), "y");
}

double CouplingMatrix::max_singular_value() const {
  if (entries.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(entries);
  return svd.singularValues()(0);
}

double hg_amplitude_1d(int m, double u) {
  check_order(m);
  std::vector<double> poly;
  hermite_normalised(m, std::numbers::sqrt2 * u, poly);
  return std::pow(2.0 / std::numbers::pi, 0.25) * poly[m] * std::exp(-u * u);
}

std::complex<double> coupling_1d(int m_ref, int m_src, const AxisDistortion& axis) {
  check_order(m_ref);
  check_order(m_src);
  validate_axis(axis, "");
  return converged_overlap(m_ref, m_src, axis)(m_ref, m_src);
}

Eigen::MatrixXcd coupling_table_1d(int max_order, const AxisDistortion& axis) {
  check_order(max_order);
  validate_axis(axis, "");
  return converged_overlap(max_order, max_order, axis);
}

CouplingMatrix coupling_matrix(const ModeBasis& basis, const BeamDistortion& distortion) {
  distortion.validate();
  check_order(basis.cutoff());
  const Eigen::MatrixXcd tx = converged_overlap(basis.cutoff(), basis.cutoff(), distortion.x_axis());
  const Eigen::MatrixXcd ty = converged_overlap(basis.cutoff(), basis.cutoff(), distortion.y_axis());

  const auto size = static_cast<Eigen::Index>(basis.size());
  CouplingMatrix out{basis, Eigen::MatrixXcd(size, size), Eigen::VectorXd(size)};
  for (Eigen::Index j = 0; j < size; ++j) {
    const ModeIndex src = basis[j];
    for (Eigen::Index i = 0; i < size; ++i) {
      const ModeIndex ref = basis[i];
      out.entries(i, j) = tx(ref.m, src.m) * ty(ref.n, src.n);
    }
    const double leak = 1.0 - out.entries.col(j).squaredNorm();
    if (leak < -kLeakageSlack) {
      throw PhysicsError("coupling-not-contractive",
                         "coupling column carries more than unit power (excess " +
                             std::to_string(-leak) + ")");
    }
    out.leakage(j) = std::max(0.0, leak);
  }
  return out;
}

std::vector<double> displaced_fundamental_coeffs(double a, int k_max) {
  std::vector<double> c(std::max(k_max, 0) + 1);
  c[0] = std::exp(-0.5 * a * a);
  for (int k = 1; k <= k_max; ++k) c[k] = c[k - 1] * a / std::sqrt(static_cast<double>(k));
  return c;
}

double displacement_for_higher_order_power(double power) {
  if (!(power >= 0.0 && power < 1.0)) {
    throw PhysicsError("invalid-power", "higher-order power must lie in [0, 1)");
  }
  return std::sqrt(-std::log1p(-power));
}

double ModePowerReport::higher_order_power() const {
  double total = leakage;
  for (std::size_t i = 1; i < modes.size(); ++i) total += modes[i].power;
  return total;
}

double ModePowerReport::power_of(ModeIndex mode) const {
  for (const auto& mp : modes) {
    if (mp.mode == mode) return mp.power;
  }
  return 0.0;
}

ModePowerReport mode_power_report(const CouplingMatrix& coupling) {
  ModePowerReport report;
  report.modes.reserve(coupling.basis.size());
  for (std::size_t i = 0; i < coupling.basis.size(); ++i) {
    report.modes.push_back({coupling.basis[i], std::norm(coupling.entries(static_cast<Eigen::Index>(i), 0))});
  }
  report.leakage = coupling.leakage(0);
  return report;
}

ModePowerReport mode_power_report(const BeamDistortion& distortion, const ModeBasis& basis) {
  return mode_power_report(coupling_matrix(basis, distortion));
}

}  // namespace hgsqz
