#include "hgsqz/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hgsqz/error.hpp"

namespace hgsqz {
namespace {

constexpr double kContractionSlack = 1e-9;
constexpr double kSymplecticSlack = 1e-9;

void symmetrise(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

void require_finite(double v, const std::string& field, const char* what) {
  if (!std::isfinite(v)) throw ConfigError(field, std::string(what) + " must be finite");
}

}  // namespace

Eigen::Matrix2d QuadratureState::mode_block(std::size_t k) const {
  const auto n = static_cast<Eigen::Index>(n_modes());
  const auto i = static_cast<Eigen::Index>(k);
  Eigen::Matrix2d b;
  b << cov(i, i), cov(i, n + i), cov(n + i, i), cov(n + i, n + i);
  return b;
}

double SqueezerSpec::squeeze_parameter() const { return squeeze_db * std::numbers::ln10 / 20.0; }

void SqueezerSpec::validate(const std::string& prefix) const {
  require_finite(squeeze_db, prefix + "squeeze_db", "squeeze level");
  require_finite(angle, prefix + "angle_rad", "squeeze angle");
  if (mode.m < 0 || mode.n < 0) throw ConfigError(prefix + "mode", "mode orders must be non-negative");
  if (squeeze_db < 0.0) {
    throw ConfigError(prefix + "squeeze_db", "squeeze level must be >= 0 dB");
  }
  if (!(injection_loss >= 0.0 && injection_loss < 1.0)) {
    throw ConfigError(prefix + "injection_loss", "injection loss must lie in [0, 1)");
  }
  if (antisqueeze_db) {
    require_finite(*antisqueeze_db, prefix + "antisqueeze_db", "anti-squeezing level");
    if (*antisqueeze_db < squeeze_db) {
      throw ConfigError(prefix + "antisqueeze_db",
                        "anti-squeezing must be at least the squeezing level (uncertainty relation)");
    }
  }
}

LossChannel LossChannel::uniform(std::size_t n_modes, double epsilon) {
  return {std::vector<double>(n_modes, epsilon)};
}

SqueezeLossPair invert_squeeze_loss(double v_sqz, double v_anti) {
  // eps = (Vs Va - 1) / (Vs + Va - 2), rewritten around the deviations from
  // shot noise so that nearly pure pairs keep their digits.
  const double ds = v_sqz - 1.0;
  const double da = v_anti - 1.0;
  const double epsilon = std::clamp(1.0 + ds * da / (ds + da), 0.0, 1.0);
  const double r = -0.5 * std::log((v_sqz - epsilon) / (1.0 - epsilon));
  return {std::max(r, 0.0), epsilon};
}

QuadratureState vacuum(std::size_t n_modes) {
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim)};
}

QuadratureState squeeze_mode(const QuadratureState& state, std::size_t mode, double r, double angle) {
  const auto n = static_cast<Eigen::Index>(state.n_modes());
  const auto k = static_cast<Eigen::Index>(mode);
  if (k >= n) throw PhysicsError("mode-out-of-range", "squeezed mode index outside the state");

  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Eigen::Matrix2d s = rot * Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal() * rot.transpose();

  QuadratureState out = state;
  const std::array<Eigen::Index, 2> idx{k, n + k};
  // Rows, then columns, of the two affected quadratures.
  Eigen::Matrix<double, 2, Eigen::Dynamic> rows(2, 2 * n);
  rows << out.cov.row(idx[0]), out.cov.row(idx[1]);
  rows = (s * rows).eval();
  out.cov.row(idx[0]) = rows.row(0);
  out.cov.row(idx[1]) = rows.row(1);
  Eigen::Matrix<double, Eigen::Dynamic, 2> cols(2 * n, 2);
  cols << out.cov.col(idx[0]), out.cov.col(idx[1]);
  cols = (cols * s.transpose()).eval();
  out.cov.col(idx[0]) = cols.col(0);
  out.cov.col(idx[1]) = cols.col(1);
  symmetrise(out.cov);

  const Eigen::Vector2d mu = s * Eigen::Vector2d(out.mean(idx[0]), out.mean(idx[1]));
  out.mean(idx[0]) = mu(0);
  out.mean(idx[1]) = mu(1);
  return out;
}

QuadratureState apply_squeeze(const QuadratureState& state, const ModeBasis& basis,
                              const SqueezerSpec& spec) {
  spec.validate();
  const auto index = basis.index_of(spec.mode);
  if (!index || *index >= state.n_modes()) {
    throw PhysicsError("mode-out-of-range", "squeezer mode (" + std::to_string(spec.mode.m) + "," +
                                                std::to_string(spec.mode.n) + ") is outside the basis");
  }

  double r = spec.squeeze_parameter();
  double internal_loss = 0.0;
  if (spec.antisqueeze_db && spec.squeeze_db > 0.0) {
    const auto fit = invert_squeeze_loss(db_to_variance(-spec.squeeze_db), db_to_variance(*spec.antisqueeze_db));
    r = fit.r;
    internal_loss = fit.epsilon;
  }

  QuadratureState out = squeeze_mode(state, *index, r, spec.angle);
  const double total_loss = 1.0 - (1.0 - internal_loss) * (1.0 - spec.injection_loss);
  if (total_loss > 0.0) {
    LossChannel channel = LossChannel::uniform(out.n_modes(), 0.0);
    channel.per_mode_loss[*index] = total_loss;
    out = apply_loss(out, channel);
  }
  return out;
}

QuadratureState apply_loss(const QuadratureState& state, const LossChannel& channel) {
  const std::size_t n = state.n_modes();
  if (channel.per_mode_loss.size() != n) {
    throw PhysicsError("dimension-mismatch", "loss channel size does not match the number of modes");
  }
  Eigen::VectorXd gain(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double eps = channel.per_mode_loss[k];
    if (!(eps >= 0.0 && eps <= 1.0)) {
      throw PhysicsError("invalid-loss", "loss values must lie in [0, 1]");
    }
    gain(static_cast<Eigen::Index>(k)) = gain(static_cast<Eigen::Index>(n + k)) = std::sqrt(1.0 - eps);
  }
  QuadratureState out;
  out.mean = gain.cwiseProduct(state.mean);
  out.cov = gain.asDiagonal() * state.cov * gain.asDiagonal();
  out.cov.diagonal() += (1.0 - gain.array().square()).matrix();
  symmetrise(out.cov);
  return out;
}

Eigen::MatrixXd symplectic_embedding(const Eigen::MatrixXcd& transfer) {
  const Eigen::Index n = transfer.rows();
  const Eigen::Index m = transfer.cols();
  Eigen::MatrixXd s(2 * n, 2 * m);
  s << transfer.real(), -transfer.imag(), transfer.imag(), transfer.real();
  return s;
}

QuadratureState apply_basis_change(const QuadratureState& state, const Eigen::MatrixXcd& transfer) {
  const auto n = static_cast<Eigen::Index>(state.n_modes());
  if (transfer.rows() != n || transfer.cols() != n) {
    throw PhysicsError("dimension-mismatch", "transfer matrix is " + std::to_string(transfer.rows()) +
                                                 "x" + std::to_string(transfer.cols()) + " but the state has " +
                                                 std::to_string(n) + " modes");
  }
  if (n > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(transfer);
    const double smax = svd.singularValues()(0);
    if (smax > 1.0 + kContractionSlack) {
      throw PhysicsError("not-contractive",
                         "transfer matrix has singular value " + std::to_string(smax) + " > 1");
    }
  }
  const Eigen::MatrixXd s = symplectic_embedding(transfer);
  QuadratureState out;
  out.mean = s * state.mean;
  out.cov = s * state.cov * s.transpose();
  out.cov += Eigen::MatrixXd::Identity(2 * n, 2 * n) - s * s.transpose();
  symmetrise(out.cov);
  return out;
}

QuadratureState apply_basis_change(const QuadratureState& state, const CouplingMatrix& coupling) {
  return apply_basis_change(state, coupling.entries);
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& cov) {
  const Eigen::Index dim = cov.rows();
  const Eigen::Index n = dim / 2;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw PhysicsError("not-positive-definite", "covariance matrix is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  omega.topRightCorner(n, n).setIdentity();
  omega.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);

  // L^T Omega L is antisymmetric with eigenvalues +-i nu; its Gram matrix
  // carries each nu^2 twice.
  const Eigen::MatrixXd a = l.transpose() * omega * l;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd sq = es.eigenvalues();
  std::vector<double> nu;
  nu.reserve(n);
  for (Eigen::Index k = 0; k + 1 < dim; k += 2) {
    nu.push_back(std::sqrt(std::max(0.0, 0.5 * (sq(k) + sq(k + 1)))));
  }
  return nu;
}

PhysicalityReport check_physical(const QuadratureState& state) {
  PhysicalityReport report;
  const Eigen::MatrixXd& c = state.cov;
  report.symmetry_defect = c.size() == 0 ? 0.0 : (c - c.transpose()).cwiseAbs().maxCoeff();
  const double scale = c.size() == 0 ? 1.0 : std::max(1.0, c.cwiseAbs().maxCoeff());

  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (c + c.transpose()));
  report.positive_definite = llt.info() == Eigen::Success;
  if (!report.positive_definite) {
    report.min_symplectic_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    report.valid = false;
    return report;
  }
  const auto nu = symplectic_eigenvalues(0.5 * (c + c.transpose()));
  report.min_symplectic_eigenvalue = nu.empty() ? 1.0 : nu.front();
  report.valid = report.symmetry_defect <= 1e-12 * scale &&
                 report.min_symplectic_eigenvalue >= 1.0 - kSymplecticSlack;
  return report;
}

double db_to_variance(double db) { return std::pow(10.0, db / 10.0); }

double variance_to_db(double v) {
  if (!(v > 0.0)) throw PhysicsError("non-positive-variance", "variance must be positive to express in dB");
  return 10.0 * std::log10(v);
}

}  // namespace hgsqz
