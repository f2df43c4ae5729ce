#include "hgsqz/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "hgsqz/error.hpp"
#include "hgsqz/golden_section.hpp"

namespace hgsqz {
namespace {

constexpr double kShotNoiseSlack = 1e-12;

std::string mode_text(ModeIndex mode) {
  return "(" + std::to_string(mode.m) + "," + std::to_string(mode.n) + ")";
}

double wrap_angle(double angle) {
  double w = std::fmod(angle, std::numbers::pi);
  if (w < 0.0) w += std::numbers::pi;
  if (w >= std::numbers::pi) w = 0.0;
  return w;
}

// Smaller eigenvalue of a symmetric 2x2 matrix.
double min_eigenvalue(const Eigen::Matrix2d& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const double off = 0.5 * (m(0, 1) + m(1, 0));
  return mean - std::hypot(half_diff, off);
}

// 2x2 covariance a source leaves in its own mode.
Eigen::Matrix2d source_block(const SqueezerSpec& spec) {
  SqueezerSpec local = spec;
  local.mode = {0, 0};
  return apply_squeeze(vacuum(1), ModeBasis(0), local).mode_block(0);
}

SqueezerSpec pure_squeezer(const CompensatingSource& s) {
  SqueezerSpec spec;
  spec.mode = s.mode;
  spec.squeeze_db = s.squeeze_db;
  spec.angle = s.angle;
  return spec;
}

ScenarioConfig preset_base() {
  ScenarioConfig c;
  c.basis_cutoff = 6;
  return c;
}

SqueezerSpec s00() {
  SqueezerSpec s;
  s.mode = {0, 0};
  s.squeeze_db = 5.8;
  return s;
}

SqueezerSpec s01() {
  SqueezerSpec s;
  s.mode = {0, 1};
  s.squeeze_db = 4.8;
  return s;
}

BeamDistortion vertical_misalignment() {
  BeamDistortion d;
  d.dy = displacement_for_higher_order_power(kMisalignmentPower);
  return d;
}

}  // namespace

LocalOscillator ScenarioConfig::local_oscillator() const { return LocalOscillator::in_mode(basis(), lo_mode); }

void ScenarioConfig::validate() const {
  if (basis_cutoff < 0 || basis_cutoff > kMaxHermiteOrder) {
    throw ConfigError("basis_cutoff", "basis cutoff must lie in [0, " + std::to_string(kMaxHermiteOrder) + "]");
  }
  const ModeBasis b = basis();
  std::set<ModeIndex> seen;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string prefix = "sources[" + std::to_string(i) + "].";
    sources[i].validate(prefix);
    if (!b.contains(sources[i].mode)) {
      throw ConfigError(prefix + "mode", "source mode " + mode_text(sources[i].mode) + " is outside the basis");
    }
    if (!seen.insert(sources[i].mode).second) {
      throw ConfigError(prefix + "mode", "more than one source squeezes mode " + mode_text(sources[i].mode));
    }
  }
  try {
    distortion.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("distortion." + e.field(), e.what());
  }
  if (!b.contains(lo_mode)) throw ConfigError("lo_mode", "local oscillator mode is outside the basis");
  if (!(detection_loss >= 0.0 && detection_loss < 1.0)) {
    throw ConfigError("detection_loss", "detection loss must lie in [0, 1)");
  }
  if (sweep_samples < 2) throw ConfigError("sweep_samples", "a sweep needs at least 2 samples");
}

BeamDistortion to_distortion(const PhysicalMisalignment& geometry) {
  if (!(geometry.waist_m > 0.0) || !(geometry.wavelength_m > 0.0)) {
    throw ConfigError("waist_m", "waist and wavelength must be positive");
  }
  const double divergence = geometry.wavelength_m / (std::numbers::pi * geometry.waist_m);
  BeamDistortion d;
  d.dx = geometry.dx_m / geometry.waist_m;
  d.dy = geometry.dy_m / geometry.waist_m;
  d.gx = geometry.tilt_x_rad / divergence;
  d.gy = geometry.tilt_y_rad / divergence;
  return d;
}

QuadratureState build_state(const ScenarioConfig& config) {
  config.validate();
  return build_state(config, coupling_matrix(config.basis(), config.distortion));
}

QuadratureState build_state(const ScenarioConfig& config, const CouplingMatrix& coupling) {
  config.validate();
  const ModeBasis basis = config.basis();
  if (!(coupling.basis == basis)) {
    throw PhysicsError("dimension-mismatch", "coupling matrix basis does not match the scenario basis");
  }
  QuadratureState state = vacuum(basis.size());
  for (const auto& source : config.sources) state = apply_squeeze(state, basis, source);
  state = apply_basis_change(state, coupling);
  if (config.detection_loss > 0.0) {
    state = apply_loss(state, LossChannel::uniform(basis.size(), config.detection_loss));
  }
  return state;
}

std::vector<std::string> preset_names() {
  return {"aligned", "misaligned", "compensated", "hom-only-aligned", "hom-only-misaligned"};
}

ScenarioConfig named_preset(const std::string& name) {
  ScenarioConfig c = preset_base();
  if (name == "aligned") {
    c.sources = {s00()};
  } else if (name == "misaligned") {
    c.sources = {s00()};
    c.distortion = vertical_misalignment();
  } else if (name == "compensated") {
    c.sources = {s00(), s01()};
    c.distortion = vertical_misalignment();
  } else if (name == "hom-only-aligned") {
    c.sources = {s01()};
  } else if (name == "hom-only-misaligned") {
    c.sources = {s01()};
    c.distortion = vertical_misalignment();
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> preset_provenance(const std::string& name) {
  const ScenarioConfig c = named_preset(name);
  std::vector<std::pair<std::string, std::string>> notes;
  notes.emplace_back("basis_cutoff", "default truncation, covers modes up to total order 6");
  for (std::size_t i = 0; i < c.sources.size(); ++i) {
    const std::string key = "sources[" + std::to_string(i) + "]";
    if (c.sources[i].mode == ModeIndex{0, 0}) {
      notes.emplace_back(key, "TEM00 squeezer, 5.8 dB measured with no displacement");
    } else {
      notes.emplace_back(key, "TEM01 squeezer, 4.8 dB measured with a TEM01 local oscillator");
    }
    notes.emplace_back(key + ".angle_rad", "squeezed quadrature at 0 rad; relative phase matched");
    notes.emplace_back(key + ".injection_loss", "0: sources taken as pure, anti-squeezing not reported");
  }
  if (c.distortion.dy != 0.0) {
    notes.emplace_back("distortion.dy", "vertical displacement putting 7% of the TEM00 power into "
                                        "higher-order modes, dy = sqrt(-ln(0.93)) waist radii");
  } else {
    notes.emplace_back("distortion", "identity: signal beam matched to the local oscillator");
  }
  notes.emplace_back("lo_mode", "TEM00 local oscillator");
  notes.emplace_back("detection_loss", "0: detection inefficiency not separated from other losses");
  return notes;
}

CompensationObjective::CompensationObjective(const ScenarioConfig& config)
    : CompensationObjective(config, coupling_matrix(config.basis(), config.distortion)) {}

CompensationObjective::CompensationObjective(const ScenarioConfig& config, const CouplingMatrix& coupling)
    : basis_(config.basis()), detection_loss_(config.detection_loss) {
  config.validate();
  const LocalOscillator lo = config.local_oscillator();
  const Eigen::MatrixXd s = symplectic_embedding(coupling.entries);
  Eigen::Matrix<double, Eigen::Dynamic, 2> p(s.rows(), 2);
  p.col(0) = projection_vector(lo.coeffs, 0.0);
  p.col(1) = projection_vector(lo.coeffs, 0.5 * std::numbers::pi);
  lo_in_source_ = s.transpose() * p;

  fixed_ = Eigen::Matrix2d::Identity();
  for (const auto& source : config.sources) {
    fixed_ += contribution(*basis_.index_of(source.mode), source);
  }
}

Eigen::Matrix2d CompensationObjective::contribution(std::size_t mode_index, const SqueezerSpec& spec) const {
  const auto n = static_cast<Eigen::Index>(basis_.size());
  const auto k = static_cast<Eigen::Index>(mode_index);
  Eigen::Matrix2d qk;
  qk.row(0) = lo_in_source_.row(k);
  qk.row(1) = lo_in_source_.row(n + k);
  const Eigen::Matrix2d excess = source_block(spec) - Eigen::Matrix2d::Identity();
  return (1.0 - detection_loss_) * qk.transpose() * excess * qk;
}

double CompensationObjective::operator()(const std::vector<CompensatingSource>& extra) const {
  Eigen::Matrix2d m = fixed_;
  for (const auto& s : extra) {
    const auto index = basis_.index_of(s.mode);
    if (!index) throw ConfigError("modes", "compensating mode " + mode_text(s.mode) + " is outside the basis");
    m += contribution(*index, pure_squeezer(s));
  }
  return min_eigenvalue(m);
}

CompensationPlan optimize_compensation(const ScenarioConfig& config,
                                       const std::vector<ModeIndex>& compensating_modes,
                                       const OptimizerOptions& options) {
  config.validate();
  const ModeBasis basis = config.basis();
  std::set<ModeIndex> taken;
  for (const auto& s : config.sources) taken.insert(s.mode);
  for (const auto& mode : compensating_modes) {
    if (!basis.contains(mode)) {
      throw ConfigError("modes", "compensating mode " + mode_text(mode) + " is outside the basis");
    }
    if (!taken.insert(mode).second) {
      throw ConfigError("modes", "compensating mode " + mode_text(mode) + " already carries a source");
    }
  }

  const CompensationObjective objective(config);
  std::vector<CompensatingSource> params;
  for (const auto& mode : compensating_modes) params.push_back({mode, 0.0, 0.0});

  CompensationPlan plan;
  plan.baseline_variance = objective(params);
  double best = plan.baseline_variance;

  const int db_points = static_cast<int>(std::floor(options.max_db / options.db_step + 1e-9)) + 1;
  const double angle_step = std::numbers::pi / options.angle_points;

  // Coarse grid per mode; strict improvement keeps the lowest dB, then the
  // lowest angle, among ties.
  for (auto& p : params) {
    const CompensatingSource start = p;
    CompensatingSource chosen = start;
    double chosen_value = best;
    for (int i = 0; i < db_points; ++i) {
      for (int j = 0; j < options.angle_points; ++j) {
        p.squeeze_db = i * options.db_step;
        p.angle = j * angle_step;
        const double v = objective(params);
        if (v < chosen_value) {
          chosen_value = v;
          chosen = p;
        }
      }
    }
    p = chosen;
    best = chosen_value;
  }

  // Golden-section refinement, one coordinate at a time.
  for (plan.cycles = 0; plan.cycles < options.max_cycles;) {
    ++plan.cycles;
    const double cycle_start = best;
    for (auto& p : params) {
      {
        const double centre = p.angle;
        const auto line = golden_section_minimize(
            [&](double a) {
              p.angle = a;
              return objective(params);
            },
            centre - angle_step, centre + angle_step);
        p.angle = centre;
        if (line.value < best) {
          best = line.value;
          p.angle = wrap_angle(line.x);
        }
      }
      {
        const double centre = p.squeeze_db;
        const double lo = std::max(0.0, centre - options.db_step);
        const double hi = std::min(options.max_db, centre + options.db_step);
        const auto line = golden_section_minimize(
            [&](double db) {
              p.squeeze_db = db;
              return objective(params);
            },
            lo, hi);
        p.squeeze_db = centre;
        if (line.value < best) {
          best = line.value;
          p.squeeze_db = line.x;
        }
      }
    }
    if (cycle_start - best < options.tolerance) break;
  }

  plan.sources = params;
  plan.achieved_variance = best;
  plan.baseline_db = variance_to_db(plan.baseline_variance);
  plan.achieved_db = variance_to_db(plan.achieved_variance);
  return plan;
}

ScenarioConfig with_compensation(const ScenarioConfig& config, const CompensationPlan& plan) {
  ScenarioConfig out = config;
  for (const auto& s : plan.sources) out.sources.push_back(pure_squeezer(s));
  return out;
}

ScenarioReport run_report(const ScenarioConfig& config) {
  config.validate();
  const CouplingMatrix coupling = coupling_matrix(config.basis(), config.distortion);
  const QuadratureState state = build_state(config, coupling);
  const LocalOscillator lo = config.local_oscillator();

  ScenarioReport report;
  report.modes = mode_power_report(coupling);
  report.trace = phase_sweep(state, lo.coeffs, config.sweep_samples);
  report.extrema = extract_sqz_antisqz(report.trace);
  report.squeezing_db = variance_to_db(report.extrema.v_min);
  report.antisqueezing_db = variance_to_db(report.extrema.v_max);

  const double v_min = report.extrema.v_min;
  const double v_max = report.extrema.v_max;
  if (report.extrema.degenerate && std::abs(v_min - 1.0) <= kShotNoiseSlack) {
    report.loss_status = "degenerate";
    report.loss = estimate_loss(1.0, 1.0);
  } else if (v_min < 1.0 - kShotNoiseSlack && v_max > 1.0 + kShotNoiseSlack) {
    report.loss_status = "ok";
    report.loss = estimate_loss(v_min, v_max);
    report.loss_sensitivity = loss_sensitivity(v_min, v_max);
  } else {
    report.loss_status = "not-applicable";
  }
  return report;
}

}  // namespace hgsqz
