#pragma once

// Experiment orchestration: squeezed sources in orthogonal spatial modes of
// the signal beam, a geometric distortion between signal and local
// oscillator, and homodyne readout in the local-oscillator frame.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hgsqz/gaussian.hpp"
#include "hgsqz/modes.hpp"
#include "hgsqz/readout.hpp"

namespace hgsqz {

struct ScenarioConfig {
  int basis_cutoff = 6;
  std::vector<SqueezerSpec> sources;
  BeamDistortion distortion;
  ModeIndex lo_mode{0, 0};
  double detection_loss = 0.0;
  std::size_t sweep_samples = kDefaultSweepSamples;

  ModeBasis basis() const { return ModeBasis(basis_cutoff); }
  LocalOscillator local_oscillator() const;
  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Absolute misalignment geometry, converted to the dimensionless distortion.
struct PhysicalMisalignment {
  double dx_m = 0.0;
  double dy_m = 0.0;
  double tilt_x_rad = 0.0;
  double tilt_y_rad = 0.0;
  double waist_m = 1e-3;
  double wavelength_m = 1064e-9;
};

BeamDistortion to_distortion(const PhysicalMisalignment& geometry);

// vacuum -> per-source squeeze (with injection loss) -> coupling into the LO
// frame -> uniform detection loss.
QuadratureState build_state(const ScenarioConfig& config);
QuadratureState build_state(const ScenarioConfig& config, const CouplingMatrix& coupling);

// Presets: aligned, misaligned, compensated, hom-only-aligned,
// hom-only-misaligned. Throws ConfigError for unknown names.
ScenarioConfig named_preset(const std::string& name);
std::vector<std::string> preset_names();
// (field, note) pairs documenting where each preset number comes from.
std::vector<std::pair<std::string, std::string>> preset_provenance(const std::string& name);

// Higher-order power the `misaligned` preset puts into the signal beam.
inline constexpr double kMisalignmentPower = 0.07;

struct CompensatingSource {
  ModeIndex mode;
  double squeeze_db = 0.0;
  double angle = 0.0;
};

struct CompensationPlan {
  std::vector<CompensatingSource> sources;
  double baseline_variance = 1.0;
  double baseline_db = 0.0;
  double achieved_variance = 1.0;
  double achieved_db = 0.0;
  int cycles = 0;
};

struct OptimizerOptions {
  double max_db = 15.0;
  double db_step = 0.5;
  int angle_points = 64;  // over [0, pi)
  int max_cycles = 100;
  double tolerance = 1e-10;
};

// Squeezed-quadrature variance seen by the LO, minimised over readout phase,
// with extra pure squeezers added. Evaluated on the LO projection only, so
// repeated calls cost O(number of sources).
class CompensationObjective {
 public:
  explicit CompensationObjective(const ScenarioConfig& config);
  CompensationObjective(const ScenarioConfig& config, const CouplingMatrix& coupling);

  double operator()(const std::vector<CompensatingSource>& extra) const;
  double baseline() const { return (*this)({}); }

 private:
  Eigen::Matrix2d contribution(std::size_t mode_index, const SqueezerSpec& spec) const;

  ModeBasis basis_;
  double detection_loss_;
  Eigen::Matrix<double, Eigen::Dynamic, 2> lo_in_source_;  // S^T [p(0), p(pi/2)]
  Eigen::Matrix2d fixed_;
};

CompensationPlan optimize_compensation(const ScenarioConfig& config,
                                       const std::vector<ModeIndex>& compensating_modes,
                                       const OptimizerOptions& options = {});

// The config with the plan's sources appended as pure squeezers.
ScenarioConfig with_compensation(const ScenarioConfig& config, const CompensationPlan& plan);

struct ScenarioReport {
  ModePowerReport modes;
  VarianceTrace trace;
  SqueezingExtraction extrema;
  double squeezing_db = 0.0;      // negative below shot noise
  double antisqueezing_db = 0.0;
  // "ok", "degenerate" (flat trace) or "not-applicable" (the extrema do not
  // straddle shot noise, so the pure-plus-loss model does not apply).
  std::string loss_status;
  std::optional<LossEstimate> loss;
  std::optional<LossSensitivity> loss_sensitivity;
};

ScenarioReport run_report(const ScenarioConfig& config);

}  // namespace hgsqz
