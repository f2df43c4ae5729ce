#include "hgsqz/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hgsqz/error.hpp"

namespace hgsqz {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string& key = it.key();
    if (!allowed.count(key)) {
      throw ConfigError(path + key, "unknown key '" + path + key + "'");
    }
  }
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "field '" + field + "' must be a number");
  return v.get<double>();
}

long long get_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "field '" + field + "' must be an integer");
  return v.get<long long>();
}

ModeIndex get_mode(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ConfigError(field, "field '" + field + "' must be a pair of integers [m, n]");
  }
  const long long m = v[0].get<long long>();
  const long long n = v[1].get<long long>();
  if (m < 0 || n < 0 || m > kMaxHermiteOrder || n > kMaxHermiteOrder) {
    throw ConfigError(field, "field '" + field + "' must hold orders in [0, " +
                                 std::to_string(kMaxHermiteOrder) + "]");
  }
  return {static_cast<int>(m), static_cast<int>(n)};
}

SqueezerSpec parse_source(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "field '" + path + "' must be an object");
  const std::string prefix = path + ".";
  reject_unknown_keys(v, {"mode", "squeeze_db", "angle_rad", "injection_loss", "antisqueeze_db"}, prefix);
  if (!v.contains("mode")) throw ConfigError(prefix + "mode", "missing required field '" + prefix + "mode'");
  if (!v.contains("squeeze_db")) {
    throw ConfigError(prefix + "squeeze_db", "missing required field '" + prefix + "squeeze_db'");
  }
  SqueezerSpec s;
  s.mode = get_mode(v.at("mode"), prefix + "mode");
  s.squeeze_db = get_number(v.at("squeeze_db"), prefix + "squeeze_db");
  if (v.contains("angle_rad")) s.angle = get_number(v.at("angle_rad"), prefix + "angle_rad");
  if (v.contains("injection_loss")) {
    s.injection_loss = get_number(v.at("injection_loss"), prefix + "injection_loss");
  }
  if (v.contains("antisqueeze_db")) {
    s.antisqueeze_db = get_number(v.at("antisqueeze_db"), prefix + "antisqueeze_db");
  }
  return s;
}

BeamDistortion parse_distortion(const json& v) {
  if (!v.is_object()) throw ConfigError("distortion", "field 'distortion' must be an object");
  reject_unknown_keys(v, {"dx", "dy", "gx", "gy", "etax", "etay", "zetax", "zetay"}, "distortion.");
  BeamDistortion d;
  const auto read = [&](const char* key, double& out) {
    if (v.contains(key)) out = get_number(v.at(key), std::string("distortion.") + key);
  };
  read("dx", d.dx);
  read("dy", d.dy);
  read("gx", d.gx);
  read("gy", d.gy);
  read("etax", d.etax);
  read("etay", d.etay);
  read("zetax", d.zetax);
  read("zetay", d.zetay);
  return d;
}

ojson mode_json(ModeIndex m) { return ojson::array({m.m, m.n}); }

ojson sensitivity_json(const LossSensitivity& s) {
  ojson out;
  out["d_eps_d_vsqz"] = s.d_eps_d_vsqz;
  out["d_eps_d_vanti"] = s.d_eps_d_vanti;
  return out;
}

}  // namespace

ScenarioConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown_keys(doc, {"basis_cutoff", "sources", "distortion", "lo_mode", "detection_loss", "sweep_samples"},
                      "");
  if (!doc.contains("sources")) throw ConfigError("sources", "missing required field 'sources'");

  ScenarioConfig c;
  if (doc.contains("basis_cutoff")) {
    const long long cutoff = get_integer(doc.at("basis_cutoff"), "basis_cutoff");
    if (cutoff < 0 || cutoff > kMaxHermiteOrder) {
      throw ConfigError("basis_cutoff",
                        "field 'basis_cutoff' must lie in [0, " + std::to_string(kMaxHermiteOrder) + "]");
    }
    c.basis_cutoff = static_cast<int>(cutoff);
  }
  const json& sources = doc.at("sources");
  if (!sources.is_array()) throw ConfigError("sources", "field 'sources' must be an array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    c.sources.push_back(parse_source(sources[i], "sources[" + std::to_string(i) + "]"));
  }
  if (doc.contains("distortion")) c.distortion = parse_distortion(doc.at("distortion"));
  if (doc.contains("lo_mode")) c.lo_mode = get_mode(doc.at("lo_mode"), "lo_mode");
  if (doc.contains("detection_loss")) c.detection_loss = get_number(doc.at("detection_loss"), "detection_loss");
  if (doc.contains("sweep_samples")) {
    const long long n = get_integer(doc.at("sweep_samples"), "sweep_samples");
    if (n < 2 || n > 1'000'000) throw ConfigError("sweep_samples", "field 'sweep_samples' must lie in [2, 1000000]");
    c.sweep_samples = static_cast<std::size_t>(n);
  }
  c.validate();
  return c;
}

ScenarioConfig config_from_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("", "config is not valid JSON (line " + std::to_string(line) + ", column " +
                              std::to_string(column) + ")");
  }
  return config_from_json(doc);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "config not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

ojson config_to_json(const ScenarioConfig& config) {
  ojson out;
  out["basis_cutoff"] = config.basis_cutoff;
  out["sources"] = ojson::array();
  for (const auto& s : config.sources) {
    ojson src;
    src["mode"] = mode_json(s.mode);
    src["squeeze_db"] = s.squeeze_db;
    src["angle_rad"] = s.angle;
    src["injection_loss"] = s.injection_loss;
    if (s.antisqueeze_db) src["antisqueeze_db"] = *s.antisqueeze_db;
    out["sources"].push_back(std::move(src));
  }
  const BeamDistortion& d = config.distortion;
  out["distortion"] = {{"dx", d.dx},     {"dy", d.dy},     {"gx", d.gx},       {"gy", d.gy},
                       {"etax", d.etax}, {"etay", d.etay}, {"zetax", d.zetax}, {"zetay", d.zetay}};
  out["lo_mode"] = mode_json(config.lo_mode);
  out["detection_loss"] = config.detection_loss;
  out["sweep_samples"] = config.sweep_samples;
  return out;
}

ojson mode_report_to_json(const ModePowerReport& report) {
  ojson out;
  out["modes"] = ojson::array();
  for (const auto& mp : report.modes) {
    ojson entry;
    entry["mode"] = mode_json(mp.mode);
    entry["power"] = mp.power;
    out["modes"].push_back(std::move(entry));
  }
  out["leakage"] = report.leakage;
  out["fundamental_power"] = report.fundamental_power();
  out["higher_order_power"] = report.higher_order_power();
  return out;
}

ojson loss_estimate_to_json(const LossEstimate& estimate) {
  ojson out;
  out["epsilon"] = estimate.epsilon ? ojson(*estimate.epsilon) : ojson(nullptr);
  out["r"] = estimate.r;
  out["degenerate"] = estimate.degenerate;
  return out;
}

ojson compensation_plan_to_json(const CompensationPlan& plan) {
  ojson out;
  out["compensating_sources"] = ojson::array();
  for (const auto& s : plan.sources) {
    ojson src;
    src["mode"] = mode_json(s.mode);
    src["squeeze_db"] = s.squeeze_db;
    src["angle_rad"] = s.angle;
    out["compensating_sources"].push_back(std::move(src));
  }
  out["baseline_variance"] = plan.baseline_variance;
  out["baseline_db"] = plan.baseline_db;
  out["achieved_variance"] = plan.achieved_variance;
  out["achieved_db"] = plan.achieved_db;
  out["improvement_db"] = plan.baseline_db - plan.achieved_db;
  out["cycles"] = plan.cycles;
  return out;
}

ojson scenario_report_to_json(const ScenarioReport& report, const ScenarioConfig& config, bool include_trace) {
  ojson out;
  out["squeezing_db"] = report.squeezing_db;
  out["antisqueezing_db"] = report.antisqueezing_db;
  out["variance_min"] = report.extrema.v_min;
  out["variance_max"] = report.extrema.v_max;
  out["phase_at_min_rad"] = report.extrema.phase_min;
  out["trace_degenerate"] = report.extrema.degenerate;

  ojson loss;
  loss["status"] = report.loss_status;
  if (report.loss) loss.update(loss_estimate_to_json(*report.loss));
  if (report.loss_sensitivity) loss["sensitivity"] = sensitivity_json(*report.loss_sensitivity);
  out["loss_estimate"] = std::move(loss);

  out["mode_report"] = mode_report_to_json(report.modes);
  out["config"] = config_to_json(config);
  if (include_trace) {
    out["trace"] = {{"phase_rad", report.trace.phases}, {"variance", report.trace.variances},
                    {"variance_db", report.trace.variances_db}};
  }
  return out;
}

}  // namespace hgsqz
