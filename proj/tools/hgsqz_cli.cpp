// hgsqz: command-line front end for the squeezed-mode mismatch simulator.
//
// Exit codes: 0 success, 1 physics/domain error, 2 usage/config error.
// Data goes to stdout (or --out); error objects go to stderr as JSON.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hgsqz/error.hpp"
#include "hgsqz/json_io.hpp"
#include "hgsqz/readout.hpp"
#include "hgsqz/scenario.hpp"

namespace {

using hgsqz::ojson;

constexpr const char* kVersion = "1.0.0";

struct Source {
  std::string config_path;
  std::string preset;
};

void add_source_options(CLI::App* cmd, Source& src) {
  auto* cfg = cmd->add_option("--config", src.config_path, "Scenario config (JSON)");
  auto* pre = cmd->add_option("--preset", src.preset, "Named preset instead of a config file");
  cfg->excludes(pre);
}

hgsqz::ScenarioConfig resolve(const Source& src) {
  if (!src.config_path.empty()) return hgsqz::load_config(src.config_path);
  if (!src.preset.empty()) return hgsqz::named_preset(src.preset);
  throw hgsqz::ConfigError("config", "one of --config or --preset is required");
}

ojson meta_block() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  ojson meta;
  meta["tool"] = "hgsqz";
  meta["version"] = kVersion;
  meta["generated_utc"] = stamp;
  return meta;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw hgsqz::ConfigError("out", "cannot open output file: " + out_path);
  out << text;
}

void emit_json(ojson doc, const std::string& out_path, bool meta) {
  if (meta) doc["meta"] = meta_block();
  emit(doc.dump(2) + "\n", out_path);
}

std::vector<hgsqz::ModeIndex> parse_modes(const std::string& text) {
  std::vector<hgsqz::ModeIndex> modes;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.empty()) continue;
    const auto comma = item.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(item);
      std::size_t used_m = 0, used_n = 0;
      const std::string ms = item.substr(0, comma);
      const std::string ns = item.substr(comma + 1);
      const int m = std::stoi(ms, &used_m);
      const int n = std::stoi(ns, &used_n);
      if (used_m != ms.size() || used_n != ns.size() || m < 0 || n < 0) throw std::invalid_argument(item);
      modes.push_back({m, n});
    } catch (const std::exception&) {
      throw hgsqz::ConfigError("modes", "cannot parse mode '" + item + "', expected m,n");
    }
  }
  if (modes.empty()) throw hgsqz::ConfigError("modes", "no compensating modes given");
  return modes;
}

void print_error(const std::string& kind, const std::string& message, const std::string& field, int code) {
  ojson err;
  err["kind"] = kind;
  err["message"] = message;
  if (!field.empty()) err["field"] = field;
  err["exit_code"] = code;
  std::cerr << ojson{{"error", err}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Squeezed higher-order-mode compensation of mode-mismatch loss"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  bool meta = false;
  app.add_flag("--meta", meta, "Attach run metadata (timestamp, version) to JSON output");

  Source sim_src;
  std::string sim_out;
  bool sim_trace = false;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and emit its report as JSON");
  add_source_options(simulate, sim_src);
  simulate->add_option("--out", sim_out, "Output file (default stdout)");
  simulate->add_flag("--trace", sim_trace, "Include the full phase sweep in the report");

  Source sweep_src;
  std::string sweep_out;
  std::string sweep_format = "csv";
  std::optional<std::size_t> sweep_samples;
  auto* sweep = app.add_subcommand("sweep", "Sweep the readout phase and emit the variance trace");
  add_source_options(sweep, sweep_src);
  sweep->add_option("--samples", sweep_samples, "Number of phase samples over [0, 2pi)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1'000'000}));
  sweep->add_option("--out", sweep_out, "Output file (default stdout)");
  sweep->add_option("--format", sweep_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  Source mr_src;
  std::string mr_out;
  auto* mode_report = app.add_subcommand("mode-report", "Mode content of the distorted fundamental beam");
  add_source_options(mode_report, mr_src);
  mode_report->add_option("--out", mr_out, "Output file (default stdout)");

  double sqz_db = 0.0;
  double antisqz_db = 0.0;
  auto* est = app.add_subcommand("estimate-loss", "Infer (loss, squeeze factor) from measured dB levels");
  est->add_option("--sqz-db", sqz_db, "Squeezed quadrature level in dB (negative below shot noise)")->required();
  est->add_option("--antisqz-db", antisqz_db, "Anti-squeezed quadrature level in dB")->required();

  Source opt_src;
  std::string opt_modes;
  std::string opt_out;
  hgsqz::OptimizerOptions opt_options;
  auto* optimize = app.add_subcommand("optimize", "Optimise extra squeezers in the given modes");
  add_source_options(optimize, opt_src);
  optimize->add_option("--modes", opt_modes, "Compensating modes, e.g. \"0,1\" or \"2,0;0,2\"")->required();
  optimize->add_option("--max-db", opt_options.max_db, "Upper bound on compensating squeezing")
      ->check(CLI::PositiveNumber);
  optimize->add_option("--out", opt_out, "Output file (default stdout)");

  std::string preset_name;
  std::string preset_out;
  bool emit_config = false;
  auto* preset = app.add_subcommand("preset", "Run a named preset (or print its config)");
  preset->add_option("name", preset_name, "Preset name")->required();
  preset->add_flag("--emit-config", emit_config, "Print the preset config with provenance notes");
  preset->add_option("--out", preset_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what(), "", 2);
    return 2;
  }

  try {
    if (*simulate) {
      const auto config = resolve(sim_src);
      emit_json(hgsqz::scenario_report_to_json(hgsqz::run_report(config), config, sim_trace), sim_out, meta);
    } else if (*sweep) {
      auto config = resolve(sweep_src);
      if (sweep_samples) config.sweep_samples = *sweep_samples;
      const auto state = hgsqz::build_state(config);
      const auto trace = hgsqz::phase_sweep(state, config.local_oscillator().coeffs, config.sweep_samples);
      if (sweep_format == "json") {
        ojson doc;
        doc["phase_rad"] = trace.phases;
        doc["variance"] = trace.variances;
        doc["variance_db"] = trace.variances_db;
        emit_json(std::move(doc), sweep_out, meta);
      } else {
        std::ostringstream csv;
        hgsqz::write_trace_csv(csv, trace);
        emit(csv.str(), sweep_out);
        if (meta) std::cerr << meta_block().dump() << "\n";
      }
    } else if (*mode_report) {
      const auto config = resolve(mr_src);
      auto doc = hgsqz::mode_report_to_json(hgsqz::mode_power_report(config.distortion, config.basis()));
      emit_json(std::move(doc), mr_out, meta);
    } else if (*est) {
      const double v_sqz = hgsqz::db_to_variance(sqz_db);
      const double v_anti = hgsqz::db_to_variance(antisqz_db);
      const auto estimate = hgsqz::estimate_loss(v_sqz, v_anti);
      ojson doc = hgsqz::loss_estimate_to_json(estimate);
      doc["v_sqz"] = v_sqz;
      doc["v_anti"] = v_anti;
      if (!estimate.degenerate) {
        const auto s = hgsqz::loss_sensitivity(v_sqz, v_anti);
        doc["sensitivity"] = {{"d_eps_d_vsqz", s.d_eps_d_vsqz}, {"d_eps_d_vanti", s.d_eps_d_vanti}};
      }
      emit_json(std::move(doc), "", meta);
    } else if (*optimize) {
      const auto config = resolve(opt_src);
      const auto plan = hgsqz::optimize_compensation(config, parse_modes(opt_modes), opt_options);
      emit_json(hgsqz::compensation_plan_to_json(plan), opt_out, meta);
    } else if (*preset) {
      const auto config = hgsqz::named_preset(preset_name);
      if (emit_config) {
        ojson doc;
        doc["config"] = hgsqz::config_to_json(config);
        ojson notes;
        for (const auto& [field, note] : hgsqz::preset_provenance(preset_name)) notes[field] = note;
        doc["provenance"] = std::move(notes);
        emit_json(std::move(doc), preset_out, meta);
      } else {
        emit_json(hgsqz::scenario_report_to_json(hgsqz::run_report(config), config), preset_out, meta);
      }
    }
  } catch (const hgsqz::ConfigError& e) {
    print_error("config", e.what(), e.field(), 2);
    return 2;
  } catch (const hgsqz::PhysicsError& e) {
    print_error(e.kind(), e.what(), "", 1);
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what(), "", 1);
    return 1;
  }
  return 0;
}
