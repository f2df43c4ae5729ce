#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hgsqz/error.hpp"
#include "hgsqz/json_io.hpp"
#include "hgsqz/scenario.hpp"

using namespace hgsqz;

namespace {

double min_db(const ScenarioConfig& c) {
  return variance_to_db(quadrature_extrema(build_state(c), c.local_oscillator().coeffs).v_min);
}

std::string config_error_field(const std::string& text) {
  try {
    config_from_text(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("build state") {
  ScenarioConfig empty;
  empty.distortion.dy = 0.4;
  empty.distortion.etax = 1.3;
  const auto st = build_state(empty);
  CHECK((st.cov - Eigen::MatrixXd::Identity(st.cov.rows(), st.cov.cols())).cwiseAbs().maxCoeff() <= 1e-12);

  ScenarioConfig one;
  one.sources.push_back({{0, 0}, 5.8});
  CHECK(min_db(one) == doctest::Approx(-5.8).epsilon(1e-12));

  one.detection_loss = 0.07;
  CHECK(min_db(one) == doctest::Approx(variance_to_db(0.93 * db_to_variance(-5.8) + 0.07)).epsilon(1e-12));
}

TEST_CASE("presets") {
  CHECK(preset_names().size() == 5);
  CHECK(min_db(named_preset("aligned")) == doctest::Approx(-5.80).epsilon(1e-12));
  // (1 - 0.07) V00 + 0.07 with V00 = 10^-0.58.
  CHECK(min_db(named_preset("misaligned")) == doctest::Approx(variance_to_db(0.93 * std::pow(10.0, -0.58) + 0.07)).epsilon(1e-9));
  CHECK(std::abs(min_db(named_preset("misaligned")) + 5.02) <= 0.005);
  CHECK(std::abs(min_db(named_preset("compensated")) + 5.695) <= 0.005);
  CHECK_THROWS_AS(named_preset("nope"), ConfigError);
  for (const auto& name : preset_names()) {
    CHECK_FALSE(preset_provenance(name).empty());
    named_preset(name).validate();
  }
}

TEST_CASE("run report") {
  const auto aligned = run_report(named_preset("aligned"));
  CHECK(aligned.loss_status == "ok");
  REQUIRE(aligned.loss);
  CHECK(std::abs(*aligned.loss->epsilon) <= 1e-9);

  const auto mis = run_report(named_preset("misaligned"));
  CHECK(mis.modes.higher_order_power() == doctest::Approx(0.07).epsilon(1e-9));
  REQUIRE(mis.loss);
  CHECK(*mis.loss->epsilon == doctest::Approx(0.07).epsilon(1e-6));

  const auto flat = run_report(named_preset("hom-only-aligned"));
  CHECK(flat.loss_status == "degenerate");
  CHECK(flat.extrema.degenerate);
  for (double v : flat.trace.variances) CHECK(std::abs(v - 1.0) <= 1e-9);

  const auto wiggle = run_report(named_preset("hom-only-misaligned"));
  CHECK(wiggle.extrema.v_min < 1.0);
  CHECK(wiggle.extrema.v_max > 1.0);
}

TEST_CASE("config validation") {
  ScenarioConfig c;
  c.sources = {{{0, 0}, 3.0}, {{0, 0}, 2.0}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sources = {{{7, 0}, 3.0}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sources = {{{0, 0}, 3.0}};
  c.detection_loss = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.detection_loss = 0.0;
  c.lo_mode = {9, 9};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("physical geometry conversion") {
  PhysicalMisalignment g;
  g.dy_m = 0.5e-3;
  g.tilt_x_rad = 1064e-9 / (std::numbers::pi * 1e-3);
  const auto d = to_distortion(g);
  CHECK(d.dy == doctest::Approx(0.5));
  CHECK(d.gx == doctest::Approx(1.0));
}

TEST_CASE("fast objective agrees with the full state") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    ScenarioConfig c;
    c.basis_cutoff = 4;
    c.sources.push_back({{0, 0}, 8.0 * u(rng), std::numbers::pi * u(rng), 0.2 * u(rng)});
    c.distortion = {0.5 * u(rng), 0.5 * u(rng), 0.2 * u(rng), 0.2 * u(rng), 0.8 + 0.4 * u(rng), 0.8 + 0.4 * u(rng),
                    0.2 * u(rng), 0.2 * u(rng)};
    c.detection_loss = 0.2 * u(rng);
    const std::vector<CompensatingSource> extra{{{0, 1}, 10.0 * u(rng), std::numbers::pi * u(rng)},
                                                {{2, 0}, 10.0 * u(rng), std::numbers::pi * u(rng)}};
    const CompensationObjective f(c);
    ScenarioConfig full = c;
    for (const auto& e : extra) full.sources.push_back({e.mode, e.squeeze_db, e.angle});
    const double want = quadrature_extrema(build_state(full), full.local_oscillator().coeffs).v_min;
    CHECK(f(extra) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("optimizer") {
  ScenarioConfig aligned = named_preset("aligned");
  const auto none = optimize_compensation(aligned, {{0, 1}});
  CHECK(none.sources.at(0).squeeze_db == 0.0);
  CHECK(none.achieved_variance == doctest::Approx(none.baseline_variance).epsilon(1e-14));

  const auto mis = named_preset("misaligned");
  OptimizerOptions capped;
  capped.max_db = 5.8;
  const auto plan = optimize_compensation(mis, {{0, 1}}, capped);
  CHECK(plan.sources.at(0).squeeze_db == doctest::Approx(5.8).epsilon(1e-6));
  CHECK(std::abs(std::remainder(plan.sources.at(0).angle - mis.sources.at(0).angle, std::numbers::pi)) <= 1e-4);
  CHECK(std::abs(plan.achieved_db + 5.77) <= 0.005);

  const auto open = optimize_compensation(mis, {{0, 1}});
  CHECK(open.achieved_variance <= plan.achieved_variance);

  // Anti-squeezing injected in the coupled mode is worse than vacuum.
  const CompensationObjective f(mis);
  auto turned = plan.sources;
  turned[0].angle += std::numbers::pi / 2.0;
  CHECK(f(turned) >= plan.baseline_variance);

  ScenarioConfig w;
  w.sources.push_back({{0, 0}, 5.8});
  w.distortion.etax = w.distortion.etay = 1.1;
  const auto wp = optimize_compensation(w, {{2, 0}, {0, 2}});
  CHECK(wp.achieved_db <= -5.8 + 0.05);

  CHECK_THROWS_AS(optimize_compensation(mis, {{0, 0}}), ConfigError);
  CHECK_THROWS_AS(optimize_compensation(mis, {{9, 0}}), ConfigError);

  const auto with = with_compensation(mis, plan);
  CHECK(with.sources.size() == 2);
  CHECK(min_db(with) == doctest::Approx(plan.achieved_db).epsilon(1e-10));
}

TEST_CASE("compensation never hurts") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OptimizerOptions quick;
  quick.angle_points = 16;
  quick.db_step = 1.5;
  for (int t = 0; t < 10; ++t) {
    ScenarioConfig c;
    c.basis_cutoff = 3;
    c.sources.push_back({{0, 0}, 10.0 * u(rng), std::numbers::pi * u(rng), 0.3 * u(rng)});
    c.distortion = {u(rng) - 0.5, u(rng) - 0.5, 0.4 * u(rng), 0.4 * u(rng), 0.8 + 0.5 * u(rng), 0.8 + 0.5 * u(rng),
                    0.3 * u(rng), 0.0};
    c.detection_loss = 0.3 * u(rng);
    const auto plan = optimize_compensation(c, {{1, 0}, {0, 1}}, quick);
    CHECK(plan.achieved_variance <= plan.baseline_variance + 1e-12);
  }
}

TEST_CASE("config json") {
  const auto c = config_from_text(R"({"sources": [{"mode": [0, 1], "squeeze_db": 4.8, "angle_rad": 0.5}],
                                      "distortion": {"dy": 0.2}, "detection_loss": 0.05})");
  CHECK(c.basis_cutoff == 6);
  CHECK(c.sources.at(0).mode == ModeIndex{0, 1});
  CHECK(c.sources.at(0).angle == 0.5);
  CHECK(c.distortion.dy == 0.2);
  CHECK(c.distortion.etax == 1.0);

  const auto again = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
  CHECK(config_to_json(again) == config_to_json(c));

  CHECK(config_error_field(R"({})") == "sources");
  CHECK(config_error_field(R"({"sources": [], "colour": 1})") == "colour");
  CHECK(config_error_field(R"({"sources": [{"mode": [0,0]}]})") == "sources[0].squeeze_db");
  CHECK(config_error_field(R"({"sources": [{"mode": [0,0], "squeeze_db": "5"}]})") == "sources[0].squeeze_db");
  CHECK(config_error_field(R"({"sources": [], "distortion": {"etay": -1}})") == "distortion.etay");
  CHECK(config_error_field(R"({"sources": [], "basis_cutoff": 2.5})") == "basis_cutoff");
  try {
    config_from_text("{\n  \"sources\": [,]\n}");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/x.json"), doctest::Contains("config not found"), ConfigError);
}
