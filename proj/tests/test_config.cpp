#include <doctest.h>

#include <json.hpp>
#include <stdexcept>
#include <string>

#include "stc/config.hpp"

using namespace stc;

namespace {

const char* kFullConfig = R"({
  "system": {"builtin": "example1", "disturbance_bound": 1e-6},
  "certificate": {
    "p": [[2.0, 1.0], [1.0, 3.0]],
    "alpha3": {"coefficient": 0.5, "exponent": 2.0},
    "alpha4_factor": 1.0,
    "valid_radius": 0.6666666666666666
  },
  "sampler": {
    "kind": "self-triggered",
    "mode": "safety-perturbed",
    "theta1": 0.3,
    "theta2": 0.19,
    "theta_g": 0.5,
    "delta": 1e-4,
    "curvature_mode": "per-state",
    "delay_numerator": "residual",
    "admissibility_margin": 1.1,
    "bounds": {"n_level_samples": 500, "n_lipschitz_samples": 800, "fd_step": 0.01}
  },
  "delay": {"kind": "uniform", "value": 1e-5},
  "disturbance": {"kind": "sinusoid", "amplitude": [5e-7], "frequency": [2.0], "phase": [0.5]},
  "model_error": {"kind": "none"},
  "initial_state": [1e-5, 1e-5],
  "t_final": 2.0,
  "safe_radius": 1e-4,
  "integrator_step": 0.01,
  "seed": 42,
  "output": {"trace": "a.csv", "summary": "b.json"}
})";

std::string parse_message(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("a full configuration survives a parse and serialize round trip") {
  const ScenarioConfig c = parse_config(kFullConfig);
  CHECK(c.builtin == "example1");
  CHECK(c.disturbance_bound == 1e-6);
  REQUIRE(c.certificate.has_value());
  CHECK(c.certificate->p[1][1] == 3.0);
  CHECK(c.certificate->alpha4_factor == 1.0);
  CHECK(c.certificate->valid_inner_radius == 0.0);  // defaulted
  CHECK(c.sampler.theta_g == 0.5);
  CHECK(c.sampler.admissibility_margin == 1.1);
  CHECK(c.sampler.curvature_mode == "per-state");
  CHECK(c.sampler.delay_numerator == "residual");
  CHECK(c.sampler.bounds.n_level_samples == 500);
  CHECK(c.sampler.bounds.safety_margin == 1.25);  // defaulted inside the block
  CHECK(c.delay.kind == "uniform");
  CHECK(c.disturbance.phase[0] == 0.5);
  CHECK(c.seed == 42);
  CHECK(c.trace_path == "a.csv");

  const std::string once = serialize_config(c);
  const std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);
  const ScenarioConfig back = parse_config(once);
  CHECK(back.sampler.theta1 == c.sampler.theta1);
  CHECK(back.safe_radius == c.safe_radius);
  CHECK(back.disturbance.amplitude == c.disturbance.amplitude);
}

TEST_CASE("mode-specific keys are only serialized where they parse") {
  const char* stability = R"({
    "system": {"builtin": "annulus-linear"},
    "sampler": {"kind": "self-triggered", "mode": "stability", "theta1": 0.45, "theta2": 0.05},
    "initial_state": [0.9],
    "t_final": 10.0
  })";
  const std::string text = serialize_config(parse_config(stability));
  CHECK_FALSE(contains(text, "\"delta\""));
  CHECK_FALSE(contains(text, "theta_g"));
  CHECK_FALSE(contains(text, "admissibility_margin"));
  CHECK(contains(text, "\"curvature_mode\": \"global\""));
  CHECK(serialize_config(parse_config(text)) == text);

  const char* periodic = R"({
    "system": {"builtin": "annulus-linear"},
    "sampler": {"kind": "constant-period", "period": 0.25},
    "initial_state": [0.5],
    "t_final": 1.0
  })";
  const std::string ptext = serialize_config(parse_config(periodic));
  CHECK(contains(ptext, "\"period\": 0.25"));
  CHECK_FALSE(contains(ptext, "theta1"));
  CHECK(serialize_config(parse_config(ptext)) == ptext);
}

TEST_CASE("unknown keys are rejected with their line in the message") {
  const std::string top = parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {"kind": "continuous"},
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0,
  "frobnicate": true
})");
  CHECK(contains(top, "frobnicate"));
  CHECK(contains(top, "line 6"));
  CHECK(contains(top, "top level"));

  const std::string nested = parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {
    "kind": "self-triggered",
    "mode": "safety-nominal",
    "theta1": 0.5,
    "theta2": 0.25,
    "delta": 1e-4,
    "bounds": {"fd_steps": 0.01}
  },
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0
})");
  CHECK(contains(nested, "fd_steps"));
  CHECK(contains(nested, "line 9"));
  CHECK(contains(nested, "sampler.bounds"));
}

TEST_CASE("mode and kind constraints are enforced at parse time") {
  const std::string missing_delta = parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {"kind": "self-triggered", "mode": "safety-nominal", "theta1": 0.5, "theta2": 0.25},
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0
})");
  CHECK(contains(missing_delta, "sampler.delta is required"));

  CHECK(contains(parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {"kind": "self-triggered", "mode": "stability", "theta1": 0.5,
              "theta2": 0.25, "delta": 0.1},
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0
})"),
                 "only meaningful in safety modes"));

  CHECK(contains(parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {"kind": "self-triggered", "mode": "safety-nominal", "theta1": 0.5,
              "theta2": 0.25, "delta": 1e-4, "theta_g": 0.1},
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0
})"),
                 "only meaningful in safety-perturbed mode"));

  CHECK(contains(parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {"kind": "self-triggered", "mode": "safety-nominal", "theta1": 0.5,
              "theta2": 0.25, "delta": 1e-4, "admissibility_margin": 1.2},
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0
})"),
                 "only meaningful in safety-perturbed mode"));

  CHECK(contains(parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {"kind": "continuous"},
  "delay": {"kind": "zero", "value": 0.1},
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0
})"),
                 "unknown key \"value\""));

  CHECK(contains(parse_message(R"({
  "system": {"builtin": "example1"},
  "sampler": {"kind": "warp-drive"},
  "initial_state": [1e-5, 1e-5],
  "t_final": 1.0
})"),
                 "sampler.kind must be one of"));
}

TEST_CASE("scalar fields are range and type checked") {
  CHECK(contains(parse_message(R"({"system": {"builtin": "example1"},
    "sampler": {"kind": "continuous"}, "initial_state": [1e-5, 1e-5],
    "t0": 2.0, "t_final": 1.0})"),
                 "t_final must exceed t0"));
  CHECK(contains(parse_message(R"({"system": {"builtin": "example1"},
    "sampler": {"kind": "continuous"}, "initial_state": [],
    "t_final": 1.0})"),
                 "non-empty array"));
  CHECK(contains(parse_message(R"({"system": {"builtin": "example1"},
    "sampler": {"kind": "continuous"}, "initial_state": [1e-5, 1e-5],
    "t_final": 1.0, "seed": -1})"),
                 "seed must be a non-negative integer"));
  CHECK(contains(parse_message(R"({"system": {"builtin": "example1"},
    "sampler": {"kind": "continuous"}, "initial_state": [1e-5, 1e-5],
    "t_final": 1.0, "seed": 1.5})"),
                 "seed must be a non-negative integer"));
  CHECK(contains(parse_message(R"({"system": {"builtin": "example1"},
    "sampler": {"kind": "constant-period", "period": 0.0},
    "initial_state": [1e-5, 1e-5], "t_final": 1.0})"),
                 "sampler.period must be positive"));
  CHECK(contains(parse_message(R"({"system": {"builtin": "example1"},
    "sampler": {"kind": "continuous"}, "t_final": 1.0})"),
                 "initial_state is required"));
  CHECK(contains(parse_message(R"({"system": {"builtin": "example1"},
    "certificate": {"p": [[1.0, 2.0]], "alpha3": {"coefficient": 1.0, "exponent": 1.0},
                    "valid_radius": 1.0},
    "sampler": {"kind": "continuous"}, "initial_state": [1e-5, 1e-5], "t_final": 1.0})"),
                 "must be square"));
  CHECK(contains(parse_message("{"), "config:"));
  CHECK(contains(parse_message("[1, 2]"), "top level must be an object"));
}

TEST_CASE("sinusoid phases default to zero per channel") {
  const ScenarioConfig c = parse_config(R"({
    "system": {"builtin": "example1", "disturbance_bound": 1e-6},
    "sampler": {"kind": "continuous"},
    "disturbance": {"kind": "sinusoid", "amplitude": [1e-7], "frequency": [3.0]},
    "initial_state": [1e-5, 1e-5],
    "t_final": 1.0
  })");
  REQUIRE(c.disturbance.phase.size() == 1);
  CHECK(c.disturbance.phase[0] == 0.0);
}

TEST_CASE("dotted overrides rewrite values with JSON inference") {
  const char* base = R"({
    "system": {"builtin": "example1"},
    "sampler": {"kind": "self-triggered", "mode": "safety-nominal", "theta1": 0.5,
                "theta2": 0.25, "delta": 1e-4},
    "initial_state": [1e-5, 1e-5],
    "t_final": 1.0
  })";

  ScenarioConfig c = parse_config(apply_overrides(base, {"sampler.theta1=0.7"}));
  CHECK(c.sampler.theta1 == 0.7);

  c = parse_config(apply_overrides(base, {"output.trace=runs/x.csv"}));
  CHECK(c.trace_path == "runs/x.csv");  // not valid JSON, kept as a string

  c = parse_config(apply_overrides(base, {"system.builtin=\"annulus-linear\""}));
  CHECK(c.builtin == "annulus-linear");

  c = parse_config(apply_overrides(base, {"initial_state=[2e-5, 0.0]"}));
  CHECK(c.initial_state == std::vector<double>{2e-5, 0.0});

  c = parse_config(apply_overrides(base, {"delay.kind=constant", "delay.value=0.01"}));
  CHECK(c.delay.kind == "constant");
  CHECK(c.delay.value == 0.01);

  CHECK_THROWS_AS(apply_overrides(base, {"t_final.x=3"}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(base, {"=5"}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(base, {"noequals"}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(base, {"a..b=1"}), std::invalid_argument);
}

TEST_CASE("scenario assembly resolves defaults and the certificate block") {
  const ScenarioConfig full = parse_config(kFullConfig);
  const Scenario sc = build_scenario(full);
  CHECK(sc.safe_radius == 1e-4);
  CHECK(sc.delay.kind == DelayModel::Kind::UniformRandom);
  CHECK(sc.disturbance.kind == SignalModel::Kind::Sinusoid);
  CHECK(sc.seed == 42);
  // the certificate block takes precedence over the plant default
  CHECK(sc.certificate.V(Vec{0.1, 0.2}) == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(sc.certificate.alpha4(0.5) == doctest::Approx(0.5 * 3.6180339887498949).epsilon(1e-12));
  REQUIRE(sc.sampler.policy.has_value());
  CHECK(sc.sampler.policy->curvature_mode() == CurvatureMode::PerState);
  CHECK(sc.sampler.policy->delay_numerator() == DelayNumerator::Residual);
  CHECK(sc.sampler.policy->bound_config().n_level_samples == 500);

  // without an explicit safe_radius, safety modes monitor the delta ball
  const char* defaulted = R"({
    "system": {"builtin": "example1"},
    "sampler": {"kind": "self-triggered", "mode": "safety-nominal", "theta1": 0.5,
                "theta2": 0.25, "delta": 1e-4},
    "initial_state": [1e-5, 1e-5],
    "t_final": 1.0
  })";
  CHECK(build_scenario(parse_config(defaulted)).safe_radius == 1e-4);
  const std::string disabled = apply_overrides(defaulted, {"safe_radius=0.0"});
  CHECK(build_scenario(parse_config(disabled)).safe_radius == 0.0);

  // non-safety samplers leave the monitor off unless asked for
  const char* periodic = R"({
    "system": {"builtin": "annulus-linear"},
    "sampler": {"kind": "constant-period", "period": 0.25},
    "initial_state": [0.5],
    "t_final": 1.0
  })";
  CHECK(build_scenario(parse_config(periodic)).safe_radius == 0.0);
}

TEST_CASE("mode name parsers round trip and reject strangers") {
  CHECK(parse_trigger_mode("stability") == TriggerMode::Stability);
  CHECK(parse_trigger_mode("safety-nominal") == TriggerMode::SafetyNominal);
  CHECK(parse_trigger_mode("safety-perturbed") == TriggerMode::SafetyPerturbed);
  CHECK_THROWS_AS(parse_trigger_mode("chaos"), std::invalid_argument);
  CHECK(parse_curvature_mode("global") == CurvatureMode::Global);
  CHECK(parse_curvature_mode("per-state") == CurvatureMode::PerState);
  CHECK_THROWS_AS(parse_curvature_mode("local"), std::invalid_argument);
  CHECK(parse_delay_numerator("delay-share") == DelayNumerator::DelayShare);
  CHECK(parse_delay_numerator("residual") == DelayNumerator::Residual);
  CHECK_THROWS_AS(parse_delay_numerator("everything"), std::invalid_argument);
}

TEST_CASE("missing config files name the path in the error") {
  try {
    (void)load_config("/nonexistent/path/to/config.json");
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(contains(e.what(), "/nonexistent/path/to/config.json"));
  }
}

TEST_CASE("run summaries carry bounds, statistics and verdicts") {
  const char* periodic = R"({
    "system": {"builtin": "annulus-linear"},
    "sampler": {"kind": "constant-period", "period": 0.25},
    "initial_state": [0.5],
    "t_final": 1.0,
    "integrator_step": 0.1,
    "safe_radius": 1.0
  })";
  const ScenarioConfig cfg = parse_config(periodic);
  const Trace tr = run_scenario(build_scenario(cfg));
  const SafetyVerdict safety = check_safety(tr, 1.0);
  const std::string text = summarize_run(cfg, tr, safety, std::nullopt, std::nullopt);

  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("version").get<std::string>() == kVersion);
  CHECK(j.at("bounds").is_null());
  CHECK(j.at("verdicts").at("safety").at("safe").get<bool>());
  CHECK(j.at("verdicts").at("safety").at("first_violation_time").is_null());
  CHECK(j.at("verdicts").at("decrease").is_null());
  CHECK(j.at("verdicts").at("admissibility").is_null());
  CHECK_FALSE(j.at("verdicts").at("diverged").get<bool>());
  CHECK(j.at("stats").at("sample_count").get<int>() == 4);
  CHECK(j.at("config").at("sampler").at("period").get<double>() == 0.25);
}
