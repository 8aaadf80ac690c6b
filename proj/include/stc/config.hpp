#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stc/builtin.hpp"
#include "stc/sim.hpp"
#include "stc/trigger.hpp"

namespace stc {

// Serializable description of a scenario. Mirrors the JSON schema one to one
// so that parse and serialize round-trip exactly.

struct CertificateConfig {
    std::vector<std::vector<double>> p;  // quadratic form, row major
    double alpha3_coefficient = 0.0;
    double alpha3_exponent = 1.0;
    double alpha4_factor = 2.0;
    double valid_radius = 0.0;
    double valid_inner_radius = 0.0;
};

struct SamplerConfig {
    std::string kind = "self-triggered";  // self-triggered | constant-period | continuous
    double period = 0.0;                  // constant-period only
    std::string mode = "safety-nominal";  // stability | safety-nominal | safety-perturbed
    double theta1 = 0.5;
    double theta2 = 0.25;
    double theta_g = 0.0;
    double delta = 0.0;                   // safety radius, required for safety modes
    std::string curvature_mode = "global";       // global | per-state
    std::string delay_numerator = "delay-share"; // delay-share | residual
    double admissibility_margin = 1.05;   // inflation of the sampled worst |g|
    BoundConfig bounds;
};

struct DelayConfig {
    std::string kind = "zero";  // zero | constant | uniform
    double value = 0.0;
};

struct SignalConfig {
    std::string kind = "none";  // none | constant | sinusoid | held-uniform
    std::vector<double> value;      // constant
    std::vector<double> amplitude;  // sinusoid
    std::vector<double> frequency;
    std::vector<double> phase;
};

struct ScenarioConfig {
    std::string builtin;  // plant name, see builtin_names()
    double disturbance_bound = 0.0;
    std::optional<CertificateConfig> certificate;  // overrides the plant default
    SamplerConfig sampler;
    DelayConfig delay;
    SignalConfig disturbance;
    SignalConfig model_error;
    std::vector<double> initial_state;
    double t0 = 0.0;
    double t_final = 1.0;
    std::optional<double> safe_radius;  // defaults to sampler.delta in safety modes
    double integrator_step = 1e-3;
    std::uint64_t seed = 0;
    std::string trace_path = "trace.csv";
    std::string summary_path = "summary.json";
};

// Parses JSON text. Unknown keys, wrong types, missing required fields and
// out-of-range values all throw std::invalid_argument with a message that
// names the offending key and its line in the text.
ScenarioConfig parse_config(const std::string& text);

// Reads a file and parses it; the filename is prefixed to diagnostics.
ScenarioConfig load_config(const std::string& path);

// Canonical JSON rendering; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ScenarioConfig& config);

// Applies "dotted.path=value" assignments on top of JSON text and returns the
// rewritten text. Values are parsed as JSON when possible, else as strings.
std::string apply_overrides(const std::string& text,
                            const std::vector<std::string>& overrides);

// Resolves the builtin plant and assembles a runnable scenario.
Scenario build_scenario(const ScenarioConfig& config);

TriggerMode parse_trigger_mode(const std::string& name);
CurvatureMode parse_curvature_mode(const std::string& name);
DelayNumerator parse_delay_numerator(const std::string& name);

// Report written next to the trace after a run: trigger bounds, verdicts and
// gap statistics plus an echo of the resolved configuration.
std::string summarize_run(const ScenarioConfig& config, const Trace& trace,
                          const SafetyVerdict& safety,
                          const std::optional<DecreaseVerdict>& decrease,
                          const std::optional<AdmissibilityReport>& admissibility);

extern const char* const kVersion;

}  // namespace stc
