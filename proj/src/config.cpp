#include "stc/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "stc/lyapunov.hpp"

namespace stc {

using nlohmann::json;

const char* const kVersion = "1.0.0";

namespace {

// Diagnostics point at the first occurrence of the offending key in the
// raw text. Good enough for hand-written configs, which rarely repeat a
// key name outside its block.
int line_of(const std::string& raw, const std::string& key) {
    const auto pos = raw.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return static_cast<int>(
        1 + std::count(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] void fail(const std::string& raw, const std::string& anchor, const std::string& msg) {
    const int line = line_of(raw, anchor);
    std::string prefix = "config";
    if (line > 0) prefix += " line " + std::to_string(line);
    throw std::invalid_argument(prefix + ": " + msg);
}

std::string joined(const std::string& block, const std::string& key) {
    return block.empty() ? key : block + "." + key;
}

void check_keys(const json& obj, const std::string& raw, const std::string& block,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known)
            fail(raw, item.key(),
                 "unknown key \"" + item.key() + "\" in " + (block.empty() ? "top level" : block));
    }
}

const json& get_object(const json& obj, const std::string& raw, const std::string& block,
                       const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(raw, block.empty() ? key : block, joined(block, key) + " is required");
    if (!it->is_object()) fail(raw, key, joined(block, key) + " must be an object");
    return *it;
}

double get_number(const json& obj, const std::string& raw, const std::string& block,
                  const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(raw, block.empty() ? key : block, joined(block, key) + " is required");
    if (!it->is_number()) fail(raw, key, joined(block, key) + " must be a number");
    return it->get<double>();
}

double get_number_or(const json& obj, const std::string& raw, const std::string& block,
                     const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return get_number(obj, raw, block, key);
}

int get_count_or(const json& obj, const std::string& raw, const std::string& block,
                 const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0)
        fail(raw, key, joined(block, key) + " must be a positive integer");
    return static_cast<int>(v.get<long long>());
}

std::string get_string(const json& obj, const std::string& raw, const std::string& block,
                       const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(raw, block.empty() ? key : block, joined(block, key) + " is required");
    if (!it->is_string()) fail(raw, key, joined(block, key) + " must be a string");
    return it->get<std::string>();
}

std::string get_string_or(const json& obj, const std::string& raw, const std::string& block,
                          const std::string& key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    return get_string(obj, raw, block, key);
}

std::vector<double> get_vector(const json& obj, const std::string& raw, const std::string& block,
                               const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(raw, block.empty() ? key : block, joined(block, key) + " is required");
    if (!it->is_array() || it->empty())
        fail(raw, key, joined(block, key) + " must be a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(it->size());
    for (const json& v : *it) {
        if (!v.is_number()) fail(raw, key, joined(block, key) + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

bool is_safety(const std::string& mode) {
    return mode == "safety-nominal" || mode == "safety-perturbed";
}

SamplerConfig parse_sampler(const json& obj, const std::string& raw) {
    SamplerConfig s;
    s.kind = get_string(obj, raw, "sampler", "kind");
    if (s.kind == "continuous") {
        check_keys(obj, raw, "sampler", {"kind"});
        return s;
    }
    if (s.kind == "constant-period") {
        check_keys(obj, raw, "sampler", {"kind", "period"});
        s.period = get_number(obj, raw, "sampler", "period");
        if (!(s.period > 0.0)) fail(raw, "period", "sampler.period must be positive");
        return s;
    }
    if (s.kind != "self-triggered")
        fail(raw, "kind", "sampler.kind must be one of self-triggered, constant-period, continuous");

    check_keys(obj, raw, "sampler",
               {"kind", "mode", "theta1", "theta2", "theta_g", "delta", "curvature_mode",
                "delay_numerator", "admissibility_margin", "bounds"});
    s.mode = get_string(obj, raw, "sampler", "mode");
    parse_trigger_mode(s.mode);  // reject bad names early, with a line anchor
    s.theta1 = get_number(obj, raw, "sampler", "theta1");
    s.theta2 = get_number(obj, raw, "sampler", "theta2");
    if (s.mode == "safety-perturbed") {
        s.theta_g = get_number(obj, raw, "sampler", "theta_g");
        s.admissibility_margin =
            get_number_or(obj, raw, "sampler", "admissibility_margin", s.admissibility_margin);
        if (!(s.admissibility_margin > 0.0))
            fail(raw, "admissibility_margin", "sampler.admissibility_margin must be positive");
    } else {
        if (obj.contains("theta_g"))
            fail(raw, "theta_g", "sampler.theta_g is only meaningful in safety-perturbed mode");
        if (obj.contains("admissibility_margin"))
            fail(raw, "admissibility_margin",
                 "sampler.admissibility_margin is only meaningful in safety-perturbed mode");
    }
    if (is_safety(s.mode)) {
        s.delta = get_number(obj, raw, "sampler", "delta");
    } else if (obj.contains("delta")) {
        fail(raw, "delta", "sampler.delta is only meaningful in safety modes");
    }
    s.curvature_mode = get_string_or(obj, raw, "sampler", "curvature_mode", "global");
    parse_curvature_mode(s.curvature_mode);
    s.delay_numerator = get_string_or(obj, raw, "sampler", "delay_numerator", "delay-share");
    parse_delay_numerator(s.delay_numerator);

    if (obj.contains("bounds")) {
        const json& b = get_object(obj, raw, "sampler", "bounds");
        check_keys(b, raw, "sampler.bounds",
                   {"n_level_samples", "n_lipschitz_samples", "fd_step", "safety_margin",
                    "tau_cap", "tau_floor"});
        const BoundConfig d{};
        s.bounds.n_level_samples =
            get_count_or(b, raw, "sampler.bounds", "n_level_samples", d.n_level_samples);
        s.bounds.n_lipschitz_samples =
            get_count_or(b, raw, "sampler.bounds", "n_lipschitz_samples", d.n_lipschitz_samples);
        s.bounds.fd_step = get_number_or(b, raw, "sampler.bounds", "fd_step", d.fd_step);
        s.bounds.safety_margin =
            get_number_or(b, raw, "sampler.bounds", "safety_margin", d.safety_margin);
        s.bounds.tau_cap = get_number_or(b, raw, "sampler.bounds", "tau_cap", d.tau_cap);
        s.bounds.tau_floor = get_number_or(b, raw, "sampler.bounds", "tau_floor", d.tau_floor);
    }
    return s;
}

DelayConfig parse_delay(const json& obj, const std::string& raw) {
    DelayConfig d;
    d.kind = get_string(obj, raw, "delay", "kind");
    if (d.kind == "zero") {
        check_keys(obj, raw, "delay", {"kind"});
        return d;
    }
    if (d.kind != "constant" && d.kind != "uniform")
        fail(raw, "kind", "delay.kind must be one of zero, constant, uniform");
    check_keys(obj, raw, "delay", {"kind", "value"});
    d.value = get_number(obj, raw, "delay", "value");
    if (d.value < 0.0) fail(raw, "value", "delay.value must be non-negative");
    return d;
}

SignalConfig parse_signal(const json& obj, const std::string& raw, const std::string& block) {
    SignalConfig s;
    s.kind = get_string(obj, raw, block, "kind");
    if (s.kind == "none" || s.kind == "held-uniform") {
        check_keys(obj, raw, block, {"kind"});
        return s;
    }
    if (s.kind == "constant") {
        check_keys(obj, raw, block, {"kind", "value"});
        s.value = get_vector(obj, raw, block, "value");
        return s;
    }
    if (s.kind != "sinusoid")
        fail(raw, "kind", block + ".kind must be one of none, constant, sinusoid, held-uniform");
    check_keys(obj, raw, block, {"kind", "amplitude", "frequency", "phase"});
    s.amplitude = get_vector(obj, raw, block, "amplitude");
    s.frequency = get_vector(obj, raw, block, "frequency");
    s.phase = obj.contains("phase") ? get_vector(obj, raw, block, "phase")
                                    : std::vector<double>(s.amplitude.size(), 0.0);
    if (s.frequency.size() != s.amplitude.size() || s.phase.size() != s.amplitude.size())
        fail(raw, "amplitude", block + ": amplitude, frequency and phase must share one length");
    return s;
}

CertificateConfig parse_certificate(const json& obj, const std::string& raw) {
    CertificateConfig c;
    check_keys(obj, raw, "certificate",
               {"p", "alpha3", "alpha4_factor", "valid_radius", "valid_inner_radius"});
    const auto it = obj.find("p");
    if (it == obj.end()) fail(raw, "certificate", "certificate.p is required");
    if (!it->is_array() || it->empty())
        fail(raw, "p", "certificate.p must be an array of matrix rows");
    for (const json& row : *it) {
        if (!row.is_array() || row.size() != it->size())
            fail(raw, "p", "certificate.p must be square, one array per row");
        std::vector<double> r;
        for (const json& v : row) {
            if (!v.is_number()) fail(raw, "p", "certificate.p must contain only numbers");
            r.push_back(v.get<double>());
        }
        c.p.push_back(std::move(r));
    }
    const json& a3 = get_object(obj, raw, "certificate", "alpha3");
    check_keys(a3, raw, "certificate.alpha3", {"coefficient", "exponent"});
    c.alpha3_coefficient = get_number(a3, raw, "certificate.alpha3", "coefficient");
    c.alpha3_exponent = get_number(a3, raw, "certificate.alpha3", "exponent");
    c.alpha4_factor = get_number_or(obj, raw, "certificate", "alpha4_factor", 2.0);
    c.valid_radius = get_number(obj, raw, "certificate", "valid_radius");
    c.valid_inner_radius = get_number_or(obj, raw, "certificate", "valid_inner_radius", 0.0);
    return c;
}

json signal_json(const SignalConfig& s) {
    json j;
    j["kind"] = s.kind;
    if (s.kind == "constant") j["value"] = s.value;
    if (s.kind == "sinusoid") {
        j["amplitude"] = s.amplitude;
        j["frequency"] = s.frequency;
        j["phase"] = s.phase;
    }
    return j;
}

LyapunovCertificate certificate_from_config(const CertificateConfig& c) {
    const std::size_t n = c.p.size();
    Mat p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (c.p[i].size() != n) throw std::invalid_argument("certificate.p must be square");
        for (std::size_t j = 0; j < n; ++j) p(i, j) = c.p[i][j];
    }
    const ClassK alpha3 =
        ClassK::power(c.alpha3_coefficient, c.alpha3_exponent, c.valid_radius);
    return quadratic_certificate(QuadraticForm(p), alpha3, c.valid_radius, c.alpha4_factor,
                                 c.valid_inner_radius);
}

}  // namespace

TriggerMode parse_trigger_mode(const std::string& name) {
    if (name == "stability") return TriggerMode::Stability;
    if (name == "safety-nominal") return TriggerMode::SafetyNominal;
    if (name == "safety-perturbed") return TriggerMode::SafetyPerturbed;
    throw std::invalid_argument(
        "sampler.mode must be one of stability, safety-nominal, safety-perturbed (got \"" + name +
        "\")");
}

CurvatureMode parse_curvature_mode(const std::string& name) {
    if (name == "global") return CurvatureMode::Global;
    if (name == "per-state") return CurvatureMode::PerState;
    throw std::invalid_argument("sampler.curvature_mode must be global or per-state (got \"" +
                                name + "\")");
}

DelayNumerator parse_delay_numerator(const std::string& name) {
    if (name == "delay-share") return DelayNumerator::DelayShare;
    if (name == "residual") return DelayNumerator::Residual;
    throw std::invalid_argument("sampler.delay_numerator must be delay-share or residual (got \"" +
                                name + "\")");
}

ScenarioConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");

    const std::string& raw = text;
    check_keys(root, raw, "",
               {"system", "certificate", "sampler", "delay", "disturbance", "model_error",
                "initial_state", "t0", "t_final", "safe_radius", "integrator_step", "seed",
                "output"});

    ScenarioConfig c;
    const json& system = get_object(root, raw, "", "system");
    check_keys(system, raw, "system", {"builtin", "disturbance_bound"});
    c.builtin = get_string(system, raw, "system", "builtin");
    c.disturbance_bound = get_number_or(system, raw, "system", "disturbance_bound", 0.0);

    if (root.contains("certificate"))
        c.certificate = parse_certificate(get_object(root, raw, "", "certificate"), raw);

    c.sampler = parse_sampler(get_object(root, raw, "", "sampler"), raw);
    if (root.contains("delay")) c.delay = parse_delay(get_object(root, raw, "", "delay"), raw);
    if (root.contains("disturbance"))
        c.disturbance = parse_signal(get_object(root, raw, "", "disturbance"), raw, "disturbance");
    if (root.contains("model_error"))
        c.model_error = parse_signal(get_object(root, raw, "", "model_error"), raw, "model_error");

    c.initial_state = get_vector(root, raw, "", "initial_state");
    c.t0 = get_number_or(root, raw, "", "t0", 0.0);
    c.t_final = get_number(root, raw, "", "t_final");
    if (!(c.t_final > c.t0)) fail(raw, "t_final", "t_final must exceed t0");
    if (root.contains("safe_radius")) {
        c.safe_radius = get_number(root, raw, "", "safe_radius");
        if (!(*c.safe_radius >= 0.0)) fail(raw, "safe_radius", "safe_radius must be non-negative");
    }
    c.integrator_step = get_number_or(root, raw, "", "integrator_step", 1e-3);
    if (!(c.integrator_step > 0.0))
        fail(raw, "integrator_step", "integrator_step must be positive");
    if (root.contains("seed")) {
        const json& v = root.at("seed");
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
            fail(raw, "seed", "seed must be a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    }
    if (root.contains("output")) {
        const json& out = get_object(root, raw, "", "output");
        check_keys(out, raw, "output", {"trace", "summary"});
        c.trace_path = get_string_or(out, raw, "output", "trace", c.trace_path);
        c.summary_path = get_string_or(out, raw, "output", "summary", c.summary_path);
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::string serialize_config(const ScenarioConfig& c) {
    json root;
    root["system"]["builtin"] = c.builtin;
    root["system"]["disturbance_bound"] = c.disturbance_bound;

    if (c.certificate) {
        const CertificateConfig& cert = *c.certificate;
        json jc;
        jc["p"] = cert.p;
        jc["alpha3"]["coefficient"] = cert.alpha3_coefficient;
        jc["alpha3"]["exponent"] = cert.alpha3_exponent;
        jc["alpha4_factor"] = cert.alpha4_factor;
        jc["valid_radius"] = cert.valid_radius;
        jc["valid_inner_radius"] = cert.valid_inner_radius;
        root["certificate"] = jc;
    }

    json js;
    js["kind"] = c.sampler.kind;
    if (c.sampler.kind == "constant-period") js["period"] = c.sampler.period;
    if (c.sampler.kind == "self-triggered") {
        js["mode"] = c.sampler.mode;
        js["theta1"] = c.sampler.theta1;
        js["theta2"] = c.sampler.theta2;
        if (c.sampler.mode == "safety-perturbed") {
            js["theta_g"] = c.sampler.theta_g;
            js["admissibility_margin"] = c.sampler.admissibility_margin;
        }
        if (is_safety(c.sampler.mode)) js["delta"] = c.sampler.delta;
        js["curvature_mode"] = c.sampler.curvature_mode;
        js["delay_numerator"] = c.sampler.delay_numerator;
        js["bounds"]["n_level_samples"] = c.sampler.bounds.n_level_samples;
        js["bounds"]["n_lipschitz_samples"] = c.sampler.bounds.n_lipschitz_samples;
        js["bounds"]["fd_step"] = c.sampler.bounds.fd_step;
        js["bounds"]["safety_margin"] = c.sampler.bounds.safety_margin;
        js["bounds"]["tau_cap"] = c.sampler.bounds.tau_cap;
        js["bounds"]["tau_floor"] = c.sampler.bounds.tau_floor;
    }
    root["sampler"] = js;

    json jd;
    jd["kind"] = c.delay.kind;
    if (c.delay.kind != "zero") jd["value"] = c.delay.value;
    root["delay"] = jd;

    root["disturbance"] = signal_json(c.disturbance);
    root["model_error"] = signal_json(c.model_error);
    root["initial_state"] = c.initial_state;
    root["t0"] = c.t0;
    root["t_final"] = c.t_final;
    if (c.safe_radius) root["safe_radius"] = *c.safe_radius;
    root["integrator_step"] = c.integrator_step;
    root["seed"] = c.seed;
    root["output"]["trace"] = c.trace_path;
    root["output"]["summary"] = c.summary_path;

    return root.dump(2) + "\n";
}

std::string apply_overrides(const std::string& text, const std::vector<std::string>& overrides) {
    if (overrides.empty()) return text;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("override must look like path.to.key=value: " + item);
        const std::string path = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);

        json* cur = &root;
        std::size_t start = 0;
        while (true) {
            const auto dotpos = path.find('.', start);
            const std::string seg = path.substr(start, dotpos - start);
            if (seg.empty())
                throw std::invalid_argument("override path has an empty segment: " + path);
            if (dotpos == std::string::npos) {
                json parsed = json::parse(value, nullptr, false);
                (*cur)[seg] = parsed.is_discarded() ? json(value) : parsed;
                break;
            }
            json& next = (*cur)[seg];
            if (!next.is_object() && !next.is_null())
                throw std::invalid_argument("override path crosses a non-object: " + path);
            cur = &next;
            start = dotpos + 1;
        }
    }
    return root.dump(2) + "\n";
}

Scenario build_scenario(const ScenarioConfig& c) {
    Plant plant = builtin_plant(c.builtin, c.disturbance_bound);
    LyapunovCertificate cert =
        c.certificate ? certificate_from_config(*c.certificate) : plant.certificate;

    Scenario sc;
    sc.system = plant.system;
    sc.feedback = plant.feedback;
    sc.certificate = cert;

    if (c.sampler.kind == "continuous") {
        sc.sampler = Sampler::continuous();
    } else if (c.sampler.kind == "constant-period") {
        sc.sampler = Sampler::constant_period(c.sampler.period);
    } else {
        TriggerBudget budget{c.sampler.theta1, c.sampler.theta2, c.sampler.theta_g};
        TriggerPolicy policy(plant.system, plant.feedback, cert,
                             parse_trigger_mode(c.sampler.mode), budget, c.sampler.delta,
                             c.sampler.bounds, parse_curvature_mode(c.sampler.curvature_mode),
                             parse_delay_numerator(c.sampler.delay_numerator));
        sc.sampler = Sampler::self_triggered(std::move(policy));
    }

    sc.x0 = c.initial_state;
    sc.t0 = c.t0;
    sc.t_final = c.t_final;
    if (c.safe_radius) {
        sc.safe_radius = *c.safe_radius;
    } else if (c.sampler.kind == "self-triggered" && is_safety(c.sampler.mode)) {
        sc.safe_radius = c.sampler.delta;
    }

    if (c.delay.kind == "constant") {
        sc.delay = DelayModel::constant(c.delay.value);
    } else if (c.delay.kind == "uniform") {
        sc.delay = DelayModel::uniform(c.delay.value);
    }

    const auto to_signal = [](const SignalConfig& s) {
        if (s.kind == "constant") return SignalModel::constant_vector(s.value);
        if (s.kind == "sinusoid") return SignalModel::sinusoid(s.amplitude, s.frequency, s.phase);
        if (s.kind == "held-uniform") return SignalModel::held_uniform();
        return SignalModel::none();
    };
    sc.disturbance = to_signal(c.disturbance);
    sc.model_error = to_signal(c.model_error);

    sc.integrator_step = c.integrator_step;
    sc.seed = c.seed;
    return sc;
}

std::string summarize_run(const ScenarioConfig& config, const Trace& trace,
                          const SafetyVerdict& safety,
                          const std::optional<DecreaseVerdict>& decrease,
                          const std::optional<AdmissibilityReport>& admissibility) {
    json root;
    root["version"] = kVersion;
    root["config"] = json::parse(serialize_config(config));

    if (trace.trigger_bounds) {
        const TriggerBounds& b = *trace.trigger_bounds;
        json jb;
        jb["hold_budget"] = b.hold_budget;
        jb["m2_global"] = b.m2_global;
        jb["m3"] = b.m3;
        jb["tau_min"] = b.tau_min;
        jb["delta_max"] = b.delta_max;
        jb["nu"] = b.nu;
        jb["envelope_level"] = b.envelope_level;
        jb["envelope_radius"] = b.envelope_radius;
        root["bounds"] = jb;
    } else {
        root["bounds"] = nullptr;
    }

    const TraceStats stats = trace_stats(trace);
    root["stats"]["sample_count"] = stats.sample_count;
    root["stats"]["mean_gap"] = stats.mean_gap;
    root["stats"]["min_gap"] = stats.min_gap;
    root["stats"]["max_gap"] = stats.max_gap;
    root["stats"]["mean_delay"] = stats.mean_delay;
    root["stats"]["max_delay"] = stats.max_delay;

    json jv;
    jv["safety"]["safe"] = safety.safe;
    jv["safety"]["first_violation_time"] =
        safety.first_violation_time ? json(*safety.first_violation_time) : json(nullptr);
    if (decrease) {
        jv["decrease"]["ok"] = decrease->ok;
        jv["decrease"]["worst_margin"] = decrease->worst_margin;
        jv["decrease"]["first_violation_time"] =
            decrease->first_violation_time ? json(*decrease->first_violation_time) : json(nullptr);
        jv["decrease"]["checked_points"] = decrease->checked_points;
    } else {
        jv["decrease"] = nullptr;
    }
    if (admissibility) {
        jv["admissibility"]["admissible"] = admissibility->admissible;
        jv["admissibility"]["threshold"] = admissibility->threshold;
        jv["admissibility"]["sampled_max"] = admissibility->sampled_max;
        jv["admissibility"]["margin"] = admissibility->margin;
    } else {
        jv["admissibility"] = nullptr;
    }
    jv["diverged"] = trace.diverged;
    jv["internal_error"] = trace.internal_error;
    root["verdicts"] = jv;

    return root.dump(2) + "\n";
}

}  // namespace stc
