#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stc/dynamics.hpp"
#include "stc/lyapunov.hpp"
#include "stc/trigger.hpp"

namespace stc {

/// Actuation latency between sampling the state and the new control
/// taking effect. Realized delays are clamped strictly below both the
/// policy's delta_max and the current inter-sample gap.
struct DelayModel {
  enum class Kind { Zero, Constant, UniformRandom };
  Kind kind = Kind::Zero;
  double value = 0.0;  // constant delay, or upper bound of the uniform draw

  static DelayModel zero() { return {}; }
  static DelayModel constant(double d) { return {Kind::Constant, d}; }
  static DelayModel uniform(double upper) { return {Kind::UniformRandom, upper}; }
};

/// Exogenous signal entering the perturbation term (used for both the
/// disturbance d and the model error mu). HeldUniform redraws from the
/// declared bound box at every sampling instant and holds in between;
/// the other kinds are evaluated at the start of each integration
/// sub-step and held across it, so realized signals are piecewise
/// constant and reproducible.
struct SignalModel {
  enum class Kind { None, Constant, Sinusoid, HeldUniform };
  Kind kind = Kind::None;
  Vec constant;                      // Constant
  Vec amplitude, frequency, phase;   // Sinusoid, per channel (frequency in Hz)

  static SignalModel none() { return {}; }
  static SignalModel constant_vector(Vec v);
  static SignalModel sinusoid(Vec amplitude, Vec frequency, Vec phase);
  static SignalModel held_uniform();
};

/// When the loop samples: a self-triggered policy, a fixed period, or
/// "continuous" feedback refreshed at every integration step (the
/// idealized baseline; delays are not meaningful there).
struct Sampler {
  enum class Kind { SelfTriggered, ConstantPeriod, Continuous };
  Kind kind = Kind::Continuous;
  std::optional<TriggerPolicy> policy;  // SelfTriggered
  double period = 0.0;                  // ConstantPeriod

  static Sampler self_triggered(TriggerPolicy p);
  static Sampler constant_period(double t);
  static Sampler continuous() { return {}; }
};

struct Scenario {
  SystemModel system;
  FeedbackLaw feedback;
  LyapunovCertificate certificate;
  Sampler sampler;
  Vec x0;
  double t0 = 0.0;
  double t_final = 1.0;
  double safe_radius = 0.0;  // > 0 enables the safety monitor and scales the divergence guard
  DelayModel delay;
  SignalModel disturbance;
  SignalModel model_error;  // the mu channel
  double integrator_step = 1e-3;
  std::uint64_t seed = 0;
};

/// One sampling instant: state read, scheduled next-sample time, and
/// the realized actuation delay.
struct SampleEvent {
  int k = 0;
  double t = 0.0;
  double delay = 0.0;
  double tau_s = 0.0;
  Vec x_k;
  Vec u_k;
};

enum class GridEvent : unsigned char { None, Sample, Actuate };

struct Trace {
  Vec times;
  std::vector<Vec> states;
  std::vector<Vec> controls;  // control in effect on [times[i], times[i+1])
  Vec v_values;
  std::vector<GridEvent> markers;
  std::vector<SampleEvent> events;

  std::optional<double> first_violation_time;  // safety monitor, when safe_radius > 0
  bool diverged = false;
  double divergence_time = 0.0;
  bool internal_error = false;  // a trigger invariant was breached mid-run
  std::optional<TriggerBounds> trigger_bounds;
};

struct SafetyVerdict {
  bool safe = true;
  std::optional<double> first_violation_time;
};

struct DecreaseVerdict {
  bool ok = true;
  double worst_margin = 0.0;  // max of quotient + (1-theta)*alpha3; > tol means violated
  std::optional<double> first_violation_time;
  int checked_points = 0;
};

struct TraceStats {
  int sample_count = 0;
  double mean_gap = 0.0, min_gap = 0.0, max_gap = 0.0;  // scheduled inter-sample times
  double mean_delay = 0.0, max_delay = 0.0;
};

/// Event loop: sample, draw the delay, hold the stale control until the
/// actuation instant, then the fresh one until the next sample; the
/// control is zero before the very first actuation. Integration is
/// fixed-step RK4 with sub-steps subdividing each span so that every
/// sampling and actuation instant lands exactly on a grid boundary.
/// Stops early when the divergence guard trips or when a safety-mode
/// policy can no longer be evaluated (state left its domain).
Trace run_scenario(Scenario scenario);

SafetyVerdict check_safety(const Trace& trace, double delta);

/// Forward difference quotients of V against -(1-theta)*alpha3(|x|),
/// checked from the first actuation instant on (the loop is open before
/// that) and only where the certificate is valid: inner radius < |x|
/// <= valid radius.
DecreaseVerdict check_lyapunov_decrease(const Trace& trace, const LyapunovCertificate& cert,
                                        double theta, double tol = 1e-6);

TraceStats trace_stats(const Trace& trace);

/// CSV rows `t,x1..xn,u1..up,V,event` with event in {-, sample, actuate};
/// numbers are printed with enough digits to round-trip exactly.
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::string& path);

}  // namespace stc
