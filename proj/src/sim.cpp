#include "stc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace stc {

SignalModel SignalModel::constant_vector(Vec v) {
  SignalModel m;
  m.kind = Kind::Constant;
  m.constant = std::move(v);
  return m;
}

SignalModel SignalModel::sinusoid(Vec amplitude, Vec frequency, Vec phase) {
  if (amplitude.size() != frequency.size() || amplitude.size() != phase.size())
    throw std::invalid_argument("sinusoid channel lists must have matching lengths");
  SignalModel m;
  m.kind = Kind::Sinusoid;
  m.amplitude = std::move(amplitude);
  m.frequency = std::move(frequency);
  m.phase = std::move(phase);
  return m;
}

SignalModel SignalModel::held_uniform() {
  SignalModel m;
  m.kind = Kind::HeldUniform;
  return m;
}

Sampler Sampler::self_triggered(TriggerPolicy p) {
  Sampler s;
  s.kind = Kind::SelfTriggered;
  s.policy = std::move(p);
  return s;
}

Sampler Sampler::constant_period(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("sampling period must be positive");
  Sampler s;
  s.kind = Kind::ConstantPeriod;
  s.period = t;
  return s;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

Rng stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), id};
  return Rng(seq);
}

void validate_signal(const SignalModel& m, const Box& box, const std::string& what) {
  const std::size_t dims = box.dims();
  switch (m.kind) {
    case SignalModel::Kind::None:
      return;
    case SignalModel::Kind::Constant:
      if (m.constant.size() != dims)
        throw std::invalid_argument(what + " constant does not match its bound box");
      if (!box.contains(m.constant))
        throw std::domain_error(what + " constant lies outside its bound box");
      return;
    case SignalModel::Kind::Sinusoid:
      if (m.amplitude.size() != dims || m.frequency.size() != dims || m.phase.size() != dims)
        throw std::invalid_argument(what + " sinusoid does not match its bound box");
      for (std::size_t i = 0; i < dims; ++i) {
        const double a = std::abs(m.amplitude[i]);
        if (box.lo[i] > -a || box.hi[i] < a)
          throw std::domain_error(what + " sinusoid amplitude exceeds its bound box");
      }
      return;
    case SignalModel::Kind::HeldUniform:
      if (dims == 0)
        throw std::invalid_argument(what + " held-uniform signal needs a nonempty bound box");
      return;
  }
}

Vec eval_signal(const SignalModel& m, const Box& box, double t, const Vec& held) {
  switch (m.kind) {
    case SignalModel::Kind::None:
      return Vec(box.dims(), 0.0);
    case SignalModel::Kind::Constant:
      return m.constant;
    case SignalModel::Kind::Sinusoid: {
      Vec v(box.dims());
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = m.amplitude[i] * std::sin(kTwoPi * m.frequency[i] * t + m.phase[i]);
      return v;
    }
    case SignalModel::Kind::HeldUniform:
      return held;
  }
  return {};
}

void push_point(Trace& tr, double t, const Vec& x, const Vec& u, double v, GridEvent marker) {
  tr.times.push_back(t);
  tr.states.push_back(x);
  tr.controls.push_back(u);
  tr.v_values.push_back(v);
  tr.markers.push_back(marker);
}

}  // namespace

Trace run_scenario(Scenario sc) {
  validate(sc.system, sc.feedback);
  if (sc.x0.size() != sc.system.state_dim)
    throw std::invalid_argument("initial state dimension mismatch");
  if (!(sc.t_final > sc.t0)) throw std::invalid_argument("t_final must exceed t0");
  if (!(sc.integrator_step > 0.0)) throw std::invalid_argument("integrator step must be positive");
  if (sc.safe_radius < 0.0) throw std::invalid_argument("safe radius must be nonnegative");
  if (sc.delay.kind != DelayModel::Kind::Zero && !(sc.delay.value > 0.0))
    throw std::invalid_argument("delay value must be positive");
  validate_signal(sc.disturbance, sc.system.d_bounds, "disturbance");
  validate_signal(sc.model_error, sc.system.mu_bounds, "model error");

  const bool self_trig = sc.sampler.kind == Sampler::Kind::SelfTriggered;
  if (self_trig && !sc.sampler.policy)
    throw std::invalid_argument("self-triggered sampler needs a policy");
  if (sc.sampler.kind == Sampler::Kind::ConstantPeriod && !(sc.sampler.period > 0.0))
    throw std::invalid_argument("constant-period sampler needs a positive period");
  if (sc.sampler.kind == Sampler::Kind::Continuous && sc.delay.kind != DelayModel::Kind::Zero)
    throw std::invalid_argument("continuous feedback admits no actuation delay");

  Rng precompute_rng = stream(sc.seed, 1);
  Rng trigger_rng = stream(sc.seed, 2);
  Rng delay_rng = stream(sc.seed, 3);
  Rng signal_rng = stream(sc.seed, 4);

  TriggerPolicy* policy = sc.sampler.policy ? &*sc.sampler.policy : nullptr;
  if (self_trig && !policy->ready()) policy->precompute(sc.x0, precompute_rng);

  const double guard =
      1e3 * (sc.safe_radius > 0.0 ? sc.safe_radius : std::max(norm2(sc.x0), 1.0));

  Trace tr;
  if (self_trig) tr.trigger_bounds = policy->bounds();

  Vec x = sc.x0;
  Vec u = Vec(sc.system.input_dim, 0.0);  // nothing is actuated before t0 + delay0
  double t = sc.t0;
  Vec d_held(sc.system.d_bounds.dims(), 0.0);
  Vec mu_held(sc.system.mu_bounds.dims(), 0.0);

  push_point(tr, t, x, u, sc.certificate.V(x), GridEvent::None);

  auto monitor = [&](double tp, const Vec& xp) {
    if (sc.safe_radius > 0.0 && !tr.first_violation_time && norm2(xp) >= sc.safe_radius)
      tr.first_violation_time = tp;
  };
  monitor(t, x);

  // integrates [a, b) under control uc; the grid point at b records the
  // control taking effect there
  bool alive = true;
  auto integrate_span = [&](double a, double b, const Vec& uc, const Vec& u_at_end,
                            GridEvent end_marker) {
    if (b <= a) return;
    const int m = std::max(1, int(std::ceil((b - a) / sc.integrator_step - 1e-9)));
    const double h = (b - a) / m;
    for (int i = 0; i < m && alive; ++i) {
      const double ts = a + i * h;
      const Vec d = eval_signal(sc.disturbance, sc.system.d_bounds, ts, d_held);
      const Vec mu = eval_signal(sc.model_error, sc.system.mu_bounds, ts, mu_held);
      const auto field = [&](const Vec& xx) { return eval_perturbed(sc.system, xx, uc, mu, d); };
      x = rk4_step(field, x, h);
      const bool last = i == m - 1;
      const double te = last ? b : ts + h;
      push_point(tr, te, x, last ? u_at_end : uc, sc.certificate.V(x),
                 last ? end_marker : GridEvent::None);
      monitor(te, x);
      if (norm2(x) > guard) {
        tr.diverged = true;
        tr.divergence_time = te;
        alive = false;
      }
    }
  };

  const int max_events = 2000000;
  int k = 0;
  while (alive && t < sc.t_final - 1e-12) {
    if (k >= max_events) {
      tr.internal_error = true;
      break;
    }
    const Vec x_k = x;

    double tau = 0.0;
    if (self_trig) {
      if (!policy->in_domain(x_k)) {
        // cannot evaluate the trigger here; the safety monitor has the verdict
        if (sc.safe_radius > 0.0 && !tr.first_violation_time) tr.first_violation_time = t;
        break;
      }
      tau = policy->next_sample_time(x_k, trigger_rng);
      if (tau < policy->bound_config().tau_floor) {
        tr.internal_error = true;
        break;
      }
    } else if (sc.sampler.kind == Sampler::Kind::ConstantPeriod) {
      tau = sc.sampler.period;
    } else {
      tau = sc.integrator_step;
    }

    double dk = 0.0;
    if (sc.delay.kind == DelayModel::Kind::Constant) {
      dk = sc.delay.value;
    } else if (sc.delay.kind == DelayModel::Kind::UniformRandom) {
      dk = std::uniform_real_distribution<double>(0.0, sc.delay.value)(delay_rng);
    }
    double delay_cap = tau;
    if (self_trig) delay_cap = std::min(delay_cap, policy->bounds().delta_max);
    if (dk >= delay_cap) dk = delay_cap * (1.0 - 1e-9);

    const Vec u_new = sc.feedback.kappa(x_k);
    if (sc.disturbance.kind == SignalModel::Kind::HeldUniform)
      d_held = sample_box(signal_rng, sc.system.d_bounds.lo, sc.system.d_bounds.hi);
    if (sc.model_error.kind == SignalModel::Kind::HeldUniform)
      mu_held = sample_box(signal_rng, sc.system.mu_bounds.lo, sc.system.mu_bounds.hi);

    tr.markers.back() = GridEvent::Sample;
    if (dk == 0.0) tr.controls.back() = u_new;  // actuation coincides with the sample
    tr.events.push_back({k, t, dk, tau, x_k, u_new});

    const double t_next = t + tau;
    const double t_act = t + dk;
    if (dk > 0.0)
      integrate_span(t, std::min(t_act, sc.t_final), u, u_new,
                     t_act <= sc.t_final ? GridEvent::Actuate : GridEvent::None);
    if (alive) integrate_span(std::max(t, std::min(t_act, sc.t_final)),
                              std::min(t_next, sc.t_final), u_new, u_new, GridEvent::None);

    u = u_new;
    t = t_next;
    ++k;
  }

  return tr;
}

SafetyVerdict check_safety(const Trace& tr, double delta) {
  if (tr.times.empty()) throw std::invalid_argument("trace is empty");
  if (!(delta > 0.0)) throw std::invalid_argument("safe radius must be positive");
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    if (norm2(tr.states[i]) >= delta) return {false, tr.times[i]};
  return {true, std::nullopt};
}

DecreaseVerdict check_lyapunov_decrease(const Trace& tr, const LyapunovCertificate& cert,
                                        double theta, double tol) {
  if (!(theta > 0.0) || theta >= 1.0)
    throw std::invalid_argument("budget share theta must lie in (0, 1)");
  if (tr.times.size() < 2) throw std::invalid_argument("trace is too short for quotients");

  // before the first actuation the loop is still open, nothing is claimed
  double t_start = tr.times.front();
  if (!tr.events.empty()) t_start = tr.events.front().t + tr.events.front().delay;

  DecreaseVerdict v;
  v.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < tr.times.size(); ++i) {
    if (tr.times[i] < t_start - 1e-12) continue;
    const double r = norm2(tr.states[i]);
    if (r <= cert.valid_inner_radius || r > cert.valid_radius) continue;
    const double q = (tr.v_values[i + 1] - tr.v_values[i]) / (tr.times[i + 1] - tr.times[i]);
    const double margin = q + (1.0 - theta) * cert.alpha3(r);
    ++v.checked_points;
    if (margin > v.worst_margin) v.worst_margin = margin;
    if (margin > tol && !v.first_violation_time) v.first_violation_time = tr.times[i];
  }
  if (v.checked_points == 0) v.worst_margin = 0.0;
  v.ok = !v.first_violation_time;
  return v;
}

TraceStats trace_stats(const Trace& tr) {
  if (tr.events.empty()) throw std::invalid_argument("trace has no sampling events");
  TraceStats s;
  s.sample_count = int(tr.events.size());
  s.min_gap = std::numeric_limits<double>::infinity();
  for (const SampleEvent& e : tr.events) {
    s.mean_gap += e.tau_s;
    s.min_gap = std::min(s.min_gap, e.tau_s);
    s.max_gap = std::max(s.max_gap, e.tau_s);
    s.mean_delay += e.delay;
    s.max_delay = std::max(s.max_delay, e.delay);
  }
  s.mean_gap /= s.sample_count;
  s.mean_delay /= s.sample_count;
  return s;
}

void write_trace_csv(const Trace& tr, std::ostream& out) {
  if (tr.times.empty()) throw std::invalid_argument("trace is empty");
  const std::size_t n = tr.states.front().size();
  const std::size_t p = tr.controls.front().size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t j = 1; j <= p; ++j) out << ",u" << j;
  out << ",V,event\n";

  char buf[40];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    num(tr.times[i]);
    for (double v : tr.states[i]) {
      out << ',';
      num(v);
    }
    for (double v : tr.controls[i]) {
      out << ',';
      num(v);
    }
    out << ',';
    num(tr.v_values[i]);
    switch (tr.markers[i]) {
      case GridEvent::None: out << ",-\n"; break;
      case GridEvent::Sample: out << ",sample\n"; break;
      case GridEvent::Actuate: out << ",actuate\n"; break;
    }
  }
}

void write_trace_csv(const Trace& tr, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open trace output file: " + path);
  write_trace_csv(tr, f);
  if (!f.good()) throw std::runtime_error("failed writing trace output file: " + path);
}

}  // namespace stc
