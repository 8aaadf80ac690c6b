#include "stc/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stc {

namespace {

// Largest ball radius certified to contain the sublevel set {V <= level}:
// alpha1(|x|) <= V(x) forces |x| <= alpha1^{-1}(level), clamped to the
// certificate's validity ball.
double sublevel_bounding_radius(const LyapunovCertificate& cert, double level) {
  if (level <= 0.0) return 0.0;
  if (level >= cert.alpha1.max_value() * (1.0 - 1e-12)) return cert.valid_radius;
  return std::min(cert.alpha1.inverse(level), cert.valid_radius);
}

// Scales x outward until V(s*x) hits the level; assumes V(x) <= level and
// that the crossing lies inside the bounding ball.
Vec scale_to_level(const LyapunovCertificate& cert, const Vec& x, double level,
                   double bounding_radius) {
  const double nx = norm2(x);
  if (nx == 0.0) return x;
  double lo = 1.0, hi = bounding_radius / nx;
  if (cert.V(hi * x) < level) return hi * x;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cert.V(mid * x) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * x;
}

}  // namespace

Vec holding_error_rate(const SystemModel& sys, const FeedbackLaw& fb, const Vec& x_k) {
  const Vec u_k = fb.kappa(x_k);
  const Vec flow = eval_nominal(sys, x_k, u_k);
  const Mat dk = feedback_jacobian(fb, x_k);
  const Vec du = matvec(dk, flow);                       // d/dt kappa(x(t)) at t_k
  const Mat dfdu = jacobians(sys, x_k, u_k).dfdu;
  return -1.0 * matvec(dfdu, du);
}

double holding_error_curvature(const SystemModel& sys, const FeedbackLaw& fb, const Vec& x_bar,
                               const Vec& x_k, double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("curvature step must be positive");
  const Vec u_k = fb.kappa(x_k);
  const auto held = [&](const Vec& x) { return eval_nominal(sys, x, u_k); };
  const Vec xp = rk4_step(held, x_bar, fd_step);
  const Vec xm = rk4_step(held, x_bar, -fd_step);
  const Vec d0 = holding_error(sys, fb, x_bar, x_k);
  const Vec dp = holding_error(sys, fb, xp, x_k);
  const Vec dm = holding_error(sys, fb, xm, x_k);
  Vec dd = dp;
  axpy(dd, -2.0, d0);
  axpy(dd, 1.0, dm);
  return 0.5 * norm2(dd) / (fd_step * fd_step);
}

double estimate_curvature_global(const SystemModel& sys, const FeedbackLaw& fb, double radius,
                                 const BoundConfig& bounds, Rng& rng) {
  if (!(radius > 0.0)) throw std::invalid_argument("curvature region radius must be positive");
  if (bounds.n_level_samples <= 0) throw std::invalid_argument("sample count must be positive");
  double best = 0.0;
  for (int i = 0; i < bounds.n_level_samples; ++i) {
    const Vec x_bar = sample_ball(rng, sys.state_dim, radius);
    const Vec x_k = sample_ball(rng, sys.state_dim, radius);
    best = std::max(best, holding_error_curvature(sys, fb, x_bar, x_k, bounds.fd_step));
  }
  return bounds.safety_margin * best;
}

double estimate_curvature_level_set(const SystemModel& sys, const FeedbackLaw& fb,
                                    const LyapunovCertificate& cert, const Vec& x_k,
                                    const BoundConfig& bounds, Rng& rng) {
  if (bounds.n_level_samples <= 0) throw std::invalid_argument("sample count must be positive");
  const double level = cert.V(x_k);
  const double r = sublevel_bounding_radius(cert, level);
  if (r == 0.0) return 0.0;

  double best = holding_error_curvature(sys, fb, x_k, x_k, bounds.fd_step);
  int accepted = 0;
  // rejection sampling inside the bounding ball; the attempt cap guards
  // against very eccentric V
  const long attempts_cap = 200L * bounds.n_level_samples;
  for (long i = 0; i < attempts_cap && accepted < bounds.n_level_samples; ++i) {
    const Vec x_bar = sample_ball(rng, sys.state_dim, r);
    if (cert.V(x_bar) > level) continue;
    ++accepted;
    best = std::max(best, holding_error_curvature(sys, fb, x_bar, x_k, bounds.fd_step));
  }
  return bounds.safety_margin * best;
}

double estimate_delay_sensitivity(const SystemModel& sys, const FeedbackLaw& fb, double radius,
                                  const BoundConfig& bounds, Rng& rng) {
  if (!(radius > 0.0)) throw std::invalid_argument("sensitivity region radius must be positive");
  if (bounds.n_lipschitz_samples <= 0) throw std::invalid_argument("sample count must be positive");
  double l_input = 0.0, l_feedback = 0.0, l_flow = 0.0;
  for (int i = 0; i < bounds.n_lipschitz_samples; ++i) {
    const Vec x = sample_ball(rng, sys.state_dim, radius);
    const Vec x_k = sample_ball(rng, sys.state_dim, radius);
    l_input = std::max(l_input, frobenius(jacobians(sys, x, fb.kappa(x)).dfdu));
    l_feedback = std::max(l_feedback, frobenius(feedback_jacobian(fb, x)));
    l_flow = std::max(l_flow, norm2(eval_nominal(sys, x, fb.kappa(x_k))));
  }
  return bounds.safety_margin * l_input * l_feedback * l_flow;
}

double solve_hold_inequality(double m1, double m2, double c, double tau_cap) {
  if (m1 < 0.0 || m2 < 0.0)
    throw std::invalid_argument("Taylor coefficients must be nonnegative");
  if (!(tau_cap > 0.0)) throw std::invalid_argument("tau_cap must be positive");
  if (!(c > 0.0)) throw std::domain_error("hold inequality has no positive solution");
  if (m1 == 0.0 && m2 == 0.0) return tau_cap;
  // stable form of the positive quadratic root, exact in the m2 = 0 limit
  const double y = 2.0 * c / (m1 + std::sqrt(m1 * m1 + 4.0 * m2 * c));
  return std::min(y, tau_cap);
}

double admissible_bound(const LyapunovCertificate& cert, double delta, double theta_g) {
  if (!(theta_g > 0.0) || theta_g >= 1.0)
    throw std::invalid_argument("disturbance share must lie in (0, 1)");
  return theta_g * comparison_chain(cert, delta) / cert.alpha4(delta);
}

AdmissibilityReport check_admissible(const SystemModel& sys, const FeedbackLaw& fb,
                                     const LyapunovCertificate& cert, double delta,
                                     double theta_g, int n_samples, double safety_margin,
                                     Rng& rng) {
  if (n_samples <= 0) throw std::invalid_argument("sample count must be positive");
  if (!(safety_margin > 0.0)) throw std::invalid_argument("safety margin must be positive");
  AdmissibilityReport rep;
  rep.threshold = admissible_bound(cert, delta, theta_g);

  double worst = 0.0;
  if (sys.perturbation_field) {
    for (int i = 0; i < n_samples; ++i) {
      const Vec x = sample_ball(rng, sys.state_dim, delta);
      const Vec x_k = sample_ball(rng, sys.state_dim, delta);
      const Vec mu = sample_box(rng, sys.mu_bounds.lo, sys.mu_bounds.hi);
      const Vec d = sample_box(rng, sys.d_bounds.lo, sys.d_bounds.hi);
      worst = std::max(worst, norm2(sys.perturbation_field(x, fb.kappa(x_k), mu, d)));
    }
  }
  rep.sampled_max = safety_margin * worst;
  rep.margin = rep.threshold - rep.sampled_max;
  rep.admissible = rep.sampled_max <= rep.threshold;
  return rep;
}

TriggerPolicy::TriggerPolicy(SystemModel sys, FeedbackLaw fb, LyapunovCertificate cert,
                             TriggerMode mode, TriggerBudget budget, double delta,
                             BoundConfig bounds, CurvatureMode curvature_mode,
                             DelayNumerator delay_numerator)
    : sys_(std::move(sys)),
      fb_(std::move(fb)),
      cert_(std::move(cert)),
      mode_(mode),
      budget_(budget),
      delta_(delta),
      bcfg_(bounds),
      curvature_mode_(curvature_mode),
      delay_numerator_(delay_numerator) {
  validate(sys_, fb_);

  if (!(budget_.theta1 > 0.0) || budget_.theta1 >= 1.0 || !(budget_.theta2 > 0.0) ||
      budget_.theta2 >= 1.0)
    throw std::invalid_argument("hold and delay shares must lie in (0, 1)");
  if (mode_ == TriggerMode::SafetyPerturbed) {
    if (!(budget_.theta_g > 0.0) || budget_.theta_g >= 1.0)
      throw std::invalid_argument("perturbed mode needs a disturbance share in (0, 1)");
  } else if (budget_.theta_g != 0.0) {
    throw std::invalid_argument("disturbance share is only meaningful in perturbed mode");
  }
  if (budget_.theta1 + budget_.theta2 + budget_.theta_g >= 1.0)
    throw std::invalid_argument("budget shares must sum below 1");

  if (mode_ == TriggerMode::Stability) {
    if (delta_ != 0.0)
      throw std::invalid_argument("stability mode takes no safe radius; set it to 0");
    if (!cert_.alpha3.inverse_lipschitz() || !cert_.alpha4.lipschitz())
      throw std::invalid_argument(
          "stability mode needs declared Lipschitz constants for inverse alpha3 and alpha4");
  } else {
    if (!(delta_ > 0.0) || delta_ > cert_.valid_radius)
      throw std::invalid_argument("safe radius must lie in (0, valid_radius]");
  }

  if (bcfg_.n_level_samples <= 0 || bcfg_.n_lipschitz_samples <= 0)
    throw std::invalid_argument("sample counts must be positive");
  if (!(bcfg_.fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");
  if (!(bcfg_.safety_margin > 0.0))
    throw std::invalid_argument("safety margin must be positive");
  if (!(bcfg_.tau_floor > 0.0) || bcfg_.tau_cap <= bcfg_.tau_floor)
    throw std::invalid_argument("need 0 < tau_floor < tau_cap");
}

double TriggerPolicy::compute_hold_budget() const {
  if (mode_ == TriggerMode::Stability)
    return budget_.theta1 / (*cert_.alpha3.inverse_lipschitz() * *cert_.alpha4.lipschitz());
  return budget_.theta1 * comparison_chain(cert_, delta_) / cert_.alpha4(delta_);
}

double TriggerPolicy::scan_tau_min(Rng& rng) const {
  const double c = compute_hold_budget();
  const bool safety = mode_ != TriggerMode::Stability;
  double v0 = 0.0, bounding = delta_;
  if (!safety) {
    v0 = precomputed_->envelope_level;
    bounding = precomputed_->envelope_radius;
  }

  double worst = std::numeric_limits<double>::infinity();
  int accepted = 0;
  const long attempts_cap = 200L * bcfg_.n_level_samples;
  for (long i = 0; i < attempts_cap && accepted < bcfg_.n_level_samples; ++i) {
    Vec x_k = sample_ball(rng, sys_.state_dim, bounding);
    if (!safety) {
      if (cert_.V(x_k) > v0) continue;  // rejection into the initial sublevel set
      if (accepted % 4 == 0) x_k = scale_to_level(cert_, x_k, v0, bounding);
    } else if (accepted % 4 == 0 && norm2(x_k) > 0.0) {
      const double s = delta_ / norm2(x_k);
      for (auto& v : x_k) v *= s;  // project onto the safe-ball boundary
    }
    ++accepted;
    const double m1 = norm2(holding_error_rate(sys_, fb_, x_k));
    const double m2 = curvature_for_scan(x_k, rng);
    worst = std::min(worst, solve_hold_inequality(m1, m2, c, bcfg_.tau_cap));
  }
  if (accepted == 0) throw std::runtime_error("minimum-hold scan drew no points in the region");
  return worst;
}

double TriggerPolicy::compute_delta_max(double tau_min) const {
  double share = 0.0;
  if (delay_numerator_ == DelayNumerator::DelayShare) {
    share = budget_.theta2;
  } else {
    share = 1.0 - budget_.theta1 - budget_.theta_g;
  }
  const double m3 = precomputed_->m3;
  if (m3 == 0.0) return tau_min;
  double bound = 0.0;
  if (mode_ == TriggerMode::Stability) {
    bound = share / (*cert_.alpha3.inverse_lipschitz() * *cert_.alpha4.lipschitz() * m3);
  } else {
    bound = share * comparison_chain(cert_, delta_) / (cert_.alpha4(delta_) * m3);
  }
  return std::min(bound, tau_min);
}

void TriggerPolicy::precompute(const Vec& x0, Rng& rng) {
  if (x0.size() != sys_.state_dim) throw std::invalid_argument("state dimension mismatch");

  TriggerBounds b;
  b.hold_budget = compute_hold_budget();

  if (mode_ == TriggerMode::Stability) {
    b.envelope_level = cert_.V(x0);
    if (!(b.envelope_level > 0.0))
      throw std::domain_error("initial state at the origin gives an empty envelope");
  } else {
    b.envelope_level = cert_.alpha2(delta_);
  }
  b.envelope_radius = sublevel_bounding_radius(cert_, b.envelope_level);

  b.m2_global = estimate_curvature_global(sys_, fb_, b.envelope_radius, bcfg_, rng);
  const double m3_radius = mode_ == TriggerMode::Stability ? b.envelope_radius : delta_;
  b.m3 = estimate_delay_sensitivity(sys_, fb_, m3_radius, bcfg_, rng);
  if (mode_ == TriggerMode::SafetyPerturbed)
    b.nu = admissible_bound(cert_, delta_, budget_.theta_g);

  precomputed_ = b;
  precomputed_->tau_min = scan_tau_min(rng);
  precomputed_->delta_max = compute_delta_max(precomputed_->tau_min);
}

double TriggerPolicy::first_order_bound(const Vec& x_k) const {
  return norm2(holding_error_rate(sys_, fb_, x_k));
}

double TriggerPolicy::curvature_for_scan(const Vec& x_k, Rng& rng) const {
  if (curvature_mode_ == CurvatureMode::Global) return precomputed_->m2_global;
  return estimate_curvature_level_set(sys_, fb_, cert_, x_k, bcfg_, rng);
}

double TriggerPolicy::curvature_bound(const Vec& x_k, Rng& rng) const {
  (void)bounds();  // precompute() must have run
  return curvature_for_scan(x_k, rng);
}

double TriggerPolicy::raw_hold_time(const Vec& x_k, Rng& rng) const {
  const TriggerBounds& b = bounds();
  return solve_hold_inequality(first_order_bound(x_k), curvature_for_scan(x_k, rng),
                               b.hold_budget, bcfg_.tau_cap);
}

double TriggerPolicy::next_sample_time(const Vec& x_k, Rng& rng) const {
  if (!in_domain(x_k)) throw std::domain_error("sample outside the trigger domain");
  const TriggerBounds& b = bounds();
  return std::max(raw_hold_time(x_k, rng) - b.delta_max, bcfg_.tau_floor);
}

bool TriggerPolicy::in_domain(const Vec& x_k) const {
  if (x_k.size() != sys_.state_dim) return false;
  const double r = norm2(x_k);
  return mode_ == TriggerMode::Stability ? r <= cert_.valid_radius : r < delta_;
}

const TriggerBounds& TriggerPolicy::bounds() const {
  if (!precomputed_) throw std::logic_error("trigger policy used before precompute()");
  return *precomputed_;
}

}  // namespace stc
