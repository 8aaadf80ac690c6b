#include "stc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stc {

HoldCriterion HoldCriterion::lyapunov_decrease(LyapunovCertificate cert, double theta) {
  if (!(theta > 0.0) || theta >= 1.0)
    throw std::invalid_argument("budget share theta must lie in (0, 1)");
  HoldCriterion c;
  c.kind = Kind::LyapunovDecrease;
  c.cert = std::move(cert);
  c.theta = theta;
  return c;
}

HoldCriterion HoldCriterion::safety_ball(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("safe radius must be positive");
  HoldCriterion c;
  c.kind = Kind::SafetyBall;
  c.delta = delta;
  return c;
}

namespace {

bool criterion_holds(const HoldCriterion& crit, const SystemModel& sys, const Vec& x,
                     const Vec& u_held) {
  const double r = norm2(x);
  if (crit.kind == HoldCriterion::Kind::SafetyBall) return r < crit.delta;
  if (r > crit.cert.valid_radius) return false;  // left the certified region
  if (r <= crit.cert.valid_inner_radius) return true;  // nothing required inside
  const double vdot = dot(crit.cert.grad(x), sys.nominal_field(x, u_held));
  return vdot <= -(1.0 - crit.theta) * crit.cert.alpha3(r) + 1e-12;
}

}  // namespace

double oracle_hold_time(const SystemModel& sys, const FeedbackLaw& fb, const Vec& x_k,
                        const HoldCriterion& crit, double h_max, double fine_step, double tol) {
  if (x_k.size() != sys.state_dim) throw std::invalid_argument("state dimension mismatch");
  if (!(h_max > 0.0) || !(fine_step > 0.0) || !(tol > 0.0))
    throw std::invalid_argument("horizon, step and tolerance must be positive");

  const Vec u_held = fb.kappa(x_k);
  const auto held = [&](const Vec& x) { return eval_nominal(sys, x, u_held); };

  if (!criterion_holds(crit, sys, x_k, u_held)) return 0.0;

  // march to the first failing grid point
  const int m = std::max(1, int(std::ceil(h_max / fine_step - 1e-9)));
  const double h = h_max / m;
  Vec x = x_k;
  double t_pass = 0.0;
  Vec x_pass = x_k;
  double t_fail = -1.0;
  for (int i = 0; i < m; ++i) {
    x = rk4_step(held, x, h);
    const double te = (i == m - 1) ? h_max : (i + 1) * h;
    if (!criterion_holds(crit, sys, x, u_held)) {
      t_fail = te;
      break;
    }
    t_pass = te;
    x_pass = x;
  }
  if (t_fail < 0.0) return h_max;

  // bisect inside the bracketing step, integrating from the last passing state
  double lo = t_pass, hi = t_fail;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const Vec x_mid = flow_fixed(held, x_pass, mid - t_pass, fine_step);
    (criterion_holds(crit, sys, x_mid, u_held) ? lo : hi) = mid;
  }
  return lo;
}

double oracle_max_norm(const std::function<double(const Vec&)>& field, std::size_t dim,
                       double radius, int n_dense, Rng& rng) {
  if (!field) throw std::invalid_argument("field callback is not set");
  if (dim == 0 || !(radius > 0.0) || n_dense <= 0)
    throw std::invalid_argument("need a positive dimension, radius and sample count");
  double best = 0.0;
  for (int i = 0; i < n_dense; ++i)
    best = std::max(best, field(sample_ball(rng, dim, radius)));
  return best;
}

double oracle_root(double m1, double m2, double c, double tol, double y_cap) {
  if (m1 < 0.0 || m2 < 0.0)
    throw std::invalid_argument("Taylor coefficients must be nonnegative");
  if (!(tol > 0.0) || !(y_cap > 0.0))
    throw std::invalid_argument("tolerance and cap must be positive");
  if (!(c > 0.0)) throw std::domain_error("hold inequality has no positive solution");
  if (m1 == 0.0 && m2 == 0.0) return y_cap;

  const auto g = [&](double y) { return m1 * y + m2 * y * y; };
  double hi = 1.0;
  while (g(hi) <= c) {
    hi *= 2.0;
    if (hi >= y_cap) {
      if (g(y_cap) <= c) return y_cap;
      hi = y_cap;
      break;
    }
  }
  double lo = 0.0;
  while (hi - lo > tol * (1.0 + lo)) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= c ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace stc
