#include "stc/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace stc {

bool Box::contains(const Vec& v, double tol) const {
  if (v.size() != lo.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < lo[i] - tol || v[i] > hi[i] + tol) return false;
  return true;
}

Box Box::symmetric(const Vec& half_width) {
  Box b;
  b.hi = half_width;
  b.lo = half_width;
  for (auto& v : b.lo) v = -v;
  return b;
}

namespace {

void check_state(const SystemModel& sys, const Vec& x) {
  if (x.size() != sys.state_dim) throw std::invalid_argument("state dimension mismatch");
}

void check_input(const SystemModel& sys, const Vec& u) {
  if (u.size() != sys.input_dim) throw std::invalid_argument("input dimension mismatch");
}

}  // namespace

Vec eval_nominal(const SystemModel& sys, const Vec& x, const Vec& u) {
  check_state(sys, x);
  check_input(sys, u);
  return sys.nominal_field(x, u);
}

Vec eval_perturbed(const SystemModel& sys, const Vec& x, const Vec& u, const Vec& mu,
                   const Vec& d) {
  check_state(sys, x);
  check_input(sys, u);
  if (mu.size() != sys.mu_bounds.dims() || d.size() != sys.d_bounds.dims())
    throw std::invalid_argument("perturbation dimension mismatch");
  if (!sys.mu_bounds.contains(mu)) throw std::domain_error("model perturbation outside bounds");
  if (!sys.d_bounds.contains(d)) throw std::domain_error("disturbance outside bounds");
  Vec out = sys.nominal_field(x, u);
  if (sys.perturbation_field) {
    Vec g = sys.perturbation_field(x, u, mu, d);
    if (g.size() != sys.state_dim)
      throw std::invalid_argument("perturbation field dimension mismatch");
    axpy(out, 1.0, g);
  }
  return out;
}

Vec holding_error(const SystemModel& sys, const FeedbackLaw& fb, const Vec& x, const Vec& x_k) {
  check_state(sys, x);
  check_state(sys, x_k);
  return eval_nominal(sys, x, fb.kappa(x_k)) - eval_nominal(sys, x, fb.kappa(x));
}

JacobianBundle jacobians(const SystemModel& sys, const Vec& x, const Vec& u,
                         double fd_step_scale) {
  check_state(sys, x);
  check_input(sys, u);
  JacobianBundle jb;
  if (sys.dfdx && sys.dfdu) {
    jb.dfdx = sys.dfdx(x, u);
    jb.dfdu = sys.dfdu(x, u);
    return jb;
  }
  const double h = fd_step_scale * (1.0 + norm2(x));
  jb.dfdx = Mat(sys.state_dim, sys.state_dim);
  jb.dfdu = Mat(sys.state_dim, sys.input_dim);
  for (std::size_t j = 0; j < sys.state_dim; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec fp = sys.nominal_field(xp, u);
    const Vec fm = sys.nominal_field(xm, u);
    for (std::size_t i = 0; i < sys.state_dim; ++i) jb.dfdx(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  for (std::size_t j = 0; j < sys.input_dim; ++j) {
    Vec up = u, um = u;
    up[j] += h;
    um[j] -= h;
    const Vec fp = sys.nominal_field(x, up);
    const Vec fm = sys.nominal_field(x, um);
    for (std::size_t i = 0; i < sys.state_dim; ++i) jb.dfdu(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return jb;
}

Mat feedback_jacobian(const FeedbackLaw& fb, const Vec& x, double fd_step_scale) {
  if (x.size() != fb.state_dim) throw std::invalid_argument("state dimension mismatch");
  if (fb.jacobian) return fb.jacobian(x);
  const double h = fd_step_scale * (1.0 + norm2(x));
  Mat jk(fb.input_dim, fb.state_dim);
  for (std::size_t j = 0; j < fb.state_dim; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec kp = fb.kappa(xp);
    const Vec km = fb.kappa(xm);
    for (std::size_t i = 0; i < fb.input_dim; ++i) jk(i, j) = (kp[i] - km[i]) / (2.0 * h);
  }
  return jk;
}

void validate(const SystemModel& sys, const FeedbackLaw& fb) {
  if (sys.state_dim == 0 || sys.input_dim == 0)
    throw std::invalid_argument("system dimensions must be positive");
  if (!sys.nominal_field) throw std::invalid_argument("nominal field is not set");
  if (fb.state_dim != sys.state_dim || fb.input_dim != sys.input_dim)
    throw std::invalid_argument("feedback law dimensions do not match the system");
  if (!fb.kappa) throw std::invalid_argument("feedback law is not set");
  if (!(sys.domain_radius > 0.0)) throw std::invalid_argument("domain radius must be positive");

  const Vec origin(sys.state_dim, 0.0);
  if (norm2(fb.kappa(origin)) > 1e-12)
    throw std::invalid_argument("feedback law must vanish at the origin");
  if (sys.perturbation_field) {
    const Vec mu0(sys.mu_bounds.dims(), 0.0), d0(sys.d_bounds.dims(), 0.0);
    if (!sys.mu_bounds.contains(mu0) || !sys.d_bounds.contains(d0))
      throw std::invalid_argument("perturbation bounds must contain zero");
    const Vec u0(sys.input_dim, 0.0);
    if (norm2(sys.perturbation_field(origin, u0, mu0, d0)) > 1e-12)
      throw std::invalid_argument("perturbation field must vanish at (mu, d) = 0");
  }
}

}  // namespace stc
