#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "stc/linalg.hpp"

namespace stc {

/// Axis-aligned box of admissible values for a perturbation channel.
/// A zero-dimensional box means the channel is absent.
struct Box {
  Vec lo, hi;

  std::size_t dims() const { return lo.size(); }
  bool contains(const Vec& v, double tol = 0.0) const;
  static Box empty() { return {}; }
  static Box symmetric(const Vec& half_width);
};

/// Control-affine-agnostic plant description. nominal_field is the
/// unperturbed right-hand side f0(x, u); perturbation_field adds the
/// effect of model error mu and exogenous disturbance d and must vanish
/// when both are zero. Jacobian callbacks are optional; finite
/// differences are used when they are absent.
struct SystemModel {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;

  std::function<Vec(const Vec& x, const Vec& u)> nominal_field;
  std::function<Vec(const Vec& x, const Vec& u, const Vec& mu, const Vec& d)> perturbation_field;

  std::function<Mat(const Vec& x, const Vec& u)> dfdx;  // optional analytic Jacobians
  std::function<Mat(const Vec& x, const Vec& u)> dfdu;

  Box mu_bounds;
  Box d_bounds;
  double domain_radius = 1.0;
};

/// Static state feedback u = kappa(x) with kappa(0) = 0.
struct FeedbackLaw {
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  std::function<Vec(const Vec& x)> kappa;
  std::function<Mat(const Vec& x)> jacobian;  // optional, input_dim x state_dim
};

struct JacobianBundle {
  Mat dfdx;  // state_dim x state_dim
  Mat dfdu;  // state_dim x input_dim
};

/// f0(x, u) with dimension checks.
Vec eval_nominal(const SystemModel& sys, const Vec& x, const Vec& u);

/// f0(x, u) + g(x, u, mu, d); mu and d must lie in the declared boxes.
Vec eval_perturbed(const SystemModel& sys, const Vec& x, const Vec& u, const Vec& mu,
                   const Vec& d);

/// Mismatch between the field under a held control sample and the field
/// under fresh feedback: f0(x, kappa(x_k)) - f0(x, kappa(x)).
Vec holding_error(const SystemModel& sys, const FeedbackLaw& fb, const Vec& x, const Vec& x_k);

/// Jacobians of f0 at (x, u); central differences with step
/// h = fd_step_scale * (1 + ||x||) when no callbacks are set.
JacobianBundle jacobians(const SystemModel& sys, const Vec& x, const Vec& u,
                         double fd_step_scale = 1e-6);

/// Jacobian of the feedback law at x (analytic or central differences).
Mat feedback_jacobian(const FeedbackLaw& fb, const Vec& x, double fd_step_scale = 1e-6);

/// Cheap structural checks: dimensions wired up, kappa(0) = 0, and the
/// perturbation field vanishing at (mu, d) = 0 at the origin. Throws
/// std::invalid_argument on failure.
void validate(const SystemModel& sys, const FeedbackLaw& fb);

/// One classical Runge-Kutta step of size h (h may be negative).
template <typename Field>
Vec rk4_step(const Field& f, const Vec& x, double h) {
  Vec k1 = f(x);
  Vec x2 = x;
  axpy(x2, 0.5 * h, k1);
  Vec k2 = f(x2);
  Vec x3 = x;
  axpy(x3, 0.5 * h, k2);
  Vec k3 = f(x3);
  Vec x4 = x;
  axpy(x4, h, k3);
  Vec k4 = f(x4);
  Vec out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Integrates over a signed span with steps no larger than max_step.
template <typename Field>
Vec flow_fixed(const Field& f, Vec x, double span, double max_step) {
  if (span == 0.0) return x;
  const int m = std::max(1, int(std::ceil(std::abs(span) / max_step - 1e-12)));
  const double h = span / m;
  for (int i = 0; i < m; ++i) x = rk4_step(f, x, h);
  return x;
}

}  // namespace stc
