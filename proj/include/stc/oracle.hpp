#pragma once

#include <functional>

#include "stc/dynamics.hpp"
#include "stc/lyapunov.hpp"
#include "stc/random.hpp"

namespace stc {

/// What a brute-force hold-time search checks along the held trajectory.
struct HoldCriterion {
  enum class Kind { LyapunovDecrease, SafetyBall };
  Kind kind = Kind::SafetyBall;
  LyapunovCertificate cert;  // LyapunovDecrease
  double theta = 0.0;
  double delta = 0.0;        // SafetyBall

  /// grad V . f0(x, u_held) <= -(1 - theta) * alpha3(|x|) wherever the
  /// certificate applies; leaving the validity ball counts as failure.
  static HoldCriterion lyapunov_decrease(LyapunovCertificate cert, double theta);

  /// |x(t)| < delta.
  static HoldCriterion safety_ball(double delta);
};

/// Ground truth for the trigger's hold times: integrates the held-input
/// flow from x_k with the given fine step, marches to the first grid
/// point where the criterion fails, then bisects inside that step to
/// the stated tolerance. Returns h_max when nothing fails, and exactly
/// 0 when the criterion already fails at x_k itself. Reported times are
/// first-crossing times, which is the conservative boundary even for
/// non-monotone criteria.
double oracle_hold_time(const SystemModel& sys, const FeedbackLaw& fb, const Vec& x_k,
                        const HoldCriterion& criterion, double h_max, double fine_step,
                        double tol = 1e-9);

/// Densified sampling maximum of a scalar field over the origin ball;
/// the baseline that the inflated estimators must dominate.
double oracle_max_norm(const std::function<double(const Vec&)>& field, std::size_t dim,
                       double radius, int n_dense, Rng& rng);

/// Bisection solution of m1*y + m2*y^2 = c on the increasing branch,
/// capped like the closed form. Cross-check for solve_hold_inequality.
double oracle_root(double m1, double m2, double c, double tol, double y_cap = 1e3);

}  // namespace stc
