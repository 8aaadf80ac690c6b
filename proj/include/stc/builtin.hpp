#pragma once

#include <string>
#include <vector>

#include "stc/dynamics.hpp"
#include "stc/lyapunov.hpp"

namespace stc {

/// A ready-to-run closed loop: plant, state feedback, and the decrease
/// certificate the trigger machinery consumes.
struct Plant {
  SystemModel system;
  FeedbackLaw feedback;
  LyapunovCertificate certificate;
};

/// Plants shipped with the library, looked up by name:
///
///  * "example1"        planar polynomial plant with input gain 1 + x1,
///                      feedback u = -x2, quadratic certificate valid
///                      on the ball of radius 2/3
///  * "annulus-linear"  scalar integrator under u = -x, certificate
///                      valid on the annulus 0.1 <= |x| <= 1
///
/// disturbance_bound > 0 adds one additive disturbance channel on the
/// actuated equation with amplitude box [-bound, bound]; 0 leaves the
/// model unperturbed. Throws std::invalid_argument for unknown names
/// or a negative bound.
Plant builtin_plant(const std::string& name, double disturbance_bound = 0.0);

std::vector<std::string> builtin_names();

}  // namespace stc
