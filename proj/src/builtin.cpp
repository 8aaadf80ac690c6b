#include "stc/builtin.hpp"

#include <stdexcept>

namespace stc {

namespace {

Plant make_example1(double disturbance_bound) {
  Plant p;
  p.system.name = "example1";
  p.system.state_dim = 2;
  p.system.input_dim = 1;
  p.system.domain_radius = 2.0 / 3.0;
  p.system.nominal_field = [](const Vec& x, const Vec& u) {
    return Vec{-x[0] + x[1] + x[0] * x[0], (1.0 + x[0]) * u[0]};
  };
  p.system.dfdx = [](const Vec& x, const Vec& u) {
    Mat j(2, 2);
    j(0, 0) = -1.0 + 2.0 * x[0];
    j(0, 1) = 1.0;
    j(1, 0) = u[0];
    return j;
  };
  p.system.dfdu = [](const Vec& x, const Vec&) {
    Mat j(2, 1);
    j(1, 0) = 1.0 + x[0];
    return j;
  };
  if (disturbance_bound > 0.0) {
    p.system.d_bounds = Box::symmetric({disturbance_bound});
    p.system.perturbation_field = [](const Vec&, const Vec&, const Vec&, const Vec& d) {
      return Vec{0.0, d[0]};
    };
  }

  p.feedback.state_dim = 2;
  p.feedback.input_dim = 1;
  p.feedback.kappa = [](const Vec& x) { return Vec{-x[1]}; };
  p.feedback.jacobian = [](const Vec&) {
    Mat j(1, 2);
    j(0, 1) = -1.0;
    return j;
  };

  const double radius = 2.0 / 3.0;
  const QuadraticForm v(Mat{{2.0, 1.0}, {1.0, 3.0}});
  // Gradient bound stated as eigmax * r rather than the tight 2 eigmax * r.
  p.certificate = quadratic_certificate(v, ClassK::power(0.5, 2.0, radius), radius,
                                        /*alpha4_factor=*/1.0);
  return p;
}

Plant make_annulus_linear(double disturbance_bound) {
  Plant p;
  p.system.name = "annulus-linear";
  p.system.state_dim = 1;
  p.system.input_dim = 1;
  p.system.domain_radius = 1.0;
  p.system.nominal_field = [](const Vec&, const Vec& u) { return Vec{u[0]}; };
  p.system.dfdx = [](const Vec&, const Vec&) { return Mat(1, 1); };
  p.system.dfdu = [](const Vec&, const Vec&) {
    Mat j(1, 1);
    j(0, 0) = 1.0;
    return j;
  };
  if (disturbance_bound > 0.0) {
    p.system.d_bounds = Box::symmetric({disturbance_bound});
    p.system.perturbation_field = [](const Vec&, const Vec&, const Vec&, const Vec& d) {
      return Vec{d[0]};
    };
  }

  p.feedback.state_dim = 1;
  p.feedback.input_dim = 1;
  p.feedback.kappa = [](const Vec& x) { return Vec{-x[0]}; };
  p.feedback.jacobian = [](const Vec&) {
    Mat j(1, 1);
    j(0, 0) = -1.0;
    return j;
  };

  // True decrease rate is 2 x^2; the linear alpha3 = 0.2 r undershoots
  // it on the annulus (2 r^2 >= 0.2 r for r >= 0.1) and stays invertible
  // with a finite inverse slope, which the stability trigger needs.
  const QuadraticForm v(Mat{{1.0}});
  p.certificate = quadratic_certificate(v, ClassK::power(0.2, 1.0, 1.0), 1.0,
                                        /*alpha4_factor=*/2.0, /*valid_inner_radius=*/0.1);
  return p;
}

}  // namespace

Plant builtin_plant(const std::string& name, double disturbance_bound) {
  if (disturbance_bound < 0.0)
    throw std::invalid_argument("disturbance bound must be nonnegative");
  if (name == "example1") return make_example1(disturbance_bound);
  if (name == "annulus-linear") return make_annulus_linear(disturbance_bound);
  throw std::invalid_argument("unknown builtin plant: " + name);
}

std::vector<std::string> builtin_names() { return {"example1", "annulus-linear"}; }

}  // namespace stc
