#include "stc/classk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stc {

namespace {
constexpr int kGridCheckPoints = 128;
}

ClassK ClassK::power(double coeff, double exponent, double domain_max) {
  if (!(coeff > 0.0) || !(exponent > 0.0))
    throw std::invalid_argument("class-K power law needs positive coefficient and exponent");
  if (!(domain_max > 0.0)) throw std::invalid_argument("class-K domain must be positive");
  ClassK k;
  k.power_ = true;
  k.coeff_ = coeff;
  k.exponent_ = exponent;
  k.domain_max_ = domain_max;
  k.check_strictly_increasing();
  if (exponent == 1.0) {
    // slope is exactly the coefficient; both constants are free
    k.lipschitz_ = coeff;
    k.inv_lipschitz_ = 1.0 / coeff;
  }
  return k;
}

ClassK ClassK::tabulated(Vec knots, Vec values) {
  if (knots.size() != values.size() || knots.size() < 2)
    throw std::invalid_argument("class-K table needs matching knot/value lists of length >= 2");
  if (knots.front() != 0.0 || values.front() != 0.0)
    throw std::invalid_argument("class-K table must start at (0, 0)");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]) || !(values[i] > values[i - 1]))
      throw std::invalid_argument("class-K table must be strictly increasing");
  ClassK k;
  k.power_ = false;
  k.domain_max_ = knots.back();
  k.knots_ = std::move(knots);
  k.values_ = std::move(values);
  k.check_strictly_increasing();
  return k;
}

void ClassK::check_strictly_increasing() const {
  double prev = operator()(0.0);
  if (prev != 0.0) throw std::invalid_argument("class-K function must vanish at 0");
  for (int i = 1; i <= kGridCheckPoints; ++i) {
    const double r = domain_max_ * double(i) / kGridCheckPoints;
    const double v = operator()(r);
    if (!(v > prev)) throw std::invalid_argument("class-K function must be strictly increasing");
    prev = v;
  }
}

double ClassK::operator()(double r) const {
  if (r < 0.0 || r > domain_max_ * (1.0 + 1e-12))
    throw std::domain_error("class-K evaluation outside [0, domain_max]");
  if (power_) return coeff_ * std::pow(r, exponent_);
  // linear interpolation between enclosing knots
  if (r >= knots_.back()) return values_.back();
  std::size_t hi = 1;
  while (knots_[hi] < r) ++hi;
  const double t = (r - knots_[hi - 1]) / (knots_[hi] - knots_[hi - 1]);
  return values_[hi - 1] + t * (values_[hi] - values_[hi - 1]);
}

double ClassK::max_value() const { return operator()(domain_max_); }

double ClassK::inverse(double s) const {
  if (s < 0.0 || s > max_value() * (1.0 + 1e-12))
    throw std::domain_error("class-K inverse outside range");
  if (power_) return std::pow(s / coeff_, 1.0 / exponent_);
  // bisection on a monotone function
  double lo = 0.0, hi = domain_max_;
  const double tol = 1e-12 * domain_max_;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (operator()(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void ClassK::declare_lipschitz(double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("Lipschitz bound must be positive");
  if (power_) {
    if (exponent_ < 1.0)
      throw std::invalid_argument(
          "power law with exponent < 1 has unbounded slope at 0; not Lipschitz");
    const double true_bound = coeff_ * exponent_ * std::pow(domain_max_, exponent_ - 1.0);
    if (bound < true_bound * (1.0 - 1e-12))
      throw std::invalid_argument("declared Lipschitz bound is below the actual slope bound");
  } else {
    double max_slope = 0.0;
    for (std::size_t i = 1; i < knots_.size(); ++i)
      max_slope = std::max(max_slope,
                           (values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]));
    if (bound < max_slope * (1.0 - 1e-12))
      throw std::invalid_argument("declared Lipschitz bound is below the table slope bound");
  }
  lipschitz_ = bound;
}

void ClassK::declare_inverse_lipschitz(double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("Lipschitz bound must be positive");
  if (power_) {
    if (exponent_ > 1.0)
      throw std::invalid_argument(
          "power law with exponent > 1 has an inverse with unbounded slope at 0; not Lipschitz");
    const double true_bound =
        std::pow(1.0 / coeff_, 1.0 / exponent_) / exponent_ *
        std::pow(max_value(), 1.0 / exponent_ - 1.0);
    if (exponent_ == 1.0 && bound < (1.0 / coeff_) * (1.0 - 1e-12))
      throw std::invalid_argument("declared inverse Lipschitz bound is below 1/coefficient");
    if (exponent_ < 1.0 && bound < true_bound * (1.0 - 1e-12))
      throw std::invalid_argument("declared inverse Lipschitz bound is below the slope bound");
  } else {
    double min_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < knots_.size(); ++i)
      min_slope = std::min(min_slope,
                           (values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]));
    if (bound < (1.0 / min_slope) * (1.0 - 1e-12))
      throw std::invalid_argument("declared inverse Lipschitz bound is below the table bound");
  }
  inv_lipschitz_ = bound;
}

}  // namespace stc
