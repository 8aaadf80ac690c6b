#pragma once

#include <optional>

#include "stc/linalg.hpp"

namespace stc {

/// Strictly increasing comparison function on [0, domain_max] with
/// value 0 at 0 (class K). Two representations are supported:
///
///  * power law  coeff * r^exponent
///  * tabulated  piecewise-linear through strictly increasing knots
///
/// Inverses are exact for the power law and bisected for tables.
/// Lipschitz constants are declarations used by the stability-mode
/// trigger; they are only accepted when the representation actually
/// admits them on the bounded domain (see declare_* below).
class ClassK {
 public:
  ClassK() = default;  // identity power law on [0, 1]

  static ClassK power(double coeff, double exponent, double domain_max);
  static ClassK tabulated(Vec knots, Vec values);

  double operator()(double r) const;
  double inverse(double s) const;

  double domain_max() const { return domain_max_; }
  double max_value() const;

  /// Declares a Lipschitz constant for the function itself. Power laws
  /// with exponent < 1 have unbounded slope at 0 and are refused; the
  /// declared value must dominate the true slope bound.
  void declare_lipschitz(double bound);

  /// Declares a Lipschitz constant for the inverse. Power laws with
  /// exponent > 1 have an inverse with unbounded slope at 0 and are
  /// refused.
  void declare_inverse_lipschitz(double bound);

  std::optional<double> lipschitz() const { return lipschitz_; }
  std::optional<double> inverse_lipschitz() const { return inv_lipschitz_; }

  bool is_power_law() const { return power_; }
  double coeff() const { return coeff_; }
  double exponent() const { return exponent_; }

 private:
  void check_strictly_increasing() const;

  bool power_ = true;
  double coeff_ = 1.0, exponent_ = 1.0;
  double domain_max_ = 1.0;
  Vec knots_, values_;  // tabulated form
  std::optional<double> lipschitz_, inv_lipschitz_;
};

}  // namespace stc
