#pragma once

#include <functional>
#include <optional>

#include "stc/classk.hpp"
#include "stc/dynamics.hpp"
#include "stc/linalg.hpp"
#include "stc/random.hpp"

namespace stc {

/// Symmetric positive definite quadratic form V(x) = x' P x.
class QuadraticForm {
 public:
  explicit QuadraticForm(Mat p);

  double operator()(const Vec& x) const;
  Vec gradient(const Vec& x) const;  // 2 P x

  const Mat& matrix() const { return p_; }
  double eig_min() const { return eig_min_; }
  double eig_max() const { return eig_max_; }

 private:
  Mat p_;
  double eig_min_ = 0.0, eig_max_ = 0.0;
};

/// Certificate of exponential-type decrease for the closed loop:
///   alpha1(|x|) <= V(x) <= alpha2(|x|)
///   grad V(x) . f0(x, kappa(x)) <= -alpha3(|x|)
///   |grad V(x)| <= alpha4(|x|)
/// valid on the annulus valid_inner_radius <= |x| <= valid_radius
/// (inner radius 0 for a certificate valid on the whole ball).
struct LyapunovCertificate {
  std::function<double(const Vec&)> V;
  std::function<Vec(const Vec&)> grad;
  ClassK alpha1, alpha2, alpha3, alpha4;
  double valid_radius = 1.0;
  double valid_inner_radius = 0.0;

  // set when the certificate came from a quadratic form, for round trips
  std::optional<Mat> quadratic_p;
  double alpha4_factor = 2.0;
};

struct EigenBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix: closed form for n <= 2,
/// cyclic Jacobi sweeps otherwise.
EigenBounds symmetric_eigen_bounds(const Mat& s);

/// Solves P A + A' P = -Q for symmetric positive definite Q by writing
/// the equation as an n^2 x n^2 linear system and eliminating with
/// partial pivoting. Throws std::domain_error when A is not Hurwitz
/// (singular operator or an indefinite solution).
Mat solve_lyapunov_equation(const Mat& a, const Mat& q);

/// Builds a certificate from a quadratic form:
///   alpha1 = eigmin r^2, alpha2 = eigmax r^2,
///   alpha4 = alpha4_factor * eigmax * r.
/// The tight gradient bound |2Px| <= 2 eigmax |x| corresponds to
/// alpha4_factor = 2 (the default); factor 1 reproduces certificates
/// stated with the looser convention.
LyapunovCertificate quadratic_certificate(const QuadraticForm& v, const ClassK& alpha3,
                                          double valid_radius, double alpha4_factor = 2.0,
                                          double valid_inner_radius = 0.0);

/// alpha3(alpha2^{-1}(alpha1(delta))): the guaranteed decrease rate on
/// the boundary of the largest sublevel set inside the delta-ball.
double comparison_chain(const LyapunovCertificate& cert, double delta);

struct CertificateReport {
  int samples = 0;
  int sandwich_violations = 0;
  int decrease_violations = 0;
  int gradient_violations = 0;
  double worst_sandwich_margin = 0.0;  // min over samples, negative = violated
  double worst_decrease_margin = 0.0;
  double worst_gradient_margin = 0.0;

  bool ok() const {
    return sandwich_violations == 0 && decrease_violations == 0 && gradient_violations == 0;
  }
};

/// Monte-Carlo audit of the three certificate inequalities over the
/// validity region. Violations are counted beyond the given tolerance.
CertificateReport check_certificate(const LyapunovCertificate& cert, const SystemModel& sys,
                                    const FeedbackLaw& fb, int n_samples, Rng& rng,
                                    double tol = 1e-9);

}  // namespace stc
