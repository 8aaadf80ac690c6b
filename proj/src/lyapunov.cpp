#include "stc/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stc {

namespace {

void require_symmetric(const Mat& s, const char* what) {
  double scale = std::max(1.0, frobenius(s));
  if (!is_symmetric(s, 1e-12 * scale)) throw std::invalid_argument(std::string(what) + " must be symmetric");
}

}  // namespace

EigenBounds symmetric_eigen_bounds(const Mat& s) {
  if (s.rows() != s.cols() || s.rows() == 0) throw std::invalid_argument("matrix must be square");
  require_symmetric(s, "eigenvalue input");
  const std::size_t n = s.rows();

  if (n == 1) return {s(0, 0), s(0, 0)};
  if (n == 2) {
    const double mean = 0.5 * (s(0, 0) + s(1, 1));
    const double off = 0.5 * (s(0, 0) - s(1, 1));
    const double r = std::sqrt(off * off + s(0, 1) * s(0, 1));
    return {mean - r, mean + r};
  }

  // cyclic Jacobi: rotate away off-diagonal entries until negligible
  Mat a = s;
  const double scale = std::max(1.0, frobenius(a));
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) < 1e-14 * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
        const double c = std::cos(theta), t = std::sin(theta);
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - t * akq;
          a(k, q) = t * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - t * aqk;
          a(q, k) = t * apk + c * aqk;
        }
      }
    }
  }
  double lo = a(0, 0), hi = a(0, 0);
  for (std::size_t i = 1; i < n; ++i) {
    lo = std::min(lo, a(i, i));
    hi = std::max(hi, a(i, i));
  }
  return {lo, hi};
}

QuadraticForm::QuadraticForm(Mat p) : p_(std::move(p)) {
  if (p_.rows() != p_.cols() || p_.rows() == 0)
    throw std::invalid_argument("quadratic form matrix must be square");
  require_symmetric(p_, "quadratic form matrix");
  const EigenBounds eb = symmetric_eigen_bounds(p_);
  if (!(eb.min > 0.0)) throw std::invalid_argument("quadratic form matrix must be positive definite");
  eig_min_ = eb.min;
  eig_max_ = eb.max;
}

double QuadraticForm::operator()(const Vec& x) const { return dot(x, matvec(p_, x)); }

Vec QuadraticForm::gradient(const Vec& x) const { return 2.0 * matvec(p_, x); }

Mat solve_lyapunov_equation(const Mat& a, const Mat& q) {
  const std::size_t n = a.rows();
  if (a.cols() != n || n == 0) throw std::invalid_argument("system matrix must be square");
  if (q.rows() != n || q.cols() != n) throw std::invalid_argument("Q must match A in size");
  require_symmetric(q, "Q");
  if (!(symmetric_eigen_bounds(q).min > 0.0))
    throw std::invalid_argument("Q must be positive definite");

  // vectorize: row e = (i, j) equations, column (k, l) unknowns P_kl
  Mat big(n * n, n * n);
  Vec rhs(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t e = i * n + j;
      rhs[e] = -q(i, j);
      for (std::size_t b = 0; b < n; ++b) big(e, i * n + b) += a(b, j);  // (P A)_ij
      for (std::size_t k = 0; k < n; ++k) big(e, k * n + j) += a(k, i);  // (A' P)_ij
    }
  }

  Vec p;
  try {
    p = solve_linear(big, rhs);
  } catch (const std::runtime_error&) {
    // eigenvalue pair summing to zero makes the operator singular
    throw std::domain_error("A is not Hurwitz: Lyapunov operator is singular");
  }

  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = 0.5 * (p[i * n + j] + p[j * n + i]);

  if (!(symmetric_eigen_bounds(out).min > 0.0))
    throw std::domain_error("A is not Hurwitz: Lyapunov solution is not positive definite");

  const Mat residual = out * a + transpose(a) * out + q;
  if (frobenius(residual) > 1e-9 * std::max(1.0, frobenius(q)))
    throw std::runtime_error("Lyapunov solve residual is above tolerance");
  return out;
}

LyapunovCertificate quadratic_certificate(const QuadraticForm& v, const ClassK& alpha3,
                                          double valid_radius, double alpha4_factor,
                                          double valid_inner_radius) {
  if (!(valid_radius > 0.0)) throw std::invalid_argument("validity radius must be positive");
  if (valid_inner_radius < 0.0 || valid_inner_radius >= valid_radius)
    throw std::invalid_argument("inner radius must lie in [0, valid_radius)");
  if (!(alpha4_factor > 0.0)) throw std::invalid_argument("alpha4 factor must be positive");
  if (alpha3.domain_max() < valid_radius * (1.0 - 1e-12))
    throw std::invalid_argument("alpha3 domain must cover the validity radius");

  LyapunovCertificate cert;
  const Mat p = v.matrix();
  cert.V = [v](const Vec& x) { return v(x); };
  cert.grad = [v](const Vec& x) { return v.gradient(x); };
  cert.alpha1 = ClassK::power(v.eig_min(), 2.0, valid_radius);
  cert.alpha2 = ClassK::power(v.eig_max(), 2.0, valid_radius);
  cert.alpha3 = alpha3;
  cert.alpha4 = ClassK::power(alpha4_factor * v.eig_max(), 1.0, valid_radius);
  cert.valid_radius = valid_radius;
  cert.valid_inner_radius = valid_inner_radius;
  cert.quadratic_p = p;
  cert.alpha4_factor = alpha4_factor;
  return cert;
}

double comparison_chain(const LyapunovCertificate& cert, double delta) {
  if (!(delta > 0.0) || delta > cert.valid_radius * (1.0 + 1e-12))
    throw std::domain_error("delta must lie in (0, valid_radius]");
  return cert.alpha3(cert.alpha2.inverse(cert.alpha1(delta)));
}

CertificateReport check_certificate(const LyapunovCertificate& cert, const SystemModel& sys,
                                    const FeedbackLaw& fb, int n_samples, Rng& rng, double tol) {
  if (n_samples <= 0) throw std::invalid_argument("sample count must be positive");
  CertificateReport rep;
  rep.worst_sandwich_margin = rep.worst_decrease_margin = rep.worst_gradient_margin =
      std::numeric_limits<double>::infinity();

  int taken = 0;
  while (taken < n_samples) {
    Vec x = sample_ball(rng, sys.state_dim, cert.valid_radius);
    const double r = norm2(x);
    if (r < cert.valid_inner_radius || r == 0.0) continue;
    ++taken;

    const double vx = cert.V(x);
    const Vec g = cert.grad(x);
    const double vdot = dot(g, eval_nominal(sys, x, fb.kappa(x)));

    const double sandwich = std::min(vx - cert.alpha1(r), cert.alpha2(r) - vx);
    const double decrease = -vdot - cert.alpha3(r);
    const double gradient = cert.alpha4(r) - norm2(g);

    rep.worst_sandwich_margin = std::min(rep.worst_sandwich_margin, sandwich);
    rep.worst_decrease_margin = std::min(rep.worst_decrease_margin, decrease);
    rep.worst_gradient_margin = std::min(rep.worst_gradient_margin, gradient);
    if (sandwich < -tol) ++rep.sandwich_violations;
    if (decrease < -tol) ++rep.decrease_violations;
    if (gradient < -tol) ++rep.gradient_violations;
  }
  rep.samples = taken;
  return rep;
}

}  // namespace stc
