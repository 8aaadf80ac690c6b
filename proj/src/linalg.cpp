#include "stc/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace stc {

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows.begin()->size();
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Mat operator+(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matrix add shape mismatch");
  Mat c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Mat operator-(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matrix sub shape mismatch");
  Mat c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Mat operator*(double s, const Mat& a) {
  Mat c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Vec matvec(const Mat& a, const Vec& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec shape mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double frobenius(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

Vec operator+(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vec add size mismatch");
  Vec c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Vec operator-(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vec sub size mismatch");
  Vec c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

Vec operator*(double s, const Vec& x) {
  Vec c = x;
  for (double& v : c) v *= s;
  return c;
}

Vec& axpy(Vec& y, double s, const Vec& x) {
  if (y.size() != x.size()) throw std::invalid_argument("axpy size mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
  return y;
}

Vec solve_linear(Mat a, Vec b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve shape mismatch");

  // scale-aware singularity threshold
  double amax = 0.0;
  for (double v : a.data()) amax = std::max(amax, std::abs(v));
  const double tiny = 1e-13 * std::max(amax, 1.0);

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(perm[r], col)) > std::abs(a(perm[piv], col))) piv = r;
    std::swap(perm[col], perm[piv]);
    const double d = a(perm[col], col);
    if (std::abs(d) < tiny) throw std::runtime_error("singular linear system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(perm[r], col) / d;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(perm[r], j) -= f * a(perm[col], j);
      b[perm[r]] -= f * b[perm[col]];
    }
  }

  Vec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[perm[ii]];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(perm[ii], j) * x[j];
    x[ii] = s / a(perm[ii], ii);
  }
  return x;
}

bool is_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

}  // namespace stc
