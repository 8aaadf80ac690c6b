#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace stc {

using Vec = std::vector<double>;

/// Dense row-major matrix. Sized for control problems of desk scale
/// (a handful of states), so no effort is spent on blocking or views.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

Mat operator*(const Mat& a, const Mat& b);
Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);
Mat transpose(const Mat& a);

Vec matvec(const Mat& a, const Vec& x);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& x);
double frobenius(const Mat& a);

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& x);
Vec& axpy(Vec& y, double s, const Vec& x);  // y += s*x

/// Solves a*x = b by Gaussian elimination with partial pivoting.
/// Throws std::runtime_error when the system is singular to working
/// precision.
Vec solve_linear(Mat a, Vec b);

bool is_symmetric(const Mat& a, double tol);

}  // namespace stc
