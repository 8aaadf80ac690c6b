#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "stc/linalg.hpp"

namespace stc {

using Rng = std::mt19937_64;

/// Uniform draw from the closed euclidean ball of the given radius:
/// gaussian direction, radius scaled by u^(1/n).
inline Vec sample_ball(Rng& rng, std::size_t n, double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec x(n);
  double s = 0.0;
  do {
    s = 0.0;
    for (auto& v : x) {
      v = gauss(rng);
      s += v * v;
    }
  } while (s == 0.0);
  const double r = radius * std::pow(unit(rng), 1.0 / double(n)) / std::sqrt(s);
  for (auto& v : x) v *= r;
  return x;
}

/// Uniform draw from the sphere of the given radius.
inline Vec sample_sphere(Rng& rng, std::size_t n, double radius) {
  Vec x = sample_ball(rng, n, 1.0);
  const double nv = norm2(x);
  for (auto& v : x) v *= radius / nv;
  return x;
}

/// Uniform draw from an axis-aligned box given as (lo, hi) bounds.
inline Vec sample_box(Rng& rng, const Vec& lo, const Vec& hi) {
  Vec x(lo.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uniform_real_distribution<double> u(lo[i], hi[i]);
    x[i] = u(rng);
  }
  return x;
}

}  // namespace stc
