#ifndef RIEMSPLINE_TEST_HELPERS_HPP
#define RIEMSPLINE_TEST_HELPERS_HPP

#include <random>

#include "riemspline/embedded.hpp"
#include "riemspline/presets.hpp"
#include "riemspline/rods.hpp"
#include "riemspline/shells.hpp"

namespace riemspline::testing {

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

struct PointSampler {
  std::mt19937_64 rng;
  explicit PointSampler(unsigned seed) : rng(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }

  Vec euclidean(int dim, double scale = 2.0) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(-scale, scale);
    return v;
  }

  Vec sphere_chart() { return vec2(uniform(0.3, M_PI - 0.3), uniform(-M_PI, M_PI)); }

  Vec torus_chart() { return vec2(uniform(0.0, 2.0 * M_PI), uniform(0.0, 2.0 * M_PI)); }

  Vec cylinder_chart() { return vec2(uniform(-1.0, 2.0), uniform(-1.0, 1.0)); }

  // Gentle band-limited perturbation of the unit circle; stays well inside
  // the arclength bound.
  Vec rod_shape(int N, double amplitude = 0.08) {
    Vec c = RodShape::circle(N, 1.0).coeffs;
    for (int k = 2; k <= N; ++k) {
      const double a = amplitude / (k * k);
      c[k - 1] += uniform(-a, a);
      c[N + k - 1] += uniform(-a, a);
      c[2 * N + k - 1] += uniform(-a, a);
      c[3 * N + k - 1] += uniform(-a, a);
    }
    return c;
  }

  Vec shell_chart(const ShellModel& shell, const Vec& base, double amplitude = 0.08) {
    Vec z = base;
    for (int i = 0; i < z.size(); ++i) z[i] += uniform(-amplitude, amplitude);
    return z;
  }
};

inline double rel_err(const Mat& a, const Mat& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

inline double rel_err(const Vec& a, const Vec& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

}  // namespace riemspline::testing

#endif
