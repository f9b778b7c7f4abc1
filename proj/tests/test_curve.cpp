#include <doctest.h>

#include "riemspline/curve.hpp"
#include "test_helpers.hpp"

using namespace riemspline;
using riemspline::testing::vec2;

namespace {

Vec scalar(double x) {
  Vec v(1);
  v << x;
  return v;
}

std::vector<Vec> sampled(const std::function<double(double)>& f, int K) {
  std::vector<Vec> pts;
  for (int k = 0; k <= K; ++k) pts.push_back(scalar(f(static_cast<double>(k) / K)));
  return pts;
}

}  // namespace

TEST_CASE("hermite interpolant midpoint values and collinearity") {
  const int K = 8;
  auto pts = sampled([](double t) { return 2.0 * t - 0.5; }, K);
  ContinuousCurve eta = hermite_interpolant(pts, false);
  // Affine data: second differences vanish, so eta(t^k) = y_k exactly.
  for (int k = 0; k <= K; ++k)
    CHECK(std::abs(eta.eval(static_cast<double>(k) / K)[0] - pts[k][0]) <= 1e-14);
  // eta(t^{k-1/2}) = (y_{k-1} + y_k)/2 by the formula's constant term.
  auto curved = sampled([](double t) { return std::sin(3.0 * t); }, K);
  ContinuousCurve eta2 = hermite_interpolant(curved, false);
  for (int k = 1; k <= K; ++k) {
    const double t_half = (k - 0.5) / K;
    CHECK(std::abs(eta2.eval(t_half)[0] - 0.5 * (curved[k - 1][0] + curved[k][0])) <= 1e-14);
  }
}

TEST_CASE("hermite interpolant is C1 at every breakpoint") {
  const int K = 9;
  auto pts = sampled([](double t) { return std::cos(5.0 * t) + t * t; }, K);
  ContinuousCurve eta = hermite_interpolant(pts, false);
  const double eps = 1e-9;
  for (const auto& piece : eta.pieces()) {
    const double b = piece.t1;
    if (b >= 1.0) break;
    CHECK((eta.eval(b - eps) - eta.eval(b + eps)).norm() <= 1e-7);
    CHECK((eta.deriv(b - eps, 1) - eta.deriv(b + eps, 1)).norm() <= 1e-6);
  }
  // Exact one-sided values at an interior breakpoint.
  const double tb = eta.pieces()[2].t1;
  const Vec left = eta.deriv(tb - 1e-13, 1);
  const Vec right = eta.deriv(tb + 1e-13, 1);
  CHECK((left - right).norm() <= 1e-10);
}

TEST_CASE("periodic hermite interpolant wraps with matching value and slope") {
  const int K = 8;
  std::vector<Vec> pts;
  for (int k = 0; k <= K; ++k) {
    const double t = static_cast<double>(k) / K;
    pts.push_back(vec2(std::cos(2.0 * M_PI * t), std::sin(2.0 * M_PI * t)));
  }
  pts[K] = pts[0];
  ContinuousCurve eta = hermite_interpolant(pts, true);
  CHECK((eta.eval(0.0) - eta.eval(1.0 - 1e-12)).norm() <= 1e-9);
  CHECK((eta.deriv(1e-12, 1) - eta.deriv(1.0 - 1e-12, 1)).norm() <= 1e-8);
}

TEST_CASE("natural cubic spline through three symmetric points") {
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<Vec> values{scalar(0.0), scalar(1.0), scalar(0.0)};
  ContinuousCurve s = euclidean_cubic_spline(times, values, BoundaryKind::natural);
  // Closed form on [0, 1/2]: x(t) = 3t - 4t^3.
  for (double t : {0.1, 0.25, 0.4}) {
    CHECK(std::abs(s.eval(t)[0] - (3.0 * t - 4.0 * t * t * t)) <= 1e-12);
  }
  CHECK(std::abs(s.eval(0.5)[0] - 1.0) <= 1e-12);
  // Natural end condition.
  CHECK(std::abs(s.deriv(0.0, 2)[0]) <= 1e-12);
}

TEST_CASE("two-point spline is the straight line") {
  std::vector<double> times{0.0, 1.0};
  std::vector<Vec> values{vec2(0.0, 1.0), vec2(2.0, -1.0)};
  ContinuousCurve s = euclidean_cubic_spline(times, values, BoundaryKind::natural);
  CHECK((s.eval(0.5) - vec2(1.0, 0.0)).norm() <= 1e-13);
  CHECK(s.deriv(0.3, 2).norm() <= 1e-12);
}

TEST_CASE("clamped spline honors prescribed end velocities") {
  std::vector<double> times{0.0, 0.25, 1.0};
  std::vector<Vec> values{scalar(0.0), scalar(0.5), scalar(-1.0)};
  ContinuousCurve s =
      euclidean_cubic_spline(times, values, BoundaryKind::hermite, scalar(2.0), scalar(-3.0));
  CHECK(std::abs(s.deriv(0.0, 1)[0] - 2.0) <= 1e-12);
  CHECK(std::abs(s.deriv(1.0, 1)[0] + 3.0) <= 1e-12);
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(std::abs(s.eval(times[i])[0] - values[i][0]) <= 1e-12);
}

TEST_CASE("periodic spline closes in value and slope") {
  std::vector<double> times{0.0, 0.25, 0.6, 1.0};
  std::vector<Vec> values{scalar(1.0), scalar(0.2), scalar(-0.7), scalar(1.0)};
  ContinuousCurve s = euclidean_cubic_spline(times, values, BoundaryKind::periodic);
  CHECK(std::abs(s.eval(0.0)[0] - s.eval(1.0)[0]) <= 1e-12);
  CHECK(std::abs(s.deriv(0.0, 1)[0] - s.deriv(1.0, 1)[0]) <= 1e-10);
  CHECK(std::abs(s.deriv(0.0, 2)[0] - s.deriv(1.0, 2)[0]) <= 1e-9);
}

TEST_CASE("three-point seminorm closed form") {
  CHECK(three_point_seminorm(scalar(0.0), scalar(0.5), scalar(1.0), 0.25) == 0.0);
  // (3 / (2 tau^3)) |y- - 2 y0 + y+|^2 at tau = 1/2, data (0,1,0): 12 * 4 = 48.
  CHECK(three_point_seminorm(scalar(0.0), scalar(1.0), scalar(0.0), 0.5) ==
        doctest::Approx(48.0).epsilon(1e-14));
}

TEST_CASE("explicit three-point minimizer interpolates and attains the seminorm") {
  const Vec ym = vec2(0.3, -1.0), y0 = vec2(1.1, 0.4), yp = vec2(-0.2, 0.9);
  const double tau = 0.5;
  ContinuousCurve z = three_point_minimizer(ym, y0, yp, tau);
  CHECK((z.eval(0.0) - ym).norm() <= 1e-13);
  CHECK((z.eval(tau) - y0).norm() <= 1e-12);
  CHECK((z.eval(2.0 * tau) - yp).norm() <= 1e-12);
  // Natural end conditions of the minimizer.
  CHECK(z.deriv(0.0, 2).norm() <= 1e-12);
  CHECK(z.deriv(2.0 * tau, 2).norm() <= 1e-11);
  // Quadrature of |z''|^2 equals the closed form (Simpson is exact for the
  // piecewise-quadratic integrand).
  double quad = 0.0;
  const int n = 4;  // per piece
  for (int piece = 0; piece < 2; ++piece) {
    const double a = piece * tau, b = (piece + 1) * tau;
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      const double l = a + i * h, r = l + h, mid = l + 0.5 * h;
      quad += h / 6.0 *
              (z.deriv(l + 1e-15, 2).squaredNorm() + 4.0 * z.deriv(mid, 2).squaredNorm() +
               z.deriv(r - 1e-15, 2).squaredNorm());
    }
  }
  CHECK(std::abs(quad - three_point_seminorm(ym, y0, yp, tau)) <= 1e-10);
}
