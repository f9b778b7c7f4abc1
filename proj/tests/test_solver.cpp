#include <doctest.h>

#include <numeric>

#include "riemspline/continuum.hpp"
#include "riemspline/curve.hpp"
#include "riemspline/gradcheck.hpp"
#include "riemspline/solver.hpp"
#include "test_helpers.hpp"

using namespace riemspline;
using namespace riemspline::testing;

namespace {

Vec scalar(double x) {
  Vec v(1);
  v << x;
  return v;
}

InterpolationProblem three_point_problem(double sigma, int K) {
  InterpolationProblem p;
  p.K = K;
  p.sigma = sigma;
  p.times = {0.0, 0.5, 1.0};
  p.data = {scalar(0.0), scalar(1.0), scalar(0.0)};
  return p;
}

}  // namespace

TEST_CASE("discrete path energy telescopes on uniform samples of a line") {
  auto euclid = make_euclidean_model(2);
  const int K = 10;
  const Vec a = vec2(0.0, 0.0), b = vec2(3.0, 4.0);  // length 5
  std::vector<Vec> pts;
  for (int k = 0; k <= K; ++k) pts.push_back(a + (static_cast<double>(k) / K) * (b - a));
  CHECK(discrete_path_energy(*euclid, pts, false) == doctest::Approx(25.0).epsilon(1e-13));
  std::vector<Vec> constant(K + 1, a);
  CHECK(discrete_path_energy(*euclid, constant, false) == 0.0);
}

TEST_CASE("discrete path energy of great-circle samples") {
  auto sphere = make_sphere_model(1.0);
  const int K = 32;
  std::vector<Vec> pts;
  for (int k = 0; k <= K; ++k)
    pts.push_back(vec2(M_PI / 2, (M_PI / 2) * k / K));  // quarter equator
  const double EK = discrete_path_energy(*sphere, pts, false);
  const double arc2 = (M_PI / 2) * (M_PI / 2);
  CHECK(EK <= arc2 + 1e-12);  // chords undershoot arcs
  CHECK(std::abs(EK - arc2) <= 0.01);
}

TEST_CASE("geodesic midpoint: Euclidean mean and sphere symmetry") {
  auto euclid = make_euclidean_model(2);
  const MidpointResult mid =
      geodesic_midpoint(*euclid, vec2(0, 0), vec2(2, 2), vec2(0.4, 1.1), 1e-10);
  CHECK((mid.point - vec2(1, 1)).norm() <= 1e-12);

  auto sphere = make_sphere_model(1.0);
  const MidpointResult smid = geodesic_midpoint(
      *sphere, vec2(M_PI / 2, -0.4), vec2(M_PI / 2, 0.4),
      vec2(M_PI / 2 + 0.05, 0.01), 1e-10);
  CHECK((smid.point - vec2(M_PI / 2, 0.0)).norm() <= 1e-8);
}

TEST_CASE("midpoint residuals meet tolerance on random nearby pairs") {
  struct Case {
    std::shared_ptr<ManifoldModel> model;
    std::function<Vec(PointSampler&)> draw;
    double spread;
  };
  std::vector<Case> cases;
  cases.push_back({make_sphere_model(1.0),
                   [](PointSampler& s) { return s.sphere_chart(); }, 0.2});
  cases.push_back({make_torus_model(2.0, 1.0),
                   [](PointSampler& s) { return s.torus_chart(); }, 0.2});
  cases.push_back({make_rod_model(3, 16, 0.1),
                   [](PointSampler& s) { return s.rod_shape(3); }, 0.1});
  const double tol = 1e-10;
  for (auto& c : cases) {
    PointSampler sampler(83);
    for (int i = 0; i < 50; ++i) {
      const Vec y_minus = c.draw(sampler);
      Vec y_plus = y_minus;
      for (int j = 0; j < y_plus.size(); ++j)
        y_plus[j] += c.spread * sampler.uniform(-1.0, 1.0);
      const MidpointResult mid =
          geodesic_midpoint(*c.model, y_minus, y_plus, Vec(0.5 * (y_minus + y_plus)), tol);
      const Vec res = c.model->d2_energy(y_minus, mid.point) +
                      c.model->d1_energy(mid.point, y_plus);
      CHECK(res.norm() <= tol);
    }
  }
}

TEST_CASE("discrete spline energy on exact and sampled curves") {
  auto euclid = make_euclidean_model(1);

  SUBCASE("straight line has zero spline energy") {
    DiscretePath path;
    path.K = 8;
    path.bc = BoundaryKind::natural;
    for (int k = 0; k <= 8; ++k) path.points.push_back(scalar(0.3 + 0.2 * k));
    CHECK(discrete_spline_energy(*euclid, path, 1e-12) <= 1e-20);
    for (int k = 1; k <= path.Khat(); ++k)
      CHECK((path.midpoints[k - 1] -
             0.5 * (path.points[k - 1] + path.points[k + 1])).norm() <= 1e-12);
  }
  SUBCASE("cubic samples: K^3 sum of squared second differences") {
    DiscretePath path;
    path.K = 8;
    path.bc = BoundaryKind::natural;
    for (int k = 0; k <= 8; ++k) {
      const double t = k / 8.0;
      path.points.push_back(scalar(t * t * t));
    }
    const double FK = discrete_spline_energy(*euclid, path, 1e-12);
    // Central second differences of t^3 are exact: FK = 5040 / K^3.
    CHECK(FK == doctest::Approx(5040.0 / 512.0).epsilon(1e-12));
    CHECK(FK > 12.0 * 0.8 - 12.0 * 0.2);  // within the 20% consistency band of 12
    CHECK(FK < 12.0 * 1.2);
  }
  SUBCASE("K = 2 three-point fixture, no free DOFs") {
    auto solved = solve_spline(*euclid, three_point_problem(0.0, 2));
    CHECK(solved.spline_energy == doctest::Approx(32.0).epsilon(1e-12));
    CHECK(solved.telemetry.converged);
  }
}

TEST_CASE("adjoint state solves the linearized midpoint system") {
  auto euclid = make_euclidean_model(2);
  DiscretePath path;
  path.K = 4;
  path.bc = BoundaryKind::natural;
  PointSampler sampler(97);
  for (int k = 0; k <= 4; ++k) path.points.push_back(sampler.euclidean(2));
  discrete_spline_energy(*euclid, path, 1e-12);
  for (int k = 1; k <= path.Khat(); ++k) {
    const Vec p = adjoint_state(*euclid, path, k);
    // Hessian is 4 I, right-hand side -2 (ytilde - y_k):  p = (y_k - ytilde)/2.
    const Vec expect = 0.5 * (path.points[k] - path.midpoints[k - 1]);
    CHECK((p - expect).norm() <= 1e-12);
  }
  // Zero right-hand side at a straight path.
  DiscretePath line;
  line.K = 4;
  line.bc = BoundaryKind::natural;
  for (int k = 0; k <= 4; ++k) line.points.push_back(vec2(0.5 * k, -0.25 * k));
  discrete_spline_energy(*euclid, line, 1e-12);
  CHECK(adjoint_state(*euclid, line, 2).norm() <= 1e-12);
}

TEST_CASE("adjoint gradient matches finite differences (Euclidean and torus)") {
  {
    Preset preset = make_preset("euclid3", 8, 0.1);
    const auto report = gradcheck_model(*preset.model, preset.problem, 10, 5);
    CHECK(report.max_rel_err <= 1e-5);
  }
  {
    Preset preset = make_preset("torus3", 8, 0.1);
    const auto report = gradcheck_model(*preset.model, preset.problem, 10, 6);
    CHECK(report.max_rel_err <= 1e-5);
  }
}

TEST_CASE("gradcheck detects an injected derivative bug") {
  Preset preset = make_preset("euclid3", 8, 0.1);
  const auto report = gradcheck_model(*preset.model, preset.problem, 2, 5, true);
  CHECK(report.max_rel_err > 1e-5);
}

TEST_CASE("Euclidean natural spline solve: energy and node behaviour at K = 16") {
  auto euclid = make_euclidean_model(1);
  auto sol = solve_spline(*euclid, three_point_problem(0.0, 16));
  CHECK(sol.telemetry.converged);
  // Discrete minimal energy, frozen from the pentadiagonal normal equations:
  // F = 4096 * 12384 / 1065024.
  CHECK(sol.spline_energy == doctest::Approx(47.627906976744185).epsilon(1e-9));
  CHECK(std::abs(sol.spline_energy - 48.0) / 48.0 <= 0.02);

  // Node deviation from the continuous natural cubic: the discrete spline's
  // cubic-in-k coefficient is -1/1032 against -1/1024, giving a largest node
  // gap of 1.4762e-3 at k = 5 (O(1/K^2), not zero).
  ContinuousCurve oracle = euclidean_cubic_spline(
      {0.0, 0.5, 1.0}, {scalar(0.0), scalar(1.0), scalar(0.0)}, BoundaryKind::natural);
  double max_dev = 0.0;
  for (int k = 0; k <= 16; ++k)
    max_dev = std::max(max_dev,
                       std::abs(sol.path.points[k][0] - oracle.eval(k / 16.0)[0]));
  CHECK(max_dev == doctest::Approx(1.476199127910638e-3).epsilon(1e-6));

  // The interpolation data itself is met exactly.
  CHECK(std::abs(sol.path.points[0][0]) <= 1e-14);
  CHECK(std::abs(sol.path.points[8][0] - 1.0) <= 1e-14);
  CHECK(std::abs(sol.path.points[16][0]) <= 1e-14);

  // O(1/K^2) decay of the node gap.
  auto sol32 = solve_spline(*euclid, three_point_problem(0.0, 32));
  double max_dev32 = 0.0;
  for (int k = 0; k <= 32; ++k)
    max_dev32 = std::max(max_dev32,
                         std::abs(sol32.path.points[k][0] - oracle.eval(k / 32.0)[0]));
  CHECK(max_dev32 <= 0.3 * max_dev);
}

TEST_CASE("spline and geodesic coincide for two interpolation points") {
  auto sphere = make_sphere_model(1.0);
  InterpolationProblem p;
  p.K = 8;
  p.sigma = 1e-4;
  p.times = {0.0, 1.0};
  p.data = {vec2(1.2, 0.3), vec2(1.7, 1.1)};
  auto spline = solve_spline(*sphere, p);
  auto geodesic = solve_geodesic(*sphere, p);
  CHECK(std::abs(spline.path_energy - geodesic.path_energy) <= 1e-8);
}

TEST_CASE("Euclidean geodesic is the equally spaced piecewise-linear interpolant") {
  auto euclid = make_euclidean_model(2);
  InterpolationProblem p;
  p.K = 8;
  p.times = {0.0, 0.5, 1.0};
  p.data = {vec2(0, 0), vec2(1, 1), vec2(2, 0)};
  auto sol = solve_geodesic(*euclid, p);
  CHECK(sol.telemetry.converged);
  for (int k = 0; k <= 4; ++k)
    CHECK((sol.path.points[k] - vec2(0.25 * k, 0.25 * k)).norm() <= 1e-6);
  for (int k = 4; k <= 8; ++k)
    CHECK((sol.path.points[k] - vec2(0.25 * k, 1.0 - 0.25 * (k - 4))).norm() <= 1e-6);
}

TEST_CASE("sphere geodesic: energy accuracy and chord equidistribution") {
  auto sphere = make_sphere_model(1.0);
  InterpolationProblem p;
  p.K = 32;
  p.times = {0.0, 1.0};
  p.data = {vec2(M_PI / 2, 0.0), vec2(M_PI / 2, M_PI / 2)};
  auto sol = solve_geodesic(*sphere, p);
  CHECK(sol.telemetry.converged);
  const double arc2 = std::pow(sphere_distance(*sphere, p.data[0], p.data[1]), 2);
  CHECK(std::abs(sol.path_energy - arc2) / arc2 <= 0.01);
  // Equal chord energies along the discrete geodesic.
  std::vector<double> seg;
  for (int k = 1; k <= p.K; ++k)
    seg.push_back(sphere->energy(sol.path.points[k - 1], sol.path.points[k]));
  const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / seg.size();
  for (double s : seg) CHECK(std::abs(s - mean) <= 1e-6 * mean);
}

TEST_CASE("energy decomposition and midpoint residual contracts") {
  Preset preset = make_preset("sphere3", 16, 1e-3);
  auto sol = solve_spline(*preset.model, preset.problem);
  CHECK(sol.telemetry.converged);
  CHECK(std::abs(sol.regularized_energy - (sol.spline_energy + sol.sigma * sol.path_energy)) <=
        1e-12 * (1.0 + std::abs(sol.regularized_energy)));
  CHECK(sol.telemetry.max_midpoint_residual <= preset.problem.tol_mid_effective());
  // In-chart second differences shrink relative to the piecewise geodesic.
  auto geo = solve_geodesic(*preset.model, preset.problem);
  auto max_d2 = [](const SplineSolution& s) {
    double m = 0.0;
    for (int k = 1; k < s.path.K; ++k)
      m = std::max(m, (s.path.points[k + 1] - 2.0 * s.path.points[k] +
                       s.path.points[k - 1]).norm());
    return m;
  };
  CHECK(max_d2(sol) < max_d2(geo));
}

TEST_CASE("hermite boundary conditions hold exactly by elimination") {
  auto euclid = make_euclidean_model(2);
  InterpolationProblem p;
  p.K = 8;
  p.sigma = 0.0;
  p.times = {0.0, 0.5, 1.0};
  p.data = {vec2(0, 0), vec2(1, 0.5), vec2(2, 0)};
  p.bc = BoundaryKind::hermite;
  p.hermite_v0 = vec2(1.0, 2.0);
  p.hermite_v1 = vec2(1.0, -2.0);
  auto sol = solve_spline(*euclid, p);
  CHECK(sol.telemetry.converged);
  CHECK((8.0 * (sol.path.points[1] - sol.path.points[0]) - p.hermite_v0).norm() == 0.0);
  CHECK((8.0 * (sol.path.points[8] - sol.path.points[7]) - p.hermite_v1).norm() == 0.0);
}

TEST_CASE("periodic boundary conditions: closure and diagnostics length") {
  auto euclid = make_euclidean_model(2);
  InterpolationProblem p;
  p.K = 8;
  p.sigma = 1e-4;
  p.bc = BoundaryKind::periodic;
  p.times = {0.25, 0.5, 0.75};
  p.data = {vec2(1, 0), vec2(0, 1), vec2(-1, 0)};
  auto sol = solve_spline(*euclid, p);
  CHECK(sol.telemetry.converged);
  CHECK((sol.path.points[0] - sol.path.points[8]).norm() == 0.0);
  CHECK(sol.segment_diagnostics.size() == 8);
  for (int k = 1; k <= 8; ++k) CHECK(midpoint_residual(*euclid, sol.path, k) <= 1e-9);
}

TEST_CASE("periodic time validation rejects the overdetermined case") {
  auto euclid = make_euclidean_model(2);
  InterpolationProblem p;
  p.K = 4;
  p.bc = BoundaryKind::periodic;
  p.times = {0.0, 0.5, 1.0};
  p.data = {vec2(1, 0), vec2(0, 1), vec2(1, 0)};
  CHECK_THROWS_AS(p.validate(*euclid, false), InputError);
}

TEST_CASE("K t_i integrality and monotonicity are enforced") {
  auto euclid = make_euclidean_model(2);
  InterpolationProblem p;
  p.K = 32;
  p.times = {0.0, 1.0 / 3.0, 1.0};
  p.data = {vec2(0, 0), vec2(1, 1), vec2(2, 0)};
  CHECK_THROWS_AS(p.validate(*euclid, false), InputError);
  p.times = {0.0, 0.5, 0.5};
  CHECK_THROWS_AS(p.validate(*euclid, false), InputError);
}

TEST_CASE("non-convergence is reported, best iterate returned") {
  Preset preset = make_preset("sphere3", 16, 1e-3);
  preset.problem.settings.max_iters = 1;
  preset.problem.settings.tol_grad = 1e-16;
  auto sol = solve_spline(*preset.model, preset.problem);
  CHECK_FALSE(sol.telemetry.converged);
  CHECK(sol.telemetry.final_grad_norm > 0.0);
}

TEST_CASE("refinement consistency: minimal energies form a Cauchy-like sequence") {
  Preset preset = make_preset("sphere3", 8, 1e-3);
  std::vector<double> F;
  for (int K : {8, 16, 32, 64}) {
    preset.problem.K = K;
    F.push_back(solve_spline(*preset.model, preset.problem).regularized_energy);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < F.size(); ++i) {
    const double diff = std::abs(F[i + 1] - F[i]);
    CHECK(diff < prev);
    prev = diff;
  }
}

TEST_CASE("seeded restarts never worsen the result and stay deterministic") {
  Preset preset = make_preset("sphere3", 8, 1e-3);
  auto base = solve_spline(*preset.model, preset.problem);
  preset.problem.settings.restarts = 2;
  preset.problem.settings.seed = 42;
  auto restarted = solve_spline(*preset.model, preset.problem);
  CHECK(restarted.regularized_energy <= base.regularized_energy + 1e-10);
  auto restarted2 = solve_spline(*preset.model, preset.problem);
  CHECK(restarted.regularized_energy == restarted2.regularized_energy);
}

TEST_CASE("parallel midpoint solves match the serial result bit for bit") {
  Preset preset = make_preset("torus3", 16, 1e-3);
  auto serial = solve_spline(*preset.model, preset.problem);
  preset.problem.settings.threads = 4;
  auto parallel = solve_spline(*preset.model, preset.problem);
  REQUIRE(serial.path.points.size() == parallel.path.points.size());
  for (std::size_t k = 0; k < serial.path.points.size(); ++k)
    CHECK((serial.path.points[k] - parallel.path.points[k]).norm() == 0.0);
  CHECK(serial.regularized_energy == parallel.regularized_energy);
}

TEST_CASE("objective is monotone across accepted descent steps") {
  // The line search enforces Armijo decrease; spot-check via energies of
  // successively tighter solves.
  Preset preset = make_preset("sphere3", 8, 1e-3);
  preset.problem.settings.max_iters = 3;
  auto rough = solve_spline(*preset.model, preset.problem);
  preset.problem.settings.max_iters = 2000;
  auto tight = solve_spline(*preset.model, preset.problem);
  CHECK(tight.regularized_energy <= rough.regularized_energy + 1e-12);
}
