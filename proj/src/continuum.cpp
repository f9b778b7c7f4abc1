#include "riemspline/continuum.hpp"

#include <cmath>
#include <sstream>

#include "riemspline/format.hpp"

namespace riemspline {

namespace {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_rule(int order) {
  switch (order) {
    case 1:
      return {{0.0}, {2.0}};
    case 2:
      return {{-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}};
    case 3:
      return {{-0.7745966692414834, 0.0, 0.7745966692414834},
              {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    case 4:
      return {{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
               0.8611363115940526},
              {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
               0.3478548451374538}};
    case 5:
      return {{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
               0.9061798459386640},
              {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
               0.4786286704993665, 0.2369268850561891}};
    case 7:
      return {{-0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0,
               0.4058451513773972, 0.7415311855993945, 0.9491079123427585},
              {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
               0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
               0.1294849661688697}};
    default:
      throw InputError("unsupported quadrature order " + std::to_string(order));
  }
}

double integrate(const ManifoldModel& m, const ContinuousCurve& curve, int quad_order,
                 const std::function<double(double)>& integrand) {
  const GaussRule rule = gauss_rule(quad_order);
  std::vector<std::pair<double, double>> panels;
  if (curve.is_piecewise()) {
    for (const auto& p : curve.pieces()) panels.emplace_back(p.t0, p.t1);
  } else {
    const int n = 64;
    const double a = curve.t_begin(), b = curve.t_end();
    for (int i = 0; i < n; ++i)
      panels.emplace_back(a + (b - a) * i / n, a + (b - a) * (i + 1) / n);
  }
  (void)m;
  double total = 0.0;
  for (const auto& [a, b] : panels) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      acc += rule.weights[q] * integrand(mid + half * rule.nodes[q]);
    total += half * acc;
  }
  return total;
}

}  // namespace

double continuous_path_energy(const ManifoldModel& m, const ContinuousCurve& curve,
                              int quad_order) {
  return integrate(m, curve, quad_order, [&](double t) {
    const Vec v = curve.deriv(t, 1);
    return v.dot(m.metric(curve.eval(t)) * v);
  });
}

double continuous_spline_energy(const ManifoldModel& m, const ContinuousCurve& curve,
                                int quad_order) {
  return integrate(m, curve, quad_order, [&](double t) {
    const Vec a = covariant_accel(m, curve, t);
    return a.dot(m.metric(curve.eval(t)) * a);
  });
}

double continuous_regularized_energy(const ManifoldModel& m, const ContinuousCurve& curve,
                                     double sigma, int quad_order) {
  return continuous_spline_energy(m, curve, quad_order) +
         sigma * continuous_path_energy(m, curve, quad_order);
}

ConvergenceTable convergence_study(const ManifoldModel& m,
                                   const InterpolationProblem& problem_template,
                                   const std::vector<int>& K_list, int quad_order) {
  if (K_list.size() < 3)
    throw InputError("convergence study needs at least three K values for the rate fit");
  ConvergenceTable table;
  for (int K : K_list) {
    InterpolationProblem problem = problem_template;
    problem.K = K;
    SplineSolution sol = solve_spline(m, problem);
    ContinuousCurve eta =
        hermite_interpolant(sol.path.points, problem.bc == BoundaryKind::periodic);
    ConvergenceRow row;
    row.K = K;
    row.discrete_energy = sol.regularized_energy;
    row.continuous_energy = continuous_regularized_energy(m, eta, problem.sigma, quad_order);
    row.diff_F = std::abs(row.discrete_energy - row.continuous_energy);
    row.discrete_path = sol.path_energy;
    row.continuous_path = continuous_path_energy(m, eta, quad_order);
    row.diff_E = std::abs(row.discrete_path - row.continuous_path);
    for (int k = 1; k <= K; ++k)
      row.d_K = std::max(row.d_K, (sol.path.points[k] - sol.path.points[k - 1]).norm());
    table.rows.push_back(row);
  }

  double scale = 0.0;
  for (const auto& r : table.rows) scale = std::max(scale, std::abs(r.discrete_energy));
  table.exact = true;
  for (const auto& r : table.rows)
    if (r.diff_F > 1e-9 * std::max(1.0, scale)) table.exact = false;

  auto fit_slope = [&](auto diff_of) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : table.rows) {
      const double d = diff_of(r);
      if (d <= 0.0) continue;
      const double x = std::log(static_cast<double>(r.K)), y = std::log(d);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  if (!table.exact) {
    table.slope_F = fit_slope([](const ConvergenceRow& r) { return r.diff_F; });
    table.slope_E = fit_slope([](const ConvergenceRow& r) { return r.diff_E; });
  }
  table.monotone_F = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (!(table.rows[i].diff_F < table.rows[i - 1].diff_F)) table.monotone_F = false;
  return table;
}

std::string convergence_table_csv(const ConvergenceTable& table) {
  std::ostringstream os;
  os << "K,F_sigma_K,F_sigma_eta,diff_F,E_K,E_eta,diff_E,d_K,slope\n";
  for (const auto& r : table.rows) {
    os << r.K << ',' << format_double(r.discrete_energy) << ','
       << format_double(r.continuous_energy) << ',' << format_double(r.diff_F) << ','
       << format_double(r.discrete_path) << ',' << format_double(r.continuous_path) << ','
       << format_double(r.diff_E) << ',' << format_double(r.d_K) << ','
       << (table.exact ? "exact" : format_double(table.slope_F)) << '\n';
  }
  return os.str();
}

}  // namespace riemspline
