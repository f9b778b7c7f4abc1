#ifndef RIEMSPLINE_CONTINUUM_HPP
#define RIEMSPLINE_CONTINUUM_HPP

#include "riemspline/curve.hpp"
#include "riemspline/manifold.hpp"
#include "riemspline/solver.hpp"

namespace riemspline {

/// Path energy  E[y] = int g(y', y') dt  by composite Gauss quadrature
/// (quad_order points per polynomial piece; analytic curves are split into
/// 64 panels).
double continuous_path_energy(const ManifoldModel& m, const ContinuousCurve& curve,
                              int quad_order = 5);

/// Spline energy  F[y] = int g(D_t y', D_t y') dt  with the covariant
/// acceleration y'' + Gamma(y', y').
double continuous_spline_energy(const ManifoldModel& m, const ContinuousCurve& curve,
                                int quad_order = 5);

/// F^sigma = F + sigma E.
double continuous_regularized_energy(const ManifoldModel& m, const ContinuousCurve& curve,
                                     double sigma, int quad_order = 5);

struct ConvergenceRow {
  int K = 0;
  double discrete_energy = 0.0;    // F^{sigma,K}
  double continuous_energy = 0.0;  // F^sigma[eta]
  double diff_F = 0.0;
  double discrete_path = 0.0;      // E^K
  double continuous_path = 0.0;    // E[eta]
  double diff_E = 0.0;
  double d_K = 0.0;                // max_k |y_k - y_{k-1}|
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double slope_F = 0.0;   // least-squares log-log slope of diff_F vs K
  double slope_E = 0.0;
  bool exact = false;     // differences at numerical zero; slope not meaningful
  bool monotone_F = false;
};

/// Solves the problem for each K, builds the interpolant eta of the solution,
/// and compares discrete and continuous energies. Requires at least three K
/// values for the slope fit; all K must be compatible with the t_i.
ConvergenceTable convergence_study(const ManifoldModel& m,
                                   const InterpolationProblem& problem_template,
                                   const std::vector<int>& K_list, int quad_order = 5);

std::string convergence_table_csv(const ConvergenceTable& table);

}  // namespace riemspline

#endif
