#ifndef RIEMSPLINE_SOLVER_HPP
#define RIEMSPLINE_SOLVER_HPP

#include <memory>
#include <string>
#include <vector>

#include "riemspline/curve.hpp"
#include "riemspline/manifold.hpp"

namespace riemspline {

struct SolverSettings {
  double tol_mid = 1e-10;   // midpoint residual, scaled by (1 + data magnitude)
  double tol_grad = 1e-8;   // outer gradient sup-norm, same scaling
  int max_iters = 2000;
  int lbfgs_memory = 10;
  int threads = 1;
  unsigned seed = 0;        // only used by the optional restarts
  int restarts = 0;
};

/// Interpolation task: times t_i in [0,1] with K t_i integral, data points,
/// a boundary condition, regularization sigma and time-step count K.
struct InterpolationProblem {
  int K = 0;
  double sigma = 0.0;
  std::vector<double> times;
  std::vector<Vec> data;
  BoundaryKind bc = BoundaryKind::natural;
  Vec hermite_v0, hermite_v1;
  SolverSettings settings;

  void validate(const ManifoldModel& model, bool geodesic) const;
  std::vector<int> data_indices() const;  // K * t_i
  double data_magnitude() const;
  double tol_mid_effective() const { return settings.tol_mid * (1.0 + data_magnitude()); }
  double tol_grad_effective() const { return settings.tol_grad * (1.0 + data_magnitude()); }
};

/// Discrete path: K+1 points plus the auxiliary midpoints. For periodic
/// boundary conditions points[K] is kept identical to points[0] and the
/// midpoint count is K; otherwise it is K-1.
struct DiscretePath {
  int K = 0;
  BoundaryKind bc = BoundaryKind::natural;
  std::vector<Vec> points;     // K+1
  std::vector<Vec> midpoints;  // K_hat, 1-based as midpoints[k-1]

  int Khat() const { return bc == BoundaryKind::periodic ? K : K - 1; }
  // Neighbours of midpoint k (1-based): y_{k-1} and y_{k+1} with the periodic
  // identification y_{K+1} == y_1.
  const Vec& left_of(int k) const { return points[k - 1]; }
  const Vec& right_of(int k) const {
    return (k + 1 <= K) ? points[k + 1] : points[1];
  }
};

struct SolverTelemetry {
  int iterations = 0;
  int evaluations = 0;
  double final_grad_norm = 0.0;
  double max_midpoint_residual = 0.0;
  bool converged = false;
  std::string stop_reason;
  double seconds = 0.0;
};

struct SplineSolution {
  DiscretePath path;
  double sigma = 0.0;
  double path_energy = 0.0;         // E^K
  double spline_energy = 0.0;       // F^K
  double regularized_energy = 0.0;  // F^{sigma,K} = F^K + sigma E^K
  std::vector<double> segment_diagnostics;  // W[y_k, ytilde_k], k = 1..K_hat
  SolverTelemetry telemetry;
};

/// Discrete path energy  E^K = K sum_k W[y_{k-1}, y_k]  (closed sum when
/// periodic; points[K] == points[0] then).
double discrete_path_energy(const ManifoldModel& m, const std::vector<Vec>& points,
                            bool periodic);

struct MidpointResult {
  Vec point;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Solves the first-order condition d2 W[y_minus, y] + d1 W[y, y_plus] = 0 by
/// a damped Newton iteration (gradient-descent fallback), then checks that
/// the Hessian d22 W[y_minus,y] + d11 W[y,y_plus] is positive definite.
MidpointResult geodesic_midpoint(const ManifoldModel& m, const Vec& y_minus,
                                 const Vec& y_plus, const Vec& init, double tol_mid);

/// Re-solves all midpoints of the path in place (warm-started from the stored
/// values; chord midpoints when absent) and returns
/// F^K = 4 K^3 sum_k W[y_k, ytilde_k].
double discrete_spline_energy(const ManifoldModel& m, DiscretePath& path, double tol_mid,
                              int threads = 1);

/// Residual of the midpoint condition at index k (1-based).
double midpoint_residual(const ManifoldModel& m, const DiscretePath& path, int k);

/// Adjoint state p_k of the midpoint constraint,
///   (d22 W[y_{k-1}, yt_k] + d11 W[yt_k, y_{k+1}]) p_k = -d2 W[y_k, yt_k].
Vec adjoint_state(const ManifoldModel& m, const DiscretePath& path, int k);

/// Gradient of F^{sigma,K} over the free DOFs of the problem (midpoints and
/// adjoints are assumed current; ordering follows free_indices()).
Vec spline_gradient(const ManifoldModel& m, const DiscretePath& path, double sigma,
                    const InterpolationProblem& problem);

/// Free node indices of a problem (data nodes pinned; Hermite eliminates
/// y_1 and y_{K-1}; periodic works on representatives 0..K-1).
std::vector<int> free_indices(const InterpolationProblem& problem, bool geodesic);

/// Chart-linear initial path through the data (periodic coordinates of
/// embedded backends take the shortest wrapped representative).
DiscretePath initial_path(const ManifoldModel& m, const InterpolationProblem& problem);

SplineSolution solve_spline(const ManifoldModel& m, const InterpolationProblem& problem);
SplineSolution solve_geodesic(const ManifoldModel& m, const InterpolationProblem& problem);

}  // namespace riemspline

#endif
