#ifndef RIEMSPLINE_MANIFOLD_HPP
#define RIEMSPLINE_MANIFOLD_HPP

#include <atomic>
#include <optional>

#include "riemspline/types.hpp"

namespace riemspline {

class ContinuousCurve;

/// A manifold backend, defined through the pair energy W[y1,y2] that
/// approximates the squared Riemannian distance, its partial derivatives,
/// and the induced metric g_y = (1/2) d22 W[y,y].
///
/// Derivative conventions (all in chart coordinates):
///   d1/d2   : gradient of W with respect to the first/second argument.
///   d11/d22 : Hessian with respect to one argument (symmetric).
///   d12     : mixed partials, d12(i,j) = d^2 W / (d y1_i d y2_j).
///   d21     : transpose of d12.
///
/// Implementations are immutable after construction; all operations are pure
/// and safe to call concurrently.
class ManifoldModel {
 public:
  virtual ~ManifoldModel() = default;

  virtual int dof_count() const = 0;
  virtual bool has_analytic_derivatives() const = 0;
  virtual bool has_closed_form_distance() const { return false; }
  virtual std::string name() const = 0;

  /// Throws FeasibilityError naming the violated constraint.
  virtual void validate(const Point& y) const = 0;

  virtual double energy(const Point& y1, const Point& y2) const = 0;

  // Defaults fall back to central finite differences of energy().
  virtual Vec d1_energy(const Point& y1, const Point& y2) const;
  virtual Vec d2_energy(const Point& y1, const Point& y2) const;
  virtual Mat d11_energy(const Point& y1, const Point& y2) const;
  virtual Mat d22_energy(const Point& y1, const Point& y2) const;
  virtual Mat d12_energy(const Point& y1, const Point& y2) const;
  Mat d21_energy(const Point& y1, const Point& y2) const {
    return d12_energy(y1, y2).transpose();
  }

  /// Metric g_y; default is (1/2) d22 W[y,y].
  virtual Mat metric(const Point& y) const;

  /// Spatially constant quadratic part of the metric, as a Gram matrix in
  /// chart coordinates; nullopt means identically zero.
  virtual std::optional<Mat> quadratic_part() const { return std::nullopt; }

 protected:
  /// Feasibility guard used at the entry of energy/derivative calls:
  /// every call in debug builds, every 16th call in release builds.
  void guard(const Point& y1, const Point& y2) const;
  void guard(const Point& y) const;

 private:
  mutable std::atomic<std::uint64_t> guard_counter_{0};
  bool guard_due() const;
};

/// Finite-difference derivative bundle (central differences).
/// First-order steps default to 1e-5 * (1 + |y|); second-order bundles
/// difference the analytic first derivatives when the model has them
/// (step 1e-6 * (1 + |y|)), and otherwise use second differences of the
/// energy itself.
double fd_default_step(const Point& y1, const Point& y2, double scale = 1e-5);
Vec fd_d1_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h = 0.0);
Vec fd_d2_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h = 0.0);
Mat fd_d11_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h = 0.0);
Mat fd_d22_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h = 0.0);
Mat fd_d12_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h = 0.0);

/// Directional derivative of the metric, (D_y g)(u), by central differences
/// with step 1e-5 * (1 + |y|).
Mat metric_derivative(const ManifoldModel& m, const Point& y, const Vec& u);

/// Christoffel operator Gamma_y(v, w), defined weakly by
///   2 g_y(Gamma, z) = (D_y g)(w)(v,z) - (D_y g)(z)(v,w) + (D_y g)(v)(w,z).
/// Symmetric in (v, w) bit-for-bit. Throws DegeneracyError when the metric
/// factorization fails (smallest eigenvalue reported).
Tangent christoffel(const ManifoldModel& m, const Point& y, const Tangent& v,
                    const Tangent& w);

/// Covariant acceleration of a curve at time t:  y''(t) + Gamma_y(y', y').
Tangent covariant_accel(const ManifoldModel& m, const ContinuousCurve& curve, double t);

/// Solves G x = b for symmetric positive definite G; throws DegeneracyError
/// (reporting the smallest eigenvalue) if the factorization fails or the
/// smallest eigenvalue is below 1e-12.
Vec solve_spd(const Mat& G, const Vec& b, const char* context);

}  // namespace riemspline

#endif
