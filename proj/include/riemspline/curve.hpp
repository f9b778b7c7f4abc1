#ifndef RIEMSPLINE_CURVE_HPP
#define RIEMSPLINE_CURVE_HPP

#include <functional>
#include <vector>

#include "riemspline/types.hpp"

namespace riemspline {

enum class BoundaryKind { natural, hermite, periodic };

/// A curve in chart coordinates, evaluable with two derivatives.
/// Either a piecewise polynomial with breakpoints (the usual case) or an
/// analytic callback.
class ContinuousCurve {
 public:
  struct Piece {
    double t0 = 0.0, t1 = 0.0;
    // coeffs.col(p) multiplies (t - t0)^p;  dim x (deg+1).
    Mat coeffs;
  };

  ContinuousCurve() = default;

  static ContinuousCurve piecewise(std::vector<Piece> pieces);
  static ContinuousCurve analytic(int dim, double t0, double t1,
                                  std::function<Vec(double)> value,
                                  std::function<Vec(double)> deriv1,
                                  std::function<Vec(double)> deriv2);

  Vec eval(double t) const;
  Vec deriv(double t, int order) const;

  int dim() const { return dim_; }
  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  bool is_piecewise() const { return !pieces_.empty(); }
  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  int dim_ = 0;
  double t0_ = 0.0, t1_ = 0.0;
  std::vector<Piece> pieces_;
  std::function<Vec(double)> f_, df_, ddf_;
  const Piece& locate(double t) const;
};

/// The C^1 interpolant eta of a discrete path: quadratic on the half-shifted
/// intervals [t^{k-1/2}, t^{k+1/2}], affine end caps for the non-periodic
/// variant, wrapped interval for the periodic one (points[0] pairs with
/// points[K] identified).
ContinuousCurve hermite_interpolant(const std::vector<Vec>& points, bool periodic);

/// Classical cubic spline through (times[i], values[i]) minimizing the
/// integral of |x''|^2; natural, clamped (hermite, with end velocities v0/v1),
/// or periodic boundary conditions. Natural/hermite use the tridiagonal
/// second-derivative system; periodic solves the cyclic system densely.
ContinuousCurve euclidean_cubic_spline(const std::vector<double>& times,
                                       const std::vector<Vec>& values,
                                       BoundaryKind bc,
                                       const Vec& v0 = Vec(), const Vec& v1 = Vec());

/// Minimal W^{2,2} seminorm of a curve through three points at times
/// 0, tau, 2*tau:  (3 / (2 tau^3)) |y_minus - 2 y_mid + y_plus|^2.
double three_point_seminorm(const Vec& y_minus, const Vec& y_mid, const Vec& y_plus,
                            double tau);

/// The explicit natural cubic achieving the three-point seminorm.
ContinuousCurve three_point_minimizer(const Vec& y_minus, const Vec& y_mid,
                                      const Vec& y_plus, double tau);

}  // namespace riemspline

#endif
