#ifndef RIEMSPLINE_EMBEDDED_HPP
#define RIEMSPLINE_EMBEDDED_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "riemspline/manifold.hpp"

namespace riemspline {

/// A chart parameterization phi: U subset R^d -> R^m with first and second
/// derivatives. Chart coordinates listed in `periods` with a positive entry
/// wrap with that period (0 = non-periodic); the solver works in the
/// universal cover, so phi must be exactly periodic in those coordinates.
struct Parameterization {
  std::string name;
  int chart_dim = 0;
  int embed_dim = 0;
  std::function<Vec(const Vec&)> phi;
  std::function<Mat(const Vec&)> dphi;                 // m x d
  std::function<std::vector<Mat>(const Vec&)> d2phi;   // m symmetric d x d blocks
  Vec periods;                                         // d entries, 0 = none
  std::function<void(const Vec&)> domain_check;        // may be empty
};

Parameterization make_euclidean(int dim);
/// Spherical chart (theta, phi), guard band theta in [1e-3, pi - 1e-3].
Parameterization make_sphere(double radius);
/// Torus chart (theta, phi): ((R + r cos phi) cos theta, (R + r cos phi) sin theta, r sin phi).
Parameterization make_torus(double R, double r);
/// Cylinder chart (theta, z) with unit chart speed in theta equal to arclength:
/// phi(theta, z) = (P/(2 pi)) (cos 2 pi theta, sin 2 pi theta), z;  theta has period 1.
Parameterization make_cylinder(double perimeter);

/// Embedded backend: W[y1,y2] = |phi(y1) - phi(y2)|^2 with the analytic
/// derivative formulas, metric Dphi^T Dphi.
class EmbeddedModel : public ManifoldModel {
 public:
  explicit EmbeddedModel(Parameterization p);

  int dof_count() const override { return param_.chart_dim; }
  bool has_analytic_derivatives() const override { return true; }
  bool has_closed_form_distance() const override { return closed_form_distance_; }
  std::string name() const override { return param_.name; }
  void validate(const Point& y) const override;

  double energy(const Point& y1, const Point& y2) const override;
  Vec d1_energy(const Point& y1, const Point& y2) const override;
  Vec d2_energy(const Point& y1, const Point& y2) const override;
  Mat d11_energy(const Point& y1, const Point& y2) const override;
  Mat d22_energy(const Point& y1, const Point& y2) const override;
  Mat d12_energy(const Point& y1, const Point& y2) const override;
  Mat metric(const Point& y) const override;

  const Parameterization& parameterization() const { return param_; }
  /// Wraps periodic chart coordinates into [0, period).
  Point wrap(const Point& y) const;
  /// Shortest representative of a chart difference under the periods.
  Vec wrap_difference(const Vec& delta) const;

 private:
  Parameterization param_;
  bool closed_form_distance_ = false;
  double sphere_radius_ = 0.0;
  friend double sphere_distance(const EmbeddedModel&, const Point&, const Point&);
};

/// Geodesic distance on the sphere backend: R * arccos(phi(y1).phi(y2)/R^2),
/// dot product clamped to [-1, 1].
double sphere_distance(const EmbeddedModel& sphere, const Point& y1, const Point& y2);

/// Closed-form spline energy of the Euclidean cubic through x = (0, m + 1/2, n)
/// at times (0, r, 1):  3 (m + 1/2 - r n)^2 / ((1 - r)^2 r^2).
double cylinder_winding_energy(double r, long long m, long long n);

std::shared_ptr<EmbeddedModel> make_euclidean_model(int dim);
std::shared_ptr<EmbeddedModel> make_sphere_model(double radius);
std::shared_ptr<EmbeddedModel> make_torus_model(double R, double r);
std::shared_ptr<EmbeddedModel> make_cylinder_model(double perimeter);

}  // namespace riemspline

#endif
