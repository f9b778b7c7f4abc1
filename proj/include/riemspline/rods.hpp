#ifndef RIEMSPLINE_RODS_HPP
#define RIEMSPLINE_RODS_HPP

#include <memory>
#include <vector>

#include "riemspline/manifold.hpp"

namespace riemspline {

/// Closed planar curve in a truncated Fourier basis. Coefficient layout of a
/// chart vector (length 4N):
///   [ a^x_1..a^x_N, b^x_1..b^x_N, a^y_1..a^y_N, b^y_1..b^y_N ]
/// with component(s) = sum_k a_k cos(2 pi k s) + b_k sin(2 pi k s).
/// The constant mode is excluded, which fixes the center of mass at zero.
struct RodShape {
  int N = 0;
  Vec coeffs;

  static RodShape circle(int N, double radius, double phase = 0.0);
};

/// Samples of a shape and its first two arclength-parameter derivatives at
/// the trapezoidal nodes s_j = j / M.
struct RodSamples {
  Mat y;    // M x 2
  Mat ys;   // M x 2
  Mat yss;  // M x 2
};

/// Viscous-rod backend. Dissipation between rods y, yt:
///   W = int (delta/2) (1 - |yt_s|^2/|y_s|^2)^2 |y_s| + delta^3 |yt_ss - y_ss|^2 ds
/// approximated by the trapezoidal rule on M nodes. Derivatives are analytic
/// (chain rule through the node samples, linear pullback to coefficients).
class RodModel : public ManifoldModel {
 public:
  RodModel(int N, int M, double delta, double c_min = 1e-3);

  int dof_count() const override { return 4 * N_; }
  bool has_analytic_derivatives() const override { return true; }
  std::string name() const override { return "rod"; }
  void validate(const Point& y) const override;

  double energy(const Point& y1, const Point& y2) const override;
  Vec d1_energy(const Point& y1, const Point& y2) const override;
  Vec d2_energy(const Point& y1, const Point& y2) const override;
  Mat d11_energy(const Point& y1, const Point& y2) const override;
  Mat d22_energy(const Point& y1, const Point& y2) const override;
  Mat d12_energy(const Point& y1, const Point& y2) const override;
  Mat metric(const Point& y) const override;
  std::optional<Mat> quadratic_part() const override;

  RodSamples eval_samples(const Point& c) const;
  int truncation_order() const { return N_; }
  int node_count() const { return M_; }
  double thickness() const { return delta_; }

  /// Positions sampled at `count` parameters (for rendering); closed polyline.
  Mat sample_polyline(const Point& c, int count) const;

 private:
  int N_, M_;
  double delta_, c_min_;
  Mat B0_, B1_, B2_;  // M x 2N basis matrices for value, d/ds, d^2/ds^2
  Mat B2tB2_;         // cached bending Gram block
};

/// Trapezoidal value of the rod integrand from raw node samples; exists so
/// the sample-level structure of the dissipation (stretching sees only first
/// derivatives, bending only second) can be exercised directly.
double rod_energy_from_samples(const Mat& ys, const Mat& yss, const Mat& yts,
                               const Mat& ytss, double delta);

/// Closed polygon (rows x,y) -> rod of order N via uniform-arclength
/// resampling and Fourier projection; the mean is removed.
RodShape polygon_to_rod(const Mat& polygon, int N);

std::shared_ptr<RodModel> make_rod_model(int N = 16, int M = 128, double delta = 0.1,
                                         double c_min = 1e-3);

}  // namespace riemspline

#endif
