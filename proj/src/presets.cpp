#include "riemspline/presets.hpp"

#include <cmath>

#include "riemspline/embedded.hpp"

namespace riemspline {

Preset make_preset(const std::string& name, int K, double sigma) {
  Preset p;
  p.name = name;
  p.problem.K = K;
  p.problem.sigma = sigma;
  p.problem.bc = BoundaryKind::natural;
  p.problem.times = {0.0, 0.5, 1.0};
  auto pt = [](double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
  };
  if (name == "euclid3") {
    p.model = make_euclidean_model(1);
    Vec a(1), b(1), c(1);
    a << 0.0;
    b << 1.0;
    c << 0.0;
    p.problem.data = {a, b, c};
  } else if (name == "sphere3") {
    p.model = make_sphere_model(1.0);
    p.problem.data = {pt(1.0, 0.2), pt(1.7, 1.0), pt(1.1, 1.9)};
  } else if (name == "torus3") {
    p.model = make_torus_model(2.0, 1.0);
    p.problem.data = {pt(0.0, 0.0), pt(1.4, 1.8), pt(2.9, 0.4)};
  } else {
    throw InputError("unknown preset '" + name +
                     "' (expected euclid3, sphere3 or torus3)");
  }
  return p;
}

Mat book_positions(double fold_angle) {
  // Hinge edge from (0,0,0) to (0,1,0); first triangle in the xy-plane,
  // second panel rotated about the hinge (y axis) by the fold angle.
  Mat pos(4, 3);
  pos.row(0) << 0.0, 0.0, 0.0;
  pos.row(1) << 0.0, 1.0, 0.0;
  pos.row(2) << -1.0, 0.5, 0.0;
  pos.row(3) << std::cos(fold_angle), 0.5, std::sin(fold_angle);
  return pos;
}

std::shared_ptr<ShellModel> make_book_shell(const ShellParams& params) {
  std::vector<std::array<int, 3>> tris = {{0, 1, 2}, {0, 3, 1}};
  return std::make_shared<ShellModel>(book_positions(0.0), tris, params);
}

Mat strip_positions(double fold_angle) {
  // Stationary right panel (x >= 0) and a left panel rotated out of plane.
  Mat pos(6, 3);
  pos.row(0) << 0.0, 0.0, 0.0;                                      // hinge
  pos.row(1) << 0.0, 1.0, 0.0;                                      // hinge
  pos.row(2) << 1.0, 0.0, 0.0;
  pos.row(3) << 1.0, 1.0, 0.0;
  pos.row(4) << -std::cos(fold_angle), 0.0, std::sin(fold_angle);
  pos.row(5) << -std::cos(fold_angle), 1.0, std::sin(fold_angle);
  return pos;
}

std::shared_ptr<ShellModel> make_strip_shell(const ShellParams& params) {
  std::vector<std::array<int, 3>> tris = {
      {0, 2, 3}, {0, 3, 1},  // stationary panel (first triangle anchors the gauge)
      {0, 1, 5}, {0, 5, 4}   // folding panel
  };
  return std::make_shared<ShellModel>(strip_positions(0.0), tris, params);
}

}  // namespace riemspline
