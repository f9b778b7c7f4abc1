#ifndef RIEMSPLINE_PRESETS_HPP
#define RIEMSPLINE_PRESETS_HPP

#include <memory>
#include <string>

#include "riemspline/shells.hpp"
#include "riemspline/solver.hpp"

namespace riemspline {

/// Named demo problems used by the CLI and the verification suites.
struct Preset {
  std::shared_ptr<ManifoldModel> model;
  InterpolationProblem problem;
  std::string name;
};

/// "euclid3"  : 3 scalar points (0,1,0) at t = (0, 1/2, 1), sigma 0.
/// "sphere3"  : 3 points on the unit sphere at t = (0, 1/2, 1).
/// "torus3"   : 3 points on the torus (R=2, r=1) at t = (0, 1/2, 1).
Preset make_preset(const std::string& name, int K, double sigma);

/// Two-triangle "book" mesh: unit hinge edge, fold angle per keyframe.
std::shared_ptr<ShellModel> make_book_shell(const ShellParams& params = ShellParams{});
/// Book positions at a given fold angle (flat = 0 bends nothing; the second
/// panel rotates about the hinge).
Mat book_positions(double fold_angle);

/// Folded strip (6 vertices, 4 triangles): a stationary panel and a panel
/// rotated about the shared hinge by `fold_angle`.
std::shared_ptr<ShellModel> make_strip_shell(const ShellParams& params = ShellParams{});
Mat strip_positions(double fold_angle);

}  // namespace riemspline

#endif
