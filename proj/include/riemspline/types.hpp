#ifndef RIEMSPLINE_TYPES_HPP
#define RIEMSPLINE_TYPES_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace riemspline {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A point on a manifold, expressed in chart / DOF coordinates.
using Point = Eigen::VectorXd;
// A tangent vector in the same coordinates (base point passed alongside).
using Tangent = Eigen::VectorXd;

// Input violates a backend feasibility constraint (names the constraint).
struct FeasibilityError : std::runtime_error {
  explicit FeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical degeneracy (singular metric, collapsed triangle, ...).
struct DegeneracyError : std::runtime_error {
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed problem description or file.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solve failed to reach its tolerance.
struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace riemspline

#endif
