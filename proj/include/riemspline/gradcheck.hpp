#ifndef RIEMSPLINE_GRADCHECK_HPP
#define RIEMSPLINE_GRADCHECK_HPP

#include <memory>
#include <string>
#include <vector>

#include "riemspline/solver.hpp"

namespace riemspline {

struct GradCheckReport {
  std::string backend;
  int paths = 0;
  double max_rel_err = 0.0;
  double tolerance = 1e-5;
  bool passed() const { return max_rel_err <= tolerance; }
};

/// Compares the adjoint gradient of F^{sigma,K} against central finite
/// differences of the full objective (midpoints re-solved per evaluation) on
/// `num_paths` random perturbations of the chart-linear initial path.
GradCheckReport gradcheck_model(const ManifoldModel& model,
                                const InterpolationProblem& problem, int num_paths,
                                unsigned seed, bool inject_bug = false);

/// The standard five-backend sweep (euclidean, sphere, torus, rod N=4,
/// two-triangle shell).
std::vector<GradCheckReport> gradcheck_all_backends(int num_paths, unsigned seed,
                                                    bool inject_bug = false);

}  // namespace riemspline

#endif
