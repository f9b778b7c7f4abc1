#include "riemspline/gradcheck.hpp"

#include <random>

#include "riemspline/embedded.hpp"
#include "riemspline/presets.hpp"
#include "riemspline/rods.hpp"

namespace riemspline {

namespace {

// Forwarding decorator with a deliberately wrong first derivative; used by
// the gradcheck self-test to prove the check can fail.
class CorruptedModel : public ManifoldModel {
 public:
  explicit CorruptedModel(const ManifoldModel& base) : base_(base) {}
  int dof_count() const override { return base_.dof_count(); }
  bool has_analytic_derivatives() const override { return base_.has_analytic_derivatives(); }
  bool has_closed_form_distance() const override { return base_.has_closed_form_distance(); }
  std::string name() const override { return base_.name() + "(corrupted)"; }
  void validate(const Point& y) const override { base_.validate(y); }
  double energy(const Point& y1, const Point& y2) const override {
    return base_.energy(y1, y2);
  }
  Vec d1_energy(const Point& y1, const Point& y2) const override {
    return 1.001 * base_.d1_energy(y1, y2);
  }
  Vec d2_energy(const Point& y1, const Point& y2) const override {
    return base_.d2_energy(y1, y2);
  }
  Mat d11_energy(const Point& y1, const Point& y2) const override {
    return base_.d11_energy(y1, y2);
  }
  Mat d22_energy(const Point& y1, const Point& y2) const override {
    return base_.d22_energy(y1, y2);
  }
  Mat d12_energy(const Point& y1, const Point& y2) const override {
    return base_.d12_energy(y1, y2);
  }
  Mat metric(const Point& y) const override { return base_.metric(y); }

 private:
  const ManifoldModel& base_;
};

struct FreeVector {
  std::vector<int> free;
  int d = 0;

  Vec gather(const DiscretePath& path) const {
    Vec x(static_cast<int>(free.size()) * d);
    for (std::size_t i = 0; i < free.size(); ++i) x.segment(i * d, d) = path.points[free[i]];
    return x;
  }
  void scatter(const Vec& x, DiscretePath& path) const {
    for (std::size_t i = 0; i < free.size(); ++i) path.points[free[i]] = x.segment(i * d, d);
    if (path.bc == BoundaryKind::periodic) path.points[path.K] = path.points[0];
  }
};

}  // namespace

GradCheckReport gradcheck_model(const ManifoldModel& model,
                                const InterpolationProblem& problem, int num_paths,
                                unsigned seed, bool inject_bug) {
  const ManifoldModel* m = &model;
  std::unique_ptr<CorruptedModel> corrupted;
  if (inject_bug) {
    corrupted = std::make_unique<CorruptedModel>(model);
    m = corrupted.get();
  }
  problem.validate(*m, false);

  GradCheckReport report;
  report.backend = m->name();
  report.paths = num_paths;

  FreeVector fv{free_indices(problem, false), m->dof_count()};
  const double tol_mid = problem.tol_mid_effective();

  DiscretePath base = initial_path(*m, problem);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  auto objective = [&](const DiscretePath& ref, const Vec& x) {
    DiscretePath p = ref;
    fv.scatter(x, p);
    const double F = discrete_spline_energy(*m, p, tol_mid);
    const double E = discrete_path_energy(*m, p.points, p.bc == BoundaryKind::periodic);
    return F + problem.sigma * E;
  };

  for (int trial = 0; trial < num_paths; ++trial) {
    // Random feasible perturbation of the free nodes.
    DiscretePath path = base;
    double amp = 0.05 * (1.0 + problem.data_magnitude());
    for (int attempt = 0; attempt < 12; ++attempt) {
      DiscretePath candidate = base;
      std::mt19937_64 trial_rng(seed + 977u * trial + attempt);
      bool ok = true;
      for (int j : fv.free) {
        Vec dp(fv.d);
        for (int i = 0; i < fv.d; ++i) dp[i] = amp * unif(trial_rng);
        candidate.points[j] += dp;
        try {
          m->validate(candidate.points[j]);
        } catch (const FeasibilityError&) {
          ok = false;
          break;
        }
      }
      if (candidate.bc == BoundaryKind::periodic) candidate.points[candidate.K] = candidate.points[0];
      if (ok) {
        try {
          discrete_spline_energy(*m, candidate, tol_mid);
          path = candidate;
          break;
        } catch (const std::runtime_error&) {
          ok = false;
        }
      }
      amp *= 0.5;
    }

    // Adjoint gradient at the (already solved) path.
    discrete_spline_energy(*m, path, tol_mid);
    const Vec g_adj = spline_gradient(*m, path, problem.sigma, problem);

    // Central finite differences of the whole objective.
    Vec x0 = fv.gather(path);
    const double h = 1e-6 * (1.0 + x0.cwiseAbs().maxCoeff());
    Vec g_fd(x0.size());
    for (int i = 0; i < x0.size(); ++i) {
      Vec xp = x0, xm = x0;
      xp[i] += h;
      xm[i] -= h;
      g_fd[i] = (objective(path, xp) - objective(path, xm)) / (2.0 * h);
    }
    const double denom = std::max(g_fd.norm(), 1e-12);
    report.max_rel_err = std::max(report.max_rel_err, (g_adj - g_fd).norm() / denom);
  }
  return report;
}

std::vector<GradCheckReport> gradcheck_all_backends(int num_paths, unsigned seed,
                                                    bool inject_bug) {
  std::vector<GradCheckReport> reports;

  for (const char* preset_name : {"euclid3", "sphere3", "torus3"}) {
    Preset p = make_preset(preset_name, 8, 0.1);
    reports.push_back(gradcheck_model(*p.model, p.problem, num_paths, seed, inject_bug));
  }

  {
    auto rod = make_rod_model(4, 32, 0.1);
    InterpolationProblem problem;
    problem.K = 4;
    problem.sigma = 0.1;
    problem.times = {0.0, 0.5, 1.0};
    RodShape a = RodShape::circle(4, 1.0);
    RodShape b = RodShape::circle(4, 1.2);
    b.coeffs[1] += 0.15;  // second cosine harmonic, x component
    b.coeffs[3 * 4 + 1] -= 0.1;
    RodShape c = RodShape::circle(4, 0.9, 0.1);
    problem.data = {a.coeffs, b.coeffs, c.coeffs};
    reports.push_back(gradcheck_model(*rod, problem, num_paths, seed, inject_bug));
  }

  {
    auto shell = make_book_shell();
    InterpolationProblem problem;
    problem.K = 4;
    problem.sigma = 0.1;
    problem.times = {0.0, 0.5, 1.0};
    problem.data = {shell->to_chart(book_positions(-0.5)), shell->to_chart(book_positions(0.0)),
                    shell->to_chart(book_positions(0.5))};
    reports.push_back(gradcheck_model(*shell, problem, num_paths, seed, inject_bug));
  }
  return reports;
}

}  // namespace riemspline
