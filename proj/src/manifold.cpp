#include "riemspline/manifold.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "riemspline/curve.hpp"

namespace riemspline {

bool ManifoldModel::guard_due() const {
#ifndef NDEBUG
  return true;
#else
  return guard_counter_.fetch_add(1, std::memory_order_relaxed) % 16 == 0;
#endif
}

void ManifoldModel::guard(const Point& y1, const Point& y2) const {
  if (guard_due()) {
    validate(y1);
    validate(y2);
  }
}

void ManifoldModel::guard(const Point& y) const {
  if (guard_due()) validate(y);
}

Vec ManifoldModel::d1_energy(const Point& y1, const Point& y2) const {
  return fd_d1_energy(*this, y1, y2);
}

Vec ManifoldModel::d2_energy(const Point& y1, const Point& y2) const {
  return fd_d2_energy(*this, y1, y2);
}

Mat ManifoldModel::d11_energy(const Point& y1, const Point& y2) const {
  return fd_d11_energy(*this, y1, y2);
}

Mat ManifoldModel::d22_energy(const Point& y1, const Point& y2) const {
  return fd_d22_energy(*this, y1, y2);
}

Mat ManifoldModel::d12_energy(const Point& y1, const Point& y2) const {
  return fd_d12_energy(*this, y1, y2);
}

Mat ManifoldModel::metric(const Point& y) const {
  Mat g = 0.5 * d22_energy(y, y);
  return 0.5 * (g + g.transpose());
}

double fd_default_step(const Point& y1, const Point& y2, double scale) {
  return scale * (1.0 + std::max(y1.norm(), y2.norm()));
}

namespace {

// Finite-difference probes stepping over a feasibility boundary are reported
// as degeneracies with advice, per the fallback's error contract.
template <typename Fn>
auto fd_probe(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FeasibilityError& e) {
    throw DegeneracyError(std::string("finite-difference step crossed the feasibility "
                                      "boundary (") +
                          e.what() + "); increase the margin or reduce the step");
  }
}

// Central difference of the energy in one argument.
Vec fd_grad(const ManifoldModel& m, const Point& y1, const Point& y2, int slot, double h) {
  const Point& y = (slot == 1) ? y1 : y2;
  Vec g(y.size());
  Point yp = y, ym = y;
  for (int i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    yp[i] = yi + h;
    ym[i] = yi - h;
    const double fp = (slot == 1) ? m.energy(yp, y2) : m.energy(y1, yp);
    const double fm = (slot == 1) ? m.energy(ym, y2) : m.energy(y1, ym);
    g[i] = (fp - fm) / (2.0 * h);
    yp[i] = yi;
    ym[i] = yi;
  }
  return g;
}

// Second differences of the energy for a single-slot Hessian.
Mat fd_hess_energy(const ManifoldModel& m, const Point& y1, const Point& y2, int slot, double h) {
  const Point& y = (slot == 1) ? y1 : y2;
  const int d = static_cast<int>(y.size());
  auto f = [&](const Point& p) { return (slot == 1) ? m.energy(p, y2) : m.energy(y1, p); };
  Mat H(d, d);
  const double f0 = f(y);
  Point p = y;
  Vec fpp(d), fmm(d);
  for (int i = 0; i < d; ++i) {
    const double yi = y[i];
    p[i] = yi + h; fpp[i] = f(p);
    p[i] = yi - h; fmm[i] = f(p);
    p[i] = yi;
  }
  for (int i = 0; i < d; ++i) {
    H(i, i) = (fpp[i] - 2.0 * f0 + fmm[i]) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      const double yi = y[i], yj = y[j];
      p[i] = yi + h; p[j] = yj + h; const double a = f(p);
      p[j] = yj - h; const double b = f(p);
      p[i] = yi - h; const double c2 = f(p);
      p[j] = yj + h; const double c1 = f(p);
      p[i] = yi; p[j] = yj;
      H(i, j) = H(j, i) = (a - b - c1 + c2) / (4.0 * h * h);
    }
  }
  return H;
}

Mat fd_mixed_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h) {
  const int d1 = static_cast<int>(y1.size()), d2 = static_cast<int>(y2.size());
  Mat H(d1, d2);
  Point a = y1, b = y2;
  for (int i = 0; i < d1; ++i) {
    const double y1i = y1[i];
    for (int j = 0; j < d2; ++j) {
      const double y2j = y2[j];
      a[i] = y1i + h; b[j] = y2j + h; const double fpp = m.energy(a, b);
      b[j] = y2j - h; const double fpm = m.energy(a, b);
      a[i] = y1i - h; const double fmm = m.energy(a, b);
      b[j] = y2j + h; const double fmp = m.energy(a, b);
      a[i] = y1i; b[j] = y2j;
      H(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return H;
}

// Jacobian of an analytic gradient by central differences.
Mat fd_jacobian(const std::function<Vec(const Point&)>& g, const Point& y, double h) {
  Vec g0 = g(y);
  const int rows = static_cast<int>(g0.size());
  const int cols = static_cast<int>(y.size());
  Mat J(rows, cols);
  Point p = y;
  for (int j = 0; j < cols; ++j) {
    const double yj = y[j];
    p[j] = yj + h; Vec gp = g(p);
    p[j] = yj - h; Vec gm = g(p);
    p[j] = yj;
    J.col(j) = (gp - gm) / (2.0 * h);
  }
  return J;
}

}  // namespace

Vec fd_d1_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h) {
  if (h <= 0.0) h = fd_default_step(y1, y2);
  return fd_probe([&] { return fd_grad(m, y1, y2, 1, h); });
}

Vec fd_d2_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h) {
  if (h <= 0.0) h = fd_default_step(y1, y2);
  return fd_probe([&] { return fd_grad(m, y1, y2, 2, h); });
}

Mat fd_d11_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h) {
  if (m.has_analytic_derivatives()) {
    if (h <= 0.0) h = fd_default_step(y1, y2, 1e-6);
    return fd_probe([&] { return fd_jacobian([&](const Point& p) { return m.d1_energy(p, y2); }, y1, h); });
  }
  if (h <= 0.0) h = fd_default_step(y1, y2, 1e-4);
  return fd_probe([&] { return fd_hess_energy(m, y1, y2, 1, h); });
}

Mat fd_d22_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h) {
  if (m.has_analytic_derivatives()) {
    if (h <= 0.0) h = fd_default_step(y1, y2, 1e-6);
    return fd_probe([&] { return fd_jacobian([&](const Point& p) { return m.d2_energy(y1, p); }, y2, h); });
  }
  if (h <= 0.0) h = fd_default_step(y1, y2, 1e-4);
  return fd_probe([&] { return fd_hess_energy(m, y1, y2, 2, h); });
}

Mat fd_d12_energy(const ManifoldModel& m, const Point& y1, const Point& y2, double h) {
  if (m.has_analytic_derivatives()) {
    if (h <= 0.0) h = fd_default_step(y1, y2, 1e-6);
    // Columns are y2 directions, rows the y1 gradient.
    return fd_probe([&] { return fd_jacobian([&](const Point& p) { return m.d1_energy(y1, p); }, y2, h); });
  }
  if (h <= 0.0) h = fd_default_step(y1, y2, 1e-4);
  return fd_probe([&] { return fd_mixed_energy(m, y1, y2, h); });
}

Mat metric_derivative(const ManifoldModel& m, const Point& y, const Vec& u) {
  const double h = 1e-5 * (1.0 + y.norm());
  Mat gp = m.metric(y + h * u);
  Mat gm = m.metric(y - h * u);
  return (gp - gm) / (2.0 * h);
}

Vec solve_spd(const Mat& G, const Vec& b, const char* context) {
  Eigen::LLT<Mat> llt(G);
  if (llt.info() == Eigen::Success) {
    // Cheap definiteness floor: the smallest diagonal entry of L squared
    // bounds nothing by itself, so only re-check on suspiciously small pivots.
    double min_pivot = llt.matrixLLT().diagonal().minCoeff();
    if (min_pivot * min_pivot > 1e-12) return llt.solve(b);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 1e-12) {
    throw DegeneracyError(std::string(context) +
                          ": matrix not positive definite (smallest eigenvalue " +
                          std::to_string(lmin) + ")");
  }
  return G.ldlt().solve(b);
}

Tangent christoffel(const ManifoldModel& m, const Point& y, const Tangent& v,
                    const Tangent& w) {
  const int d = m.dof_count();
  // dG[i] = dg/dy_i, reused for all three terms.
  std::vector<Mat> dG(d);
  const double h = 1e-5 * (1.0 + y.norm());
  Point yp = y, ym = y;
  for (int i = 0; i < d; ++i) {
    const double yi = y[i];
    yp[i] = yi + h;
    ym[i] = yi - h;
    dG[i] = (m.metric(yp) - m.metric(ym)) / (2.0 * h);
    yp[i] = yi;
    ym[i] = yi;
  }
  Mat DGv = Mat::Zero(d, d), DGw = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    DGv += v[i] * dG[i];
    DGw += w[i] * dG[i];
  }
  // r_z = (Dg)(w)(v,z) + (Dg)(v)(w,z) - (Dg)(z)(v,w); the middle contraction
  // is evaluated symmetrically in (v,w) so that Gamma(v,w) == Gamma(w,v)
  // exactly in floating point.
  Vec r = DGw * v + DGv * w;
  for (int i = 0; i < d; ++i) {
    r[i] -= 0.5 * (v.dot(dG[i] * w) + w.dot(dG[i] * v));
  }
  return 0.5 * solve_spd(m.metric(y), r, "christoffel");
}

Tangent covariant_accel(const ManifoldModel& m, const ContinuousCurve& curve, double t) {
  Vec vel = curve.deriv(t, 1);
  Vec acc = curve.deriv(t, 2);
  return acc + christoffel(m, curve.eval(t), vel, vel);
}

}  // namespace riemspline
