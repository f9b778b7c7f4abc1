#include "riemspline/curve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace riemspline {

ContinuousCurve ContinuousCurve::piecewise(std::vector<Piece> pieces) {
  if (pieces.empty()) throw InputError("piecewise curve needs at least one piece");
  ContinuousCurve c;
  c.dim_ = static_cast<int>(pieces.front().coeffs.rows());
  c.t0_ = pieces.front().t0;
  c.t1_ = pieces.back().t1;
  c.pieces_ = std::move(pieces);
  return c;
}

ContinuousCurve ContinuousCurve::analytic(int dim, double t0, double t1,
                                          std::function<Vec(double)> value,
                                          std::function<Vec(double)> deriv1,
                                          std::function<Vec(double)> deriv2) {
  ContinuousCurve c;
  c.dim_ = dim;
  c.t0_ = t0;
  c.t1_ = t1;
  c.f_ = std::move(value);
  c.df_ = std::move(deriv1);
  c.ddf_ = std::move(deriv2);
  return c;
}

const ContinuousCurve::Piece& ContinuousCurve::locate(double t) const {
  if (t < t0_ - 1e-12 || t > t1_ + 1e-12)
    throw InputError("curve evaluated outside its domain");
  // Pieces are few; linear scan keeps breakpoint conventions obvious
  // (right-continuous except at the final breakpoint).
  for (const auto& p : pieces_) {
    if (t < p.t1 || &p == &pieces_.back()) return p;
  }
  return pieces_.back();
}

Vec ContinuousCurve::eval(double t) const {
  if (!is_piecewise()) return f_(t);
  return deriv(t, 0);
}

Vec ContinuousCurve::deriv(double t, int order) const {
  if (!is_piecewise()) {
    if (order == 0) return f_(t);
    if (order == 1) return df_(t);
    if (order == 2) return ddf_(t);
    throw InputError("analytic curve supports derivatives up to order 2");
  }
  const Piece& p = locate(t);
  const double x = t - p.t0;
  const int deg = static_cast<int>(p.coeffs.cols()) - 1;
  Vec out = Vec::Zero(dim_);
  // Horner on the derivative coefficients.
  for (int k = deg; k >= order; --k) {
    double fac = 1.0;
    for (int j = 0; j < order; ++j) fac *= static_cast<double>(k - j);
    out = out * x + fac * p.coeffs.col(k);
  }
  return out;
}

ContinuousCurve hermite_interpolant(const std::vector<Vec>& points, bool periodic) {
  const int K = static_cast<int>(points.size()) - 1;
  if (K < 2) throw InputError("hermite interpolant needs K >= 2");
  const double tau = 1.0 / K;
  const int dim = static_cast<int>(points.front().size());
  std::vector<ContinuousCurve::Piece> pieces;

  auto quadratic_piece = [&](double t0, double t1, const Vec& ym, const Vec& yc,
                             const Vec& yp) {
    ContinuousCurve::Piece p;
    p.t0 = t0;
    p.t1 = t1;
    p.coeffs = Mat::Zero(dim, 3);
    p.coeffs.col(0) = 0.5 * (ym + yc);
    p.coeffs.col(1) = (yc - ym) / tau;
    p.coeffs.col(2) = (yp - 2.0 * yc + ym) / (2.0 * tau * tau);
    return p;
  };

  if (!periodic) {
    ContinuousCurve::Piece head;
    head.t0 = 0.0;
    head.t1 = 0.5 * tau;
    head.coeffs = Mat::Zero(dim, 2);
    head.coeffs.col(0) = points[0];
    head.coeffs.col(1) = (points[1] - points[0]) / tau;
    pieces.push_back(head);
    for (int k = 1; k <= K - 1; ++k) {
      pieces.push_back(quadratic_piece((k - 0.5) * tau, (k + 0.5) * tau,
                                       points[k - 1], points[k], points[k + 1]));
    }
    ContinuousCurve::Piece tail;
    tail.t0 = 1.0 - 0.5 * tau;
    tail.t1 = 1.0;
    tail.coeffs = Mat::Zero(dim, 2);
    // y_{K-1} + (y_K - y_{K-1}) (t - t^{K-1})/tau, rebased to t0 = 1 - tau/2.
    tail.coeffs.col(1) = (points[K] - points[K - 1]) / tau;
    tail.coeffs.col(0) = points[K - 1] + 0.5 * (points[K] - points[K - 1]);
    pieces.push_back(tail);
  } else {
    if ((points[0] - points[K]).norm() > 0.0)
      throw InputError("periodic interpolant requires points[0] == points[K]");
    // First half interval [0, tau/2] belongs to the wrapped piece k = K.
    {
      ContinuousCurve::Piece p = quadratic_piece(-0.5 * tau, 0.5 * tau, points[K - 1],
                                                 points[K], points[1]);
      p.t0 = 0.0;
      // Rebase from t^{K-1/2} so that local coordinate starts at tau/2.
      Mat c = p.coeffs;
      // shift x -> x + tau/2: c0 + c1 (x+h) + c2 (x+h)^2
      const double h = 0.5 * tau;
      p.coeffs.col(0) = c.col(0) + h * c.col(1) + h * h * c.col(2);
      p.coeffs.col(1) = c.col(1) + 2.0 * h * c.col(2);
      p.coeffs.col(2) = c.col(2);
      p.t1 = 0.5 * tau;
      pieces.push_back(p);
    }
    for (int k = 1; k <= K - 1; ++k) {
      pieces.push_back(quadratic_piece((k - 0.5) * tau, (k + 0.5) * tau,
                                       points[k - 1], points[k], points[k + 1]));
    }
    // Trailing half interval [1 - tau/2, 1] of the wrapped piece k = K.
    pieces.push_back(quadratic_piece(1.0 - 0.5 * tau, 1.0, points[K - 1], points[K],
                                     points[1]));
  }
  return ContinuousCurve::piecewise(std::move(pieces));
}

namespace {

// Thomas algorithm with vector-valued right-hand sides.
std::vector<Vec> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                   std::vector<double> c, std::vector<Vec> rhs) {
  const int n = static_cast<int>(b.size());
  for (int i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<Vec> x(n);
  x[n - 1] = rhs[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (rhs[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

ContinuousCurve assemble_cubic(const std::vector<double>& t, const std::vector<Vec>& y,
                               const std::vector<Vec>& M) {
  const int n = static_cast<int>(t.size());
  const int dim = static_cast<int>(y.front().size());
  std::vector<ContinuousCurve::Piece> pieces;
  for (int i = 0; i + 1 < n; ++i) {
    const double h = t[i + 1] - t[i];
    ContinuousCurve::Piece p;
    p.t0 = t[i];
    p.t1 = t[i + 1];
    p.coeffs = Mat::Zero(dim, 4);
    p.coeffs.col(0) = y[i];
    p.coeffs.col(2) = 0.5 * M[i];
    p.coeffs.col(3) = (M[i + 1] - M[i]) / (6.0 * h);
    p.coeffs.col(1) = (y[i + 1] - y[i]) / h - h * (2.0 * M[i] + M[i + 1]) / 6.0;
    pieces.push_back(p);
  }
  return ContinuousCurve::piecewise(std::move(pieces));
}

}  // namespace

ContinuousCurve euclidean_cubic_spline(const std::vector<double>& times,
                                       const std::vector<Vec>& values, BoundaryKind bc,
                                       const Vec& v0, const Vec& v1) {
  const int n = static_cast<int>(times.size());
  if (n != static_cast<int>(values.size()) || n < 2)
    throw InputError("cubic spline needs matching times/values, at least two");
  for (int i = 0; i + 1 < n; ++i)
    if (!(times[i] < times[i + 1]))
      throw InputError("cubic spline times must be strictly increasing");
  const int dim = static_cast<int>(values.front().size());
  const Vec zero = Vec::Zero(dim);

  if (n == 2 && bc == BoundaryKind::natural) {
    std::vector<Vec> M{zero, zero};
    return assemble_cubic(times, values, M);
  }

  std::vector<double> h(n - 1);
  for (int i = 0; i + 1 < n; ++i) h[i] = times[i + 1] - times[i];
  auto slope = [&](int i) { return Vec((values[i + 1] - values[i]) / h[i]); };

  if (bc == BoundaryKind::periodic) {
    if ((values.front() - values.back()).norm() > 1e-14)
      throw InputError("periodic spline requires equal first/last values");
    // Unknowns M_0..M_{n-2} with M_{n-1} = M_0; dense solve per the cyclic
    // structure (data counts are small here).
    const int m = n - 1;
    Mat A = Mat::Zero(m, m);
    Mat rhs = Mat::Zero(m, dim);
    for (int i = 0; i < m; ++i) {
      const int im = (i - 1 + m) % m;
      const double hl = h[(i - 1 + m) % m];
      const double hr = h[i];
      A(i, im) += hl / 6.0;
      A(i, i) += (hl + hr) / 3.0;
      A(i, (i + 1) % m) += hr / 6.0;
      Vec sl = (i == 0) ? slope(n - 2) : slope(i - 1);
      rhs.row(i) = (slope(i) - sl).transpose();
    }
    Mat Msol = A.partialPivLu().solve(rhs);
    std::vector<Vec> M(n);
    for (int i = 0; i < m; ++i) M[i] = Msol.row(i).transpose();
    M[n - 1] = M[0];
    return assemble_cubic(times, values, M);
  }

  // Natural / clamped tridiagonal system in the second derivatives.
  std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0);
  std::vector<Vec> rhs(n, zero);
  if (bc == BoundaryKind::natural) {
    di[0] = 1.0;
    di[n - 1] = 1.0;
  } else if (bc == BoundaryKind::hermite) {
    if (v0.size() != dim || v1.size() != dim)
      throw InputError("hermite spline requires end velocities v0, v1");
    di[0] = h[0] / 3.0;
    up[0] = h[0] / 6.0;
    rhs[0] = slope(0) - v0;
    lo[n - 1] = h[n - 2] / 6.0;
    di[n - 1] = h[n - 2] / 3.0;
    rhs[n - 1] = v1 - slope(n - 2);
  } else {
    throw InputError("unsupported boundary kind");
  }
  for (int i = 1; i + 1 < n; ++i) {
    lo[i] = h[i - 1] / 6.0;
    di[i] = (h[i - 1] + h[i]) / 3.0;
    up[i] = h[i] / 6.0;
    rhs[i] = slope(i) - slope(i - 1);
  }
  std::vector<Vec> M = solve_tridiagonal(lo, di, up, rhs);
  return assemble_cubic(times, values, M);
}

double three_point_seminorm(const Vec& y_minus, const Vec& y_mid, const Vec& y_plus,
                            double tau) {
  if (tau <= 0.0) throw InputError("three_point_seminorm requires tau > 0");
  return 1.5 / (tau * tau * tau) * (y_minus - 2.0 * y_mid + y_plus).squaredNorm();
}

ContinuousCurve three_point_minimizer(const Vec& y_minus, const Vec& y_mid,
                                      const Vec& y_plus, double tau) {
  const int dim = static_cast<int>(y_minus.size());
  const Vec d2 = y_plus - 2.0 * y_mid + y_minus;
  std::vector<ContinuousCurve::Piece> pieces(2);
  // z(t) = t^3 d2 / (4 tau^3) - t (y_plus - 6 y_mid + 5 y_minus) / (4 tau) + y_minus
  pieces[0].t0 = 0.0;
  pieces[0].t1 = tau;
  pieces[0].coeffs = Mat::Zero(dim, 4);
  pieces[0].coeffs.col(0) = y_minus;
  pieces[0].coeffs.col(1) = -(y_plus - 6.0 * y_mid + 5.0 * y_minus) / (4.0 * tau);
  pieces[0].coeffs.col(3) = d2 / (4.0 * tau * tau * tau);
  // Second interval, rebased to local coordinate x = t - tau:
  // z(t) = -(t^3 - 6 t^2 tau) d2/(4 tau^3) - t (7 y_plus - 18 y_mid + 11 y_minus)/(4 tau)
  //        + (y_plus - 2 y_mid + 3 y_minus)/2,   t in [tau, 2 tau].
  pieces[1].t0 = tau;
  pieces[1].t1 = 2.0 * tau;
  pieces[1].coeffs = Mat::Zero(dim, 4);
  const Vec lin = -(7.0 * y_plus - 18.0 * y_mid + 11.0 * y_minus) / (4.0 * tau);
  const Vec c0 = 0.5 * (y_plus - 2.0 * y_mid + 3.0 * y_minus);
  // Expand -( (x+tau)^3 - 6 (x+tau)^2 tau ) d2/(4 tau^3) + (x+tau) lin + c0.
  const double t3 = tau * tau * tau;
  pieces[1].coeffs.col(0) = -(t3 - 6.0 * t3) * d2 / (4.0 * t3) + tau * lin + c0;
  pieces[1].coeffs.col(1) = -(3.0 * tau * tau - 12.0 * tau * tau) * d2 / (4.0 * t3) + lin;
  pieces[1].coeffs.col(2) = -(3.0 * tau - 6.0 * tau) * d2 / (4.0 * t3);
  pieces[1].coeffs.col(3) = -d2 / (4.0 * t3);
  return ContinuousCurve::piecewise(std::move(pieces));
}

}  // namespace riemspline
