#include "riemspline/rods.hpp"

#include <cmath>

namespace riemspline {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

// Per-node partials of the stretching density
//   f(q, qt) = (delta/2) (1 - qt/q)^2 sqrt(q),  q = |y_s|^2, qt = |yt_s|^2.
struct StretchPartials {
  double fq, fqt, fqq, fqtqt, fqqt;
};

StretchPartials stretch_partials(double q, double qt, double delta, double c_min,
                                 int node) {
  if (q < c_min * c_min)
    throw DegeneracyError("rod: arclength density below bound at node " +
                          std::to_string(node));
  const double r = qt / q;
  const double one_m_r = 1.0 - r;
  const double q12 = std::sqrt(q);
  const double q32 = q * q12;
  const double q52 = q * q32;
  const double q72 = q * q52;
  StretchPartials p;
  p.fq = delta * one_m_r * qt / q32 + 0.25 * delta * one_m_r * one_m_r / q12;
  p.fqt = -delta * one_m_r / q12;
  p.fqq = delta * qt * qt / q72 - delta * one_m_r * qt / q52 -
          0.125 * delta * one_m_r * one_m_r / q32;
  p.fqtqt = delta / q32;
  p.fqqt = 0.5 * delta * one_m_r / q32 - delta * qt / q52;
  return p;
}

}  // namespace

RodShape RodShape::circle(int N, double radius, double phase) {
  // radius * (cos(2 pi (s + phase)), sin(2 pi (s + phase)))
  RodShape s;
  s.N = N;
  s.coeffs = Vec::Zero(4 * N);
  const double c = std::cos(kTwoPi * phase), sn = std::sin(kTwoPi * phase);
  s.coeffs[0] = radius * c;        // a^x_1
  s.coeffs[N] = -radius * sn;      // b^x_1
  s.coeffs[2 * N] = radius * sn;   // a^y_1
  s.coeffs[3 * N] = radius * c;    // b^y_1
  return s;
}

RodModel::RodModel(int N, int M, double delta, double c_min)
    : N_(N), M_(M), delta_(delta), c_min_(c_min) {
  if (N < 1) throw InputError("rod truncation order must be at least 1");
  if (M % 2 != 0) throw InputError("rod quadrature node count must be even");
  if (M < 4 * N + 4)
    throw InputError("rod quadrature needs M >= 4N+4 nodes (aliasing margin); got M = " +
                     std::to_string(M) + " for N = " + std::to_string(N));
  if (delta <= 0.0) throw InputError("rod thickness delta must be positive");
  B0_.resize(M, 2 * N);
  B1_.resize(M, 2 * N);
  B2_.resize(M, 2 * N);
  for (int j = 0; j < M; ++j) {
    const double s = static_cast<double>(j) / M;
    for (int k = 1; k <= N; ++k) {
      const double w = kTwoPi * k;
      const double c = std::cos(w * s), sn = std::sin(w * s);
      B0_(j, k - 1) = c;
      B0_(j, N + k - 1) = sn;
      B1_(j, k - 1) = -w * sn;
      B1_(j, N + k - 1) = w * c;
      B2_(j, k - 1) = -w * w * c;
      B2_(j, N + k - 1) = -w * w * sn;
    }
  }
  B2tB2_ = B2_.transpose() * B2_;
}

RodSamples RodModel::eval_samples(const Point& c) const {
  RodSamples s;
  const auto cx = c.head(2 * N_);
  const auto cy = c.tail(2 * N_);
  s.y.resize(M_, 2);
  s.ys.resize(M_, 2);
  s.yss.resize(M_, 2);
  s.y.col(0) = B0_ * cx;
  s.y.col(1) = B0_ * cy;
  s.ys.col(0) = B1_ * cx;
  s.ys.col(1) = B1_ * cy;
  s.yss.col(0) = B2_ * cx;
  s.yss.col(1) = B2_ * cy;
  return s;
}

void RodModel::validate(const Point& y) const {
  if (y.size() != 4 * N_) throw FeasibilityError("rod: coefficient vector has wrong size");
  if (!y.allFinite()) throw FeasibilityError("rod: non-finite coefficients");
  const auto cx = y.head(2 * N_);
  const auto cy = y.tail(2 * N_);
  const Vec xs = B1_ * cx;
  const Vec ys = B1_ * cy;
  for (int j = 0; j < M_; ++j) {
    const double speed = std::hypot(xs[j], ys[j]);
    if (speed < c_min_)
      throw FeasibilityError("rod: arclength density |y_s| = " + std::to_string(speed) +
                             " below bound " + std::to_string(c_min_) + " at node " +
                             std::to_string(j));
  }
}

double rod_energy_from_samples(const Mat& ys, const Mat& yss, const Mat& yts,
                               const Mat& ytss, double delta) {
  const int M = static_cast<int>(ys.rows());
  double acc = 0.0;
  for (int j = 0; j < M; ++j) {
    const double q = ys.row(j).squaredNorm();
    const double qt = yts.row(j).squaredNorm();
    const double a = 1.0 - qt / q;
    acc += 0.5 * delta * a * a * std::sqrt(q) + delta * delta * delta *
           (ytss.row(j) - yss.row(j)).squaredNorm();
  }
  return acc / M;
}

double RodModel::energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const RodSamples s1 = eval_samples(y1);
  const RodSamples s2 = eval_samples(y2);
  for (int j = 0; j < M_; ++j) {
    if (s1.ys.row(j).norm() < c_min_)
      throw DegeneracyError("rod: arclength density below bound at node " +
                            std::to_string(j));
  }
  return rod_energy_from_samples(s1.ys, s1.yss, s2.ys, s2.yss, delta_);
}

Vec RodModel::d1_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const RodSamples s1 = eval_samples(y1);
  const RodSamples s2 = eval_samples(y2);
  Mat gu(M_, 2), gb(M_, 2);
  for (int j = 0; j < M_; ++j) {
    const double q = s1.ys.row(j).squaredNorm();
    const double qt = s2.ys.row(j).squaredNorm();
    const auto p = stretch_partials(q, qt, delta_, c_min_, j);
    gu.row(j) = 2.0 * p.fq * s1.ys.row(j);
    gb.row(j) = -2.0 * delta_ * delta_ * delta_ * (s2.yss.row(j) - s1.yss.row(j));
  }
  Vec g(4 * N_);
  g.head(2 * N_) = (B1_.transpose() * gu.col(0) + B2_.transpose() * gb.col(0)) / M_;
  g.tail(2 * N_) = (B1_.transpose() * gu.col(1) + B2_.transpose() * gb.col(1)) / M_;
  return g;
}

Vec RodModel::d2_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const RodSamples s1 = eval_samples(y1);
  const RodSamples s2 = eval_samples(y2);
  Mat gu(M_, 2), gb(M_, 2);
  for (int j = 0; j < M_; ++j) {
    const double q = s1.ys.row(j).squaredNorm();
    const double qt = s2.ys.row(j).squaredNorm();
    const auto p = stretch_partials(q, qt, delta_, c_min_, j);
    gu.row(j) = 2.0 * p.fqt * s2.ys.row(j);
    gb.row(j) = 2.0 * delta_ * delta_ * delta_ * (s2.yss.row(j) - s1.yss.row(j));
  }
  Vec g(4 * N_);
  g.head(2 * N_) = (B1_.transpose() * gu.col(0) + B2_.transpose() * gb.col(0)) / M_;
  g.tail(2 * N_) = (B1_.transpose() * gu.col(1) + B2_.transpose() * gb.col(1)) / M_;
  return g;
}

namespace {

// Assembles (1/M) * [B^T diag(w_ab) B] over the 2x2 component structure into
// a (4N x 4N) coefficient matrix. wxx/wxy/wyy/wyx are node weight vectors of
// the 2x2 node blocks; A and B are the row bases of the two slots.
Mat assemble_blocks(const Mat& A, const Mat& B, const Vec& wxx, const Vec& wxy,
                    const Vec& wyx, const Vec& wyy) {
  const int n2 = static_cast<int>(A.cols());
  const int M = static_cast<int>(A.rows());
  Mat out(2 * n2, 2 * n2);
  out.topLeftCorner(n2, n2) = A.transpose() * wxx.asDiagonal() * B / M;
  out.topRightCorner(n2, n2) = A.transpose() * wxy.asDiagonal() * B / M;
  out.bottomLeftCorner(n2, n2) = A.transpose() * wyx.asDiagonal() * B / M;
  out.bottomRightCorner(n2, n2) = A.transpose() * wyy.asDiagonal() * B / M;
  return out;
}

}  // namespace

Mat RodModel::d11_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const RodSamples s1 = eval_samples(y1);
  const RodSamples s2 = eval_samples(y2);
  Vec wxx(M_), wxy(M_), wyy(M_);
  for (int j = 0; j < M_; ++j) {
    const double q = s1.ys.row(j).squaredNorm();
    const double qt = s2.ys.row(j).squaredNorm();
    const auto p = stretch_partials(q, qt, delta_, c_min_, j);
    const double ux = s1.ys(j, 0), uy = s1.ys(j, 1);
    wxx[j] = 4.0 * p.fqq * ux * ux + 2.0 * p.fq;
    wxy[j] = 4.0 * p.fqq * ux * uy;
    wyy[j] = 4.0 * p.fqq * uy * uy + 2.0 * p.fq;
  }
  Mat H = assemble_blocks(B1_, B1_, wxx, wxy, wxy, wyy);
  const double bend = 2.0 * delta_ * delta_ * delta_ / M_;
  H.topLeftCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  H.bottomRightCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  return H;
}

Mat RodModel::d22_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const RodSamples s1 = eval_samples(y1);
  const RodSamples s2 = eval_samples(y2);
  Vec wxx(M_), wxy(M_), wyy(M_);
  for (int j = 0; j < M_; ++j) {
    const double q = s1.ys.row(j).squaredNorm();
    const double qt = s2.ys.row(j).squaredNorm();
    const auto p = stretch_partials(q, qt, delta_, c_min_, j);
    const double ux = s2.ys(j, 0), uy = s2.ys(j, 1);
    wxx[j] = 4.0 * p.fqtqt * ux * ux + 2.0 * p.fqt;
    wxy[j] = 4.0 * p.fqtqt * ux * uy;
    wyy[j] = 4.0 * p.fqtqt * uy * uy + 2.0 * p.fqt;
  }
  Mat H = assemble_blocks(B1_, B1_, wxx, wxy, wxy, wyy);
  const double bend = 2.0 * delta_ * delta_ * delta_ / M_;
  H.topLeftCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  H.bottomRightCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  return H;
}

Mat RodModel::d12_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const RodSamples s1 = eval_samples(y1);
  const RodSamples s2 = eval_samples(y2);
  Vec wxx(M_), wxy(M_), wyx(M_), wyy(M_);
  for (int j = 0; j < M_; ++j) {
    const double q = s1.ys.row(j).squaredNorm();
    const double qt = s2.ys.row(j).squaredNorm();
    const auto p = stretch_partials(q, qt, delta_, c_min_, j);
    const double ux = s1.ys(j, 0), uy = s1.ys(j, 1);
    const double vx = s2.ys(j, 0), vy = s2.ys(j, 1);
    wxx[j] = 4.0 * p.fqqt * ux * vx;
    wxy[j] = 4.0 * p.fqqt * ux * vy;
    wyx[j] = 4.0 * p.fqqt * uy * vx;
    wyy[j] = 4.0 * p.fqqt * uy * vy;
  }
  Mat H = assemble_blocks(B1_, B1_, wxx, wxy, wyx, wyy);
  const double bend = -2.0 * delta_ * delta_ * delta_ / M_;
  H.topLeftCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  H.bottomRightCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  return H;
}

Mat RodModel::metric(const Point& y) const {
  guard(y);
  const RodSamples s = eval_samples(y);
  Vec wxx(M_), wxy(M_), wyy(M_);
  for (int j = 0; j < M_; ++j) {
    const double q = s.ys.row(j).squaredNorm();
    const double q32 = q * std::sqrt(q);
    const double ux = s.ys(j, 0), uy = s.ys(j, 1);
    // 2 delta t t^T / |y_s| with t = y_s / |y_s|
    wxx[j] = 2.0 * delta_ * ux * ux / q32;
    wxy[j] = 2.0 * delta_ * ux * uy / q32;
    wyy[j] = 2.0 * delta_ * uy * uy / q32;
  }
  Mat G = assemble_blocks(B1_, B1_, wxx, wxy, wxy, wyy);
  const double bend = delta_ * delta_ * delta_ / M_;
  G.topLeftCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  G.bottomRightCorner(2 * N_, 2 * N_) += bend * B2tB2_;
  return G;
}

std::optional<Mat> RodModel::quadratic_part() const {
  Mat Q = Mat::Zero(4 * N_, 4 * N_);
  const double bend = delta_ * delta_ * delta_ / M_;
  Q.topLeftCorner(2 * N_, 2 * N_) = bend * B2tB2_;
  Q.bottomRightCorner(2 * N_, 2 * N_) = bend * B2tB2_;
  return Q;
}

Mat RodModel::sample_polyline(const Point& c, int count) const {
  Mat out(count + 1, 2);
  const auto cx = c.head(2 * N_);
  const auto cy = c.tail(2 * N_);
  for (int j = 0; j <= count; ++j) {
    const double s = static_cast<double>(j % count) / count;
    double x = 0.0, y = 0.0;
    for (int k = 1; k <= N_; ++k) {
      const double w = kTwoPi * k;
      x += cx[k - 1] * std::cos(w * s) + cx[N_ + k - 1] * std::sin(w * s);
      y += cy[k - 1] * std::cos(w * s) + cy[N_ + k - 1] * std::sin(w * s);
    }
    out(j, 0) = x;
    out(j, 1) = y;
  }
  return out;
}

RodShape polygon_to_rod(const Mat& polygon, int N) {
  if (polygon.rows() < 3 || polygon.cols() != 2)
    throw InputError("polygon must have at least 3 rows of (x, y)");
  // Drop a duplicated closing vertex.
  int n = static_cast<int>(polygon.rows());
  if ((polygon.row(0) - polygon.row(n - 1)).norm() < 1e-12) --n;
  // Cumulative arclength around the closed polygon.
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i)
    cum[i + 1] = cum[i] + (polygon.row((i + 1) % n) - polygon.row(i)).norm();
  const double total = cum[n];
  if (total <= 0.0) throw InputError("degenerate polygon");

  const int R = std::max(512, 16 * N);
  Mat samples(R, 2);
  int seg = 0;
  for (int j = 0; j < R; ++j) {
    const double target = total * j / R;
    while (seg + 1 < n && cum[seg + 1] < target) ++seg;
    const double local = (target - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
    samples.row(j) =
        polygon.row(seg) + local * (polygon.row((seg + 1) % n) - polygon.row(seg));
  }
  Eigen::RowVector2d mean = samples.colwise().mean();
  samples.rowwise() -= mean;

  RodShape shape;
  shape.N = N;
  shape.coeffs = Vec::Zero(4 * N);
  for (int k = 1; k <= N; ++k) {
    double axk = 0, bxk = 0, ayk = 0, byk = 0;
    for (int j = 0; j < R; ++j) {
      const double ang = kTwoPi * k * j / R;
      const double c = std::cos(ang), s = std::sin(ang);
      axk += samples(j, 0) * c;
      bxk += samples(j, 0) * s;
      ayk += samples(j, 1) * c;
      byk += samples(j, 1) * s;
    }
    shape.coeffs[k - 1] = 2.0 * axk / R;
    shape.coeffs[N + k - 1] = 2.0 * bxk / R;
    shape.coeffs[2 * N + k - 1] = 2.0 * ayk / R;
    shape.coeffs[3 * N + k - 1] = 2.0 * byk / R;
  }
  return shape;
}

std::shared_ptr<RodModel> make_rod_model(int N, int M, double delta, double c_min) {
  return std::make_shared<RodModel>(N, M, delta, c_min);
}

}  // namespace riemspline
