#include "riemspline/embedded.hpp"

#include <cmath>

namespace riemspline {

namespace {
constexpr double kPoleGuard = 1e-3;
constexpr double kTwoPi = 2.0 * M_PI;
}  // namespace

Parameterization make_euclidean(int dim) {
  if (dim < 1) throw InputError("euclidean dimension must be positive");
  Parameterization p;
  p.name = "euclidean(" + std::to_string(dim) + ")";
  p.chart_dim = dim;
  p.embed_dim = dim;
  p.phi = [](const Vec& y) { return y; };
  p.dphi = [dim](const Vec&) { return Mat::Identity(dim, dim); };
  p.d2phi = [dim](const Vec&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
  p.periods = Vec::Zero(dim);
  return p;
}

Parameterization make_sphere(double radius) {
  if (radius <= 0.0) throw InputError("sphere radius must be positive");
  Parameterization p;
  p.name = "sphere";
  p.chart_dim = 2;
  p.embed_dim = 3;
  const double R = radius;
  p.phi = [R](const Vec& y) {
    const double th = y[0], ph = y[1];
    Vec e(3);
    e << R * std::sin(th) * std::cos(ph), R * std::sin(th) * std::sin(ph),
        R * std::cos(th);
    return e;
  };
  p.dphi = [R](const Vec& y) {
    const double th = y[0], ph = y[1];
    Mat J(3, 2);
    J << R * std::cos(th) * std::cos(ph), -R * std::sin(th) * std::sin(ph),
        R * std::cos(th) * std::sin(ph), R * std::sin(th) * std::cos(ph),
        -R * std::sin(th), 0.0;
    return J;
  };
  p.d2phi = [R](const Vec& y) {
    const double th = y[0], ph = y[1];
    std::vector<Mat> H(3, Mat::Zero(2, 2));
    // x = R sin th cos ph
    H[0] << -R * std::sin(th) * std::cos(ph), -R * std::cos(th) * std::sin(ph),
        -R * std::cos(th) * std::sin(ph), -R * std::sin(th) * std::cos(ph);
    // y = R sin th sin ph
    H[1] << -R * std::sin(th) * std::sin(ph), R * std::cos(th) * std::cos(ph),
        R * std::cos(th) * std::cos(ph), -R * std::sin(th) * std::sin(ph);
    // z = R cos th
    H[2] << -R * std::cos(th), 0.0, 0.0, 0.0;
    return H;
  };
  p.periods = Vec::Zero(2);
  p.periods[1] = kTwoPi;
  p.domain_check = [](const Vec& y) {
    if (!(y[0] >= kPoleGuard && y[0] <= M_PI - kPoleGuard))
      throw FeasibilityError(
          "sphere chart: theta outside pole guard band [1e-3, pi - 1e-3]; "
          "re-chart problems crossing the poles");
  };
  return p;
}

Parameterization make_torus(double R, double r) {
  if (!(R > r && r > 0.0)) throw InputError("torus requires R > r > 0");
  Parameterization p;
  p.name = "torus";
  p.chart_dim = 2;
  p.embed_dim = 3;
  p.phi = [R, r](const Vec& y) {
    const double th = y[0], ph = y[1];
    Vec e(3);
    e << (R + r * std::cos(ph)) * std::cos(th), (R + r * std::cos(ph)) * std::sin(th),
        r * std::sin(ph);
    return e;
  };
  p.dphi = [R, r](const Vec& y) {
    const double th = y[0], ph = y[1];
    Mat J(3, 2);
    J << -(R + r * std::cos(ph)) * std::sin(th), -r * std::sin(ph) * std::cos(th),
        (R + r * std::cos(ph)) * std::cos(th), -r * std::sin(ph) * std::sin(th),
        0.0, r * std::cos(ph);
    return J;
  };
  p.d2phi = [R, r](const Vec& y) {
    const double th = y[0], ph = y[1];
    std::vector<Mat> H(3, Mat::Zero(2, 2));
    H[0] << -(R + r * std::cos(ph)) * std::cos(th), r * std::sin(ph) * std::sin(th),
        r * std::sin(ph) * std::sin(th), -r * std::cos(ph) * std::cos(th);
    H[1] << -(R + r * std::cos(ph)) * std::sin(th), -r * std::sin(ph) * std::cos(th),
        -r * std::sin(ph) * std::cos(th), -r * std::cos(ph) * std::sin(th);
    H[2] << 0.0, 0.0, 0.0, -r * std::sin(ph);
    return H;
  };
  p.periods = Vec(2);
  p.periods << kTwoPi, kTwoPi;
  return p;
}

Parameterization make_cylinder(double perimeter) {
  if (perimeter <= 0.0) throw InputError("cylinder perimeter must be positive");
  Parameterization p;
  p.name = "cylinder";
  p.chart_dim = 2;
  p.embed_dim = 3;
  const double a = perimeter / kTwoPi;
  p.phi = [a](const Vec& y) {
    const double th = y[0], z = y[1];
    Vec e(3);
    e << a * std::cos(kTwoPi * th), a * std::sin(kTwoPi * th), z;
    return e;
  };
  p.dphi = [a](const Vec& y) {
    const double th = y[0];
    Mat J(3, 2);
    J << -a * kTwoPi * std::sin(kTwoPi * th), 0.0, a * kTwoPi * std::cos(kTwoPi * th),
        0.0, 0.0, 1.0;
    return J;
  };
  p.d2phi = [a](const Vec& y) {
    const double th = y[0];
    std::vector<Mat> H(3, Mat::Zero(2, 2));
    H[0](0, 0) = -a * kTwoPi * kTwoPi * std::cos(kTwoPi * th);
    H[1](0, 0) = -a * kTwoPi * kTwoPi * std::sin(kTwoPi * th);
    return H;
  };
  p.periods = Vec::Zero(2);
  p.periods[0] = 1.0;
  return p;
}

EmbeddedModel::EmbeddedModel(Parameterization p) : param_(std::move(p)) {
  if (param_.name == "sphere") {
    closed_form_distance_ = true;
    Vec probe(2);
    probe << M_PI / 2.0, 0.0;
    sphere_radius_ = param_.phi(probe).norm();
  }
}

void EmbeddedModel::validate(const Point& y) const {
  if (y.size() != param_.chart_dim)
    throw FeasibilityError(param_.name + ": chart point has wrong dimension");
  if (!y.allFinite()) throw FeasibilityError(param_.name + ": non-finite chart point");
  if (param_.domain_check) param_.domain_check(y);
}

double EmbeddedModel::energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  return (param_.phi(y1) - param_.phi(y2)).squaredNorm();
}

Vec EmbeddedModel::d1_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  return 2.0 * param_.dphi(y1).transpose() * (param_.phi(y1) - param_.phi(y2));
}

Vec EmbeddedModel::d2_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  return -2.0 * param_.dphi(y2).transpose() * (param_.phi(y1) - param_.phi(y2));
}

Mat EmbeddedModel::d11_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const Mat J = param_.dphi(y1);
  const Vec diff = param_.phi(y1) - param_.phi(y2);
  Mat H = 2.0 * J.transpose() * J;
  const auto D2 = param_.d2phi(y1);
  for (int a = 0; a < param_.embed_dim; ++a) H += 2.0 * diff[a] * D2[a];
  return H;
}

Mat EmbeddedModel::d22_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  const Mat J = param_.dphi(y2);
  const Vec diff = param_.phi(y1) - param_.phi(y2);
  Mat H = 2.0 * J.transpose() * J;
  const auto D2 = param_.d2phi(y2);
  for (int a = 0; a < param_.embed_dim; ++a) H -= 2.0 * diff[a] * D2[a];
  return H;
}

Mat EmbeddedModel::d12_energy(const Point& y1, const Point& y2) const {
  guard(y1, y2);
  return -2.0 * param_.dphi(y1).transpose() * param_.dphi(y2);
}

Mat EmbeddedModel::metric(const Point& y) const {
  guard(y);
  const Mat J = param_.dphi(y);
  return J.transpose() * J;
}

Point EmbeddedModel::wrap(const Point& y) const {
  Point out = y;
  for (int i = 0; i < param_.chart_dim; ++i) {
    const double p = param_.periods[i];
    if (p > 0.0) {
      out[i] = std::fmod(out[i], p);
      if (out[i] < 0.0) out[i] += p;
    }
  }
  return out;
}

Vec EmbeddedModel::wrap_difference(const Vec& delta) const {
  Vec out = delta;
  for (int i = 0; i < param_.chart_dim; ++i) {
    const double p = param_.periods[i];
    if (p > 0.0) out[i] -= p * std::round(out[i] / p);
  }
  return out;
}

double sphere_distance(const EmbeddedModel& sphere, const Point& y1, const Point& y2) {
  if (sphere.name() != "sphere") throw InputError("sphere_distance needs the sphere backend");
  const double R = sphere.sphere_radius_;
  const double c = sphere.param_.phi(y1).dot(sphere.param_.phi(y2)) / (R * R);
  return R * std::acos(std::clamp(c, -1.0, 1.0));
}

double cylinder_winding_energy(double r, long long m, long long n) {
  if (!(r > 0.0 && r < 1.0)) throw InputError("winding energy requires r in (0,1)");
  const double num = static_cast<double>(m) + 0.5 - r * static_cast<double>(n);
  return 3.0 * num * num / ((1.0 - r) * (1.0 - r) * r * r);
}

std::shared_ptr<EmbeddedModel> make_euclidean_model(int dim) {
  return std::make_shared<EmbeddedModel>(make_euclidean(dim));
}
std::shared_ptr<EmbeddedModel> make_sphere_model(double radius) {
  return std::make_shared<EmbeddedModel>(make_sphere(radius));
}
std::shared_ptr<EmbeddedModel> make_torus_model(double R, double r) {
  return std::make_shared<EmbeddedModel>(make_torus(R, r));
}
std::shared_ptr<EmbeddedModel> make_cylinder_model(double perimeter) {
  return std::make_shared<EmbeddedModel>(make_cylinder(perimeter));
}

}  // namespace riemspline
