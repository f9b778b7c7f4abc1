#include "riemspline/shells.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "riemspline/format.hpp"

namespace riemspline {

namespace {

double triangle_area(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                     const Eigen::Vector3d& p2) {
  return 0.5 * (p1 - p0).cross(p2 - p0).norm();
}

double triangle_inradius(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                         const Eigen::Vector3d& p2) {
  const double a = (p1 - p2).norm(), b = (p0 - p2).norm(), c = (p0 - p1).norm();
  const double s = 0.5 * (a + b + c);
  if (s <= 0.0) return 0.0;
  return triangle_area(p0, p1, p2) / s;
}

double triangle_diameter(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                         const Eigen::Vector3d& p2) {
  return std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
}

// Rotation taking unit vector a onto unit vector b.
Eigen::Matrix3d rotation_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = a.dot(b);
  if (c > 1.0 - 1e-14) return Eigen::Matrix3d::Identity();
  if (c < -1.0 + 1e-14) {
    Eigen::Vector3d axis = a.unitOrthogonal();
    return Eigen::AngleAxisd(M_PI, axis).toRotationMatrix();
  }
  const Eigen::Vector3d axis = a.cross(b).normalized();
  return Eigen::AngleAxisd(std::acos(std::clamp(c, -1.0, 1.0)), axis).toRotationMatrix();
}

}  // namespace

double dihedral_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  const Eigen::Vector3d e = b - a;
  const Eigen::Vector3d n1 = e.cross(c - a);
  const Eigen::Vector3d n2 = (d - a).cross(e);
  const double denom = n1.norm() * n2.norm();
  if (denom < 1e-300) throw DegeneracyError("dihedral angle of a degenerate triangle pair");
  const Eigen::Vector3d eh = e.normalized();
  return M_PI - std::atan2(n1.cross(n2).dot(eh) / denom, n1.dot(n2) / denom);
}

double membrane_density(const Eigen::Matrix2d& C, const ShellParams& params) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(C);
  double l1 = std::max(es.eigenvalues()[0], 1e-14);
  double l2 = std::max(es.eigenvalues()[1], 1e-14);
  const double s1 = std::sqrt(l1), s2 = std::sqrt(l2);
  const double mu = params.mu, lambda = params.lambda;
  return 0.5 * mu * (s1 + s2) + 0.25 * lambda * s1 * s2 -
         0.25 * (2.0 * mu + lambda) * std::log(l1 * l2) * 0.5 - mu - 0.25 * lambda;
}

ShellModel::ShellModel(Mat reference_positions, std::vector<std::array<int, 3>> triangles,
                       ShellParams params, double rho, double h_max)
    : num_vertices_(static_cast<int>(reference_positions.rows())),
      triangles_(std::move(triangles)),
      params_(params) {
  if (num_vertices_ < 3 || triangles_.empty())
    throw InputError("shell mesh needs at least one triangle");
  for (const auto& t : triangles_)
    for (int v : t)
      if (v < 0 || v >= num_vertices_) throw InputError("triangle references missing vertex");

  // Interior edges: exactly two adjacent triangles each.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edge_map;
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[i], b = tri[(i + 1) % 3], opp = tri[(i + 2) % 3];
      edge_map[{std::min(a, b), std::max(a, b)}].push_back({t, opp});
    }
  }
  for (const auto& [edge, tris] : edge_map) {
    if (tris.size() > 2)
      throw InputError("non-manifold edge with " + std::to_string(tris.size()) +
                       " adjacent triangles");
    if (tris.size() == 2) {
      InteriorEdge e;
      e.a = edge.first;
      e.b = edge.second;
      e.t1 = tris[0].first;
      e.c = tris[0].second;
      e.t2 = tris[1].first;
      e.d = tris[1].second;
      interior_edges_.push_back(e);
    }
  }

  const Vec lo = reference_positions.colwise().minCoeff();
  const Vec hi = reference_positions.colwise().maxCoeff();
  diameter_ = (hi - lo).norm();
  if (diameter_ <= 0.0) throw InputError("degenerate reference mesh");
  fd_step_ = 1e-5 * diameter_;
  rho_ = (rho > 0.0) ? rho : 1e-4 * diameter_;
  h_max_ = (h_max > 0.0) ? h_max : 10.0 * diameter_;

  // Gauge frame from the first triangle of the reference mesh.
  anchor_[0] = triangles_[0][0];
  anchor_[1] = triangles_[0][1];
  anchor_[2] = triangles_[0][2];
  origin_ = reference_positions.row(anchor_[0]).transpose();
  const Eigen::Vector3d e1 =
      reference_positions.row(anchor_[1]).transpose() - origin_;
  const Eigen::Vector3d e2 =
      reference_positions.row(anchor_[2]).transpose() - origin_;
  if (e1.norm() < 1e-300) throw InputError("degenerate anchor edge");
  u_ = e1.normalized();
  const Eigen::Vector3d w_raw = e2 - e2.dot(u_) * u_;
  if (w_raw.norm() < 1e-300) throw InputError("degenerate anchor triangle");
  w_ = w_raw.normalized();
  n_ = u_.cross(w_);

  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t)
    check_triangle(reference_positions, t);
}

void ShellModel::check_triangle(const Mat& pos, int t) const {
  const auto& tri = triangles_[t];
  const Eigen::Vector3d p0 = pos.row(tri[0]), p1 = pos.row(tri[1]), p2 = pos.row(tri[2]);
  const double inr = triangle_inradius(p0, p1, p2);
  if (inr < rho_)
    throw FeasibilityError("shell: triangle " + std::to_string(t) + " inradius " +
                           std::to_string(inr) + " below bound " + std::to_string(rho_));
  const double diam = triangle_diameter(p0, p1, p2);
  if (diam > h_max_)
    throw FeasibilityError("shell: triangle " + std::to_string(t) + " diameter " +
                           std::to_string(diam) + " above bound " + std::to_string(h_max_));
}

Mat ShellModel::to_positions(const Point& z) const {
  if (z.size() != dof_count()) throw FeasibilityError("shell: chart vector has wrong size");
  Mat pos(num_vertices_, 3);
  pos.row(anchor_[0]) = origin_.transpose();
  pos.row(anchor_[1]) = (origin_ + z[0] * u_).transpose();
  pos.row(anchor_[2]) = (origin_ + z[1] * u_ + z[2] * w_).transpose();
  int idx = 3;
  for (int v = 0; v < num_vertices_; ++v) {
    if (v == anchor_[0] || v == anchor_[1] || v == anchor_[2]) continue;
    pos.row(v) = z.segment<3>(idx).transpose();
    idx += 3;
  }
  return pos;
}

Vec ShellModel::to_chart(const Mat& positions) const {
  if (positions.rows() != num_vertices_ || positions.cols() != 3)
    throw InputError("shell: position array has wrong shape");
  // Rigid gauge alignment: anchor vertex to the origin, anchor edge onto u,
  // anchor plane onto span(u, w).
  Mat pos = positions;
  const Eigen::Vector3d a0 = pos.row(anchor_[0]);
  pos.rowwise() -= (a0 - origin_).transpose();
  Eigen::Vector3d e1 = pos.row(anchor_[1]).transpose() - origin_;
  if (e1.norm() < 1e-300) throw InputError("shell: degenerate anchor edge in keyframe");
  Eigen::Matrix3d R1 = rotation_between(e1.normalized(), u_);
  for (int v = 0; v < num_vertices_; ++v)
    pos.row(v) = (origin_ + R1 * (pos.row(v).transpose() - origin_)).transpose();
  Eigen::Vector3d e2 = pos.row(anchor_[2]).transpose() - origin_;
  const double ang = std::atan2(e2.dot(n_), e2.dot(w_));
  Eigen::Matrix3d R2 = Eigen::AngleAxisd(-ang, u_).toRotationMatrix();
  for (int v = 0; v < num_vertices_; ++v)
    pos.row(v) = (origin_ + R2 * (pos.row(v).transpose() - origin_)).transpose();

  Vec z(dof_count());
  z[0] = (pos.row(anchor_[1]).transpose() - origin_).dot(u_);
  const Eigen::Vector3d c = pos.row(anchor_[2]).transpose() - origin_;
  z[1] = c.dot(u_);
  z[2] = c.dot(w_);
  int idx = 3;
  for (int v = 0; v < num_vertices_; ++v) {
    if (v == anchor_[0] || v == anchor_[1] || v == anchor_[2]) continue;
    z.segment<3>(idx) = pos.row(v).transpose();
    idx += 3;
  }
  return z;
}

void ShellModel::validate(const Point& z) const {
  if (z.size() != dof_count()) throw FeasibilityError("shell: chart vector has wrong size");
  if (!z.allFinite()) throw FeasibilityError("shell: non-finite chart vector");
  const Mat pos = to_positions(z);
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) check_triangle(pos, t);
}

double ShellModel::membrane_energy(const Mat& y, const Mat& yt) const {
  double total = 0.0;
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    const auto& tri = triangles_[t];
    const Eigen::Vector3d p0 = y.row(tri[0]), p1 = y.row(tri[1]), p2 = y.row(tri[2]);
    const Eigen::Vector3d q0 = yt.row(tri[0]), q1 = yt.row(tri[1]), q2 = yt.row(tri[2]);
    const Eigen::Vector3d e1 = p1 - p0, e2 = p2 - p0;
    const Eigen::Vector3d f1 = q1 - q0, f2 = q2 - q0;
    // Edge coordinates in first-edge orthonormal frames of each triangle.
    const double a11 = e1.norm();
    if (a11 < 1e-300) throw DegeneracyError("shell: triangle " + std::to_string(t) + " collapsed");
    const Eigen::Vector3d u1 = e1 / a11;
    const double a12 = e2.dot(u1);
    const Eigen::Vector3d w_raw = e2 - a12 * u1;
    const double a22 = w_raw.norm();
    if (a22 < 1e-300) throw DegeneracyError("shell: triangle " + std::to_string(t) + " collapsed");

    const double b11 = f1.norm();
    if (b11 < 1e-300) throw DegeneracyError("shell: triangle " + std::to_string(t) + " collapsed");
    const Eigen::Vector3d v1 = f1 / b11;
    const double b12 = f2.dot(v1);
    const double b22 = (f2 - b12 * v1).norm();

    Eigen::Matrix2d My, Mq;
    My << a11, a12, 0.0, a22;
    Mq << b11, b12, 0.0, b22;
    const Eigen::Matrix2d A = Mq * My.inverse();
    const Eigen::Matrix2d C = A.transpose() * A;
    if (C.determinant() <= 1e-14)
      throw DegeneracyError("shell: triangle " + std::to_string(t) +
                            " collapsed (det C <= 1e-14)");
    total += triangle_area(p0, p1, p2) * membrane_density(C, params_);
  }
  return total;
}

double ShellModel::bending_energy(const Mat& y, const Mat& yt) const {
  double total = 0.0;
  for (const auto& e : interior_edges_) {
    const Eigen::Vector3d a = y.row(e.a), b = y.row(e.b), c = y.row(e.c), d = y.row(e.d);
    const Eigen::Vector3d at = yt.row(e.a), bt = yt.row(e.b), ct = yt.row(e.c),
                          dt = yt.row(e.d);
    const double le = (b - a).norm();
    const double theta_y = dihedral_angle(a, b, c, d);
    const double theta_t = dihedral_angle(at, bt, ct, dt);
    const double de = (triangle_area(a, b, c) + triangle_area(a, d, b)) / 3.0;
    const double dth = theta_y - theta_t;
    total += le * le * dth * dth / de;
  }
  return total;
}

double ShellModel::energy_positions(const Mat& y, const Mat& yt) const {
  return params_.zeta * membrane_energy(y, yt) + params_.eta * bending_energy(y, yt);
}

double ShellModel::energy(const Point& z1, const Point& z2) const {
  guard(z1, z2);
  return energy_positions(to_positions(z1), to_positions(z2));
}

Vec ShellModel::d1_energy(const Point& z1, const Point& z2) const {
  return fd_d1_energy(*this, z1, z2, fd_step_);
}

Vec ShellModel::d2_energy(const Point& z1, const Point& z2) const {
  return fd_d2_energy(*this, z1, z2, fd_step_);
}

Mat ShellModel::d11_energy(const Point& z1, const Point& z2) const {
  Mat H = fd_d11_energy(*this, z1, z2, fd_step_);
  return 0.5 * (H + H.transpose());
}

Mat ShellModel::d22_energy(const Point& z1, const Point& z2) const {
  Mat H = fd_d22_energy(*this, z1, z2, fd_step_);
  return 0.5 * (H + H.transpose());
}

Mat ShellModel::d12_energy(const Point& z1, const Point& z2) const {
  return fd_d12_energy(*this, z1, z2, fd_step_);
}

Mat ShellModel::metric(const Point& z) const {
  Mat g = 0.5 * d22_energy(z, z);
  return 0.5 * (g + g.transpose());
}

Mat ShellModel::full_dof_metric(const Mat& positions) const {
  const int n = 3 * num_vertices_;
  auto flat_energy = [&](const Vec& q) {
    Mat p(num_vertices_, 3);
    for (int v = 0; v < num_vertices_; ++v) p.row(v) = q.segment<3>(3 * v).transpose();
    return energy_positions(positions, p);
  };
  Vec q0(n);
  for (int v = 0; v < num_vertices_; ++v) q0.segment<3>(3 * v) = positions.row(v).transpose();
  const double h = fd_step_;
  Mat H(n, n);
  const double f0 = flat_energy(q0);
  Vec fp(n), fm(n);
  Vec q = q0;
  for (int i = 0; i < n; ++i) {
    q[i] = q0[i] + h; fp[i] = flat_energy(q);
    q[i] = q0[i] - h; fm[i] = flat_energy(q);
    q[i] = q0[i];
  }
  for (int i = 0; i < n; ++i) {
    H(i, i) = (fp[i] - 2.0 * f0 + fm[i]) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      q[i] = q0[i] + h; q[j] = q0[j] + h; const double a = flat_energy(q);
      q[j] = q0[j] - h; const double b = flat_energy(q);
      q[i] = q0[i] - h; const double c2 = flat_energy(q);
      q[j] = q0[j] + h; const double c1 = flat_energy(q);
      q[i] = q0[i]; q[j] = q0[j];
      H(i, j) = H(j, i) = (a - b - c1 + c2) / (4.0 * h * h);
    }
  }
  return 0.5 * H;
}

ObjMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open OBJ file: " + path);
  ObjMesh mesh;
  std::vector<Eigen::Vector3d> verts;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Eigen::Vector3d p;
      ss >> p[0] >> p[1] >> p[2];
      if (!ss) throw InputError("malformed vertex line in " + path);
      verts.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      std::string tok;
      int i = 0;
      while (ss >> tok && i < 3) {
        // accept "i", "i/j", "i/j/k"
        f[i++] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      if (i != 3) throw InputError("non-triangular face in " + path);
      mesh.triangles.push_back(f);
    }
  }
  mesh.positions.resize(static_cast<int>(verts.size()), 3);
  for (std::size_t v = 0; v < verts.size(); ++v) mesh.positions.row(v) = verts[v].transpose();
  return mesh;
}

void write_obj(const std::string& path, const Mat& positions,
               const std::vector<std::array<int, 3>>& triangles) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write OBJ file: " + path);
  for (int v = 0; v < positions.rows(); ++v)
    out << "v " << format_double(positions(v, 0)) << ' ' << format_double(positions(v, 1))
        << ' ' << format_double(positions(v, 2)) << '\n';
  for (const auto& t : triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace riemspline
