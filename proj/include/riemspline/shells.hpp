#ifndef RIEMSPLINE_SHELLS_HPP
#define RIEMSPLINE_SHELLS_HPP

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "riemspline/manifold.hpp"

namespace riemspline {

struct ShellParams {
  double lambda = 1.0;  // Lame constants
  double mu = 1.0;
  double zeta = 1.0;    // membrane weight
  double eta = 1e-4;    // bending weight
};

/// Discrete-shell backend: triangle meshes of fixed connectivity with
/// membrane + bending dissipation. Location/orientation are fixed by freezing
/// six DOFs tied to the first triangle of the reference mesh (anchor vertex,
/// first edge direction, first face plane); chart coordinates are the
/// remaining 3V - 6 values. All derivatives are central finite differences of
/// the energy with step 1e-5 * mesh diameter.
class ShellModel : public ManifoldModel {
 public:
  ShellModel(Mat reference_positions, std::vector<std::array<int, 3>> triangles,
             ShellParams params, double rho = 0.0, double h_max = 0.0);

  int dof_count() const override { return 3 * num_vertices_ - 6; }
  bool has_analytic_derivatives() const override { return false; }
  std::string name() const override { return "shell"; }
  void validate(const Point& z) const override;

  double energy(const Point& z1, const Point& z2) const override;
  Vec d1_energy(const Point& z1, const Point& z2) const override;
  Vec d2_energy(const Point& z1, const Point& z2) const override;
  Mat d11_energy(const Point& z1, const Point& z2) const override;
  Mat d22_energy(const Point& z1, const Point& z2) const override;
  Mat d12_energy(const Point& z1, const Point& z2) const override;
  Mat metric(const Point& z) const override;

  // Energies on raw vertex positions (V x 3).
  double membrane_energy(const Mat& y, const Mat& yt) const;
  double bending_energy(const Mat& y, const Mat& yt) const;
  double energy_positions(const Mat& y, const Mat& yt) const;

  /// Metric on the full 3V position DOFs (no gauge elimination); carries the
  /// six near-null rigid-motion directions.
  Mat full_dof_metric(const Mat& positions) const;

  /// Gauge-aligns the positions by a rigid motion, then extracts chart
  /// coordinates.
  Vec to_chart(const Mat& positions) const;
  Mat to_positions(const Point& z) const;

  int num_vertices() const { return num_vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const ShellParams& params() const { return params_; }
  double fd_step() const { return fd_step_; }

 private:
  int num_vertices_ = 0;
  std::vector<std::array<int, 3>> triangles_;
  ShellParams params_;
  double rho_ = 0.0, h_max_ = 0.0;
  double diameter_ = 0.0, fd_step_ = 0.0;

  struct InteriorEdge {
    int a, b;        // edge vertices
    int c, d;        // opposite vertices of the two adjacent triangles
    int t1, t2;
  };
  std::vector<InteriorEdge> interior_edges_;

  // Gauge frame from the reference mesh.
  int anchor_[3] = {0, 0, 0};
  Eigen::Vector3d origin_, u_, w_, n_;

  void check_triangle(const Mat& pos, int t) const;
};

/// Dihedral angle at the edge (a, b) between triangles (a, b, c) and
/// (a, d, b); pi when the triangles are coplanar.
double dihedral_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      const Eigen::Vector3d& c, const Eigen::Vector3d& d);

/// Membrane density W_mem evaluated on the 2x2 Cauchy-Green tensor C = A^T A
/// (eigenvalues clamped at 1e-14 before sqrt/log).
double membrane_density(const Eigen::Matrix2d& C, const ShellParams& params);

struct ObjMesh {
  Mat positions;  // V x 3
  std::vector<std::array<int, 3>> triangles;
};

ObjMesh read_obj(const std::string& path);
void write_obj(const std::string& path, const Mat& positions,
               const std::vector<std::array<int, 3>>& triangles);

}  // namespace riemspline

#endif
