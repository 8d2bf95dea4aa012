#pragma once
// Piecewise-flat triangulated boundaries, exact polyhedral volume moments,
// the L2(Omega)-orthonormal rigid-motion basis and interior sampling grids.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <string>
#include <vector>

#include "elastres/media.hpp"

namespace elastres {

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise seen from outside
  std::vector<double> areas;
  std::vector<Vec3> normals;                  // unit outward normals
  std::vector<std::vector<int>> vertex_triangles;
  double h = 0.0;                             // longest edge

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int dofs() const { return 3 * num_vertices(); }
  double total_area() const;
  double diameter() const;
  // Recompute areas, normals, adjacency and h; validates closedness.
  void finalize();
};

enum class ShapeKind { Sphere, Ellipsoid, PerturbedSphere };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Sphere;
  Vec3 semi_axes = Vec3(1.0, 1.0, 1.0);  // ellipsoid
  // Perturbed sphere: r(xhat) = 1 + sum_l coeffs[l] P_l(xhat_3).
  std::vector<double> legendre_coeffs;
};

ShapeSpec parse_shape(const std::string& name);
// Icosahedral refinement of the unit sphere mapped onto the requested shape.
SurfaceMesh builtin_mesh(const ShapeSpec& shape, int level);

enum class MeshFormat { OFF, OBJ };
// Loads an ASCII triangle mesh; inconsistent orientation is repaired when the
// surface is orientable, and the orientation is made outward.
SurfaceMesh load_mesh(const std::string& path, MeshFormat format);
SurfaceMesh load_mesh(const std::string& path);  // format from extension
void write_off(const SurfaceMesh& mesh, const std::string& path);
void write_obj(const SurfaceMesh& mesh, const std::string& path);

struct VolumeMoments {
  double volume = 0.0;
  Vec3 first = Vec3::Zero();    // integral of x
  Mat3 second = Mat3::Zero();   // integral of x x^T
  Vec3 centroid() const { return first / volume; }
};
VolumeMoments volume_moments(const SurfaceMesh& mesh);

// Rigid motion e(x) = a + b x x.
struct RigidMotion {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 operator()(const Vec3& x) const { return a + b.cross(x); }
};

// L2(Omega) inner product of two rigid motions from closed-form moments.
double rigid_inner(const RigidMotion& u, const RigidMotion& v, const VolumeMoments& m);

struct RigidMotionBasis {
  std::array<RigidMotion, 6> e;
  VolumeMoments moments;
  Eigen::Matrix<double, 6, 6> gram() const;
  // 3N x 6 matrix of nodal traces.
  Eigen::MatrixXd traces(const SurfaceMesh& mesh) const;
};
RigidMotionBasis rigid_motion_basis(const SurfaceMesh& mesh);

// Consistent P1 mass matrix (scalar, N x N) and its vector version (3N x 3N).
Eigen::SparseMatrix<double> mass_matrix(const SurfaceMesh& mesh);
Eigen::SparseMatrix<double> vector_mass_matrix(const SurfaceMesh& mesh);
// Lumped vertex weights area/3: the P1 integral of a nodal function.
Eigen::VectorXd vertex_weights(const SurfaceMesh& mesh);

bool point_inside(const SurfaceMesh& mesh, const Vec3& x);

struct InteriorGrid {
  std::vector<Vec3> points;
  double spacing = 0.0;
  double weight = 0.0;  // cell volume
  double total_weight() const { return weight * static_cast<double>(points.size()); }
};
InteriorGrid interior_grid(const SurfaceMesh& mesh, double spacing);

}  // namespace elastres
