#pragma once
// Dense vertex-collocation discretizations of the elastic single layer S(z),
// double layer K(z), its adjoint K*(z), the exterior Dirichlet-to-Neumann map
// N(z) = S(z)^{-1}(-I/2 + K(z)) and the zero-frequency derivatives of N.
//
// Densities are continuous piecewise-linear (one 3-vector per vertex), so a
// density vector has 3N entries ordered (vertex, component).

#include <Eigen/Dense>
#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "elastres/geometry.hpp"
#include "elastres/media.hpp"

namespace elastres {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

enum class OperatorKind { S = 0, K = 1, Kstar = 2, DtN = 3 };
const char* to_string(OperatorKind k);

struct BoundaryOperatorMatrix {
  OperatorKind kind = OperatorKind::S;
  int phase = 0;  // 0 exterior medium, 1 interior medium
  cd z = 0.0;
  MatC mat;
};

struct QuadratureOptions {
  int duffy_order = 8;      // Gauss points per direction on singular elements
  double near_ratio = 3.0;  // subdivide while distance < near_ratio * element size
  int max_depth = 3;        // maximum number of uniform subdivisions
};

// Assembles S and K on one mesh. The diagonal blocks of K use the identity
// K(0) c = -c/2 for constant c (the double layer of a constant is -c inside),
// which removes the Cauchy-principal-value part of the kernel; the frequency-
// dependent remainder is regular and integrated directly. Static diagonal
// blocks are cached per medium.
class BoundaryAssembler {
 public:
  explicit BoundaryAssembler(SurfaceMesh mesh, QuadratureOptions opts = {});

  const SurfaceMesh& mesh() const { return mesh_; }
  int dofs() const { return mesh_.dofs(); }

  // Either output may be null.
  void assemble(const ElasticMedium& m, cd z, MatC* S, MatC* K) const;
  // Taylor coefficients in S(z) = sum_m (iz)^m S_m and K(z) = sum_m (iz)^m K_m.
  void assemble_taylor(const ElasticMedium& m, int order, Eigen::MatrixXd* S, Eigen::MatrixXd* K) const;
  // Discrete adjoint K* = W^{-1} K^T W with W the vector mass matrix.
  MatC adjoint(const MatC& K) const;

  // Layer potentials at points off the surface: returns 3 x P fields.
  Eigen::Matrix3Xcd single_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts,
                                           const VecC& density) const;
  Eigen::Matrix3Xcd double_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts,
                                           const VecC& density) const;
  // Several densities at once (3N x c): returns 3P x c, rows ordered (point, component).
  MatC single_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts, const MatC& densities) const;
  MatC double_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts, const MatC& densities) const;

  // Optional Cauchy interpolant of K(z) for one medium on the disk |z - center| <= radius:
  // K is sampled at `nodes` points on the circle of radius 1.25 * radius and its
  // Taylor coefficients are recovered by the trapezoidal rule (spectrally accurate
  // because K is entire in z). Later K-only assemblies inside the disk use the
  // interpolant. Returns the relative error measured against a direct assembly at
  // an interior test point; throws a numerical error above max_error.
  double enable_interpolation(const ElasticMedium& m, cd center, double radius, int nodes = 12,
                              double max_error = 1e-10);
  void disable_interpolation() { interp_.reset(); }
  bool interpolating(const ElasticMedium& m, cd z) const;

  const Eigen::SparseMatrix<double>& mass() const { return mass_; }
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  const std::vector<Mat3>& static_diag(const ElasticMedium& m) const;

  SurfaceMesh mesh_;
  QuadratureOptions opts_;
  Eigen::SparseMatrix<double> mass_;
  Eigen::VectorXd weights_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::array<double, 3>, std::vector<Mat3>> diag_cache_;
  struct Interpolant {
    std::array<double, 3> medium;
    cd center;
    double radius;
    std::vector<MatC> coeffs;
  };
  std::shared_ptr<Interpolant> interp_;
};

// Convenience wrappers with a temporary assembler.
BoundaryOperatorMatrix assemble(OperatorKind kind, const ElasticMedium& m, const SurfaceMesh& mesh, cd z);

// Factorized N(z) = S(z)^{-1}(-I/2 + K(z)) of one medium. The explicit matrix is
// formed by a solve, never an explicit inverse.
class DtNOperator {
 public:
  DtNOperator(const BoundaryAssembler& as, const ElasticMedium& m, cd z, double rcond_min = 1e-12);
  cd z() const { return z_; }
  const MatC& matrix() const { return n_; }
  const MatC& S() const { return S_; }
  const MatC& K() const { return K_; }
  double rcond() const { return rcond_; }
  VecC solve_S(const VecC& rhs) const { return lu_.solve(rhs); }
  MatC solve_S(const MatC& rhs) const { return lu_.solve(rhs); }

 private:
  cd z_;
  MatC S_, K_, n_;
  Eigen::PartialPivLU<MatC> lu_;
  double rcond_ = 0.0;
};

BoundaryOperatorMatrix dtn(const ElasticMedium& medium0, const SurfaceMesh& mesh, cd z);

enum class DerivativeSource { Analytic, FiniteDifference, Both };
const char* to_string(DerivativeSource s);

struct DtNDerivatives {
  MatC n0;                          // N(0)
  std::array<MatC, 3> d;            // d[k-1] = k-th z-derivative of N at 0
  std::array<DerivativeSource, 3> source{};
  std::array<double, 3> fd_vs_analytic{};  // relative Frobenius disagreement (-1 if not compared)
  std::array<MatC, 3> analytic;     // exact Taylor-series derivatives
  std::array<MatC, 3> fd;           // finite-difference derivatives (empty if not computed)
  Eigen::MatrixXd S0;               // static single layer S_0
  Eigen::MatrixXd S1;               // rank-3 first-order Taylor coefficient
};

struct DtNDerivativeOptions {
  bool finite_differences = true;    // compute FD cross-checks for k = 1, 3 and the primary k = 2
  bool analytic_second = true;       // also evaluate the series path for k = 2
  double tolerance = 1e-4;           // maximum FD/analytic disagreement for k = 1, 3
  std::array<double, 3> step_factor{1.0, 4.0, 40.0};  // per-order multiples of fd_step
};

// fd_step <= 0 selects the default 1e-3 * c_s / diam(Omega). medium1 is
// validated but, with the exterior-traction convention of N, not used.
DtNDerivatives dtn_derivatives(const BoundaryAssembler& as, const ElasticMedium& medium0,
                               const ElasticMedium& medium1, double fd_step,
                               const DtNDerivativeOptions& opts = {});
DtNDerivatives dtn_derivatives(const ElasticMedium& medium0, const ElasticMedium& medium1, const SurfaceMesh& mesh,
                               double fd_step);

// Mesh tolerance: the largest relative rigid-motion defect ||(I/2 + K(0)) e||_W / ||e||_W
// over the six rigid motions and the given media. It measures the quadrature
// error of the discrete operators (the identity is exact in the continuum).
double rigid_defect(const BoundaryAssembler& as, const ElasticMedium& m);
double mesh_tolerance(const BoundaryAssembler& as, const ElasticMedium& medium0, const ElasticMedium& medium1);

// Binary dump: 64-byte header (magic "ELOPv1", kind, phase, z, rows, cols),
// then row-major little-endian complex128 entries.
void save_operator(const BoundaryOperatorMatrix& op, const std::string& path);
BoundaryOperatorMatrix load_operator(const std::string& path);

}  // namespace elastres
