#pragma once
// Interior Neumann spectrum of the Lame operator on Omega, detected from the
// non-injective points of I/2 + K1(z), and the static Neumann correctors that
// enter the higher effective matrices.

#include <Eigen/Dense>
#include <vector>

#include "elastres/boundary_ops.hpp"
#include "elastres/geometry.hpp"

namespace elastres {

struct NeumannOptions {
  double scan_step = 0.05;
  double detect_ratio = 0.25;      // dip accepted when sigma_min <= ratio * median sampled sigma_min
  double cluster_factor = 10.0;    // cluster = singular values below factor * sigma_min
  double gap_ratio = 10.0;         // required ratio between the cluster and the next singular value
  double golden_tol = 1e-4;        // golden-section bracket width relative to max(1, z)
  bool complex_refine = true;      // locate the complex root of the discrete operator near the dip
  double grid_spacing = 0.0;       // interior grid for L2(Omega) normalization; <= 0: diam / 16
  double points_per_wavelength = 10.0;  // resolution rule defining the largest admissible frequency
  int probe = 12;                  // singular values computed per sample
};

struct NeumannEigenpair {
  double z0 = 0.0;                 // real eigenfrequency (golden-section dip)
  cd z0_complex = 0.0;             // root of the discrete operator near z0 (z0 itself when not refined)
  int multiplicity = 0;
  bool rigid = false;              // z0 = 0: modes are the rigid motions
  Eigen::MatrixXd traces;          // 3N x n boundary traces of L2(Omega)-orthonormal real modes
  Eigen::MatrixXcd left_null;      // left null vectors of I/2 + K1 at z0_complex
  Eigen::MatrixXcd right_null;     // right null vectors of I/2 + K1 at z0_complex
  std::vector<double> dip_singular_values;  // smallest singular values at the real dip
  double gap = 0.0;                // s_{n+1} / s_n at the dip
  double root_residual = 0.0;      // largest of the n smallest singular values at z0_complex, relative
  double imag_fraction = 0.0;      // relative size of the imaginary part of the interior fields
  Eigen::MatrixXd raw_gram;        // L2(Omega) Gram of the unnormalized real traces
  RigidMotionBasis rigid_basis;    // valid when rigid
};

// Largest frequency resolved with the given number of mean edge lengths per shear wavelength.
double max_resolved_frequency(const SurfaceMesh& mesh, const ElasticMedium& m, double points_per_wavelength = 10.0);

// sigma_min(I/2 + K1(z)) and the next singular values.
Eigen::VectorXd interior_singular_values(const BoundaryAssembler& as, const ElasticMedium& medium1, cd z, int count);

std::vector<NeumannEigenpair> neumann_spectrum(const BoundaryAssembler& as, const ElasticMedium& medium1, double lo,
                                               double hi, const NeumannOptions& opts = {});

// Interior field of mode l at the given points: the rigid motion for z0 = 0,
// otherwise u = -DL1(z0) gamma u.
Eigen::Matrix3Xcd evaluate_mode(const BoundaryAssembler& as, const ElasticMedium& medium1, const NeumannEigenpair& pair,
                                int l, const std::vector<Vec3>& pts);

enum class CorrectorVariant { N, Nprime };

// Solution of [L + P(0)] u = 0 in Omega, traction(u) = g on Gamma, written as
// u = u_part + SL1(0) phi + sum_k c_k e_k where the polynomial u_part solves
// L u_part = A + B x x = -sum_k c_k e_k (see particular_field).
struct CorrectorSolution {
  int l = 0;
  CorrectorVariant variant = CorrectorVariant::N;
  VecC data;            // prescribed traction g (nodal)
  VecC density;         // single-layer density phi (nodal)
  Eigen::Matrix<cd, 6, 1> rigid;  // c_k = -<g, e_k>
  Vec3c part_const = Vec3c::Zero();  // A = -sum_k c_k a_k
  Vec3c part_rot = Vec3c::Zero();    // B = -sum_k c_k b_k
  VecC trace;           // gamma u (nodal)
  double traction_residual = 0.0;   // relative mismatch of the recomputed traction (load-vector form)
  double pin_residual = 0.0;        // relative defect of the rigid-component constraints
};

struct CorrectorOptions {
  double max_residual = 1e-6;       // corrector-solve error above this relative residual
};

// dtn0 = N(0), dtn1 = first z-derivative of N at 0 (both 3N x 3N). Returns the
// twelve solutions ordered (l = 0..5, variant N), then (l = 0..5, variant N').
std::vector<CorrectorSolution> correctors(const BoundaryAssembler& as, const ElasticMedium& medium1,
                                          const RigidMotionBasis& basis, const MatC& dtn0, const MatC& dtn1,
                                          const CorrectorOptions& opts = {});

// Corrector field inside Omega.
Eigen::Matrix3Xcd evaluate_corrector(const BoundaryAssembler& as, const ElasticMedium& medium1,
                                     const RigidMotionBasis& basis, const CorrectorSolution& sol,
                                     const std::vector<Vec3>& pts);

// u = |x|^2 A / (8 mu + 2 lambda) + |x|^2 (B x x) / (10 mu) solves L u = A + B x x.
// The gradient has rows indexed by component.
Vec3c particular_field(const ElasticMedium& m, const Vec3c& A, const Vec3c& B, const Vec3& x);
Mat3c particular_gradient(const ElasticMedium& m, const Vec3c& A, const Vec3c& B, const Vec3& x);

}  // namespace elastres
