#pragma once
// Effective matrices: M1(z0) for nonzero Neumann eigenfrequencies and the six
// zero-frequency matrices M1(0)..M6(0), their structural validation and JSON
// exchange (schema "effset-1").

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "elastres/boundary_ops.hpp"
#include "elastres/interior.hpp"

namespace elastres {

// Boundary pairing <a, b> = a^T W b (bilinear, no conjugation).
MatC pairing(const Eigen::SparseMatrix<double>& W, const MatC& A, const MatC& B);

struct EffectiveMatrixSet {
  std::map<double, MatC> M1_z0;     // keyed by the real eigenfrequency
  bool has_zero = false;
  std::array<MatC, 6> M;            // M[k-1] = M^(k)(0)
  double rho1 = 1.0;
  bool origin_symmetric = false;
  double mesh_tolerance = 0.0;
  std::map<std::string, std::string> provenance;
};

// <N(z0) e_l, e_j> over the L2(Omega)-orthonormal real modes.
MatC m1_at(const NeumannEigenpair& pair, const MatC& dtn_z0, const Eigen::SparseMatrix<double>& W);

// Discrete-consistent counterpart of M1(z0): with X, Y the left/right null
// vectors of B(z) = I/2 + K1(z) at the discrete root z0c and C = S1 N, the
// roots of I/2 + K1(z) - tau S1(z) N(z) satisfy z = z0c + tau mu + O(tau^2) with
// mu the eigenvalues of (X^H B'(z0c) Y)^{-1} X^H C Y. The matrix returned is
// -2 rho1 z0c times that reduced matrix, so that z = z0c - tau kappa / (2 rho1 z0c).
struct ReducedM1 {
  MatC matrix;
  Eigen::VectorXcd kappa;
  cd z0c;
};
ReducedM1 m1_reduced(const BoundaryAssembler& as, const ElasticMedium& medium0, const ElasticMedium& medium1,
                     const NeumannEigenpair& pair);

// The six zero-frequency matrices from N(0), its derivatives and the correctors.
EffectiveMatrixSet effective_set_zero(const BoundaryAssembler& as, const ElasticMedium& medium1,
                                      const RigidMotionBasis& basis, const DtNDerivatives& derivs,
                                      const std::vector<CorrectorSolution>& correctors);

// Quadratic-form coefficient of M2(0): M2 = -c F^T F with F_pl the p-th
// component of the surface integral of S0^{-1} e_l, c = (sqrt(rho0)/12 pi)(2 mu0^{-3/2} + (lambda0 + 2 mu0)^{-3/2}).
double m2_form_constant(const ElasticMedium& medium0);
MatC m2_quadratic_form(const BoundaryAssembler& as, const ElasticMedium& medium0, const RigidMotionBasis& basis,
                       const Eigen::MatrixXd& S0);

struct EffectiveTolerances {
  double mesh_tolerance = 0.0;
  double margin_factor = 1e3;       // required negativity margin of M1(0) in mesh tolerances
  double rank_tol = 1e-6;           // relative eigenvalue threshold for M2(0)
  double sym_tol = 1e-3;            // relative symmetry defect of M1, M3, M4, M5
  double offblock_tol = 1e-3;       // translation-rotation blocks of M1(0) on origin-symmetric meshes
  double structure_tol = 1e-3;      // first three entries of Ker-M2 eigenvectors; M6 on Ker M2
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct EffectiveReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  const CheckResult* find(const std::string& name) const;
};

EffectiveReport validate_effective(const EffectiveMatrixSet& set, const EffectiveTolerances& tol);

double relative_asymmetry(const MatC& M);
bool is_origin_symmetric(const SurfaceMesh& mesh, double tol = 1e-10);

std::string effset_to_json(const EffectiveMatrixSet& set);
EffectiveMatrixSet effset_from_json(const std::string& text);

}  // namespace elastres
