#pragma once
// Spectral ladder of the zero-frequency effective matrices (L0, L1, admissible
// set, L2, L3 with enhancement-space projections), the effective pencils and
// the leading-order resonance branches at wavelength and subwavelength scales.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "elastres/effective.hpp"

namespace elastres {

struct LadderOptions {
  double cluster_tol = 1e-6;  // eigenvalues are distinct when the gap exceeds cluster_tol * max(1, |kappa|)
  double rank_tol = 1e-6;     // |eigenvalue of M2| <= rank_tol * max(1, ||M2||) counts as kernel
  double angle_tol = 1e-4;    // principal-angle threshold (rad) for the admissible-set test
  double singular_tol = 1e-10;  // relative conditioning floor of the Q_perp block of M2
};

// One enhancement subspace: the eigenvalue it belongs to, an orthonormal basis
// of the subspace in C^6 and the orthogonal projection onto it.
struct EnhancementSpace {
  double value = 0.0;
  Eigen::MatrixXd basis;
  Eigen::MatrixXd projection;
};

struct L2Entry {
  double value = 0.0;               // kappa''
  Eigen::MatrixXd basis;            // Q0(kappa) Q0(kappa; 0, kappa'') in C^6
  Eigen::MatrixXd reduced;          // Q0(kappa; 0, kappa'') in the coordinates of Q0(kappa)
  Eigen::MatrixXd l3_matrix;        // reduced^T (Mp2 + Mp3) reduced
  double l3_asymmetry = 0.0;        // relative asymmetry of l3_matrix (data-quality diagnostic)
  std::vector<EnhancementSpace> l3;  // kappa''' with their subspaces in C^6
};

struct LadderLevel {
  double kappa = 0.0;
  Eigen::MatrixXd Q;                // orthonormal eigenbasis of M1(0) for kappa
  std::vector<EnhancementSpace> l1;  // kappa' in L1(kappa)
  bool admissible = false;          // kappa in the admissible set
  double smallest_angle = 0.0;      // smallest principal angle to Ker M2
  Eigen::MatrixXd Q0, Qperp;
  bool kernel_inclusion = false;    // Ker(kappa I - M1) contained in Ker M2
  Eigen::MatrixXd Mp0, Mp1, Mp2, Mp3;
  std::vector<L2Entry> l2;
  int multiplicity() const { return static_cast<int>(Q.cols()); }
};

struct SpectralLadder {
  double rho1 = 1.0;
  LadderOptions options;
  std::array<Eigen::MatrixXd, 5> M;  // real parts of M1(0)..M5(0) used to build the ladder
  MatC M6;                           // M6(0) (purely imaginary), kept for the pencil
  Eigen::MatrixXd kernel_M2;         // orthonormal basis of Ker M2(0)
  std::vector<LadderLevel> levels;
  std::vector<std::string> diagnostics;

  std::vector<double> admissible_set() const;
  // Level whose kappa is within tol * max(1, |kappa|); null if none.
  const LadderLevel* find(double kappa, double tol = 1e-8) const;
};

SpectralLadder build_ladder(const EffectiveMatrixSet& set, const LadderOptions& opts = {});

struct SignFacts {
  bool l0_negative = true;
  bool l1_nonpositive = true;
  bool l3_negative = true;
  std::string detail;
  bool all() const { return l0_negative && l1_nonpositive && l3_negative; }
};
// kappa' <= 0 is tested with slack l1_slack * max(1, ||M2||).
SignFacts sign_facts(const SpectralLadder& ladder, double l1_slack = 1e-8);

std::string ladder_to_json(const SpectralLadder& ladder);
// Rebuilds the ladder from the matrices stored in the document.
SpectralLadder ladder_from_json(const std::string& text);

enum class BranchRegime { Wavelength, Generic, Exceptional };
const char* to_string(BranchRegime r);

struct ResonanceBranch {
  BranchRegime regime = BranchRegime::Wavelength;
  std::string id;
  int sign = 1;        // +/- pairing of subwavelength branches
  double rho1 = 1.0;
  cd z0 = 0.0;         // wavelength anchor
  cd kappa_z0 = 0.0;   // eigenvalue of M1(z0)
  double kappa = 0.0;  // L0 value (subwavelength)
  double kappa1 = 0.0;  // kappa' (generic)
  double kappa2 = 0.0;  // kappa'' (exceptional)
  double kappa3 = 0.0;  // kappa''' (exceptional)
  int im_order = 1;     // order in tau of Im z
  double tau = 0.0;
  cd z = 0.0;           // value at tau

  cd evaluate(double t) const;
  // Scaled frequency at which the amplitude denominator vanishes exactly:
  // generic: root of rho w^2 + kappa - i w kappa' sqrt(tau) on this branch's side;
  // exceptional: w = +-kappa''/(2 sqrt(-rho kappa)) + i kappa''' sqrt(tau)/(2 rho).
  cd scaled_pole(double t) const;
  cd exact_pole(double t) const;  // z of scaled_pole
};

std::vector<ResonanceBranch> wavelength_resonances(const MatC& m1_z0, cd z0, double tau, double rho1 = 1.0);
std::vector<ResonanceBranch> subwavelength_resonances(const SpectralLadder& ladder, double tau);

// Effective pencil: 2 (z - z0) z0 rho1 I + tau M1(z0) for z0 != 0, or the
// quartic polynomial pencil anchored at 0.
struct EffectivePencil {
  bool at_zero = false;
  cd z0 = 0.0;
  double rho1 = 1.0;
  MatC M1z0;
  std::array<MatC, 6> M;
  int size() const { return at_zero ? static_cast<int>(M[0].rows()) : static_cast<int>(M1z0.rows()); }
};

EffectivePencil wavelength_pencil(const MatC& m1_z0, cd z0, double rho1);
EffectivePencil zero_pencil(const EffectiveMatrixSet& set);
EffectivePencil zero_pencil(const SpectralLadder& ladder);

MatC pencil_eval(const EffectivePencil& p, double tau, cd z);
// All roots z of det M^e(tau, z) = 0 (companion linearization for z0 = 0).
Eigen::VectorXcd pencil_roots(const EffectivePencil& p, double tau);
// Applies the inverse by a factorized solve; throws an at-resonance numerical
// error reporting the distance to the nearest root when the pencil is singular.
VecC pencil_solve(const EffectivePencil& p, double tau, cd z, const VecC& a, double rcond_min = 1e-13);
double pencil_inverse_norm(const EffectivePencil& p, double tau, cd z);

struct PoleTerm {
  double kappa1 = 0.0;  // kappa' (generic) or kappa''' (exceptional)
  cd denominator = 0.0;  // the scalar resonant denominator
  VecC numerator;        // P a
  VecC contribution;
};

struct PoleDecomposition {
  BranchRegime regime = BranchRegime::Generic;
  double tau = 0.0;
  cd scaled_freq = 0.0;
  cd z = 0.0;
  std::vector<PoleTerm> poles;
  VecC pole_sum;
  VecC leading_solve;   // direct solve of the leading reduced pencil on the enhancement space
  VecC full_solve;      // direct solve of the full effective pencil
  double remainder = 0.0;        // ||full_solve - pole_sum||
  double remainder_scale = 0.0;  // the bound's shape (without its unknown constant)
};

// Generic regime at omega = sqrt(tau) w for kappa in L0.
PoleDecomposition pole_decomposition_generic(const SpectralLadder& ladder, double kappa, double tau, cd w,
                                             const VecC& a);
// Exceptional regime at omega = sign sqrt(tau) sqrt(-kappa/rho) + tau^{3/2} w for kappa
// in the admissible set and kappa'' in L2(kappa; 0).
PoleDecomposition pole_decomposition_exceptional(const SpectralLadder& ladder, double kappa, double kappa2, int sign,
                                                 double tau, cd w, const VecC& a);

}  // namespace elastres
