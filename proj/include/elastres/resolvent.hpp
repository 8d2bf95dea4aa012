#pragma once
// Resolvent amplitudes of the high-contrast problem: modal moments of a forcing,
// amplitude vectors in the wavelength / generic / exceptional regimes with their
// pole decompositions, and the leading fields of a small resonator of size eps at
// y0 (monopole, dipole or anisotropic point scatterer).

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "elastres/boundary_ops.hpp"
#include "elastres/interior.hpp"
#include "elastres/spectral.hpp"

namespace elastres {

enum class ForcingKind { ConstantVector, GaussianBump, RegularizedPointForce };
const char* to_string(ForcingKind k);
ForcingKind parse_forcing_kind(const std::string& name);

// Compactly supported forcing f on R^3.
//  ConstantVector:        f = amplitude on the ball |x - center| <= radius;
//  GaussianBump:          f = amplitude exp(-|x - center|^2 / (2 width^2)), cut at 6 widths;
//  RegularizedPointForce: f = amplitude C (1 - r^2/radius^2)^3, normalized to total force amplitude.
struct ForcingSpec {
  ForcingKind kind = ForcingKind::GaussianBump;
  Vec3 center = Vec3::Zero();
  Vec3c amplitude = Vec3c(1.0, 0.0, 0.0);
  double radius = 1.0;
  double width = 0.1;

  static ForcingSpec constant_vector(const Vec3c& value, const Vec3& center, double radius);
  static ForcingSpec gaussian_bump(const Vec3& center, double width, const Vec3c& amplitude);
  static ForcingSpec regularized_point_force(const Vec3& y0, const Vec3c& force, double radius);

  void validate() const;
  double support_radius() const;
  // Smallest length scale of the profile (infinite for the constant vector).
  double feature_length() const;
  Vec3c value(const Vec3& x) const;
  Mat3c gradient(const Vec3& x) const;  // rows indexed by component
  Vec3c integral() const;               // integral over R^3
};

// Config error when the forcing varies on a scale below 3 grid spacings.
void check_resolution(const ForcingSpec& f, double spacing);

// Pi(0) f in the rigid basis, in closed form: the support ball lies inside Omega
// (then the first moment of f is center x integral) or covers Omega (constant f).
// Throws a config error when neither holds.
VecC rigid_moments(const RigidMotionBasis& basis, const SurfaceMesh& mesh, const ForcingSpec& f);
// Pi(0) of the affine field x -> c + J x from the volume moments of Omega.
VecC rigid_moments_affine(const RigidMotionBasis& basis, const Vec3c& c, const Mat3c& J);
// Pi(z0) u for field values sampled on an interior grid.
VecC mode_moments_grid(const BoundaryAssembler& as, const ElasticMedium& medium1, const NeumannEigenpair& pair,
                       const InteriorGrid& grid, const Eigen::Matrix3Xcd& values);
// Pi(z0) f on an interior grid (spacing <= 0: diam / 16), after a resolution check.
VecC mode_moments(const BoundaryAssembler& as, const ElasticMedium& medium1, const NeumannEigenpair& pair,
                  const ForcingSpec& f, double spacing = 0.0);

// Spherical product rule on a ball: Gauss in r and cos(theta), trapezoid in phi.
struct BallQuadrature {
  int radial = 40;
  int polar = 20;
  int azimuthal = 40;
};
// (R0(omega) f)(y0) = int G(y0, y; omega) f(y) dy with polar coordinates around the
// singular point; the gradient uses translation invariance, grad R0 f = R0 grad f.
Vec3c newton_potential(const ElasticMedium& m, cd omega, const ForcingSpec& f, const Vec3& y0,
                       const BallQuadrature& q = {});
Mat3c newton_potential_gradient(const ElasticMedium& m, cd omega, const ForcingSpec& f, const Vec3& y0,
                                const BallQuadrature& q = {});

// d/dy_k of the fundamental matrix G(x, y; z), k = 0, 1, 2.
std::array<Mat3c, 3> green_gradient_y(const ElasticMedium& m, const Vec3& x, const Vec3& y, cd z);

struct Amplitude {
  BranchRegime regime = BranchRegime::Wavelength;
  double tau = 0.0;
  cd scaled_freq = 0.0;
  VecC rhs;            // -rho1 Pi f (or the full wavelength right-hand side)
  VecC coefficients;   // the leading amplitude vector in the mode basis
  VecC full_solve;     // inverse of the full effective pencil applied to rhs
  std::vector<PoleTerm> poles;
  double remainder_scale = 0.0;
};

// b = M^e(tau, w; z0)^{-1} rhs; the remainder scale is (tau + |w - z0|) / ||M^e||.
Amplitude amplitude_wavelength(const EffectivePencil& pencil, double tau, cd w, const VecC& rhs);
// Generic and exceptional regimes: moments = Pi(0) f, rhs = -rho1 moments, and the
// amplitude is the pole sum over the enhancement subspaces.
Amplitude amplitude_generic(const SpectralLadder& ladder, double kappa, double tau, cd w, const VecC& moments);
Amplitude amplitude_exceptional(const SpectralLadder& ladder, double kappa, double kappa2, int sign, double tau,
                                cd w, const VecC& moments);

enum class MicroClass { Monopole, Dipole, OutOfScope };
const char* to_string(MicroClass c);
// kappa outside the admissible set: monopole; admissible with its eigenspace inside
// Ker M2: dipole; otherwise out of scope.
MicroClass classify_micro(const SpectralLadder& ladder, double kappa);

struct MicroOptions {
  double regime_ratio = 1e3;     // tau / eps^2 above this is outside the tau = O(eps^2) regime
  BallQuadrature quad;
  double grid_spacing = 0.0;     // interior grid for Pi(z0) (point scatterer)
  bool p_channel = true;         // point scatterer: include the p-wave
  bool s_channel = true;         // point scatterer: include the s-wave
};

struct MicroField {
  MicroClass kind = MicroClass::Monopole;
  BranchRegime regime = BranchRegime::Generic;
  cd scaled_freq = 0.0;
  VecC a;                 // modal right-hand side
  Amplitude amplitude;
  Vec3c monopole = Vec3c::Zero();  // <gamma b, S0^{-1} e_p>, p = 0..2
  Mat3c dipole = Mat3c::Zero();    // D_kj = int_Gamma y_k [S0^{-1} gamma b]_j
  Eigen::Matrix3Xcd field;         // 3 x P at the requested points
  Eigen::Matrix3Xcd pattern_p, pattern_s;  // point scatterer: far-field patterns at the point directions
};

// Physical frequency omega; the scaled frequency is eps omega / sqrt(tau) (monopole) or
// (eps omega - sign sqrt(tau) sqrt(-kappa/rho1)) / tau^{3/2} (dipole).
MicroField monopole_field(const BoundaryAssembler& as, const ElasticMedium& medium0, const RigidMotionBasis& basis,
                          const SpectralLadder& ladder, double kappa, double tau, double eps, double omega,
                          const ForcingSpec& f, const Vec3& y0, const std::vector<Vec3>& pts,
                          const MicroOptions& opts = {});
MicroField dipole_field(const BoundaryAssembler& as, const ElasticMedium& medium0, const RigidMotionBasis& basis,
                        const SpectralLadder& ladder, double kappa, double kappa2, int sign, double tau, double eps,
                        double omega, const ForcingSpec& f, const Vec3& y0, const std::vector<Vec3>& pts,
                        const MicroOptions& opts = {});

// Far-field pattern of the radiating exterior solution with Dirichlet trace g:
// int_Gamma T_sigma(xhat, y)^T g(y) - G_sigma(xhat, y) (N g)(y) dS(y); 3 x D.
Eigen::Matrix3Xcd far_field_pattern(const BoundaryAssembler& as, const ElasticMedium& medium0, const DtNOperator& N,
                                    WaveBranch branch, const VecC& g, const std::vector<Vec3>& dirs);

// Incident data R^inf(z0) f at reference points x (kernel argument x) and its traction.
Eigen::Matrix3Xcd incident_field(const ElasticMedium& medium0, cd z0, double eps, const ForcingSpec& f,
                                 const Vec3& y0, const std::vector<Vec3>& pts, const BallQuadrature& q = {});
Eigen::Matrix3Xcd incident_traction(const ElasticMedium& medium0, cd z0, double eps, const ForcingSpec& f,
                                    const Vec3& y0, const std::vector<Vec3>& pts, const std::vector<Vec3>& normals,
                                    const BallQuadrature& q = {});

// Wavelength-scale resonator near a non-zero Neumann eigenvalue z0 (pair), with
// effective matrix M1(z0): the anisotropic point-scatterer field.
MicroField point_scatterer_field(const BoundaryAssembler& as, const ElasticMedium& medium0,
                                 const ElasticMedium& medium1, const NeumannEigenpair& pair, const MatC& m1_z0,
                                 double tau, double eps, double omega, const ForcingSpec& f, const Vec3& y0,
                                 const std::vector<Vec3>& pts, const MicroOptions& opts = {});

// Area-weighted vertex normals.
std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh);

}  // namespace elastres
