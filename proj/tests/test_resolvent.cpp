#include <gtest/gtest.h>

#include <cmath>

#include "elastres/errors.hpp"
#include "elastres/linalg.hpp"
#include "elastres/resolvent.hpp"

using namespace elastres;

namespace {
const ElasticMedium kMedium{};
const double kPi = 3.14159265358979323846;

MatC diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal().toDenseMatrix().cast<cd>();
}

EffectiveMatrixSet toy_set() {
  EffectiveMatrixSet s;
  s.has_zero = true;
  s.M[0] = diag({-1, -1, -1, -2, -2, -2});
  s.M[1] = diag({-3, -3, -3, 0, 0, 0});
  s.M[2] = diag({15, 15, 15, 237, 237, 237});
  s.M[3] = diag({-0.1, -0.1, -0.1, -5, -5, -5});
  s.M[4] = diag({7, 7, 7, -5, -5, -5});
  s.M[5] = MatC::Zero(6, 6);
  return s;
}

struct Sphere {
  BoundaryAssembler as{builtin_mesh(ShapeSpec{}, 2)};
  RigidMotionBasis basis = rigid_motion_basis(as.mesh());
  SpectralLadder ladder = [this] {
    const DtNDerivatives d = dtn_derivatives(as, kMedium, kMedium, 0.0);
    LadderOptions o;
    o.cluster_tol = 1e-8;
    o.angle_tol = 1e-6;
    return build_ladder(effective_set_zero(as, kMedium, basis, d, correctors(as, kMedium, basis, d.n0, d.d[0])), o);
  }();
  const LadderLevel& monopole_level() const {
    for (const auto& l : ladder.levels)
      if (!l.admissible) return l;
    throw std::runtime_error("no monopole level");
  }
  const LadderLevel& dipole_level() const {
    for (const auto& l : ladder.levels)
      if (l.admissible && l.kernel_inclusion && !l.l2.empty()) return l;
    throw std::runtime_error("no dipole level");
  }
};

Sphere& sphere() {
  static Sphere s;
  return s;
}

std::vector<Vec3> ray(const Vec3& y0, const Vec3& dir, std::initializer_list<double> rs) {
  std::vector<Vec3> p;
  for (double r : rs) p.push_back(y0 + r * dir.normalized());
  return p;
}
}  // namespace

TEST(Forcing, ProfilesAndIntegrals) {
  const ForcingSpec g = ForcingSpec::gaussian_bump(Vec3::Zero(), 0.2, Vec3c(1, 0, 0));
  EXPECT_NEAR(g.value(Vec3::Zero())(0).real(), 1.0, 1e-15);
  EXPECT_NEAR(g.integral()(0).real(), std::pow(2 * kPi, 1.5) * std::pow(0.2, 3), 1e-6);
  EXPECT_EQ(g.value(Vec3(2.0, 0, 0)).norm(), 0.0);
  const ForcingSpec p = ForcingSpec::regularized_point_force(Vec3(0.1, 0, 0), Vec3c(0, 2, 0), 0.3);
  EXPECT_LE((p.integral() - Vec3c(0, 2, 0)).norm(), 1e-12);
  EXPECT_THROW(parse_forcing_kind("dirac"), Error);
  EXPECT_EQ(parse_forcing_kind("gaussian_bump"), ForcingKind::GaussianBump);
}

TEST(Forcing, GradientMatchesDifferences) {
  const ForcingSpec g = ForcingSpec::gaussian_bump(Vec3(0.1, 0, 0), 0.3, Vec3c(1, cd(0, 1), 0.5));
  const Vec3 x(0.2, -0.1, 0.15);
  const Mat3c G = g.gradient(x);
  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e(k) = h;
    EXPECT_LE((G.col(k) - (g.value(x + e) - g.value(x - e)) / (2 * h)).norm(), 1e-8);
  }
}

TEST(Forcing, ResolutionCheck) {
  const ForcingSpec g = ForcingSpec::gaussian_bump(Vec3::Zero(), 0.05, Vec3c(1, 0, 0));
  EXPECT_THROW(check_resolution(g, 0.1), Error);
  EXPECT_NO_THROW(check_resolution(g, 0.01));
}

TEST(Moments, ConstantForcingOnCenteredMesh) {
  const SurfaceMesh mesh = builtin_mesh(ShapeSpec{}, 2);
  const RigidMotionBasis B = rigid_motion_basis(mesh);
  const Vec3c c(1.0, -2.0, 0.5);
  const VecC m = rigid_moments(B, mesh, ForcingSpec::constant_vector(c, Vec3::Zero(), 2.0));
  const double s = std::sqrt(B.moments.volume);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(m(k) - s * c(k)), 0.0, 1e-12);
  EXPECT_LE(m.tail<3>().norm(), 1e-12);
}

TEST(Moments, OrthogonalForcingGivesZero) {
  const SurfaceMesh mesh = builtin_mesh(ShapeSpec{}, 2);
  const RigidMotionBasis B = rigid_motion_basis(mesh);
  // x -> (x2, x1, 0) is a symmetric gradient: orthogonal to every rigid motion on the ball.
  Mat3c J = Mat3c::Zero();
  J(0, 1) = J(1, 0) = 1.0;
  EXPECT_LE(rigid_moments_affine(B, Vec3c::Zero(), J).norm(), 1e-12);
}

TEST(Moments, GridAgreesWithClosedForm) {
  const auto& s = sphere();
  const auto sp = neumann_spectrum(s.as, kMedium, 0.0, 0.1);
  // Six widths of support must clear the inscribed mesh by one edge length.
  const ForcingSpec f = ForcingSpec::gaussian_bump(Vec3(0.02, -0.02, 0.01), 0.1, Vec3c(1, 0.5, -0.3));
  const VecC closed = rigid_moments(s.basis, s.as.mesh(), f);
  double prev = 1e9;
  for (double h : {0.033, 0.025}) {
    const double err = (mode_moments(s.as, kMedium, sp.front(), f, h) - closed).norm() / closed.norm();
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 2e-2);
}

TEST(Moments, SupportStraddlingBoundaryIsRejected) {
  const SurfaceMesh mesh = builtin_mesh(ShapeSpec{}, 2);
  const RigidMotionBasis B = rigid_motion_basis(mesh);
  EXPECT_THROW(rigid_moments(B, mesh, ForcingSpec::gaussian_bump(Vec3(0.9, 0, 0), 0.1, Vec3c(1, 0, 0))), Error);
}

TEST(Amplitude, ZeroMomentsGiveZeroAmplitude) {
  const SpectralLadder L = build_ladder(toy_set());
  const Amplitude a = amplitude_generic(L, -1.0, 1e-3, 1.3, VecC::Zero(6));
  EXPECT_EQ(a.coefficients.norm(), 0.0);
  const EffectivePencil p = wavelength_pencil(diag({-1}) * cd(1, 0.2), 2.5, 1.0);
  EXPECT_EQ(amplitude_wavelength(p, 1e-3, 2.51, VecC::Zero(1)).coefficients.norm(), 0.0);
}

TEST(Amplitude, SingleModeScalarInversion) {
  const cd kappa(-1.0, 0.3);
  const double z0 = 2.5, tau = 1e-3;
  const cd w(2.51, 0.0);
  const EffectivePencil p = wavelength_pencil(diag({1}) * kappa, z0, 1.0);
  VecC rhs(1);
  rhs << cd(0.7, -0.2);
  const Amplitude a = amplitude_wavelength(p, tau, w, rhs);
  EXPECT_LE(std::abs(a.coefficients(0) - rhs(0) / (2.0 * (w - z0) * z0 + tau * kappa)), 1e-14);
}

TEST(Amplitude, PeakNearResonance) {
  const MatC M = diag({-1, -4}) * cd(1, 0.1);
  const double z0 = 2.5, tau = 1e-2;
  const EffectivePencil p = wavelength_pencil(M, z0, 1.0);
  const auto branches = wavelength_resonances(M, z0, tau);
  const double spacing = std::abs(branches[0].z.real() - branches[1].z.real());
  const VecC rhs = VecC::Ones(2);
  for (const auto& b : branches) {
    double best = 0, at = 0;
    for (int i = -400; i <= 400; ++i) {
      const double w = b.z.real() + i * spacing / 800;
      const double v = amplitude_wavelength(p, tau, w, rhs).coefficients.norm();
      if (v > best) best = v, at = w;
    }
    EXPECT_LE(std::abs(at - b.z.real()), spacing / 10);
  }
}

TEST(Amplitude, GenericDenominatorAtBranchCentre) {
  const SpectralLadder L = build_ladder(toy_set());
  const double tau = 1e-4, w = 1.0;  // w^2 = -kappa / rho for kappa = -1
  VecC m = VecC::Zero(6);
  m(0) = 1.0;
  const Amplitude a = amplitude_generic(L, -1.0, tau, w, m);
  ASSERT_EQ(a.poles.size(), 1u);
  EXPECT_NEAR(std::abs(a.poles[0].denominator), std::sqrt(tau) * std::abs(w * -3.0), 1e-14);
  // The scaled pole form carries an overall 1/tau.
  EXPECT_NEAR(a.coefficients.norm(), 1.0 / (tau * std::sqrt(tau) * 3.0), 1e-9 / (tau * std::sqrt(tau)));
}

TEST(Amplitude, ExceptionalScalesAtBranchCentre) {
  const SpectralLadder L = build_ladder(toy_set());
  const LadderLevel* lev = L.find(-2.0);
  ASSERT_TRUE(lev && !lev->l2.empty());
  const double k2 = lev->l2[0].value;
  VecC m = VecC::Zero(6);
  m(3) = 1.0;
  std::vector<double> taus{1e-3, 1e-4}, mags;
  for (double tau : taus) {
    const cd w = k2 / (2 * std::sqrt(2.0));
    mags.push_back(amplitude_exceptional(L, -2.0, k2, 1, tau, w, m).coefficients.norm());
  }
  // At the branch centre the denominator is O(sqrt(tau)) and the form carries 1/tau^2.
  EXPECT_NEAR(std::log(mags[1] / mags[0]) / std::log(10.0), 2.5, 0.05);
}

TEST(Classifier, ToyLadder) {
  const SpectralLadder L = build_ladder(toy_set());
  EXPECT_EQ(classify_micro(L, -1.0), MicroClass::Monopole);
  EXPECT_EQ(classify_micro(L, -2.0), MicroClass::Dipole);
  EXPECT_THROW(classify_micro(L, -7.0), Error);
}

TEST(Classifier, PartialKernelIsOutOfScope) {
  EffectiveMatrixSet s = toy_set();
  s.M[1] = diag({-3, -3, -3, -1, -1, 0});
  EXPECT_EQ(classify_micro(build_ladder(s), -2.0), MicroClass::OutOfScope);
}

TEST(Classifier, SphereEnhancedLevelIsDipole) {
  const auto& s = sphere();
  EXPECT_EQ(classify_micro(s.ladder, s.dipole_level().kappa), MicroClass::Dipole);
  EXPECT_EQ(classify_micro(s.ladder, s.monopole_level().kappa), MicroClass::Monopole);
}

TEST(NewtonPotential, ConstantForcingStaticBall) {
  // Kelvin kernel over a ball of radius R centred at the evaluation point:
  // int_B G_0(0, y) dy = R^2 / (2 mu) (1 - (lambda + mu) / (3 (lambda + 2 mu))) I.
  const ForcingSpec f = ForcingSpec::constant_vector(Vec3c(1, 0, 0), Vec3::Zero(), 0.5);
  const Vec3c u = newton_potential(kMedium, 0.0, f, Vec3::Zero());
  const double want = 0.25 / 2.0 * (1.0 - 3.0 / 12.0);
  EXPECT_NEAR(u(0).real(), want, 1e-10);
  EXPECT_LE(u.tail<2>().norm(), 1e-12);
}

TEST(NewtonPotential, GradientMatchesDifferences) {
  const ForcingSpec f = ForcingSpec::gaussian_bump(Vec3::Zero(), 0.2, Vec3c(1, 0.5, 0));
  const Vec3 y(0.05, 0.02, -0.03);
  const Mat3c G = newton_potential_gradient(kMedium, 0.7, f, y);
  const double h = 1e-4;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e(k) = h;
    const Vec3c d = (newton_potential(kMedium, 0.7, f, y + e) - newton_potential(kMedium, 0.7, f, y - e)) / (2 * h);
    EXPECT_LE((G.col(k) - d).norm(), 1e-5 * G.norm());
  }
}

TEST(GreenGradient, MatchesDifferences) {
  const Vec3 x(1.0, 0.3, -0.2), y(0.1, 0.0, 0.2);
  const cd z(0.9, -0.05);
  const auto g = green_gradient_y(kMedium, x, y, z);
  const double h = 1e-5;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e(k) = h;
    const Mat3c d = (green_tensor(kMedium, x, y + e, z) - green_tensor(kMedium, x, y - e, z)) / (2 * h);
    EXPECT_LE((g[k] - d).norm(), 1e-8 * d.norm() + 1e-10);
  }
}

TEST(FarField, MatchesPointSourceOracle) {
  // Exterior field G(x, ys) c with ys inside Omega: its pattern is the kernel pattern at ys.
  const auto& s = sphere();
  const double w = 1.1;
  const Vec3 ys(0.2, -0.1, 0.15);
  const Vec3c c(1.0, 0.5, -0.25);
  const DtNOperator N(s.as, kMedium, w);
  VecC g(s.as.dofs());
  for (int i = 0; i < s.as.mesh().num_vertices(); ++i)
    g.segment<3>(3 * i) = green_tensor(kMedium, s.as.mesh().vertices[i], ys, w) * c;
  const std::vector<Vec3> dirs{Vec3(1, 0, 0), Vec3(0.3, -0.4, 0.866).normalized()};
  for (WaveBranch br : {WaveBranch::P, WaveBranch::S}) {
    const Eigen::Matrix3Xcd pat = far_field_pattern(s.as, kMedium, N, br, g, dirs);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const Vec3c want = far_field_kernel(kMedium, br, dirs[d], ys, w) * c;
      EXPECT_LE((pat.col(d) - want).norm(), 2e-2 * want.norm() + 1e-4);
    }
  }
}

TEST(MicroField, MonopoleAngularStructure) {
  const auto& s = sphere();
  const Vec3 y0(0.0, 0.0, 0.0);
  const double eps = 0.05, tau = 1e-3, omega = 0.3;
  const ForcingSpec f = ForcingSpec::gaussian_bump(y0, 0.2, Vec3c(1, 0.3, 0));
  const std::vector<Vec3> pts{Vec3(2, 0, 0), Vec3(0, 1.2, 1.6)};
  const MicroField m = monopole_field(s.as, kMedium, s.basis, s.ladder, s.monopole_level().kappa, tau, eps, omega, f,
                                      y0, pts);
  EXPECT_EQ(m.kind, MicroClass::Monopole);
  const Mat3c G1 = green_tensor(kMedium, pts[0], y0, omega), G2 = green_tensor(kMedium, pts[1], y0, omega);
  const Vec3c predicted = G2 * G1.partialPivLu().solve(Vec3c(m.field.col(0)));
  EXPECT_LE((m.field.col(1) - predicted).norm(), 1e-8 * predicted.norm());
}

TEST(MicroField, DipoleDecaysOneOrderFaster) {
  const auto& s = sphere();
  const Vec3 y0 = Vec3::Zero();
  const double eps = 0.05, tau = 1e-3, omega = 0.02;
  const ForcingSpec f = ForcingSpec::gaussian_bump(y0, 0.2, Vec3c(0.3, 1, 0.2));
  const auto pts = ray(y0, Vec3(1, 0.5, 0.3), {0.5, 0.7, 1.0, 1.4, 2.0});
  const auto& dl = s.dipole_level();
  const MicroField d = dipole_field(s.as, kMedium, s.basis, s.ladder, dl.kappa, dl.l2[0].value, 1, tau, eps, omega, f,
                                    y0, pts);
  const MicroField m = monopole_field(s.as, kMedium, s.basis, s.ladder, s.monopole_level().kappa, tau, eps, omega, f,
                                      y0, pts);
  std::vector<double> r, nd, nm;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    r.push_back((pts[p] - y0).norm());
    nd.push_back(d.field.col(p).norm());
    nm.push_back(m.field.col(p).norm());
  }
  EXPECT_NEAR(loglog_slope(r, nm) - loglog_slope(r, nd), 1.0, 0.1);
}

TEST(MicroField, RegimeCheck) {
  const auto& s = sphere();
  const ForcingSpec f = ForcingSpec::gaussian_bump(Vec3::Zero(), 0.2, Vec3c(1, 0, 0));
  EXPECT_THROW(monopole_field(s.as, kMedium, s.basis, s.ladder, s.monopole_level().kappa, 0.05, 1e-3, 0.3, f,
                              Vec3::Zero(), {Vec3(1, 0, 0)}),
               Error);
}
