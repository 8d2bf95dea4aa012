#include <gtest/gtest.h>

#include <cmath>

#include "elastres/errors.hpp"
#include "elastres/linalg.hpp"
#include "elastres/spectral.hpp"

using namespace elastres;

namespace {
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

// Rotates the toy set by a fixed orthogonal matrix so the ladder works on non-diagonal data.
EffectiveMatrixSet rotated_toy() {
  EffectiveMatrixSet s = toy_set();
  const Eigen::MatrixXd R = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(6, 6)).householderQ();
  for (auto& M : s.M) M = (R * M.real() * R.transpose()).cast<cd>();
  return s;
}
}  // namespace

TEST(Ladder, ToyLevels) {
  const SpectralLadder L = build_ladder(toy_set());
  ASSERT_EQ(L.levels.size(), 2u);
  const LadderLevel* a = L.find(-1.0);
  const LadderLevel* b = L.find(-2.0);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->multiplicity(), 3);
  EXPECT_EQ(b->multiplicity(), 3);
  ASSERT_EQ(a->l1.size(), 1u);
  EXPECT_NEAR(a->l1[0].value, -3.0, 1e-12);
  ASSERT_EQ(b->l1.size(), 1u);
  EXPECT_NEAR(b->l1[0].value, 0.0, 1e-12);
  const auto adm = L.admissible_set();
  ASSERT_EQ(adm.size(), 1u);
  EXPECT_NEAR(adm[0], -2.0, 1e-12);
  EXPECT_TRUE(b->kernel_inclusion);
  EXPECT_FALSE(a->admissible);
}

TEST(Ladder, ProjectionsSumToEigenprojector) {
  const SpectralLadder L = build_ladder(rotated_toy());
  for (const auto& lev : L.levels) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(6, 6);
    for (const auto& e : lev.l1) sum += e.projection;
    EXPECT_LE((sum - lev.Q * lev.Q.transpose()).norm(), 1e-12);
  }
}

TEST(Ladder, ExceptionalValues) {
  const SpectralLadder L = build_ladder(toy_set());
  const LadderLevel* b = L.find(-2.0);
  ASSERT_TRUE(b);
  ASSERT_EQ(b->l2.size(), 1u);
  // One exceptional value on the three-dimensional kernel enhancement space.
  EXPECT_EQ(b->l2[0].basis.cols(), 3);
  EXPECT_LT(b->l2[0].l3_asymmetry, 1e-12);
  const SignFacts f = sign_facts(L);
  EXPECT_TRUE(f.l0_negative);
  EXPECT_TRUE(f.l1_nonpositive);
}

TEST(Ladder, JsonRoundTrip) {
  const SpectralLadder L = build_ladder(rotated_toy());
  const SpectralLadder B = ladder_from_json(ladder_to_json(L));
  ASSERT_EQ(B.levels.size(), L.levels.size());
  for (std::size_t i = 0; i < L.levels.size(); ++i) EXPECT_NEAR(B.levels[i].kappa, L.levels[i].kappa, 1e-12);
  EXPECT_EQ(B.admissible_set().size(), L.admissible_set().size());
  EXPECT_THROW(ladder_from_json(R"({"schema":"effset-1"})"), Error);
}

TEST(Ladder, PositiveM1ViolatesSignFacts) {
  EffectiveMatrixSet s = toy_set();
  s.M[0] = diag({1, 1, 1, -2, -2, -2});
  const SignFacts f = sign_facts(build_ladder(s));
  EXPECT_FALSE(f.l0_negative);
}

TEST(WavelengthBranch, Substitution) {
  const auto b = wavelength_resonances(diag({1}) * cd(1, 2), 3.0, 0.01);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_LE(std::abs(b[0].z - (cd(3.0) - (0.01 / 6.0) * cd(1, 2))), 1e-15);
  EXPECT_EQ(b[0].evaluate(0.0), cd(3.0));
}

TEST(WavelengthBranch, ImaginaryPartNegative) {
  MatC M(2, 2);
  M << cd(-1, 0.5), cd(0.2, 0.1), cd(0.2, 0.1), cd(-3, 0.2);
  for (const auto& b : wavelength_resonances(M, 2.5, 1e-2)) {
    EXPECT_GT(b.kappa_z0.imag(), 0.0);
    EXPECT_LT(b.z.imag(), 0.0);
  }
}

TEST(SubwavelengthBranch, GenericSubstitution) {
  EffectiveMatrixSet s = toy_set();
  s.M[0] = diag({-2, -2, -2, -2, -2, -2});
  s.M[1] = diag({-5, -5, -5, -5, -5, -5});
  const SpectralLadder L = build_ladder(s);
  bool seen = false;
  for (const auto& b : subwavelength_resonances(L, 0.01)) {
    if (b.regime != BranchRegime::Generic) continue;
    seen = true;
    EXPECT_NEAR(std::abs(b.z.real()), std::sqrt(0.02), 1e-4);
    EXPECT_NEAR(b.z.imag(), -0.025, 1e-12);
  }
  EXPECT_TRUE(seen);
}

TEST(SubwavelengthBranch, ToyBranches) {
  const SpectralLadder L = build_ladder(toy_set());
  const double k2 = L.find(-2.0)->l2[0].value;
  int generic = 0, exceptional = 0;
  for (const auto& b : subwavelength_resonances(L, 0.01)) {
    EXPECT_EQ(b.evaluate(0.0), cd(0.0));
    if (b.regime == BranchRegime::Generic) {
      ++generic;
      EXPECT_NEAR(std::abs(b.z.real()), std::sqrt(0.01), 1e-3);
    } else {
      ++exceptional;
      EXPECT_EQ(b.im_order, 2);
      EXPECT_LT(b.kappa3, 0.0);
      EXPECT_NEAR(b.z.imag(), b.kappa3 * 1e-4 / 2, 1e-12);
      EXPECT_NEAR(std::abs(b.z.real()), std::sqrt(0.02) + 1e-3 * std::abs(k2) / (2 * std::sqrt(2.0)), 1e-12);
    }
  }
  EXPECT_GT(generic, 0);
  EXPECT_GT(exceptional, 0);
}

TEST(Pencil, VanishesAtAnchor) {
  const EffectivePencil p = wavelength_pencil(diag({-1, -2}) * cd(1, 0.1), 2.5, 1.0);
  EXPECT_EQ(pencil_eval(p, 0.0, 2.5).norm(), 0.0);
  try {
    pencil_solve(p, 0.0, 2.5, VecC::Ones(2));
    FAIL() << "singular pencil solved";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
    EXPECT_NE(std::string(e.what()).find("at-resonance"), std::string::npos);
  }
}

TEST(Pencil, InverseNormScalesInverselyWithDistance) {
  const EffectivePencil p = wavelength_pencil(diag({-1, -2, -3}) * cd(1, 0.3), 2.5, 1.0);
  std::vector<double> taus{1e-2, 3e-3, 1e-3, 3e-4}, nt, ws{1e-2, 3e-3, 1e-3, 3e-4}, nw;
  for (double t : taus) nt.push_back(pencil_inverse_norm(p, t, 2.5));
  for (double w : ws) nw.push_back(pencil_inverse_norm(p, 1e-6, 2.5 + w));
  EXPECT_NEAR(loglog_slope(taus, nt), -1.0, 0.1);
  EXPECT_NEAR(loglog_slope(ws, nw), -1.0, 0.1);
}

TEST(Pencil, RootsMatchBranches) {
  const MatC M = diag({-1, -2}) * cd(1, 0.3);
  const EffectivePencil p = wavelength_pencil(M, 2.5, 1.0);
  const auto r = pencil_roots(p, 1e-2);
  for (const auto& b : wavelength_resonances(M, 2.5, 1e-2)) {
    double best = 1e9;
    for (int i = 0; i < r.size(); ++i) best = std::min(best, std::abs(r(i) - b.z));
    EXPECT_LE(best, 1e-12);
  }
}

TEST(PoleDecomposition, GenericMatchesLeadingSolve) {
  const SpectralLadder L = build_ladder(rotated_toy());
  const VecC a = VecC::Ones(6);
  for (double tau : {1e-2, 1e-3}) {
    const PoleDecomposition d = pole_decomposition_generic(L, -1.0, tau, 1.2, a);
    EXPECT_LE((d.leading_solve - d.pole_sum).norm(), 1e-10 * d.pole_sum.norm());
  }
}

TEST(PoleDecomposition, DenominatorVanishesAtExactPole) {
  const SpectralLadder L = build_ladder(toy_set());
  const VecC a = VecC::Ones(6);
  for (const auto& b : subwavelength_resonances(L, 1e-3)) {
    if (b.sign < 0) continue;
    const cd w = b.scaled_pole(1e-3);
    const PoleDecomposition d = b.regime == BranchRegime::Generic
                                    ? pole_decomposition_generic(L, b.kappa, 1e-3, w, a)
                                    : pole_decomposition_exceptional(L, b.kappa, b.kappa2, b.sign, 1e-3, w, a);
    double smallest = 1e9;
    for (const auto& t : d.poles) smallest = std::min(smallest, std::abs(t.denominator));
    EXPECT_LE(smallest, 1e-12) << b.id;
  }
}

TEST(PoleDecomposition, SingleProjectionContributes) {
  EffectiveMatrixSet s = toy_set();
  s.M[1] = diag({-3, -4, -5, 0, 0, 0});
  const SpectralLadder L = build_ladder(s);
  VecC a = VecC::Zero(6);
  a(1) = 1.0;  // lies in the enhancement space of kappa' = -4
  const PoleDecomposition d = pole_decomposition_generic(L, -1.0, 1e-3, 1.5, a);
  ASSERT_EQ(d.poles.size(), 3u);
  int nonzero = 0;
  for (const auto& t : d.poles) nonzero += t.numerator.norm() > 0;
  EXPECT_EQ(nonzero, 1);
}
