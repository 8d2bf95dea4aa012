#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "elastres/boundary_ops.hpp"
#include "elastres/errors.hpp"
#include "elastres/geometry.hpp"

using namespace elastres;

namespace {
const ElasticMedium kMedium{};

VecC constant_density(int n, const Vec3c& c) {
  VecC v(3 * n);
  for (int i = 0; i < n; ++i) v.segment<3>(3 * i) = c;
  return v;
}

double wnorm(const BoundaryAssembler& as, const VecC& v) {
  return std::sqrt(std::abs(v.dot(as.mass() * v)));
}

BoundaryAssembler& level2() {
  static BoundaryAssembler as(builtin_mesh(ShapeSpec{}, 2));
  return as;
}
}  // namespace

TEST(SingleLayer, StaticSymmetricPositiveDefinite) {
  const auto& as = level2();
  MatC S;
  as.assemble(kMedium, 0.0, &S, nullptr);
  // Collocation is symmetric only up to discretisation error (about 1.6% at level 2).
  const Eigen::MatrixXd WS = (as.mass() * S.real()).eval();
  const Eigen::MatrixXd sym = 0.5 * (WS + WS.transpose());
  EXPECT_LE((WS - WS.transpose()).norm(), 3e-2 * WS.norm());
  EXPECT_LE(S.imag().norm(), 1e-14 * S.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  EXPECT_GT(es.eigenvalues()(0), 0.0);
}

TEST(SingleLayer, CollocationSymmetryLevel1) {
  const BoundaryAssembler as(builtin_mesh(ShapeSpec{}, 1));
  MatC S;
  as.assemble(kMedium, 0.0, &S, nullptr);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S.real() + S.real().transpose()), Eigen::EigenvaluesOnly);
  EXPECT_GT(es.eigenvalues()(0), 0.0);
}

TEST(DoubleLayer, ConstantDensityIsMinusHalf) {
  const Vec3c c(1.0, -0.5, 2.0);
  std::vector<double> err;
  for (int lev : {1, 2}) {
    const BoundaryAssembler as(builtin_mesh(ShapeSpec{}, lev));
    MatC K;
    as.assemble(kMedium, 0.0, nullptr, &K);
    const VecC v = constant_density(as.mesh().num_vertices(), c);
    err.push_back((K * v + 0.5 * v).norm() / v.norm());
  }
  EXPECT_LE(err[1], 1e-10);
  EXPECT_LE(err[0], 1e-10);
}

TEST(DoubleLayer, RigidDefectDecreasesWithRefinement) {
  std::vector<double> d;
  for (int lev : {1, 2}) d.push_back(rigid_defect(BoundaryAssembler(builtin_mesh(ShapeSpec{}, lev)), kMedium));
  EXPECT_LT(d[1], d[0]);
  EXPECT_LT(d[1], 1e-3);
}

TEST(Assembly, Linearity) {
  const auto& as = level2();
  MatC S, K;
  as.assemble(kMedium, cd(1.3, -0.1), &S, &K);
  const VecC phi = VecC::Random(as.dofs());
  const cd alpha(0.7, -2.0);
  EXPECT_LE((S * (alpha * phi) - alpha * (S * phi)).norm(), 1e-12 * (S * phi).norm());
  EXPECT_LE((K * (alpha * phi) - alpha * (K * phi)).norm(), 1e-12 * (K * phi).norm());
}

TEST(Assembly, TaylorMatchesSmallFrequency) {
  const BoundaryAssembler as(builtin_mesh(ShapeSpec{}, 1));
  const cd z = 0.02;
  MatC S, K;
  as.assemble(kMedium, z, &S, &K);
  MatC Ss = MatC::Zero(as.dofs(), as.dofs()), Ks = Ss;
  for (int m = 0; m <= 4; ++m) {
    Eigen::MatrixXd Sm, Km;
    as.assemble_taylor(kMedium, m, &Sm, &Km);
    Ss += std::pow(cd(0, 1) * z, m) * Sm;
    Ks += std::pow(cd(0, 1) * z, m) * Km;
  }
  EXPECT_LE((Ss - S).norm(), 1e-9 * S.norm());
  EXPECT_LE((Ks - K).norm(), 1e-9 * K.norm());
}

TEST(DtN, RigidIdentityAtZero) {
  const auto& as = level2();
  const DtNOperator N(as, kMedium, 0.0);
  const RigidMotionBasis B = rigid_motion_basis(as.mesh());
  const Eigen::MatrixXd E = B.traces(as.mesh());
  const double tol = mesh_tolerance(as, kMedium, kMedium);
  for (int k = 0; k < 6; ++k) {
    const VecC e = E.col(k).cast<cd>();
    const VecC want = -N.solve_S(e);
    EXPECT_LE(wnorm(as, N.matrix() * e - want), 10 * tol * wnorm(as, want)) << "rigid motion " << k;
    EXPECT_LT(e.dot(as.mass() * (N.matrix() * e)).real(), 0.0);
  }
}

TEST(DtN, Linearity) {
  const auto& as = level2();
  const DtNOperator N(as, kMedium, cd(0.8, -0.05));
  const VecC g1 = VecC::Random(as.dofs()), g2 = VecC::Random(as.dofs());
  const MatC& A = N.matrix();
  EXPECT_LE((A * (g1 + g2) - A * g1 - A * g2).norm(), 1e-12 * (A * g1).norm());
}

TEST(DtN, DerivativesAgreeWithFiniteDifferences) {
  const auto& as = level2();
  const DtNDerivatives d = dtn_derivatives(as, kMedium, kMedium, 0.0);
  EXPECT_LE(d.fd_vs_analytic[0], 1e-6);
  EXPECT_LE(d.fd_vs_analytic[2], 1e-4);
  // Odd part of N along the real axis is z dN(0) + O(z^3).
  std::vector<double> zs{0.04, 0.02}, err;
  for (double z : zs) {
    const DtNOperator p(as, kMedium, z), m(as, kMedium, -z);
    err.push_back((p.matrix() - m.matrix() - 2.0 * z * d.d[0]).norm());
  }
  EXPECT_NEAR(std::log(err[0] / err[1]) / std::log(2.0), 3.0, 0.3);
}

TEST(DtN, FirstDerivativeSeesOnlyMean) {
  // The first-order single-layer term has a kernel constant in y, so it acts
  // only through the mean of the density.
  const auto& as = level2();
  const DtNDerivatives d = dtn_derivatives(as, kMedium, kMedium, 0.0);
  const Eigen::VectorXd w = as.weights();
  VecC phi = VecC::Random(as.dofs());
  for (int c = 0; c < 3; ++c) {
    cd mean = 0;
    double tot = 0;
    for (int i = 0; i < as.mesh().num_vertices(); ++i) {
      mean += w(i) * phi(3 * i + c);
      tot += w(i);
    }
    for (int i = 0; i < as.mesh().num_vertices(); ++i) phi(3 * i + c) -= mean / tot;
  }
  EXPECT_LE((d.S1 * phi.real()).norm(), 1e-12 * d.S1.norm() * phi.norm());
}

TEST(OperatorIO, BinaryRoundTrip) {
  const BoundaryOperatorMatrix op = assemble(OperatorKind::K, kMedium, builtin_mesh(ShapeSpec{}, 0), cd(0.5, -0.1));
  const std::string p = (std::filesystem::temp_directory_path() / "elastres_op.elop").string();
  save_operator(op, p);
  const BoundaryOperatorMatrix back = load_operator(p);
  EXPECT_EQ(back.kind, OperatorKind::K);
  EXPECT_EQ(back.z, op.z);
  EXPECT_EQ((back.mat - op.mat).norm(), 0.0);
}

TEST(OperatorIO, RejectsBadMagic) {
  const std::string p = (std::filesystem::temp_directory_path() / "elastres_bad.elop").string();
  {
    std::ofstream f(p, std::ios::binary);
    f << std::string(64, 'x');
  }
  EXPECT_THROW(load_operator(p), Error);
}

TEST(Interpolation, MatchesDirectAssembly) {
  BoundaryAssembler as(builtin_mesh(ShapeSpec{}, 1));
  const double err = as.enable_interpolation(kMedium, cd(2.5, -0.02), 0.1);
  EXPECT_LE(err, 1e-10);
  MatC K1;
  as.assemble(kMedium, cd(2.53, -0.01), nullptr, &K1);
  as.disable_interpolation();
  MatC K2;
  as.assemble(kMedium, cd(2.53, -0.01), nullptr, &K2);
  EXPECT_LE((K1 - K2).norm(), 1e-9 * K2.norm());
}
