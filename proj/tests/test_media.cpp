#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "elastres/errors.hpp"
#include "elastres/geometry.hpp"
#include "elastres/linalg.hpp"
#include "elastres/media.hpp"
#include "elastres/quadrature.hpp"

using namespace elastres;

namespace {
const double kPi = 3.14159265358979323846;
ElasticMedium medium(double l, double m, double r) {
  ElasticMedium e;
  e.lambda = l;
  e.mu = m;
  e.rho = r;
  return e;
}
}  // namespace

TEST(WaveSpeeds, Substitution) {
  auto a = wave_speeds(medium(2, 1, 1));
  EXPECT_DOUBLE_EQ(a.cp, 2.0);
  EXPECT_DOUBLE_EQ(a.cs, 1.0);
  auto b = wave_speeds(medium(1, 4, 1));
  EXPECT_DOUBLE_EQ(b.cp, 3.0);
  EXPECT_DOUBLE_EQ(b.cs, 2.0);
  auto c = wave_speeds(medium(2, 1, 4));
  EXPECT_DOUBLE_EQ(c.cp, 1.0);
  EXPECT_DOUBLE_EQ(c.cs, 0.5);
}

TEST(WaveSpeeds, RejectsNonPositive) {
  EXPECT_THROW(wave_speeds(medium(2, -1, 1)), Error);
  EXPECT_THROW(medium(0, 1, 1).validate(), Error);
}

TEST(GreenTensor, KelvinEntries) {
  const ElasticMedium m = medium(2, 1, 1);
  const double d = 1.3;
  const Mat3c G = green_tensor(m, Vec3::Zero(), Vec3(d, 0, 0), 0.0);
  EXPECT_NEAR(G(0, 0).real(), 1.0 / (4 * kPi * m.mu * d), 1e-14);
  EXPECT_NEAR(std::abs(G(0, 1)), 0.0, 1e-16);
}

TEST(GreenTensor, Reciprocity) {
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 x(0.1, -0.4, 0.7), y(-0.3, 0.5, 0.2);
  for (cd z : {cd(0.0), cd(0.3), cd(2.5, -0.4)}) {
    const Mat3c a = green_tensor(m, x, y, z), b = green_tensor(m, y, x, z);
    EXPECT_LE((a - b.transpose()).norm(), 1e-15 * a.norm());
    EXPECT_LE((a - a.transpose()).norm(), 1e-15 * a.norm());
  }
}

TEST(GreenTensor, SmallFrequencyMatchesKelvin) {
  // The real part matches the Kelvin tensor to O(z^2); the imaginary part is the
  // exact first-order term i z c I with c the constant of the first Taylor coefficient.
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 x = Vec3::Zero(), y(0.6, 0.8, 0.0);
  const double z = 1e-6;
  const Mat3 K = kelvin_tensor(m, x, y).real();
  const Mat3c G = green_tensor(m, x, y, z);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(K(i, j)) > 1e-12) EXPECT_LE(std::abs(G(i, j).real() - K(i, j)), 1e-6 * std::abs(K(i, j)));
  const Mat3c first = Mat3c::Identity() * (cd(0, 1) * z * radial_green_taylor(m, 1.0, 1).a);
  EXPECT_LE((G.imag() - first.imag()).norm(), 1e-12 * z);
}

TEST(GreenTensor, StaticLimitIsFirstOrder) {
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 x = Vec3::Zero(), y(0.3, -0.5, 0.4);
  std::vector<double> zs, err;
  for (double z : {1e-1, 3e-2, 1e-2, 3e-3}) {
    zs.push_back(z);
    err.push_back((green_tensor(m, x, y, z) - kelvin_tensor(m, x, y).cast<cd>()).norm());
  }
  EXPECT_GE(loglog_slope(zs, err), 0.9);
}

TEST(GreenTensor, SeriesSwitchIsContinuous) {
  const ElasticMedium m = medium(2, 1, 1);
  const double r = 0.4;
  const cd z = kSeriesSwitch * m.cs() / r;
  const RadialKernel a = radial_green(m, r, z * (1 - 1e-12)), b = radial_green(m, r, z * (1 + 1e-12));
  EXPECT_LE(std::abs(a.a - b.a), 1e-10 * std::abs(a.a));
  EXPECT_LE(std::abs(a.b - b.b), 1e-9 * std::abs(a.a));
}

TEST(GreenTensor, KupradzeResidualSecondOrder) {
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 ys(0.1, -0.2, 0.3), x(1.2, 0.4, -0.3);
  const cd z(1.7, -0.2);
  std::vector<double> hs, res;
  for (double h : {4e-2, 2e-2, 1e-2}) {
    auto u = [&](const Vec3& p) { return Vec3c(green_tensor(m, p, ys, z).col(1)); };
    hs.push_back(h);
    res.push_back(lame_residual_fd(m, u, x, z, h).norm());
  }
  EXPECT_GE(loglog_slope(hs, res), 1.8);
}

TEST(TractionGreen, DoubleLayerOfConstantIsMinusConstant) {
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 x(0.1, 0.2, -0.15);
  const Vec3c c(1.0, -2.0, 0.5);
  std::vector<double> err;
  for (int lev : {2, 3}) {
    const SurfaceMesh mesh = builtin_mesh(ShapeSpec{}, lev);
    const TriangleRule& rule = radon7();
    Vec3c acc = Vec3c::Zero();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& T = mesh.triangles[t];
      for (std::size_t q = 0; q < rule.w.size(); ++q) {
        Vec3 y = Vec3::Zero();
        for (int k = 0; k < 3; ++k) y += rule.bary[q](k) * mesh.vertices[T[k]];
        acc += rule.w[q] * mesh.areas[t] * traction_green(m, x, y, mesh.normals[t], 0.0).transpose() * c;
      }
    }
    err.push_back((acc + c).norm() / c.norm());
  }
  EXPECT_LT(err[0], 2e-2);
  EXPECT_LT(err[1], err[0]);
}

TEST(TractionGreen, NormalFlipNegates) {
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 x(0, 0, 0), y(0.5, 0.2, 0.1), n = Vec3(0.3, -0.2, 0.9).normalized();
  const Mat3c a = traction_green(m, x, y, n, cd(1.1, -0.1)), b = traction_green(m, x, y, -n, cd(1.1, -0.1));
  EXPECT_LE((a + b).norm(), 1e-14 * a.norm());
}

TEST(FarField, PatternsAtOrigin) {
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 xh = Vec3(1, 2, -2).normalized();
  const Mat3 xx = xh * xh.transpose();
  const Mat3c P = far_field_kernel(m, WaveBranch::P, xh, Vec3::Zero(), 1.3);
  const Mat3c S = far_field_kernel(m, WaveBranch::S, xh, Vec3::Zero(), 1.3);
  EXPECT_LE((P - (xx / (4 * kPi * 4.0)).cast<cd>()).norm(), 1e-15);
  EXPECT_LE((S - ((Mat3::Identity() - xx) / (4 * kPi)).cast<cd>()).norm(), 1e-15);
  EXPECT_LE((P * S).norm(), 1e-16);
}

TEST(FarField, RemainderDecaysQuadratically) {
  const ElasticMedium m = medium(2, 1, 1);
  const Vec3 y(0.2, -0.1, 0.3), xh = Vec3(0.3, 0.4, 0.5).normalized();
  const double w = 1.5;
  std::vector<double> R, err;
  for (double r : {20.0, 40.0, 80.0, 160.0}) {
    const Mat3c G = green_tensor(m, r * xh, y, w);
    const Mat3c far = std::exp(cd(0, w * r / m.cp())) / r * far_field_kernel(m, WaveBranch::P, xh, y, w) +
                      std::exp(cd(0, w * r / m.cs())) / r * far_field_kernel(m, WaveBranch::S, xh, y, w);
    R.push_back(r);
    err.push_back((G - far).norm());
  }
  EXPECT_LE(loglog_slope(R, err), -1.9);
}

TEST(DerivativeKernels, CubicConstants) {
  const ElasticMedium m = medium(2, 1, 1);
  EXPECT_NEAR(cubic_kernel_A1(m), -(1.0 / (30 * kPi) + 1.0 / (120 * kPi * 4 * 8)), 1e-15);
  EXPECT_NEAR(cubic_kernel_A2(m), 1.0 / (60 * kPi) - 1.0 / (60 * kPi * 4 * 8), 1e-15);
  const DerivativeKernels k = derivative_kernels(m, Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.3));
  EXPECT_LE(k.s1.norm(), 1e-15);
}

TEST(DerivativeKernels, QuadraticKernelDiagonal) {
  const ElasticMedium m = medium(2, 1, 1);
  const double cs = 1.0, cp = 2.0, l2m = 4.0;
  const DerivativeKernels k = derivative_kernels(m, Vec3::Zero(), Vec3(1, 0, 0));
  const double want = -3.0 / (32 * kPi * m.mu * cs * cs) - 1.0 / (32 * kPi * l2m * cp * cp) +
                      1.0 / (32 * kPi * m.mu * cs * cs) - 1.0 / (32 * kPi * l2m * cp * cp);
  EXPECT_NEAR(k.s0(0, 0).real(), want, 1e-14);
}

TEST(DerivativeKernels, TaylorMatchesGreen) {
  // G(z) = sum_m (iz)^m G_m with the first four coefficients.
  const ElasticMedium m = medium(2, 1, 1);
  const double r = 0.7;
  const cd z = 0.05;
  const RadialKernel full = radial_green(m, r, z);
  cd a = 0, b = 0;
  for (int k = 0; k < 6; ++k) {
    const RadialKernel t = radial_green_taylor(m, r, k);
    a += std::pow(cd(0, 1) * z, k) * t.a;
    b += std::pow(cd(0, 1) * z, k) * t.b;
  }
  EXPECT_LE(std::abs(a - full.a), 1e-10 * std::abs(full.a));
  EXPECT_LE(std::abs(b - full.b), 1e-10 * std::abs(full.a));
}
