#pragma once
// Closed-form elastodynamic kernels for an isotropic homogeneous medium:
// the outgoing (Kupradze) fundamental matrix, its static Kelvin limit, the
// traction of its columns, far-field patterns and the Taylor coefficients in
// the frequency used for derivatives of boundary operators at zero frequency.

#include <Eigen/Dense>
#include <complex>

namespace elastres {

using cd = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat3c = Eigen::Matrix3cd;
using Vec3c = Eigen::Vector3cd;

struct ElasticMedium {
  double lambda = 2.0;
  double mu = 1.0;
  double rho = 1.0;

  // Throws a config error when any parameter is not strictly positive.
  void validate() const;
  double cs() const;  // shear speed sqrt(mu/rho)
  double cp() const;  // pressure speed sqrt((lambda+2mu)/rho)
};

struct WaveSpeeds {
  double cp;
  double cs;
};
WaveSpeeds wave_speeds(const ElasticMedium& m);

// The fundamental matrix is isotropic: G(x,y) = a(r) I + b(r) d d^T with
// d = (y-x)/r. RadialKernel holds a, b and their r-derivatives at one radius.
struct RadialKernel {
  cd a, b, da, db;
};

// Radial profile of the outgoing fundamental matrix at frequency z. A Taylor
// expansion is used when |z| r / c_s is below series_switch so that the
// 1/z^2 prefactor of the two-exponential form never cancels catastrophically.
RadialKernel radial_green(const ElasticMedium& m, double r, cd z);

// Radial profile of the m-th Taylor coefficient G_m in G(z) = sum_m (iz)^m G_m.
// G_0 is the Kelvin tensor, G_1 is a constant multiple of the identity.
RadialKernel radial_green_taylor(const ElasticMedium& m, double r, int order);

// Threshold on |z| r / c_s below which the series is used.
constexpr double kSeriesSwitch = 0.5;

// Assemble the 3x3 matrix from a radial profile. d is the unit vector (y-x)/r.
Mat3c green_from_radial(const RadialKernel& k, const Vec3& d);

// Traction, with respect to y and normal n_y, of each column of the matrix
// represented by the radial profile: column l of the result is the traction of
// the displacement field y -> G(x,y) e_l.
Mat3c traction_from_radial(const ElasticMedium& m, const RadialKernel& k, const Vec3& d, double r,
                           const Vec3& n);

// Public point-wise kernels (throw on x == y).
Mat3c green_tensor(const ElasticMedium& m, const Vec3& x, const Vec3& y, cd z);
Mat3c kelvin_tensor(const ElasticMedium& m, const Vec3& x, const Vec3& y);
Mat3c traction_green(const ElasticMedium& m, const Vec3& x, const Vec3& y, const Vec3& normal_y, cd z);

enum class WaveBranch { P, S };

// Far-field patterns of the fundamental matrix: G(x,y) ~ sum_sigma
// exp(i w |x| / c_sigma)/|x| * pattern_sigma(xhat, y) as |x| -> infinity.
Mat3c far_field_kernel(const ElasticMedium& m, WaveBranch branch, const Vec3& xhat, const Vec3& y,
                       double omega);
// Traction in y (normal n_y) of each column of the far-field pattern.
Mat3c far_field_traction(const ElasticMedium& m, WaveBranch branch, const Vec3& xhat, const Vec3& y,
                         const Vec3& normal_y, double omega);

// Explicit zero-frequency derivative kernels of the single-layer operator:
//  s1_density: constant matrix c I, where the first z-derivative of S(z) at 0
//              maps phi to s1_density * (surface integral of phi);
//  s0:         kernel of the quadratic Taylor term (coefficient of z^2);
//  s1:         kernel A1 |x-y|^2 I + A2 (x-y)(x-y)^T; the cubic Taylor term is i z^3 s1.
struct DerivativeKernels {
  Mat3c s1_density;
  Mat3c s0;
  Mat3c s1;
};
DerivativeKernels derivative_kernels(const ElasticMedium& m, const Vec3& x, const Vec3& y);
cd s1_density_constant(const ElasticMedium& m);
double cubic_kernel_A1(const ElasticMedium& m);
double cubic_kernel_A2(const ElasticMedium& m);

// Lame operator applied to a displacement field by second-order central
// differences (testing aid): returns L u(x) + z^2 rho u(x) for a callable u.
template <class Field>
Vec3c lame_residual_fd(const ElasticMedium& m, const Field& u, const Vec3& x, cd z, double h) {
  // L u = mu Lap u + (lambda + mu) grad div u
  Vec3c lap = Vec3c::Zero();
  const Vec3c u0 = u(x);
  for (int i = 0; i < 3; ++i) {
    Vec3 ei = Vec3::Zero();
    ei(i) = h;
    lap += (u(x + ei) - 2.0 * u0 + u(x - ei)) / (h * h);
  }
  Vec3c graddiv = Vec3c::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Vec3 ei = Vec3::Zero(), ej = Vec3::Zero();
      ei(i) = h;
      ej(j) = h;
      cd dij;
      if (i == j) {
        dij = (u(x + ei)(j) - 2.0 * u0(j) + u(x - ei)(j)) / (h * h);
      } else {
        dij = (u(x + ei + ej)(j) - u(x + ei - ej)(j) - u(x - ei + ej)(j) + u(x - ei - ej)(j)) / (4 * h * h);
      }
      graddiv(i) += dij;
    }
  }
  return m.mu * lap + (m.lambda + m.mu) * graddiv + z * z * m.rho * u0;
}

}  // namespace elastres
