#include "elastres/media.hpp"

#include <cmath>
#include <string>

#include "elastres/errors.hpp"

namespace elastres {

namespace {
constexpr double kPi = 3.14159265358979323846;
const cd kI(0.0, 1.0);

void require_distinct(const Vec3& x, const Vec3& y) {
  if ((x - y).norm() == 0.0) numerical_error("kernel evaluated at coincident points x == y");
}
}  // namespace

void ElasticMedium::validate() const {
  if (!(lambda > 0.0)) config_error("invalid medium: lambda must be > 0 (got " + std::to_string(lambda) + ")");
  if (!(mu > 0.0)) config_error("invalid medium: mu must be > 0 (got " + std::to_string(mu) + ")");
  if (!(rho > 0.0)) config_error("invalid medium: rho must be > 0 (got " + std::to_string(rho) + ")");
}

double ElasticMedium::cs() const { return std::sqrt(mu / rho); }
double ElasticMedium::cp() const { return std::sqrt((lambda + 2.0 * mu) / rho); }

WaveSpeeds wave_speeds(const ElasticMedium& m) {
  m.validate();
  return {m.cp(), m.cs()};
}

// Series form. With P_c(m) = (i z r / c)^m / m!, the Taylor terms read
//   a = (1/r) sum_m ta(m),  b = (1/r) sum_m tb(m),
//   ta(m) = P_s/(4 pi mu) - (P_s/mu - P_p/(lambda+2mu)) / (4 pi (m+2)),
//   tb(m) = -(m-1) (P_s/mu - P_p/(lambda+2mu)) / (4 pi (m+2)),
// and each term is proportional to r^(m-1), so d/dr multiplies it by (m-1)/r.
static RadialKernel radial_series(const ElasticMedium& m, double r, cd z) {
  const double lp2m = m.lambda + 2.0 * m.mu;
  const cd xs = kI * z * r / m.cs();
  const cd xp = kI * z * r / m.cp();
  cd ps = 1.0, pp = 1.0;
  cd sa = 0.0, sb = 0.0, sda = 0.0, sdb = 0.0;
  for (int k = 0; k < 60; ++k) {
    const cd diff = ps / m.mu - pp / lp2m;
    const cd ta = ps / (4.0 * kPi * m.mu) - diff / (4.0 * kPi * (k + 2));
    const cd tb = -double(k - 1) * diff / (4.0 * kPi * (k + 2));
    sa += ta;
    sb += tb;
    sda += double(k - 1) * ta;
    sdb += double(k - 1) * tb;
    if (k > 2 && std::abs(ta) + std::abs(tb) < 1e-18 * (std::abs(sa) + std::abs(sb))) break;
    ps *= xs / double(k + 1);
    pp *= xp / double(k + 1);
  }
  return {sa / r, sb / r, sda / (r * r), sdb / (r * r)};
}

RadialKernel radial_green(const ElasticMedium& m, double r, cd z) {
  if (std::abs(z) * r / m.cs() < kSeriesSwitch) return radial_series(m, r, z);
  const cd ks = z / m.cs(), kp = z / m.cp();
  auto phis = [r](cd k, cd out[4]) {
    const cd e = std::exp(kI * k * r);
    const cd kr = k * r;
    out[0] = e / r;
    out[1] = e * (kI * kr - 1.0) / (r * r);
    out[2] = e * (-kr * kr - 2.0 * kI * kr + 2.0) / (r * r * r);
    out[3] = e * (-kI * kr * kr * kr + 3.0 * kr * kr + 6.0 * kI * kr - 6.0) / (r * r * r * r);
  };
  cd fs[4], fp[4];
  phis(ks, fs);
  phis(kp, fp);
  const cd d1 = fs[1] - fp[1], d2 = fs[2] - fp[2], d3 = fs[3] - fp[3];
  const cd c = 1.0 / (4.0 * kPi * m.rho * z * z);
  const double cm = 1.0 / (4.0 * kPi * m.mu);
  RadialKernel k;
  k.a = cm * fs[0] + c * d1 / r;
  k.b = c * (d2 - d1 / r);
  k.da = cm * fs[1] + c * (d2 / r - d1 / (r * r));
  k.db = c * (d3 - d2 / r + d1 / (r * r));
  return k;
}

RadialKernel radial_green_taylor(const ElasticMedium& m, double r, int order) {
  const double lp2m = m.lambda + 2.0 * m.mu;
  double fact = 1.0;
  for (int j = 2; j <= order; ++j) fact *= j;
  const double ps = std::pow(r / m.cs(), order) / fact;
  const double pp = std::pow(r / m.cp(), order) / fact;
  const double diff = ps / m.mu - pp / lp2m;
  const double ta = ps / (4.0 * kPi * m.mu) - diff / (4.0 * kPi * (order + 2));
  const double tb = -double(order - 1) * diff / (4.0 * kPi * (order + 2));
  return {ta / r, tb / r, double(order - 1) * ta / (r * r), double(order - 1) * tb / (r * r)};
}

Mat3c green_from_radial(const RadialKernel& k, const Vec3& d) {
  Mat3c g = k.b * (d * d.transpose()).cast<cd>();
  g.diagonal().array() += k.a;
  return g;
}

Mat3c traction_from_radial(const ElasticMedium& m, const RadialKernel& k, const Vec3& d, double r,
                           const Vec3& n) {
  // Column l is the traction lambda div(u) n + mu (grad u + grad u^T) n of
  // u(y) = a(r) e_l + b(r) d d_l, with d = (y - x)/r.
  const double dn = d.dot(n);
  const cd bor = k.b / r;
  const cd c_delta = m.mu * (k.da + bor) * dn;
  const cd c_dn = m.mu * (k.da + bor);                              // d_k n_l
  const cd c_nd = m.lambda * (k.da + k.db + 2.0 * bor) + 2.0 * m.mu * bor;  // n_k d_l
  const cd c_dd = m.mu * (2.0 * k.db - 4.0 * bor) * dn;             // d_k d_l
  Mat3c t = c_dn * (d * n.transpose()).cast<cd>() + c_nd * (n * d.transpose()).cast<cd>() +
            c_dd * (d * d.transpose()).cast<cd>();
  t.diagonal().array() += c_delta;
  return t;
}

Mat3c green_tensor(const ElasticMedium& m, const Vec3& x, const Vec3& y, cd z) {
  require_distinct(x, y);
  const Vec3 dv = y - x;
  const double r = dv.norm();
  return green_from_radial(radial_green(m, r, z), dv / r);
}

Mat3c kelvin_tensor(const ElasticMedium& m, const Vec3& x, const Vec3& y) {
  require_distinct(x, y);
  const Vec3 dv = y - x;
  const double r = dv.norm();
  return green_from_radial(radial_green_taylor(m, r, 0), dv / r);
}

Mat3c traction_green(const ElasticMedium& m, const Vec3& x, const Vec3& y, const Vec3& normal_y, cd z) {
  require_distinct(x, y);
  const Vec3 dv = y - x;
  const double r = dv.norm();
  return traction_from_radial(m, radial_green(m, r, z), dv / r, r, normal_y);
}

Mat3c far_field_kernel(const ElasticMedium& m, WaveBranch branch, const Vec3& xhat, const Vec3& y,
                       double omega) {
  if (omega == 0.0) config_error("far-field pattern requested at zero frequency");
  const Mat3 xx = xhat * xhat.transpose();
  if (branch == WaveBranch::P) {
    const cd ph = std::exp(-kI * omega * xhat.dot(y) / m.cp());
    return (xx / (4.0 * kPi * (m.lambda + 2.0 * m.mu))).cast<cd>() * ph;
  }
  const cd ph = std::exp(-kI * omega * xhat.dot(y) / m.cs());
  return ((Mat3::Identity() - xx) / (4.0 * kPi * m.mu)).cast<cd>() * ph;
}

Mat3c far_field_traction(const ElasticMedium& m, WaveBranch branch, const Vec3& xhat, const Vec3& y,
                         const Vec3& normal_y, double omega) {
  if (omega == 0.0) config_error("far-field pattern requested at zero frequency");
  const double xn = xhat.dot(normal_y);
  if (branch == WaveBranch::P) {
    const double k = omega / m.cp();
    const cd pre = -kI * k * std::exp(-kI * k * xhat.dot(y)) / (4.0 * kPi * (m.lambda + 2.0 * m.mu));
    const Vec3 col = m.lambda * normal_y + 2.0 * m.mu * xn * xhat;  // times xhat_l
    return pre * (col * xhat.transpose()).cast<cd>();
  }
  const double k = omega / m.cs();
  const cd pre = -kI * k * std::exp(-kI * k * xhat.dot(y)) * m.mu / (4.0 * kPi * m.mu);
  const Mat3 xx = xhat * xhat.transpose();
  const Mat3 t = (Mat3::Identity() - xx) * xn + xhat * (normal_y - xhat * xn).transpose();
  return pre * t.cast<cd>();
}

cd s1_density_constant(const ElasticMedium& m) {
  return kI * std::sqrt(m.rho) / (12.0 * kPi) *
         (2.0 / std::pow(m.mu, 1.5) + 1.0 / std::pow(m.lambda + 2.0 * m.mu, 1.5));
}

double cubic_kernel_A1(const ElasticMedium& m) {
  const double cs3 = std::pow(m.cs(), 3), cp3 = std::pow(m.cp(), 3);
  return -(1.0 / (30.0 * kPi * m.mu * cs3) + 1.0 / (120.0 * kPi * (m.lambda + 2.0 * m.mu) * cp3));
}

double cubic_kernel_A2(const ElasticMedium& m) {
  const double cs3 = std::pow(m.cs(), 3), cp3 = std::pow(m.cp(), 3);
  return 1.0 / (60.0 * kPi * m.mu * cs3) - 1.0 / (60.0 * kPi * (m.lambda + 2.0 * m.mu) * cp3);
}

DerivativeKernels derivative_kernels(const ElasticMedium& m, const Vec3& x, const Vec3& y) {
  DerivativeKernels out;
  out.s1_density = Mat3c::Identity() * s1_density_constant(m);
  const Vec3 dv = x - y;
  const double r = dv.norm();
  if (r == 0.0) {  // both kernels vanish continuously at coincidence
    out.s0 = Mat3c::Zero();
    out.s1 = Mat3c::Zero();
    return out;
  }
  const double cs2 = m.cs() * m.cs(), cp2 = m.cp() * m.cp(), lp2m = m.lambda + 2.0 * m.mu;
  Mat3 s0 = Mat3::Identity() * (-3.0 * r / (32.0 * kPi * m.mu * cs2) - r / (32.0 * kPi * lp2m * cp2));
  s0 += dv * dv.transpose() / r * (1.0 / (32.0 * kPi * m.mu * cs2) - 1.0 / (32.0 * kPi * lp2m * cp2));
  out.s0 = s0.cast<cd>();
  Mat3 s1 = Mat3::Identity() * cubic_kernel_A1(m) * r * r + cubic_kernel_A2(m) * dv * dv.transpose();
  out.s1 = s1.cast<cd>();
  return out;
}

}  // namespace elastres
