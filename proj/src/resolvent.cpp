#include "elastres/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "elastres/errors.hpp"
#include "elastres/parallel.hpp"
#include "elastres/quadrature.hpp"

namespace elastres {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cd kI(0.0, 1.0);

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(8);
  os << x;
  return os.str();
}

Mat3 skew(const Vec3& b) {
  Mat3 s;
  s << 0.0, -b(2), b(1), b(2), 0.0, -b(0), -b(1), b(0), 0.0;
  return s;
}

// Nodes and weights of the ball quadrature of radius R around c.
struct BallNodes {
  std::vector<Vec3> x;
  std::vector<double> w;
};

BallNodes ball_nodes(const Vec3& c, double R, const BallQuadrature& q) {
  if (q.radial < 1 || q.polar < 1 || q.azimuthal < 1) config_error("ball quadrature orders must be positive");
  const GaussRule& gr = gauss_legendre(q.radial);
  const GaussRule& gt = gauss_legendre(q.polar);
  BallNodes b;
  for (std::size_t i = 0; i < gr.x.size(); ++i) {
    const double r = R * gr.x[i], wr = R * gr.w[i] * r * r;
    for (std::size_t j = 0; j < gt.x.size(); ++j) {
      const double ct = 2.0 * gt.x[j] - 1.0, st = std::sqrt(std::max(0.0, 1.0 - ct * ct)), wt = 2.0 * gt.w[j];
      for (int k = 0; k < q.azimuthal; ++k) {
        const double ph = 2.0 * kPi * (k + 0.5) / q.azimuthal;
        b.x.push_back(c + r * Vec3(st * std::cos(ph), st * std::sin(ph), ct));
        b.w.push_back(wr * wt * 2.0 * kPi / q.azimuthal);
      }
    }
  }
  return b;
}

// Nodes (unit normals) and weights on the sphere of radius R around c.
BallNodes sphere_nodes(const Vec3& c, double R, const BallQuadrature& q, std::vector<Vec3>* normals) {
  const GaussRule& gt = gauss_legendre(q.polar);
  BallNodes b;
  for (std::size_t j = 0; j < gt.x.size(); ++j) {
    const double ct = 2.0 * gt.x[j] - 1.0, st = std::sqrt(std::max(0.0, 1.0 - ct * ct)), wt = 2.0 * gt.w[j];
    for (int k = 0; k < q.azimuthal; ++k) {
      const double ph = 2.0 * kPi * (k + 0.5) / q.azimuthal;
      const Vec3 n(st * std::cos(ph), st * std::sin(ph), ct);
      b.x.push_back(c + R * n);
      b.w.push_back(R * R * wt * 2.0 * kPi / q.azimuthal);
      normals->push_back(n);
    }
  }
  return b;
}

// Ball quadrature covering the support of f, centred on the singular point y0
// when y0 lies inside the support.
BallNodes support_nodes(const ForcingSpec& f, const Vec3& y0, const BallQuadrature& q) {
  const double R = f.support_radius(), d = (y0 - f.center).norm();
  if (d > R * (1.0 + 1e-12)) return ball_nodes(f.center, R, q);
  return ball_nodes(y0, d + R, q);
}

void check_regime(double tau, double eps, const MicroOptions& opts) {
  if (!(tau > 0.0) || !std::isfinite(tau)) config_error("tau must be positive and finite");
  if (!(eps > 0.0) || !std::isfinite(eps)) config_error("resonator size eps must be positive and finite");
  if (tau > opts.regime_ratio * eps * eps)
    config_error("regime error: tau = " + fmt(tau) + " is not O(eps^2) for eps = " + fmt(eps) + " (tau/eps^2 > " +
                 fmt(opts.regime_ratio) + ")");
}

// Pairing <u, v>_Gamma = u^T W v.
cd pair_w(const BoundaryAssembler& as, const VecC& u, const VecC& v) {
  const VecC wv = as.mass() * v;
  return u.cwiseProduct(wv).sum();
}

VecC nodal_constant(int nv, int p) {
  VecC c = VecC::Zero(3 * nv);
  for (int v = 0; v < nv; ++v) c(3 * v + p) = 1.0;
  return c;
}

}  // namespace

const char* to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::ConstantVector: return "constant_vector";
    case ForcingKind::GaussianBump: return "gaussian_bump";
    case ForcingKind::RegularizedPointForce: return "regularized_point_force";
  }
  return "?";
}

ForcingKind parse_forcing_kind(const std::string& name) {
  if (name == "constant_vector") return ForcingKind::ConstantVector;
  if (name == "gaussian_bump") return ForcingKind::GaussianBump;
  if (name == "regularized_point_force") return ForcingKind::RegularizedPointForce;
  config_error("unknown forcing kind '" + name + "' (constant_vector, gaussian_bump, regularized_point_force)");
}

ForcingSpec ForcingSpec::constant_vector(const Vec3c& value, const Vec3& center, double radius) {
  ForcingSpec f;
  f.kind = ForcingKind::ConstantVector;
  f.amplitude = value;
  f.center = center;
  f.radius = radius;
  f.validate();
  return f;
}

ForcingSpec ForcingSpec::gaussian_bump(const Vec3& center, double width, const Vec3c& amplitude) {
  ForcingSpec f;
  f.kind = ForcingKind::GaussianBump;
  f.center = center;
  f.width = width;
  f.amplitude = amplitude;
  f.validate();
  return f;
}

ForcingSpec ForcingSpec::regularized_point_force(const Vec3& y0, const Vec3c& force, double radius) {
  ForcingSpec f;
  f.kind = ForcingKind::RegularizedPointForce;
  f.center = y0;
  f.amplitude = force;
  f.radius = radius;
  f.validate();
  return f;
}

void ForcingSpec::validate() const {
  if (!center.allFinite() || !amplitude.allFinite()) config_error("forcing: non-finite centre or amplitude");
  if (kind == ForcingKind::GaussianBump) {
    if (!(width > 0.0) || !std::isfinite(width)) config_error("forcing: gaussian width must be positive");
  } else if (!(radius > 0.0) || !std::isfinite(radius)) {
    config_error("forcing: support radius must be positive");
  }
}

double ForcingSpec::support_radius() const { return kind == ForcingKind::GaussianBump ? 6.0 * width : radius; }

double ForcingSpec::feature_length() const {
  switch (kind) {
    case ForcingKind::ConstantVector: return std::numeric_limits<double>::infinity();
    case ForcingKind::GaussianBump: return width;
    case ForcingKind::RegularizedPointForce: return radius;
  }
  return 0.0;
}

Vec3c ForcingSpec::value(const Vec3& x) const {
  const double r2 = (x - center).squaredNorm(), R = support_radius();
  if (r2 > R * R) return Vec3c::Zero();
  switch (kind) {
    case ForcingKind::ConstantVector: return amplitude;
    case ForcingKind::GaussianBump: return amplitude * std::exp(-r2 / (2.0 * width * width));
    case ForcingKind::RegularizedPointForce: {
      const double c = 315.0 / (64.0 * kPi * R * R * R), s = 1.0 - r2 / (R * R);
      return amplitude * (c * s * s * s);
    }
  }
  return Vec3c::Zero();
}

Mat3c ForcingSpec::gradient(const Vec3& x) const {
  const Vec3 d = x - center;
  const double r2 = d.squaredNorm(), R = support_radius();
  if (r2 > R * R || kind == ForcingKind::ConstantVector) return Mat3c::Zero();
  if (kind == ForcingKind::GaussianBump) {
    const double g = std::exp(-r2 / (2.0 * width * width));
    return amplitude * (-g / (width * width) * d).transpose().cast<cd>();
  }
  const double c = 315.0 / (64.0 * kPi * R * R * R), s = 1.0 - r2 / (R * R);
  return amplitude * (c * 3.0 * s * s * (-2.0 / (R * R)) * d).transpose().cast<cd>();
}

Vec3c ForcingSpec::integral() const {
  switch (kind) {
    case ForcingKind::ConstantVector: return amplitude * (4.0 / 3.0 * kPi * radius * radius * radius);
    case ForcingKind::GaussianBump: {
      const double R = support_radius(), t = R / width;
      const double mass = std::pow(2.0 * kPi, 1.5) * width * width * width *
                          (std::erf(t / std::sqrt(2.0)) - std::sqrt(2.0 / kPi) * t * std::exp(-0.5 * t * t));
      return amplitude * mass;
    }
    case ForcingKind::RegularizedPointForce: return amplitude;
  }
  return Vec3c::Zero();
}

void check_resolution(const ForcingSpec& f, double spacing) {
  if (!(spacing > 0.0)) config_error("grid spacing must be positive");
  if (f.feature_length() < 3.0 * spacing)
    config_error(std::string("forcing under-resolved: ") + to_string(f.kind) + " length scale " +
                 fmt(f.feature_length()) + " is below 3 grid spacings (" + fmt(3.0 * spacing) + ")");
}

VecC rigid_moments(const RigidMotionBasis& basis, const SurfaceMesh& mesh, const ForcingSpec& f) {
  f.validate();
  const double R = f.support_radius();
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (const auto& v : mesh.vertices) {
    const double d = (v - f.center).norm();
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  Vec3c F, T;
  if (point_inside(mesh, f.center) && dmin - mesh.h >= R) {
    F = f.integral();
    T = f.center.cast<cd>().cross(F);
  } else if (f.kind == ForcingKind::ConstantVector && dmax <= R) {
    F = f.amplitude * basis.moments.volume;
    T = basis.moments.first.cast<cd>().cross(f.amplitude);
  } else {
    config_error("rigid moments: the support of the forcing neither lies inside nor covers Omega; use the grid path");
  }
  VecC out(6);
  for (int j = 0; j < 6; ++j) out(j) = basis.e[j].a.cast<cd>().dot(F) + basis.e[j].b.cast<cd>().dot(T);
  return out;
}

VecC rigid_moments_affine(const RigidMotionBasis& basis, const Vec3c& c, const Mat3c& J) {
  const VolumeMoments& m = basis.moments;
  VecC out(6);
  for (int j = 0; j < 6; ++j) {
    const Vec3& a = basis.e[j].a;
    const Vec3& b = basis.e[j].b;
    const cd lin = a.cast<cd>().dot(c * m.volume + J * m.first.cast<cd>()) + b.cross(m.first).cast<cd>().dot(c);
    const cd quad = (skew(b).transpose().cast<cd>() * J * m.second.cast<cd>()).trace();
    out(j) = lin + quad;
  }
  return out;
}

VecC mode_moments_grid(const BoundaryAssembler& as, const ElasticMedium& medium1, const NeumannEigenpair& pair,
                       const InteriorGrid& grid, const Eigen::Matrix3Xcd& values) {
  if (values.cols() != static_cast<Eigen::Index>(grid.points.size()))
    config_error("mode moments: field values do not match the grid");
  VecC out(pair.multiplicity);
  for (int l = 0; l < pair.multiplicity; ++l) {
    const Eigen::Matrix3Xcd e = evaluate_mode(as, medium1, pair, l, grid.points);
    out(l) = grid.weight * (values.array() * e.array()).sum();
  }
  return out;
}

VecC mode_moments(const BoundaryAssembler& as, const ElasticMedium& medium1, const NeumannEigenpair& pair,
                  const ForcingSpec& f, double spacing) {
  f.validate();
  const double h = spacing > 0.0 ? spacing : as.mesh().diameter() / 16.0;
  check_resolution(f, h);
  const InteriorGrid grid = interior_grid(as.mesh(), h);
  Eigen::Matrix3Xcd vals(3, static_cast<Eigen::Index>(grid.points.size()));
  for (std::size_t p = 0; p < grid.points.size(); ++p) vals.col(p) = f.value(grid.points[p]);
  return mode_moments_grid(as, medium1, pair, grid, vals);
}

Vec3c newton_potential(const ElasticMedium& m, cd omega, const ForcingSpec& f, const Vec3& y0,
                       const BallQuadrature& q) {
  f.validate();
  const BallNodes b = support_nodes(f, y0, q);
  Vec3c out = Vec3c::Zero();
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    const Vec3c fv = f.value(b.x[i]);
    if (fv.isZero(0.0) || (b.x[i] - y0).norm() == 0.0) continue;
    out += b.w[i] * (green_tensor(m, y0, b.x[i], omega) * fv);
  }
  return out;
}

Mat3c newton_potential_gradient(const ElasticMedium& m, cd omega, const ForcingSpec& f, const Vec3& y0,
                                const BallQuadrature& q) {
  f.validate();
  Mat3c out = Mat3c::Zero();
  if (f.kind == ForcingKind::ConstantVector) {
    // The gradient of a constant on a ball is a surface layer: -int_{dB} G c n^T dS.
    const double d = (y0 - f.center).norm();
    if (std::abs(d - f.radius) <= 1e-6 * f.radius)
      config_error("newton potential gradient: y0 lies on the boundary of the constant forcing support");
    std::vector<Vec3> nrm;
    const BallNodes s = sphere_nodes(f.center, f.radius, q, &nrm);
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out -= s.w[i] * (green_tensor(m, y0, s.x[i], omega) * f.amplitude) * nrm[i].transpose().cast<cd>();
    return out;
  }
  const BallNodes b = support_nodes(f, y0, q);
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    if ((b.x[i] - y0).norm() == 0.0) continue;
    const Mat3c gf = f.gradient(b.x[i]);
    if (gf.isZero(0.0)) continue;
    out += b.w[i] * (green_tensor(m, y0, b.x[i], omega) * gf);
  }
  return out;
}

std::array<Mat3c, 3> green_gradient_y(const ElasticMedium& m, const Vec3& x, const Vec3& y, cd z) {
  const Vec3 diff = y - x;
  const double r = diff.norm();
  if (!(r > 0.0)) config_error("green gradient evaluated at coincident points");
  const Vec3 d = diff / r;
  const RadialKernel k = radial_green(m, r, z);
  const Mat3 dd = d * d.transpose();
  std::array<Mat3c, 3> out;
  for (int c = 0; c < 3; ++c) {
    const Vec3 dk = (Vec3::Unit(c) - d * d(c)) / r;  // d/dy_c of d
    const Mat3 ddk = dk * d.transpose() + d * dk.transpose();
    out[c] = (k.da * d(c)) * Mat3c::Identity() + (k.db * d(c)) * dd.cast<cd>() + k.b * ddk.cast<cd>();
  }
  return out;
}

Amplitude amplitude_wavelength(const EffectivePencil& pencil, double tau, cd w, const VecC& rhs) {
  if (pencil.at_zero) config_error("amplitude_wavelength requires a pencil anchored at a non-zero eigenvalue");
  if (rhs.size() != pencil.size()) config_error("amplitude_wavelength: right-hand side has the wrong size");
  Amplitude a;
  a.regime = BranchRegime::Wavelength;
  a.tau = tau;
  a.scaled_freq = w;
  a.rhs = rhs;
  a.full_solve = pencil_solve(pencil, tau, w, rhs);
  a.coefficients = a.full_solve;
  const double nrm = pencil_eval(pencil, tau, w).operatorNorm();
  a.remainder_scale = (tau + std::abs(w - pencil.z0)) / nrm * rhs.norm();
  return a;
}

Amplitude amplitude_generic(const SpectralLadder& ladder, double kappa, double tau, cd w, const VecC& moments) {
  Amplitude a;
  a.regime = BranchRegime::Generic;
  a.tau = tau;
  a.scaled_freq = w;
  a.rhs = -ladder.rho1 * moments;
  const PoleDecomposition d = pole_decomposition_generic(ladder, kappa, tau, w, a.rhs);
  a.coefficients = d.pole_sum;
  a.full_solve = d.full_solve;
  a.poles = d.poles;
  a.remainder_scale = d.remainder_scale;
  return a;
}

Amplitude amplitude_exceptional(const SpectralLadder& ladder, double kappa, double kappa2, int sign, double tau,
                                cd w, const VecC& moments) {
  Amplitude a;
  a.regime = BranchRegime::Exceptional;
  a.tau = tau;
  a.scaled_freq = w;
  a.rhs = -ladder.rho1 * moments;
  const PoleDecomposition d = pole_decomposition_exceptional(ladder, kappa, kappa2, sign, tau, w, a.rhs);
  a.coefficients = d.pole_sum;
  a.full_solve = d.full_solve;
  a.poles = d.poles;
  a.remainder_scale = d.remainder_scale;
  return a;
}

const char* to_string(MicroClass c) {
  switch (c) {
    case MicroClass::Monopole: return "monopole";
    case MicroClass::Dipole: return "dipole";
    case MicroClass::OutOfScope: return "out-of-scope";
  }
  return "?";
}

MicroClass classify_micro(const SpectralLadder& ladder, double kappa) {
  const LadderLevel* lev = ladder.find(kappa, 1e-6);
  if (!lev) config_error("classify: kappa = " + fmt(kappa) + " is not an eigenvalue of M1(0)");
  if (!lev->admissible) return MicroClass::Monopole;
  return lev->kernel_inclusion ? MicroClass::Dipole : MicroClass::OutOfScope;
}

std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh) {
  std::vector<Vec3> n(mesh.vertices.size(), Vec3::Zero());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangles[t]) n[v] += mesh.areas[t] * mesh.normals[t];
  for (auto& x : n) x.normalize();
  return n;
}

MicroField monopole_field(const BoundaryAssembler& as, const ElasticMedium& medium0, const RigidMotionBasis& basis,
                          const SpectralLadder& ladder, double kappa, double tau, double eps, double omega,
                          const ForcingSpec& f, const Vec3& y0, const std::vector<Vec3>& pts,
                          const MicroOptions& opts) {
  check_regime(tau, eps, opts);
  if (classify_micro(ladder, kappa) != MicroClass::Monopole)
    config_error("regime error: the monopole field requires kappa = " + fmt(kappa) +
                 " outside the admissible set");
  MicroField out;
  out.kind = MicroClass::Monopole;
  out.regime = BranchRegime::Generic;
  out.scaled_freq = eps * omega / std::sqrt(tau);
  const Vec3c c = eps * eps * (f.value(y0) + omega * omega * newton_potential(medium0, omega, f, y0, opts.quad));
  const VecC moments = rigid_moments_affine(basis, c, Mat3c::Zero());
  out.amplitude = amplitude_generic(ladder, kappa, tau, out.scaled_freq, moments);
  out.a = out.amplitude.rhs;
  const SurfaceMesh& mesh = as.mesh();
  const MatC E = basis.traces(mesh).cast<cd>();
  const VecC gb = E * out.amplitude.coefficients;
  MatC S0;
  as.assemble(medium0, 0.0, &S0, nullptr);
  const Eigen::PartialPivLU<MatC> lu(S0);
  for (int p = 0; p < 3; ++p) out.monopole(p) = pair_w(as, gb, lu.solve(nodal_constant(mesh.num_vertices(), p)));
  out.field.resize(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    out.field.col(i) = eps * (green_tensor(medium0, pts[i], y0, omega) * out.monopole);
  return out;
}

MicroField dipole_field(const BoundaryAssembler& as, const ElasticMedium& medium0, const RigidMotionBasis& basis,
                        const SpectralLadder& ladder, double kappa, double kappa2, int sign, double tau, double eps,
                        double omega, const ForcingSpec& f, const Vec3& y0, const std::vector<Vec3>& pts,
                        const MicroOptions& opts) {
  check_regime(tau, eps, opts);
  if (classify_micro(ladder, kappa) != MicroClass::Dipole)
    config_error("regime error: the dipole field requires kappa = " + fmt(kappa) +
                 " in the admissible set with its eigenspace inside Ker M2");
  if (sign != 1 && sign != -1) config_error("dipole field: sign must be +1 or -1");
  const double rho = ladder.rho1;
  MicroField out;
  out.kind = MicroClass::Dipole;
  out.regime = BranchRegime::Exceptional;
  out.scaled_freq = (eps * omega - sign * std::sqrt(tau) * std::sqrt(-kappa / rho)) / std::pow(tau, 1.5);
  const double e3 = eps * eps * eps;
  const Mat3c GR = newton_potential_gradient(medium0, omega, f, y0, opts.quad);
  const VecC pi1 = rigid_moments_affine(basis, Vec3c::Zero(), e3 * (f.gradient(y0) + omega * omega * GR));

  const SurfaceMesh& mesh = as.mesh();
  const int nv = mesh.num_vertices();
  const MatC E = basis.traces(mesh).cast<cd>();
  MatC S0;
  as.assemble(medium0, 0.0, &S0, nullptr);
  const Eigen::PartialPivLU<MatC> lu(S0);
  const MatC psi = lu.solve(E);
  // Boundary term of the rigid-free part of the linear field x -> GR x.
  VecC U(3 * nv);
  for (int v = 0; v < nv; ++v) U.segment<3>(3 * v) = e3 * (GR * mesh.vertices[v].cast<cd>());
  U -= E * rigid_moments_affine(basis, Vec3c::Zero(), e3 * GR);
  VecC moments = pi1;
  for (int j = 0; j < 6; ++j) moments(j) -= pair_w(as, U, psi.col(j)) / rho;

  out.amplitude = amplitude_exceptional(ladder, kappa, kappa2, sign, tau, out.scaled_freq, moments);
  out.a = out.amplitude.rhs;
  const VecC phi = lu.solve(E * out.amplitude.coefficients);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) {
      VecC X = VecC::Zero(3 * nv);
      for (int v = 0; v < nv; ++v) X(3 * v + j) = mesh.vertices[v](k);
      out.dipole(k, j) = pair_w(as, X, phi);
    }
  out.field.resize(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto dG = green_gradient_y(medium0, pts[i], y0, omega);
    Vec3c u = Vec3c::Zero();
    for (int k = 0; k < 3; ++k) u += dG[k] * out.dipole.row(k).transpose();
    out.field.col(i) = eps * u;
  }
  return out;
}

Eigen::Matrix3Xcd far_field_pattern(const BoundaryAssembler& as, const ElasticMedium& medium0, const DtNOperator& N,
                                    WaveBranch branch, const VecC& g, const std::vector<Vec3>& dirs) {
  const SurfaceMesh& mesh = as.mesh();
  if (g.size() != mesh.dofs()) config_error("far-field pattern: trace has the wrong size");
  const double omega = N.z().real();
  if (std::abs(N.z().imag()) > 1e-12 * std::max(1.0, std::abs(N.z())))
    config_error("far-field pattern requires a real frequency");
  const VecC t = N.matrix() * g;
  const TriangleRule& rule = radon7();
  Eigen::Matrix3Xcd out(3, static_cast<Eigen::Index>(dirs.size()));
  parallel_for(dirs.size(), [&](std::size_t d) {
    const Vec3 xh = dirs[d].normalized();
    Vec3c acc = Vec3c::Zero();
    for (int tr = 0; tr < mesh.num_triangles(); ++tr) {
      const auto& T = mesh.triangles[tr];
      const Vec3& n = mesh.normals[tr];
      for (std::size_t q = 0; q < rule.w.size(); ++q) {
        const Vec3& l = rule.bary[q];
        Vec3 y = Vec3::Zero();
        Vec3c gy = Vec3c::Zero(), ty = Vec3c::Zero();
        for (int c = 0; c < 3; ++c) {
          y += l(c) * mesh.vertices[T[c]];
          gy += l(c) * g.segment<3>(3 * T[c]);
          ty += l(c) * t.segment<3>(3 * T[c]);
        }
        const double w = rule.w[q] * mesh.areas[tr];
        acc += w * (far_field_traction(medium0, branch, xh, y, n, omega).transpose() * gy -
                    far_field_kernel(medium0, branch, xh, y, omega) * ty);
      }
    }
    out.col(d) = acc;
  });
  return out;
}

namespace {

// Source-side data of R^inf: quadrature nodes with the incident phase factor.
struct IncidentNodes {
  std::vector<Vec3> yhat;
  std::vector<std::array<cd, 2>> phase;  // per branch: w exp(i z0 |y-y0| / (eps c)) / |y-y0|
  std::vector<Vec3c> f;
};

IncidentNodes incident_nodes(const ElasticMedium& m, cd z0, double eps, const ForcingSpec& f, const Vec3& y0,
                             const BallQuadrature& q) {
  f.validate();
  if (!(eps > 0.0)) config_error("resonator size eps must be positive");
  const double R = f.support_radius();
  if ((y0 - f.center).norm() <= R * (1.0 + 1e-9))
    config_error("point scatterer: the resonator position lies inside the forcing support");
  const BallNodes b = ball_nodes(f.center, R, q);
  const double c[2] = {m.cp(), m.cs()};
  IncidentNodes out;
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    const Vec3c fv = f.value(b.x[i]);
    if (fv.isZero(0.0)) continue;
    const Vec3 d = b.x[i] - y0;
    const double r = d.norm();
    out.yhat.push_back(d / r);
    out.phase.push_back({b.w[i] * std::exp(kI * z0 * r / (eps * c[0])) / r,
                         b.w[i] * std::exp(kI * z0 * r / (eps * c[1])) / r});
    out.f.push_back(fv);
  }
  return out;
}

}  // namespace

Eigen::Matrix3Xcd incident_field(const ElasticMedium& medium0, cd z0, double eps, const ForcingSpec& f,
                                 const Vec3& y0, const std::vector<Vec3>& pts, const BallQuadrature& q) {
  if (std::abs(z0.imag()) > 0.0) config_error("incident field requires a real anchor frequency");
  const IncidentNodes nd = incident_nodes(medium0, z0, eps, f, y0, q);
  Eigen::Matrix3Xcd out(3, static_cast<Eigen::Index>(pts.size()));
  parallel_for(pts.size(), [&](std::size_t p) {
    Vec3c acc = Vec3c::Zero();
    for (std::size_t i = 0; i < nd.f.size(); ++i) {
      acc += nd.phase[i][0] * (far_field_kernel(medium0, WaveBranch::P, nd.yhat[i], pts[p], z0.real()) * nd.f[i]);
      acc += nd.phase[i][1] * (far_field_kernel(medium0, WaveBranch::S, nd.yhat[i], pts[p], z0.real()) * nd.f[i]);
    }
    out.col(p) = acc;
  });
  return out;
}

Eigen::Matrix3Xcd incident_traction(const ElasticMedium& medium0, cd z0, double eps, const ForcingSpec& f,
                                    const Vec3& y0, const std::vector<Vec3>& pts, const std::vector<Vec3>& normals,
                                    const BallQuadrature& q) {
  if (normals.size() != pts.size()) config_error("incident traction: one normal per point is required");
  if (std::abs(z0.imag()) > 0.0) config_error("incident traction requires a real anchor frequency");
  const IncidentNodes nd = incident_nodes(medium0, z0, eps, f, y0, q);
  Eigen::Matrix3Xcd out(3, static_cast<Eigen::Index>(pts.size()));
  parallel_for(pts.size(), [&](std::size_t p) {
    Vec3c acc = Vec3c::Zero();
    for (std::size_t i = 0; i < nd.f.size(); ++i) {
      acc += nd.phase[i][0] *
             (far_field_traction(medium0, WaveBranch::P, nd.yhat[i], pts[p], normals[p], z0.real()) * nd.f[i]);
      acc += nd.phase[i][1] *
             (far_field_traction(medium0, WaveBranch::S, nd.yhat[i], pts[p], normals[p], z0.real()) * nd.f[i]);
    }
    out.col(p) = acc;
  });
  return out;
}

MicroField point_scatterer_field(const BoundaryAssembler& as, const ElasticMedium& medium0,
                                 const ElasticMedium& medium1, const NeumannEigenpair& pair, const MatC& m1_z0,
                                 double tau, double eps, double omega, const ForcingSpec& f, const Vec3& y0,
                                 const std::vector<Vec3>& pts, const MicroOptions& opts) {
  check_regime(tau, eps, opts);
  if (pair.rigid || pair.z0 == 0.0) config_error("regime error: the point scatterer requires a non-zero eigenvalue");
  const int n = pair.multiplicity;
  if (m1_z0.rows() != n || m1_z0.cols() != n) config_error("point scatterer: M1(z0) does not match the multiplicity");
  const SurfaceMesh& mesh = as.mesh();
  const int nv = mesh.num_vertices();
  const double z0 = pair.z0, rho1 = medium1.rho;
  const cd w = eps * omega;
  MicroField out;
  out.kind = MicroClass::Monopole;
  out.regime = BranchRegime::Wavelength;
  out.scaled_freq = w;

  // Incident data on the boundary and on an interior grid.
  const double h = opts.grid_spacing > 0.0 ? opts.grid_spacing : mesh.diameter() / 16.0;
  const InteriorGrid grid = interior_grid(mesh, h);
  const Eigen::Matrix3Xcd Rg = incident_field(medium0, z0, eps, f, y0, grid.points, opts.quad);
  const Eigen::Matrix3Xcd Rb = incident_field(medium0, z0, eps, f, y0, mesh.vertices, opts.quad);
  const Eigen::Matrix3Xcd Tb = incident_traction(medium0, z0, eps, f, y0, mesh.vertices, vertex_normals(mesh), opts.quad);
  const VecC piR = mode_moments_grid(as, medium1, pair, grid, Rg);
  Eigen::Matrix3Xcd fy0(3, static_cast<Eigen::Index>(grid.points.size()));
  fy0.colwise() = f.value(y0);
  const VecC piF = mode_moments_grid(as, medium1, pair, grid, fy0);

  const MatC E = pair.traces.cast<cd>();
  VecC gR(3 * nv), tR(3 * nv);
  for (int v = 0; v < nv; ++v) {
    gR.segment<3>(3 * v) = Rb.col(v);
    tR.segment<3>(3 * v) = Tb.col(v);
  }
  const VecC gFree = gR - E * piR;  // gamma (I - P(z0)) R^inf f
  const DtNOperator N(as, medium0, z0);
  const VecC bdry = N.matrix() * gFree + tR;
  VecC rhs(n);
  for (int j = 0; j < n; ++j)
    rhs(j) = -rho1 * eps * eps * piF(j) - 2.0 * z0 * (w - z0) * piR(j) - tau * pair_w(as, bdry, E.col(j));
  out.a = rhs;
  out.amplitude = amplitude_wavelength(wavelength_pencil(m1_z0, z0, rho1), tau, w, rhs);
  const VecC g = -gFree + E * out.amplitude.coefficients;

  std::vector<Vec3> dirs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 d = pts[i] - y0;
    if (!(d.norm() > 0.0)) config_error("point scatterer: observation point coincides with y0");
    dirs[i] = d / d.norm();
  }
  out.pattern_p = far_field_pattern(as, medium0, N, WaveBranch::P, g, dirs);
  out.pattern_s = far_field_pattern(as, medium0, N, WaveBranch::S, g, dirs);
  out.field = Eigen::Matrix3Xcd::Zero(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = (pts[i] - y0).norm();
    const double xy = dirs[i].dot(y0);
    if (opts.p_channel)
      out.field.col(i) += std::exp(kI * omega * r / medium0.cp()) / r * std::exp(kI * z0 * xy / medium0.cp()) *
                          out.pattern_p.col(i);
    if (opts.s_channel)
      out.field.col(i) += std::exp(kI * omega * r / medium0.cs()) / r * std::exp(kI * z0 * xy / medium0.cs()) *
                          out.pattern_s.col(i);
  }
  out.field *= eps;
  return out;
}

}  // namespace elastres
