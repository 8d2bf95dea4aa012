#include "elastres/boundary_ops.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "elastres/errors.hpp"
#include "elastres/parallel.hpp"
#include "elastres/quadrature.hpp"

namespace elastres {

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::S: return "S";
    case OperatorKind::K: return "K";
    case OperatorKind::Kstar: return "Kstar";
    case OperatorKind::DtN: return "DtN";
  }
  return "?";
}

const char* to_string(DerivativeSource s) {
  switch (s) {
    case DerivativeSource::Analytic: return "analytic";
    case DerivativeSource::FiniteDifference: return "finite-difference";
    case DerivativeSource::Both: return "both";
  }
  return "?";
}

namespace {

// Visits quadrature points of every triangle for the target point x. `self` is
// the vertex index of x when x is a mesh vertex (collocation), else -1.
// The callback receives (triangle, y, local barycentrics, weight, singular
// local index or -1).
template <class F>
void integrate_surface(const SurfaceMesh& mesh, const QuadratureOptions& o, const Vec3& x, int self, F&& f) {
  const TriangleRule& reg = radon7();
  const TriangleRule& duf = duffy_rule(o.duffy_order);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3* p[3] = {&mesh.vertices[tri[0]], &mesh.vertices[tri[1]], &mesh.vertices[tri[2]]};
    const double area = mesh.areas[t];
    int s = -1;
    if (self >= 0)
      for (int k = 0; k < 3; ++k)
        if (tri[k] == self) s = k;
    if (s >= 0) {
      const int a1 = (s + 1) % 3, a2 = (s + 2) % 3;
      for (std::size_t q = 0; q < duf.w.size(); ++q) {
        Eigen::Vector3d lam;
        lam(s) = duf.bary[q](0);
        lam(a1) = duf.bary[q](1);
        lam(a2) = duf.bary[q](2);
        const Vec3 y = lam(0) * *p[0] + lam(1) * *p[1] + lam(2) * *p[2];
        f(t, y, lam, duf.w[q] * area, s);
      }
      continue;
    }
    // Adaptive uniform subdivision in barycentric space.
    struct Sub {
      Eigen::Matrix3d B;  // columns: barycentric corners
      int depth;
    };
    Sub stack[64];
    int top = 0;
    stack[top++] = {Eigen::Matrix3d::Identity(), 0};
    while (top > 0) {
      const Sub sub = stack[--top];
      Vec3 c[3];
      for (int k = 0; k < 3; ++k) c[k] = sub.B(0, k) * *p[0] + sub.B(1, k) * *p[1] + sub.B(2, k) * *p[2];
      const double size = std::max({(c[0] - c[1]).norm(), (c[1] - c[2]).norm(), (c[2] - c[0]).norm()});
      const double dist = (x - (c[0] + c[1] + c[2]) / 3.0).norm();
      if (dist >= o.near_ratio * size || sub.depth >= o.max_depth || top + 4 > 64) {
        const double sub_area = area * std::pow(0.25, sub.depth);
        for (std::size_t q = 0; q < reg.w.size(); ++q) {
          const Eigen::Vector3d lam = sub.B * reg.bary[q];
          const Vec3 y = lam(0) * *p[0] + lam(1) * *p[1] + lam(2) * *p[2];
          f(t, y, lam, reg.w[q] * sub_area, -1);
        }
        continue;
      }
      const Eigen::Vector3d m01 = 0.5 * (sub.B.col(0) + sub.B.col(1));
      const Eigen::Vector3d m12 = 0.5 * (sub.B.col(1) + sub.B.col(2));
      const Eigen::Vector3d m20 = 0.5 * (sub.B.col(2) + sub.B.col(0));
      Eigen::Matrix3d b;
      b << sub.B.col(0), m01, m20;
      stack[top++] = {b, sub.depth + 1};
      b << m01, sub.B.col(1), m12;
      stack[top++] = {b, sub.depth + 1};
      b << m20, m12, sub.B.col(2);
      stack[top++] = {b, sub.depth + 1};
      b << m01, m12, m20;
      stack[top++] = {b, sub.depth + 1};
    }
  }
}

enum class DiagMode {
  Regular,       // bounded kernel: integrate every basis function directly
  StaticTrick,   // static kernel: diagonal from the cached rigid identity
  DynamicTrick,  // static diagonal plus the regular (K(z) - K(0)) remainder
  RowSum,        // static kernel: diagonal from this matrix's own row sums
};

template <class KernelFn>
void assemble_impl(const SurfaceMesh& mesh, const QuadratureOptions& o, const ElasticMedium& m, KernelFn kernel,
                   DiagMode mode, const std::vector<Mat3>* sdiag, MatC* S, MatC* K) {
  const int n = mesh.num_vertices();
  if (S) S->setZero(3 * n, 3 * n);
  if (K) K->setZero(3 * n, 3 * n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
    const int i = static_cast<int>(iu);
    const Vec3 x = mesh.vertices[i];
    std::vector<Mat3c> srow(S ? n : 0, Mat3c::Zero()), krow(K ? n : 0, Mat3c::Zero());
    Mat3c kdiag_extra = Mat3c::Zero();
    integrate_surface(mesh, o, x, i, [&](int t, const Vec3& y, const Eigen::Vector3d& lam, double w, int s) {
      const Vec3 dv = y - x;
      const double r = dv.norm();
      const Vec3 d = dv / r;
      const RadialKernel rk = kernel(r);
      const auto& tri = mesh.triangles[t];
      if (S) {
        const Mat3c g = green_from_radial(rk, d);
        for (int a = 0; a < 3; ++a) srow[tri[a]] += (w * lam(a)) * g;
      }
      if (K) {
        const Vec3& nrm = mesh.normals[t];
        const Mat3c tt = traction_from_radial(m, rk, d, r, nrm).transpose();
        for (int a = 0; a < 3; ++a) {
          if (a == s && mode != DiagMode::Regular) {
            if (mode == DiagMode::DynamicTrick) {
              const RadialKernel r0 = radial_green_taylor(m, r, 0);
              kdiag_extra += (w * lam(a)) * (tt - traction_from_radial(m, r0, d, r, nrm).transpose());
            }
            continue;
          }
          krow[tri[a]] += (w * lam(a)) * tt;
        }
      }
    });
    if (S)
      for (int j = 0; j < n; ++j) S->block<3, 3>(3 * i, 3 * j) = srow[j];
    if (K) {
      if (mode == DiagMode::RowSum) {
        Mat3c sum = Mat3c::Zero();
        for (int j = 0; j < n; ++j)
          if (j != i) sum += krow[j];
        krow[i] = -0.5 * Mat3c::Identity() - sum;
      } else if (mode == DiagMode::StaticTrick) {
        krow[i] = (*sdiag)[i].cast<cd>();
      } else if (mode == DiagMode::DynamicTrick) {
        krow[i] = (*sdiag)[i].cast<cd>() + kdiag_extra;
      }
      for (int j = 0; j < n; ++j) K->block<3, 3>(3 * i, 3 * j) = krow[j];
    }
  });
}

template <class KernelFn>
MatC potential_impl(const SurfaceMesh& mesh, const QuadratureOptions& o, const ElasticMedium& m, KernelFn kernel,
                    const std::vector<Vec3>& pts, const MatC& density, bool double_layer) {
  if (density.rows() != mesh.dofs()) config_error("layer potential: density size does not match the mesh");
  QuadratureOptions oo = o;
  oo.max_depth = std::max(o.max_depth, 5);
  const Eigen::Index nc = density.cols();
  MatC out = MatC::Zero(3 * static_cast<Eigen::Index>(pts.size()), nc);
  parallel_for(pts.size(), [&](std::size_t p) {
    const Vec3 x = pts[p];
    Eigen::Matrix<cd, 3, Eigen::Dynamic> acc = Eigen::Matrix<cd, 3, Eigen::Dynamic>::Zero(3, nc);
    integrate_surface(mesh, oo, x, -1, [&](int t, const Vec3& y, const Eigen::Vector3d& lam, double w, int) {
      const Vec3 dv = y - x;
      const double r = dv.norm();
      if (r == 0.0) numerical_error("layer potential evaluated on the boundary");
      const Vec3 d = dv / r;
      const RadialKernel rk = kernel(r);
      const auto& tri = mesh.triangles[t];
      const Eigen::Matrix<cd, 3, Eigen::Dynamic> phi = lam(0) * density.middleRows<3>(3 * tri[0]) +
                                                       lam(1) * density.middleRows<3>(3 * tri[1]) +
                                                       lam(2) * density.middleRows<3>(3 * tri[2]);
      if (double_layer)
        acc += w * (traction_from_radial(m, rk, d, r, mesh.normals[t]).transpose() * phi);
      else
        acc += w * (green_from_radial(rk, d) * phi);
    });
    out.middleRows<3>(3 * static_cast<Eigen::Index>(p)) = acc;
  });
  return out;
}

Eigen::Matrix3Xcd to_fields(const MatC& v) {
  Eigen::Matrix3Xcd out(3, v.rows() / 3);
  for (Eigen::Index p = 0; p < out.cols(); ++p) out.col(p) = v.block<3, 1>(3 * p, 0);
  return out;
}

}  // namespace

BoundaryAssembler::BoundaryAssembler(SurfaceMesh mesh, QuadratureOptions opts)
    : mesh_(std::move(mesh)), opts_(opts) {
  if (mesh_.areas.size() != mesh_.triangles.size()) mesh_.finalize();
  mass_ = vector_mass_matrix(mesh_);
  weights_ = vertex_weights(mesh_);
}

const std::vector<Mat3>& BoundaryAssembler::static_diag(const ElasticMedium& m) const {
  const std::array<double, 3> key{m.lambda, m.mu, m.rho};
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = diag_cache_.find(key);
    if (it != diag_cache_.end()) return it->second;
  }
  MatC K;
  assemble_impl(mesh_, opts_, m, [&](double r) { return radial_green_taylor(m, r, 0); }, DiagMode::RowSum, nullptr,
                nullptr, &K);
  std::vector<Mat3> diag(mesh_.num_vertices());
  for (int i = 0; i < mesh_.num_vertices(); ++i) diag[i] = K.block<3, 3>(3 * i, 3 * i).real();
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return diag_cache_.emplace(key, std::move(diag)).first->second;
}

bool BoundaryAssembler::interpolating(const ElasticMedium& m, cd z) const {
  return interp_ && interp_->medium == std::array<double, 3>{m.lambda, m.mu, m.rho} &&
         std::abs(z - interp_->center) <= interp_->radius;
}

double BoundaryAssembler::enable_interpolation(const ElasticMedium& m, cd center, double radius, int nodes,
                                               double max_error) {
  m.validate();
  if (!(radius > 0) || nodes < 4) config_error("interpolation needs a positive radius and at least 4 nodes");
  interp_.reset();
  const double R = 1.25 * radius;
  const Eigen::Index n = dofs();
  auto ip = std::make_shared<Interpolant>();
  ip->medium = {m.lambda, m.mu, m.rho};
  ip->center = center;
  ip->radius = radius;
  ip->coeffs.assign(nodes, MatC::Zero(n, n));
  for (int j = 0; j < nodes; ++j) {
    const cd w = std::polar(1.0, 2.0 * M_PI * j / nodes);
    MatC K;
    assemble(m, center + R * w, nullptr, &K);
    // c_k = (1/N) sum_j K(c + R w_j) w_j^{-k} / R^k
    cd f = 1.0;
    for (int k = 0; k < nodes; ++k) {
      ip->coeffs[k] += (f / double(nodes)) * K;
      f *= std::conj(w) / R;
    }
  }
  const cd test = center + 0.5 * radius * std::polar(1.0, 0.3);
  MatC direct;
  assemble(m, test, nullptr, &direct);
  interp_ = ip;
  MatC approx;
  assemble(m, test, nullptr, &approx);
  const double err = (approx - direct).norm() / direct.norm();
  if (!(err <= max_error)) {
    interp_.reset();
    numerical_error("K(z) interpolant error " + std::to_string(err) + " exceeds " + std::to_string(max_error) +
                    "; reduce the radius or add nodes");
  }
  return err;
}

void BoundaryAssembler::assemble(const ElasticMedium& m, cd z, MatC* S, MatC* K) const {
  m.validate();
  if (K && !S && interpolating(m, z)) {
    const auto& c = interp_->coeffs;
    const cd h = z - interp_->center;
    *K = c.back();
    for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) {
      *K *= h;
      *K += c[k];
    }
    return;
  }
  const std::vector<Mat3>* sd = K ? &static_diag(m) : nullptr;
  if (z == cd(0.0)) {
    assemble_impl(mesh_, opts_, m, [&](double r) { return radial_green_taylor(m, r, 0); }, DiagMode::StaticTrick, sd,
                  S, K);
  } else {
    assemble_impl(mesh_, opts_, m, [&](double r) { return radial_green(m, r, z); }, DiagMode::DynamicTrick, sd, S, K);
  }
}

void BoundaryAssembler::assemble_taylor(const ElasticMedium& m, int order, Eigen::MatrixXd* S,
                                        Eigen::MatrixXd* K) const {
  m.validate();
  if (order < 0) config_error("Taylor order must be non-negative");
  MatC Sc, Kc;
  const DiagMode mode = order == 0 ? DiagMode::StaticTrick : DiagMode::Regular;
  const std::vector<Mat3>* sd = (K && order == 0) ? &static_diag(m) : nullptr;
  assemble_impl(mesh_, opts_, m, [&](double r) { return radial_green_taylor(m, r, order); }, mode, sd,
                S ? &Sc : nullptr, K ? &Kc : nullptr);
  if (S) *S = Sc.real();
  if (K) *K = Kc.real();
}

MatC BoundaryAssembler::adjoint(const MatC& K) const {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mass_);
  if (ldlt.info() != Eigen::Success) numerical_error("mass matrix factorization failed");
  const MatC ktw = K.transpose() * mass_;
  const Eigen::MatrixXd re = ldlt.solve(Eigen::MatrixXd(ktw.real()));
  const Eigen::MatrixXd im = ldlt.solve(Eigen::MatrixXd(ktw.imag()));
  MatC out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

Eigen::Matrix3Xcd BoundaryAssembler::single_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts,
                                                            const VecC& density) const {
  return to_fields(potential_impl(mesh_, opts_, m, [&](double r) { return radial_green(m, r, z); }, pts, MatC(density), false));
}

MatC BoundaryAssembler::single_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts,
                                              const MatC& densities) const {
  return potential_impl(mesh_, opts_, m, [&](double r) { return radial_green(m, r, z); }, pts, densities, false);
}

Eigen::Matrix3Xcd BoundaryAssembler::double_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts,
                                                            const VecC& density) const {
  return to_fields(potential_impl(mesh_, opts_, m, [&](double r) { return radial_green(m, r, z); }, pts, MatC(density), true));
}

MatC BoundaryAssembler::double_layer_potential(const ElasticMedium& m, cd z, const std::vector<Vec3>& pts,
                                              const MatC& densities) const {
  return potential_impl(mesh_, opts_, m, [&](double r) { return radial_green(m, r, z); }, pts, densities, true);
}

BoundaryOperatorMatrix assemble(OperatorKind kind, const ElasticMedium& m, const SurfaceMesh& mesh, cd z) {
  BoundaryAssembler as(mesh);
  BoundaryOperatorMatrix op;
  op.kind = kind;
  op.z = z;
  switch (kind) {
    case OperatorKind::S: as.assemble(m, z, &op.mat, nullptr); break;
    case OperatorKind::K: as.assemble(m, z, nullptr, &op.mat); break;
    case OperatorKind::Kstar: {
      MatC K;
      as.assemble(m, z, nullptr, &K);
      op.mat = as.adjoint(K);
      break;
    }
    case OperatorKind::DtN: op.mat = DtNOperator(as, m, z).matrix(); break;
  }
  return op;
}

DtNOperator::DtNOperator(const BoundaryAssembler& as, const ElasticMedium& m, cd z, double rcond_min) : z_(z) {
  as.assemble(m, z, &S_, &K_);
  lu_.compute(S_);
  rcond_ = lu_.rcond();
  if (!(rcond_ > rcond_min))
    numerical_error("DtN near-breakdown at z = (" + std::to_string(z.real()) + "," + std::to_string(z.imag()) +
                    "): single layer reciprocal condition " + std::to_string(rcond_) +
                    "; try a small complex shift of z or a refined mesh");
  MatC jump = K_;
  jump.diagonal().array() -= 0.5;
  n_ = lu_.solve(jump);
}

BoundaryOperatorMatrix dtn(const ElasticMedium& medium0, const SurfaceMesh& mesh, cd z) {
  BoundaryAssembler as(mesh);
  BoundaryOperatorMatrix op;
  op.kind = OperatorKind::DtN;
  op.phase = 0;
  op.z = z;
  op.mat = DtNOperator(as, medium0, z).matrix();
  return op;
}

DtNDerivatives dtn_derivatives(const BoundaryAssembler& as, const ElasticMedium& medium0,
                               const ElasticMedium& medium1, double fd_step, const DtNDerivativeOptions& opts) {
  medium0.validate();
  medium1.validate();
  const SurfaceMesh& mesh = as.mesh();
  const int n = as.dofs();
  if (fd_step <= 0.0) fd_step = 1e-3 * medium0.cs() / mesh.diameter();

  // Taylor coefficients: S(z) = sum (iz)^m S_m, K(z) = sum (iz)^m K_m.
  std::array<Eigen::MatrixXd, 4> Sm, Km;
  as.assemble_taylor(medium0, 0, &Sm[0], &Km[0]);
  Km[0].diagonal().array() -= 0.5;  // -I/2 + K_0
  // S_1 has the rank-3 form G_1 * (integral of phi) with G_1 = c I constant.
  const double g1 = s1_density_constant(medium0).imag();
  Sm[1].setZero(n, n);
  for (int i = 0; i < mesh.num_vertices(); ++i)
    for (int j = 0; j < mesh.num_vertices(); ++j)
      Sm[1].block<3, 3>(3 * i, 3 * j) = g1 * as.weights()(j) * Mat3::Identity();
  Km[1].setZero(n, n);
  for (int m = 2; m <= 3; ++m) as.assemble_taylor(medium0, m, &Sm[m], &Km[m]);

  DtNDerivatives out;
  out.S0 = Sm[0];
  out.S1 = Sm[1];
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Sm[0]);
  if (!(lu.rcond() > 1e-12)) numerical_error("static single layer is singular (near-breakdown)");
  std::array<Eigen::MatrixXd, 4> Nn;
  for (int k = 0; k <= 3; ++k) {
    Eigen::MatrixXd rhs = Km[k];
    for (int j = 1; j <= k; ++j) rhs -= Sm[j] * Nn[k - j];
    Nn[k] = lu.solve(rhs);
  }
  out.n0 = Nn[0].cast<cd>();
  const cd I(0.0, 1.0);
  double fact = 1.0;
  cd ipow = 1.0;
  for (int k = 1; k <= 3; ++k) {
    fact *= k;
    ipow *= I;
    out.analytic[k - 1] = (fact * ipow) * Nn[k].cast<cd>();
  }

  for (int k = 0; k < 3; ++k) out.fd_vs_analytic[k] = -1.0;
  if (opts.finite_differences) {
    std::map<double, MatC> cache;
    auto N = [&](double z) -> const MatC& {
      auto it = cache.find(z);
      if (it != cache.end()) return it->second;
      return cache.emplace(z, DtNOperator(as, medium0, cd(z, 0.0)).matrix()).first->second;
    };
    auto d1 = [&](double h) { return MatC((-N(2 * h) + 8.0 * N(h) - 8.0 * N(-h) + N(-2 * h)) / (12.0 * h)); };
    auto d2 = [&](double h) {
      return MatC((-N(2 * h) + 16.0 * N(h) - 30.0 * N(0.0) + 16.0 * N(-h) - N(-2 * h)) / (12.0 * h * h));
    };
    auto d3 = [&](double h) { return MatC((N(2 * h) - 2.0 * N(h) + 2.0 * N(-h) - N(-2 * h)) / (2.0 * h * h * h)); };
    const double h1 = fd_step * opts.step_factor[0], h2 = fd_step * opts.step_factor[1],
                 h3 = fd_step * opts.step_factor[2];
    // One Richardson extrapolation per stencil (orders 4, 4 and 2 respectively).
    out.fd[0] = (16.0 * d1(h1) - d1(2 * h1)) / 15.0;
    out.fd[1] = (16.0 * d2(h2) - d2(2 * h2)) / 15.0;
    out.fd[2] = (4.0 * d3(h3) - d3(2 * h3)) / 3.0;
    for (int k = 0; k < 3; ++k)
      out.fd_vs_analytic[k] = (out.fd[k] - out.analytic[k]).norm() / std::max(out.analytic[k].norm(), 1e-300);
    for (int k : {0, 2})
      if (!(out.fd_vs_analytic[k] <= opts.tolerance))
        numerical_error("derivative-inconsistency: order " + std::to_string(k + 1) + " analytic vs finite-difference "
                        "relative disagreement " + std::to_string(out.fd_vs_analytic[k]) + " exceeds " +
                        std::to_string(opts.tolerance) + " (|analytic| = " + std::to_string(out.analytic[k].norm()) +
                        ", |fd| = " + std::to_string(out.fd[k].norm()) + ")");
    out.d = {out.analytic[0], out.fd[1], out.analytic[2]};
    out.source = {DerivativeSource::Both, opts.analytic_second ? DerivativeSource::Both : DerivativeSource::FiniteDifference,
                  DerivativeSource::Both};
  } else {
    out.d = out.analytic;
    out.source = {DerivativeSource::Analytic, DerivativeSource::Analytic, DerivativeSource::Analytic};
  }
  if (!opts.analytic_second && opts.finite_differences) {
    out.analytic[1].resize(0, 0);
    out.fd_vs_analytic[1] = -1.0;
  }
  return out;
}

DtNDerivatives dtn_derivatives(const ElasticMedium& medium0, const ElasticMedium& medium1, const SurfaceMesh& mesh,
                               double fd_step) {
  BoundaryAssembler as(mesh);
  return dtn_derivatives(as, medium0, medium1, fd_step);
}

double rigid_defect(const BoundaryAssembler& as, const ElasticMedium& m) {
  MatC K;
  as.assemble(m, 0.0, nullptr, &K);
  K.diagonal().array() += 0.5;
  const Eigen::MatrixXd E = rigid_motion_basis(as.mesh()).traces(as.mesh());
  const Eigen::MatrixXd R = K.real() * E;
  double worst = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double num = std::sqrt(R.col(k).dot(as.mass() * R.col(k)));
    const double den = std::sqrt(E.col(k).dot(as.mass() * E.col(k)));
    worst = std::max(worst, num / den);
  }
  return worst;
}

double mesh_tolerance(const BoundaryAssembler& as, const ElasticMedium& medium0, const ElasticMedium& medium1) {
  return std::max(rigid_defect(as, medium0), rigid_defect(as, medium1));
}

namespace {
bool little_endian() {
  const std::uint16_t one = 1;
  unsigned char b;
  std::memcpy(&b, &one, 1);
  return b == 1;
}
}  // namespace

void save_operator(const BoundaryOperatorMatrix& op, const std::string& path) {
  if (!little_endian()) numerical_error("operator dump requires a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) config_error("cannot write operator dump '" + path + "'");
  unsigned char header[64] = {0};
  std::memcpy(header, "ELOPv1", 6);
  const std::uint32_t kind = static_cast<std::uint32_t>(op.kind), phase = static_cast<std::uint32_t>(op.phase);
  const double zr = op.z.real(), zi = op.z.imag();
  const std::uint64_t rows = static_cast<std::uint64_t>(op.mat.rows()), cols = static_cast<std::uint64_t>(op.mat.cols());
  std::memcpy(header + 8, &kind, 4);
  std::memcpy(header + 12, &phase, 4);
  std::memcpy(header + 16, &zr, 8);
  std::memcpy(header + 24, &zi, 8);
  std::memcpy(header + 32, &rows, 8);
  std::memcpy(header + 40, &cols, 8);
  out.write(reinterpret_cast<const char*>(header), 64);
  const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = op.mat;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(cd)));
  if (!out) numerical_error("failed writing operator dump '" + path + "'");
}

BoundaryOperatorMatrix load_operator(const std::string& path) {
  if (!little_endian()) numerical_error("operator dump requires a little-endian host");
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open operator dump '" + path + "'");
  unsigned char header[64];
  in.read(reinterpret_cast<char*>(header), 64);
  if (!in || std::memcmp(header, "ELOPv1", 6) != 0) config_error("'" + path + "' is not an ELOPv1 operator dump");
  std::uint32_t kind, phase;
  double zr, zi;
  std::uint64_t rows, cols;
  std::memcpy(&kind, header + 8, 4);
  std::memcpy(&phase, header + 12, 4);
  std::memcpy(&zr, header + 16, 8);
  std::memcpy(&zi, header + 24, 8);
  std::memcpy(&rows, header + 32, 8);
  std::memcpy(&cols, header + 40, 8);
  if (kind > 3) config_error("operator dump '" + path + "' has an unknown kind");
  BoundaryOperatorMatrix op;
  op.kind = static_cast<OperatorKind>(kind);
  op.phase = static_cast<int>(phase);
  op.z = cd(zr, zi);
  Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(cd)));
  if (!in) config_error("operator dump '" + path + "' is truncated");
  op.mat = rm;
  return op;
}

}  // namespace elastres
