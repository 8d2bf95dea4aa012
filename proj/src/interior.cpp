#include "elastres/interior.hpp"

#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "elastres/errors.hpp"
#include "elastres/linalg.hpp"
#include "elastres/quadrature.hpp"

namespace elastres {

namespace {

constexpr double kPi = 3.14159265358979323846;

double mean_edge(const SurfaceMesh& mesh) {
  double sum = 0.0;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) sum += (mesh.vertices[t[(k + 1) % 3]] - mesh.vertices[t[k]]).norm();
  return sum / (3.0 * mesh.num_triangles());
}

MatC interior_operator(const BoundaryAssembler& as, const ElasticMedium& m, cd z) {
  MatC K;
  as.assemble(m, z, nullptr, &K);
  K.diagonal().array() += 0.5;
  return K;
}

double sigma_min(const BoundaryAssembler& as, const ElasticMedium& m, double z) {
  return smallest_singular(interior_operator(as, m, z), 4, 1e-8).sigma(0);
}

// Mean of the n eigenvalues of I/2 + K1(z) nearest to zero; analytic in z.
cd cluster_eigenvalue(const BoundaryAssembler& as, const ElasticMedium& m, cd z, int n) {
  const NearestEigen ne = nearest_eigenvalues(interior_operator(as, m, z), n + 3);
  return ne.values.head(n).mean();
}

cd secant_root(const BoundaryAssembler& as, const ElasticMedium& m, cd z_start, int n) {
  cd za = z_start, zb = z_start + 1e-3 * std::max(1.0, std::abs(z_start));
  cd fa = cluster_eigenvalue(as, m, za, n), fb = cluster_eigenvalue(as, m, zb, n);
  for (int it = 0; it < 40; ++it) {
    if (fb == fa) break;
    const cd zc = zb - fb * (zb - za) / (fb - fa);
    za = zb;
    fa = fb;
    zb = zc;
    if (std::abs(zb - za) < 1e-13 * std::max(1.0, std::abs(zb))) break;
    fb = cluster_eigenvalue(as, m, zb, n);
  }
  if (std::abs(zb - z_start) > 0.25 * std::max(1.0, std::abs(z_start)))
    numerical_error("complex refinement of the Neumann eigenfrequency near " + std::to_string(z_start.real()) +
                    " left the trust region");
  return zb;
}

std::string format_values(const Eigen::VectorXd& s) {
  std::ostringstream os;
  os.precision(4);
  for (Eigen::Index i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s(i);
  return os.str();
}

// Interior L2 Gram of the fields generated by real traces, and the orthonormalized traces.
void normalize_modes(const BoundaryAssembler& as, const ElasticMedium& m, double z0, const Eigen::MatrixXd& Y,
                     double spacing, NeumannEigenpair& out) {
  const InteriorGrid grid = interior_grid(as.mesh(), spacing);
  if (grid.points.empty()) numerical_error("interior grid is empty; decrease the grid spacing");
  const MatC u = -as.double_layer_potential(m, z0, grid.points, MatC(Y.cast<cd>()));
  const Eigen::MatrixXd G = grid.weight * (u.adjoint() * u).real();
  out.raw_gram = G;
  out.imag_fraction = u.imag().norm() / std::max(u.norm(), 1e-300);
  out.traces = Y * inverse_sqrt_spd(G);
}

void polynomial_traction(const ElasticMedium& m, const Mat3c& J, const Vec3& n, Vec3c& t) {
  const cd div = J.trace();
  t = m.lambda * div * n.cast<cd>() + m.mu * ((J + J.transpose()) * n.cast<cd>());
}

// Load vector (integral of N_i times the traction of the polynomial field) with exact triangle normals.
VecC traction_load(const SurfaceMesh& mesh, const ElasticMedium& m, const Vec3c& A, const Vec3c& B) {
  VecC b = VecC::Zero(mesh.dofs());
  const TriangleRule& rule = radon7();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const Eigen::Vector3d& lam = rule.bary[q];
      const Vec3 y = lam(0) * mesh.vertices[tri[0]] + lam(1) * mesh.vertices[tri[1]] + lam(2) * mesh.vertices[tri[2]];
      Vec3c tr;
      polynomial_traction(m, particular_gradient(m, A, B, y), mesh.normals[t], tr);
      const double w = rule.w[q] * mesh.areas[t];
      for (int k = 0; k < 3; ++k) b.segment<3>(3 * tri[k]) += w * lam(k) * tr;
    }
  }
  return b;
}

VecC nodal_values(const SurfaceMesh& mesh, const ElasticMedium& m, const Vec3c& A, const Vec3c& B) {
  VecC v(mesh.dofs());
  for (int i = 0; i < mesh.num_vertices(); ++i) v.segment<3>(3 * i) = particular_field(m, A, B, mesh.vertices[i]);
  return v;
}

// Volume integral of particular_field(A, B) . e over the polyhedron.
cd particular_rigid_moment(const SurfaceMesh& mesh, const ElasticMedium& m, const Vec3c& A, const Vec3c& B,
                           const RigidMotion& e) {
  const TetRule& rule = tet_rule(4);
  Vec3 c = Vec3::Zero();
  for (const auto& v : mesh.vertices) c += v;
  c /= mesh.num_vertices();
  cd sum = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Vec3 &p1 = mesh.vertices[tri[0]], &p2 = mesh.vertices[tri[1]], &p3 = mesh.vertices[tri[2]];
    const double vol = (p1 - c).dot((p2 - c).cross(p3 - c)) / 6.0;
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const auto& l = rule.bary[q];
      const Vec3 x = l[0] * c + l[1] * p1 + l[2] * p2 + l[3] * p3;
      sum += rule.w[q] * vol * particular_field(m, A, B, x).dot(e(x).cast<cd>());
    }
  }
  return sum;
}

VecC sparse_solve(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& ldlt, const VecC& b) {
  VecC x(b.size());
  x.real() = ldlt.solve(Eigen::VectorXd(b.real()));
  x.imag() = ldlt.solve(Eigen::VectorXd(b.imag()));
  return x;
}

}  // namespace

double max_resolved_frequency(const SurfaceMesh& mesh, const ElasticMedium& m, double points_per_wavelength) {
  return 2.0 * kPi * m.cs() / (points_per_wavelength * mean_edge(mesh));
}

Eigen::VectorXd interior_singular_values(const BoundaryAssembler& as, const ElasticMedium& medium1, cd z, int count) {
  return smallest_singular(interior_operator(as, medium1, z), count + 2).sigma.head(count);
}

std::vector<NeumannEigenpair> neumann_spectrum(const BoundaryAssembler& as, const ElasticMedium& medium1, double lo,
                                               double hi, const NeumannOptions& opts) {
  medium1.validate();
  if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi)) config_error("spectrum window must satisfy 0 <= lo <= hi");
  if (!(opts.scan_step > 0.0)) config_error("spectrum scan_step must be positive");
  const double zmax = max_resolved_frequency(as.mesh(), medium1, opts.points_per_wavelength);
  if (hi > zmax)
    config_error("spectrum window upper end " + std::to_string(hi) + " exceeds the resolved frequency " +
                 std::to_string(zmax) + " of this mesh (" + std::to_string(opts.points_per_wavelength) +
                 " mean edges per shear wavelength); refine the mesh");
  std::vector<NeumannEigenpair> out;
  if (lo == 0.0) {
    NeumannEigenpair p;
    p.rigid = true;
    p.multiplicity = 6;
    p.rigid_basis = rigid_motion_basis(as.mesh());
    p.traces = p.rigid_basis.traces(as.mesh());
    p.raw_gram = p.rigid_basis.gram();
    out.push_back(std::move(p));
  }
  std::vector<double> zs;
  for (int k = (lo == 0.0 ? 1 : 0);; ++k) {
    const double z = lo + k * opts.scan_step;
    if (z > hi + 1e-12) break;
    zs.push_back(z);
  }
  if (!zs.empty() && zs.back() < hi - 1e-12) zs.push_back(hi);
  if (zs.size() < 3) return out;
  std::vector<double> f(zs.size());
  for (std::size_t k = 0; k < zs.size(); ++k) f[k] = sigma_min(as, medium1, zs[k]);
  std::vector<double> sorted = f;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double threshold = opts.detect_ratio * sorted[sorted.size() / 2];
  const double spacing = opts.grid_spacing > 0 ? opts.grid_spacing : as.mesh().diameter() / 16.0;

  for (std::size_t k = 1; k + 1 < zs.size(); ++k) {
    if (!(f[k] < f[k - 1] && f[k] < f[k + 1])) continue;
    // Golden-section search of the dip.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = zs[k - 1], b = zs[k + 1];
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = sigma_min(as, medium1, c), fd = sigma_min(as, medium1, d);
    while (b - a > opts.golden_tol * std::max(1.0, 0.5 * (a + b))) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = sigma_min(as, medium1, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = sigma_min(as, medium1, d);
      }
    }
    const double zstar = fc < fd ? c : d;
    const SmallestSingular dip = smallest_singular(interior_operator(as, medium1, zstar), opts.probe);
    const Eigen::VectorXd& s = dip.sigma;
    if (s(0) > threshold) continue;
    int n = 0;
    while (n < s.size() && s(n) < opts.cluster_factor * s(0)) ++n;
    if (n >= s.size() - 1)
      numerical_error("multiplicity-ambiguity at z = " + std::to_string(zstar) +
                      ": cluster fills the probe; singular values " + format_values(s));
    const double gap = s(n) / s(n - 1);
    if (gap < opts.gap_ratio)
      numerical_error("multiplicity-ambiguity at z = " + std::to_string(zstar) + ": gap ratio " + std::to_string(gap) +
                      " below " + std::to_string(opts.gap_ratio) + "; singular values " + format_values(s));
    NeumannEigenpair p;
    p.z0 = zstar;
    p.multiplicity = n;
    p.gap = gap;
    p.dip_singular_values.assign(s.data(), s.data() + s.size());
    p.z0_complex = opts.complex_refine ? secant_root(as, medium1, zstar, n) : cd(zstar);
    const SmallestSingular root = smallest_singular(interior_operator(as, medium1, p.z0_complex), n + 3);
    p.right_null = root.right.leftCols(n);
    p.left_null = root.left.leftCols(n);
    p.root_residual = root.sigma(n - 1) / root.sigma(n);
    normalize_modes(as, medium1, p.z0_complex.real(), real_basis(p.right_null, n), spacing, p);
    out.push_back(std::move(p));
  }
  return out;
}

Eigen::Matrix3Xcd evaluate_mode(const BoundaryAssembler& as, const ElasticMedium& medium1, const NeumannEigenpair& pair,
                                int l, const std::vector<Vec3>& pts) {
  if (l < 0 || l >= pair.multiplicity) config_error("mode index out of range");
  if (pair.rigid) {
    Eigen::Matrix3Xcd out(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t p = 0; p < pts.size(); ++p) out.col(p) = pair.rigid_basis.e[l](pts[p]).cast<cd>();
    return out;
  }
  return -as.double_layer_potential(medium1, pair.z0_complex.real(), pts, VecC(pair.traces.col(l).cast<cd>()));
}

Vec3c particular_field(const ElasticMedium& m, const Vec3c& A, const Vec3c& B, const Vec3& x) {
  const Vec3c xc = x.cast<cd>();
  return x.squaredNorm() * (A / (8.0 * m.mu + 2.0 * m.lambda) + B.cross(xc) / (10.0 * m.mu));
}

Mat3c particular_gradient(const ElasticMedium& m, const Vec3c& A, const Vec3c& B, const Vec3& x) {
  const Vec3c xc = x.cast<cd>();
  const Vec3c a = A / (8.0 * m.mu + 2.0 * m.lambda), b = B / (10.0 * m.mu);
  Mat3c skew;
  skew << 0.0, -b(2), b(1), b(2), 0.0, -b(0), -b(1), b(0), 0.0;
  return 2.0 * (a + b.cross(xc)) * xc.transpose() + x.squaredNorm() * skew;
}

std::vector<CorrectorSolution> correctors(const BoundaryAssembler& as, const ElasticMedium& medium1,
                                          const RigidMotionBasis& basis, const MatC& dtn0, const MatC& dtn1,
                                          const CorrectorOptions& opts) {
  medium1.validate();
  const SurfaceMesh& mesh = as.mesh();
  const int n3 = mesh.dofs();
  if (dtn0.rows() != n3 || dtn0.cols() != n3 || dtn1.rows() != n3 || dtn1.cols() != n3)
    config_error("correctors: DtN data does not match the mesh");
  const Eigen::MatrixXd E = basis.traces(mesh);
  const Eigen::SparseMatrix<double>& W = as.mass();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(W);
  if (ldlt.info() != Eigen::Success) numerical_error("mass matrix factorization failed");

  Eigen::MatrixXd S0, K0;
  {
    MatC S, K;
    as.assemble(medium1, 0.0, &S, &K);
    S0 = S.real();
    K0 = K.real();
  }
  // Newton potentials of the rigid motions on Gamma: N_k = S t_k - (I/2 + K) p_k with L p_k = e_k.
  Eigen::MatrixXd Npot(n3, 6);
  for (int k = 0; k < 6; ++k) {
    const Vec3c a = basis.e[k].a.cast<cd>(), b = basis.e[k].b.cast<cd>();
    const VecC tk = sparse_solve(ldlt, traction_load(mesh, medium1, a, b));
    const VecC pk = nodal_values(mesh, medium1, a, b);
    Npot.col(k) = (S0 * tk.real() - K0 * pk.real() - 0.5 * pk.real());
  }
  const Eigen::Index rows = n3 + 6;
  Eigen::MatrixXd Asys(rows, n3);
  Asys.topRows(n3) = K0.transpose();
  Asys.topRows(n3).diagonal().array() += 0.5;
  const double pin_scale = Asys.topRows(n3).norm() / std::max(Npot.norm(), 1e-300);
  Asys.bottomRows(6) = pin_scale * Npot.transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Asys);

  std::vector<CorrectorSolution> out(12);
  Eigen::MatrixXd rhs(rows, 24);
  for (int v = 0; v < 2; ++v) {
    for (int l = 0; l < 6; ++l) {
      CorrectorSolution& s = out[6 * v + l];
      s.l = l;
      s.variant = v == 0 ? CorrectorVariant::N : CorrectorVariant::Nprime;
      s.data = (v == 0 ? dtn0 : dtn1) * E.col(l).cast<cd>();
      const VecC lg = W * s.data;
      Vec3c A = Vec3c::Zero(), B = Vec3c::Zero();
      for (int k = 0; k < 6; ++k) {
        s.rigid(k) = -E.col(k).cast<cd>().dot(lg);  // dot conjugates the first argument, E is real
        A -= s.rigid(k) * basis.e[k].a.cast<cd>();
        B -= s.rigid(k) * basis.e[k].b.cast<cd>();
      }
      s.part_const = A;
      s.part_rot = B;
      const VecC lh = lg - traction_load(mesh, medium1, A, B);
      Eigen::Matrix<cd, 6, 1> pin;
      for (int k = 0; k < 6; ++k) pin(k) = -particular_rigid_moment(mesh, medium1, A, B, basis.e[k]);
      const int c = 2 * (6 * v + l);
      rhs.col(c).head(n3) = lh.real();
      rhs.col(c + 1).head(n3) = lh.imag();
      rhs.col(c).tail(6) = pin_scale * pin.real();
      rhs.col(c + 1).tail(6) = pin_scale * pin.imag();
    }
  }
  const Eigen::MatrixXd sol = qr.solve(rhs);
  // Data of the N' family vanish on rotations; residuals are measured against the family scale.
  std::array<double, 2> scale{0.0, 0.0};
  for (int j = 0; j < 12; ++j) scale[j / 6] = std::max(scale[j / 6], (W * out[j].data).norm());
  for (int j = 0; j < 12; ++j) {
    CorrectorSolution& s = out[j];
    VecC psi(n3);
    psi.real() = sol.col(2 * j);
    psi.imag() = sol.col(2 * j + 1);
    s.density = sparse_solve(ldlt, psi);
    s.trace = nodal_values(mesh, medium1, s.part_const, s.part_rot) + S0.cast<cd>() * s.density +
              E.cast<cd>() * s.rigid;
    const VecC lg = W * s.data;
    const VecC traction = traction_load(mesh, medium1, s.part_const, s.part_rot) + Asys.topRows(n3).cast<cd>() * psi;
    const double ref = std::max(lg.norm(), 1e-6 * scale[j / 6]);
    s.traction_residual = ref > 0 ? (traction - lg).norm() / ref : (traction - lg).norm();
    VecC pin_lhs = Npot.transpose().cast<cd>() * psi;
    VecC pin_rhs = rhs.col(2 * j).tail(6).cast<cd>() + cd(0, 1) * rhs.col(2 * j + 1).tail(6).cast<cd>();
    pin_rhs /= pin_scale;
    s.pin_residual = (pin_lhs - pin_rhs).norm() / std::max(1.0, pin_rhs.norm());
    if (s.traction_residual > opts.max_residual)
      numerical_error("corrector-solve: relative traction residual " + std::to_string(s.traction_residual) +
                      " for mode " + std::to_string(s.l));
  }
  return out;
}

Eigen::Matrix3Xcd evaluate_corrector(const BoundaryAssembler& as, const ElasticMedium& medium1,
                                     const RigidMotionBasis& basis, const CorrectorSolution& sol,
                                     const std::vector<Vec3>& pts) {
  Eigen::Matrix3Xcd u = as.single_layer_potential(medium1, 0.0, pts, sol.density);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    Vec3c v = particular_field(medium1, sol.part_const, sol.part_rot, pts[p]);
    for (int k = 0; k < 6; ++k) v += sol.rigid(k) * basis.e[k](pts[p]).cast<cd>();
    u.col(p) += v;
  }
  return u;
}

}  // namespace elastres
