#include "elastres/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "elastres/errors.hpp"

namespace elastres {

namespace {

Eigen::MatrixXcd random_block(Eigen::Index rows, int p) {
  std::mt19937_64 rng(0x5eed1234ULL);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd X(rows, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = cd(nd(rng), nd(rng));
  return X;
}

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(Y.rows(), Y.cols());
}

bool converged(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int count, double tol, double scale) {
  for (int i = 0; i < count; ++i)
    if (std::abs(a(i) - b(i)) > std::max(tol * std::abs(a(i)), scale)) return false;
  return true;
}

NearestEigen nearest_impl(const Eigen::MatrixXcd& A, const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int p, cd shift,
                          double tol, int max_iter);

}  // namespace

SmallestSingular smallest_singular(const Eigen::MatrixXcd& A, int p, double tol, int max_iter) {
  const Eigen::Index n = A.rows();
  p = static_cast<int>(std::min<Eigen::Index>(p, n));
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  return smallest_singular(A, lu, p, tol, max_iter);
}

SmallestSingular smallest_singular(const Eigen::MatrixXcd& A, const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int p,
                                   double tol, int max_iter) {
  const Eigen::Index n = A.rows();
  p = static_cast<int>(std::min<Eigen::Index>(p, n));
  Eigen::MatrixXcd Q = orthonormalize(random_block(n, p));
  const int watch = std::max(1, p - 3);
  const double scale = 1e-14 * A.cwiseAbs().maxCoeff();
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(p, -1.0);
  SmallestSingular out;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXcd Z = lu.adjoint().solve(Q);
    Q = orthonormalize(lu.solve(Z));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A * Q, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues().reverse();
    out.sigma = s;
    out.left = svd.matrixU().rowwise().reverse();
    out.right = Q * svd.matrixV().rowwise().reverse();
    if (converged(s, prev, watch, tol, scale)) break;
    prev = s;
  }
  return out;
}

NearestEigen nearest_eigenvalues(const Eigen::MatrixXcd& A, int p, cd shift, double tol, int max_iter) {
  const Eigen::Index n = A.rows();
  p = static_cast<int>(std::min<Eigen::Index>(p, n));
  Eigen::MatrixXcd As = A;
  As.diagonal().array() -= shift;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(As);
  if (shift == cd(0.0)) return nearest_eigenvalues(A, lu, p, tol, max_iter);
  return nearest_impl(A, lu, p, shift, tol, max_iter);
}

NearestEigen nearest_eigenvalues(const Eigen::MatrixXcd& A, const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int p,
                                 double tol, int max_iter) {
  return nearest_impl(A, lu, p, 0.0, tol, max_iter);
}

namespace {

NearestEigen nearest_impl(const Eigen::MatrixXcd& A, const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int p, cd shift,
                          double tol, int max_iter) {
  const Eigen::Index n = A.rows();
  p = static_cast<int>(std::min<Eigen::Index>(p, n));
  Eigen::MatrixXcd Q = orthonormalize(random_block(n, p));
  const int watch = std::max(1, p - 2);
  const double scale = 1e-14 * A.cwiseAbs().maxCoeff();
  Eigen::VectorXcd prev;
  NearestEigen out;
  for (int it = 0; it < max_iter; ++it) {
    Q = orthonormalize(lu.solve(Q));
    Eigen::MatrixXcd H = Q.adjoint() * (A * Q);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H);
    std::vector<int> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    const Eigen::VectorXcd& ev = es.eigenvalues();
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(ev(a) - shift) < std::abs(ev(b) - shift); });
    out.values.resize(p);
    out.vectors.resize(n, p);
    for (int k = 0; k < p; ++k) {
      out.values(k) = ev(idx[k]);
      out.vectors.col(k) = (Q * es.eigenvectors().col(idx[k])).normalized();
    }
    // Members of a near-degenerate cluster may swap order between sweeps, so
    // each watched value is matched to its nearest predecessor.
    bool done = prev.size() == p;
    for (int k = 0; done && k < watch; ++k) {
      const cd v = out.values(k);
      const double d = (prev.array() - v).abs().minCoeff();
      done = d <= std::max(tol * std::abs(v), scale);
    }
    if (done) break;
    prev = out.values;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd real_basis(const Eigen::MatrixXcd& V, int n) {
  Eigen::MatrixXd R(V.rows(), 2 * V.cols());
  R << V.real(), V.imag();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(n);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) numerical_error("loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) numerical_error("loglog_slope: non-positive sample");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0) numerical_error("inverse_sqrt_spd: matrix not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace elastres
