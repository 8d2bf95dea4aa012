#pragma once
// Dense helpers for the spectral detectors: a few extreme singular triplets or
// eigenpairs of a dense complex matrix by LU-based block inverse iteration,
// real bases of complex subspaces and log-log slope fits.

#include <Eigen/Dense>
#include <vector>

#include "elastres/media.hpp"

namespace elastres {

struct SmallestSingular {
  Eigen::VectorXd sigma;  // ascending
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;
};
// The p smallest singular triplets (Rayleigh-Ritz on a block inverse iteration
// with (A^H A)^{-1}); fixed random start for reproducibility.
SmallestSingular smallest_singular(const Eigen::MatrixXcd& A, int p, double tol = 1e-11, int max_iter = 300);
// Same with a precomputed LU factorization of A.
SmallestSingular smallest_singular(const Eigen::MatrixXcd& A, const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int p,
                                   double tol = 1e-11, int max_iter = 300);

struct NearestEigen {
  Eigen::VectorXcd values;  // sorted by distance to the shift
  Eigen::MatrixXcd vectors;
};
// The p eigenvalues of A nearest to `shift`, with Ritz vectors.
NearestEigen nearest_eigenvalues(const Eigen::MatrixXcd& A, int p, cd shift = 0.0, double tol = 1e-13,
                                 int max_iter = 300);
// Eigenvalues nearest to zero with a precomputed LU factorization of A.
NearestEigen nearest_eigenvalues(const Eigen::MatrixXcd& A, const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int p,
                                 double tol = 1e-13, int max_iter = 300);

// Orthonormal real basis (n columns) of the real span of the columns of V and
// conj(V); exact when span V is closed under conjugation.
Eigen::MatrixXd real_basis(const Eigen::MatrixXcd& V, int n);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Inverse square root of a symmetric positive definite matrix.
Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& G);

}  // namespace elastres
