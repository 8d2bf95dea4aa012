#pragma once
// Quadrature rules on the reference interval, triangle and tetrahedron. All
// triangle and tetrahedron weights are normalized to sum to one, so an integral
// is (measure) * sum_q w_q f(x_q).

#include <Eigen/Dense>
#include <vector>

namespace elastres {

struct GaussRule {
  std::vector<double> x;  // nodes on [0, 1]
  std::vector<double> w;
};
// Gauss-Legendre rule with n nodes mapped to [0, 1].
const GaussRule& gauss_legendre(int n);

struct TriangleRule {
  std::vector<Eigen::Vector3d> bary;  // barycentric coordinates (l0, l1, l2)
  std::vector<double> w;
};
// Radon's 7-point rule, exact for polynomials of degree 5.
const TriangleRule& radon7();
// Duffy-collapsed product rule with an n x n Gauss grid, for integrands with a
// 1/r singularity at vertex 0. The Jacobian of the collapse cancels the
// singularity so the rule converges spectrally for such integrands.
const TriangleRule& duffy_rule(int n);

struct TetRule {
  std::vector<Eigen::Vector4d> bary;
  std::vector<double> w;
};
// Conical (collapsed) Gauss product rule with n^3 nodes, exact for degree 2n-3.
const TetRule& tet_rule(int n);

}  // namespace elastres
