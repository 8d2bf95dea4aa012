#include "elastres/effective.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "elastres/errors.hpp"
#include "elastres/linalg.hpp"

namespace elastres {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd sym_real(const MatC& M) { return 0.5 * (M.real() + M.real().transpose()); }

nlohmann::json matrix_json(const MatC& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back({M(i, j).real(), M(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

MatC matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) config_error("effset-1: matrix must be a non-empty array of rows");
  const std::size_t n = rows.size(), m = rows[0].size();
  MatC M(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != m) config_error("effset-1: ragged matrix");
    for (std::size_t j = 0; j < m; ++j) {
      const auto& e = rows[i][j];
      if (!e.is_array() || e.size() != 2) config_error("effset-1: entries must be [re, im] pairs");
      M(i, j) = cd(e[0].get<double>(), e[1].get<double>());
    }
  }
  return M;
}

// Groups sorted eigenvalues into clusters with relative gap threshold.
std::vector<std::vector<int>> cluster_sorted(const Eigen::VectorXd& ev, double tol) {
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < ev.size(); ++i) {
    if (groups.empty() || ev(i) - ev(groups.back().back()) > tol * std::max(1.0, std::abs(ev(i))))
      groups.push_back({i});
    else
      groups.back().push_back(i);
  }
  return groups;
}

}  // namespace

MatC pairing(const Eigen::SparseMatrix<double>& W, const MatC& A, const MatC& B) {
  return A.transpose() * (W * B);
}

MatC m1_at(const NeumannEigenpair& pair, const MatC& dtn_z0, const Eigen::SparseMatrix<double>& W) {
  if (dtn_z0.rows() != pair.traces.rows()) config_error("m1_at: DtN size does not match the modes");
  const MatC Y = pair.traces.cast<cd>();
  return pairing(W, dtn_z0 * Y, Y);
}

ReducedM1 m1_reduced(const BoundaryAssembler& as, const ElasticMedium& medium0, const ElasticMedium& medium1,
                     const NeumannEigenpair& pair) {
  if (pair.rigid) config_error("m1_reduced applies to nonzero eigenfrequencies");
  const cd z0 = pair.z0_complex;
  const double h = 1e-4 * std::max(1.0, std::abs(z0));
  MatC Kp, Km, S1, K1;
  as.assemble(medium1, z0 + h, nullptr, &Kp);
  as.assemble(medium1, z0 - h, nullptr, &Km);
  as.assemble(medium1, z0, &S1, &K1);
  const MatC dB = (Kp - Km) / (2.0 * h);
  const DtNOperator N(as, medium0, z0);
  const MatC& X = pair.left_null;
  const MatC& Y = pair.right_null;
  const MatC lhs = X.adjoint() * dB * Y;
  const MatC rhs = X.adjoint() * (S1 * (N.matrix() * Y));
  ReducedM1 out;
  out.z0c = z0;
  out.matrix = -2.0 * medium1.rho * z0 * lhs.partialPivLu().solve(rhs);
  out.kappa = Eigen::ComplexEigenSolver<MatC>(out.matrix, false).eigenvalues();
  return out;
}

EffectiveMatrixSet effective_set_zero(const BoundaryAssembler& as, const ElasticMedium& medium1,
                                      const RigidMotionBasis& basis, const DtNDerivatives& derivs,
                                      const std::vector<CorrectorSolution>& correctors) {
  for (int k = 0; k < 3; ++k)
    if (derivs.d[k].size() == 0)
      config_error("effective_set_zero: missing derivative of order " + std::to_string(k + 1) + " (dependency)");
  if (correctors.size() != 12) config_error("effective_set_zero: twelve correctors required");
  const Eigen::SparseMatrix<double>& W = as.mass();
  const MatC E = basis.traces(as.mesh()).cast<cd>();
  const cd I(0.0, 1.0);
  EffectiveMatrixSet set;
  set.has_zero = true;
  set.rho1 = medium1.rho;
  set.M[0] = pairing(W, derivs.n0 * E, E);
  set.M[1] = I * pairing(W, derivs.d[0] * E, E);
  set.M[3] = -0.5 * pairing(W, derivs.d[1] * E, E);
  const MatC third = pairing(W, derivs.d[2] * E, E);
  set.M[4] = (I / 6.0) * third - 2.0 * medium1.rho * set.M[1].transpose();
  MatC U(E.rows(), 6), G(E.rows(), 6), Gp(E.rows(), 6);
  for (int l = 0; l < 6; ++l) {
    U.col(l) = correctors[l].trace;
    G.col(l) = correctors[l].data;
    Gp.col(l) = correctors[6 + l].data;
  }
  set.M[2] = -pairing(W, U, G);
  set.M[5] = -pairing(W, Gp, U) - pairing(W, U, Gp);
  set.origin_symmetric = is_origin_symmetric(as.mesh());
  set.provenance["vertices"] = std::to_string(as.mesh().num_vertices());
  set.provenance["derivative_source_1"] = to_string(derivs.source[0]);
  set.provenance["derivative_source_2"] = to_string(derivs.source[1]);
  set.provenance["derivative_source_3"] = to_string(derivs.source[2]);
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << derivs.fd_vs_analytic[0] << "," << derivs.fd_vs_analytic[1] << ","
     << derivs.fd_vs_analytic[2];
  set.provenance["fd_vs_analytic"] = os.str();
  // Diagnostic: difference between the two index readings of the M2 term in M5.
  std::ostringstream d;
  d.precision(3);
  d << std::scientific << (2.0 * medium1.rho * (set.M[1] - set.M[1].transpose())).norm();
  set.provenance["m5_index_reading_difference"] = d.str();
  return set;
}

double m2_form_constant(const ElasticMedium& m) {
  return std::sqrt(m.rho) / (12.0 * kPi) * (2.0 * std::pow(m.mu, -1.5) + std::pow(m.lambda + 2.0 * m.mu, -1.5));
}

MatC m2_quadratic_form(const BoundaryAssembler& as, const ElasticMedium& medium0, const RigidMotionBasis& basis,
                       const Eigen::MatrixXd& S0) {
  const Eigen::MatrixXd E = basis.traces(as.mesh());
  const Eigen::MatrixXd phi = S0.partialPivLu().solve(E);
  const Eigen::VectorXd& w = as.weights();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 6);
  for (int i = 0; i < as.mesh().num_vertices(); ++i) F += w(i) * phi.middleRows<3>(3 * i);
  return (-m2_form_constant(medium0) * F.transpose() * F).cast<cd>();
}

double relative_asymmetry(const MatC& M) {
  const double n = M.norm();
  return n > 0 ? (M - M.transpose()).norm() / n : 0.0;
}

bool is_origin_symmetric(const SurfaceMesh& mesh, double tol) {
  const double scale = tol * std::max(1.0, mesh.diameter());
  for (const Vec3& v : mesh.vertices) {
    bool found = false;
    for (const Vec3& w : mesh.vertices)
      if ((v + w).norm() <= scale) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

bool EffectiveReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* EffectiveReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

EffectiveReport validate_effective(const EffectiveMatrixSet& set, const EffectiveTolerances& tol) {
  EffectiveReport rep;
  auto add = [&](const std::string& name, bool pass, double measured, double threshold, const std::string& detail) {
    rep.checks.push_back({name, pass, measured, threshold, detail});
  };
  if (set.has_zero) {
    const MatC& M1 = set.M[0];
    const MatC& M2 = set.M[1];
    for (int k : {0, 1, 2, 3, 4}) {
      const double im = set.M[k].imag().norm() / std::max(set.M[k].norm(), 1e-300);
      add("M" + std::to_string(k + 1) + "_real", im <= tol.sym_tol, im, tol.sym_tol, "relative imaginary part");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(sym_real(M1));
    const double margin = -es1.eigenvalues().maxCoeff();
    const double need = tol.margin_factor * tol.mesh_tolerance;
    std::ostringstream ev;
    ev << es1.eigenvalues().transpose();
    add("M1_negative_definite", margin > 0 && margin >= need, margin, need, "eigenvalues " + ev.str());
    add("M1_symmetric", relative_asymmetry(M1) <= tol.sym_tol, relative_asymmetry(M1), tol.sym_tol, "");
    if (set.origin_symmetric) {
      const double off = std::max(M1.topRightCorner(3, 3).cwiseAbs().maxCoeff(),
                                  M1.bottomLeftCorner(3, 3).cwiseAbs().maxCoeff()) /
                         M1.norm();
      add("M1_origin_symmetry_offblocks", off <= tol.offblock_tol, off, tol.offblock_tol,
          "translation-rotation blocks relative to ||M1||");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(sym_real(M2));
    const double scale2 = std::max(1.0, M2.norm());
    const double thr = tol.rank_tol * scale2;
    int below = 0;
    for (int i = 0; i < 6; ++i)
      if (es2.eigenvalues()(i) < -thr) ++below;
    std::ostringstream ev2;
    ev2 << es2.eigenvalues().transpose();
    add("M2_nsd", es2.eigenvalues().maxCoeff() <= thr, es2.eigenvalues().maxCoeff(), thr, "eigenvalues " + ev2.str());
    add("M2_rank_le_3", below <= 3, below, 3, "eigenvalues below -tol");
    add("M2_symmetric", relative_asymmetry(M2) <= tol.sym_tol, relative_asymmetry(M2), tol.sym_tol, "");
    for (int k : {2, 3, 4}) {
      const double a = relative_asymmetry(set.M[k]);
      add("M" + std::to_string(k + 1) + "_symmetric", a <= tol.sym_tol, a, tol.sym_tol, "");
    }
    // Kernel of M2 and its interplay with the eigenvectors of M1, M5 and M6.
    std::vector<int> kidx;
    for (int i = 0; i < 6; ++i)
      if (std::abs(es2.eigenvalues()(i)) <= thr) kidx.push_back(i);
    Eigen::MatrixXd Z(6, kidx.size());
    for (std::size_t i = 0; i < kidx.size(); ++i) Z.col(i) = es2.eigenvectors().col(kidx[i]);
    if (Z.cols() > 0) {
      const double ctol = std::max(1e-8, 10.0 * tol.mesh_tolerance);
      double worst = 0.0;
      int found = 0;
      for (const auto& g : cluster_sorted(es1.eigenvalues(), ctol)) {
        Eigen::MatrixXd Q(6, g.size());
        for (std::size_t i = 0; i < g.size(); ++i) Q.col(i) = es1.eigenvectors().col(g[i]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q.transpose() * Z, Eigen::ComputeFullU);
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
          if (svd.singularValues()(i) < 1.0 - tol.structure_tol) continue;
          const Eigen::VectorXd a = Q * svd.matrixU().col(i);
          worst = std::max(worst, a.head(3).norm());
          ++found;
        }
      }
      add("KerM2_eigvec_translation_free", worst <= tol.structure_tol, worst, tol.structure_tol,
          std::to_string(found) + " eigenvectors of M1 in Ker M2");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es5(Z.transpose() * sym_real(set.M[4]) * Z);
      add("M5_negative_on_KerM2", es5.eigenvalues().maxCoeff() < 0, es5.eigenvalues().maxCoeff(), 0.0,
          "largest a^T M5 a over unit a in Ker M2");
      const double m6 = (Z.transpose().cast<cd>() * set.M[5] * Z.cast<cd>()).norm() /
                        std::max(set.M[5].norm(), 1e-300);
      const bool m6_zero = set.M[5].norm() <= 1e-300;
      add("M6_vanishes_on_KerM2", m6_zero || m6 <= tol.structure_tol, m6, tol.structure_tol,
          "relative norm of Z^T M6 Z");
    } else {
      add("KerM2_eigvec_translation_free", true, 0.0, tol.structure_tol, "Ker M2 is trivial");
    }
  }
  for (const auto& [z0, M] : set.M1_z0) {
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<MatC>(M, false).eigenvalues();
    double mn = ev.imag().minCoeff();
    std::ostringstream os;
    os << "z0 = " << z0 << ", eigenvalues " << ev.transpose();
    add("ImKappa_positive_z0_" + std::to_string(z0), mn > 0, mn, 0.0, os.str());
  }
  return rep;
}

std::string effset_to_json(const EffectiveMatrixSet& set) {
  nlohmann::json j;
  j["schema"] = "effset-1";
  j["rho1"] = set.rho1;
  j["origin_symmetric"] = set.origin_symmetric;
  j["mesh_tolerance"] = set.mesh_tolerance;
  if (set.has_zero) {
    nlohmann::json z;
    for (int k = 0; k < 6; ++k) z["M" + std::to_string(k + 1)] = matrix_json(set.M[k]);
    j["zero"] = z;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [z0, M] : set.M1_z0) arr.push_back({{"z0", z0}, {"M1", matrix_json(M)}});
  j["M1_z0"] = arr;
  j["provenance"] = set.provenance;
  return j.dump(2);
}

EffectiveMatrixSet effset_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    config_error(std::string("effset-1: invalid JSON: ") + e.what());
  }
  if (j.value("schema", "") != "effset-1") config_error("effset-1: schema tag missing or wrong");
  EffectiveMatrixSet set;
  set.rho1 = j.value("rho1", 1.0);
  set.origin_symmetric = j.value("origin_symmetric", false);
  set.mesh_tolerance = j.value("mesh_tolerance", 0.0);
  if (j.contains("zero")) {
    set.has_zero = true;
    for (int k = 0; k < 6; ++k) {
      const std::string key = "M" + std::to_string(k + 1);
      if (!j["zero"].contains(key)) config_error("effset-1: missing " + key);
      set.M[k] = matrix_from_json(j["zero"][key]);
      if (set.M[k].rows() != 6 || set.M[k].cols() != 6) config_error("effset-1: " + key + " must be 6 x 6");
    }
  }
  if (j.contains("M1_z0"))
    for (const auto& e : j["M1_z0"]) set.M1_z0[e.at("z0").get<double>()] = matrix_from_json(e.at("M1"));
  if (j.contains("provenance"))
    for (const auto& [k, v] : j["provenance"].items()) set.provenance[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return set;
}

}  // namespace elastres
