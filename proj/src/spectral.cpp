#include "elastres/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "elastres/errors.hpp"

namespace elastres {

namespace {

using Eigen::MatrixXd;

struct Cluster {
  double value = 0.0;
  MatrixXd vectors;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

MatrixXd sym(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

// Groups the eigenpairs of a symmetric matrix into distinct values. A gap is
// ambiguous when it lies within a factor of two of the threshold.
std::vector<Cluster> cluster_symmetric(const MatrixXd& A, double tol, const std::string& what) {
  std::vector<Cluster> out;
  if (A.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(A));
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::vector<std::vector<int>> groups{{0}};
  for (int i = 1; i < ev.size(); ++i) {
    const double gap = ev(i) - ev(i - 1);
    const double thr = tol * std::max(1.0, std::max(std::abs(ev(i)), std::abs(ev(i - 1))));
    if (gap > 0.5 * thr && gap < 2.0 * thr)
      numerical_error("ladder-ambiguity in " + what + ": gap " + fmt(gap) + " between " + fmt(ev(i - 1)) + " and " +
                      fmt(ev(i)) + " is within a factor 2 of the clustering threshold " + fmt(thr));
    if (gap >= 2.0 * thr)
      groups.push_back({i});
    else
      groups.back().push_back(i);
  }
  for (const auto& g : groups) {
    Cluster c;
    c.vectors.resize(A.rows(), static_cast<Eigen::Index>(g.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      c.vectors.col(k) = es.eigenvectors().col(g[k]);
      s += ev(g[k]);
    }
    c.value = s / static_cast<double>(g.size());
    out.push_back(std::move(c));
  }
  return out;
}

EnhancementSpace make_space(double value, const MatrixXd& basis) {
  EnhancementSpace e;
  e.value = value;
  e.basis = basis;
  e.projection = basis * basis.transpose();
  return e;
}

nlohmann::json real_matrix_json(const MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd real_matrix_from_json(const nlohmann::json& rows, const std::string& name) {
  if (!rows.is_array() || rows.size() != 6) config_error("ladder-1: " + name + " must be a 6 x 6 array");
  MatrixXd M(6, 6);
  for (int i = 0; i < 6; ++i) {
    if (!rows[i].is_array() || rows[i].size() != 6) config_error("ladder-1: " + name + " must be a 6 x 6 array");
    for (int j = 0; j < 6; ++j) {
      const auto& e = rows[i][j];
      if (e.is_number())
        M(i, j) = e.get<double>();
      else if (e.is_array() && e.size() == 2)
        M(i, j) = e[0].get<double>();
      else
        config_error("ladder-1: " + name + " entries must be numbers");
    }
  }
  return M;
}

void check_ladder_args(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) config_error("tau must be positive and finite");
}

}  // namespace

std::vector<double> SpectralLadder::admissible_set() const {
  std::vector<double> out;
  for (const auto& l : levels)
    if (l.admissible) out.push_back(l.kappa);
  return out;
}

const LadderLevel* SpectralLadder::find(double kappa, double tol) const {
  for (const auto& l : levels)
    if (std::abs(l.kappa - kappa) <= tol * std::max(1.0, std::abs(kappa))) return &l;
  return nullptr;
}

SpectralLadder build_ladder(const EffectiveMatrixSet& set, const LadderOptions& opts) {
  if (!set.has_zero) config_error("build_ladder requires the zero-frequency effective matrices");
  if (!(set.rho1 > 0)) config_error("build_ladder: rho1 must be positive");
  SpectralLadder L;
  L.rho1 = set.rho1;
  L.options = opts;
  for (int k = 0; k < 5; ++k) {
    if (set.M[k].rows() != 6 || set.M[k].cols() != 6) config_error("build_ladder: M" + std::to_string(k + 1) + " must be 6 x 6");
    L.M[k] = set.M[k].real();
  }
  L.M6 = set.M[5].size() == 36 ? set.M[5] : MatC::Zero(6, 6);
  const double rho = L.rho1;
  const MatrixXd& M1 = L.M[0];
  const MatrixXd& M2 = L.M[1];

  // Kernel of M2 by eigenvalue thresholding.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es2(sym(M2));
  const double kthr = opts.rank_tol * std::max(1.0, M2.norm());
  std::vector<int> kidx;
  for (int i = 0; i < 6; ++i) {
    const double v = std::abs(es2.eigenvalues()(i));
    if (v > 0.5 * kthr && v < 2.0 * kthr)
      numerical_error("ladder-ambiguity in Ker M2: eigenvalue " + fmt(es2.eigenvalues()(i)) +
                      " is within a factor 2 of the rank threshold " + fmt(kthr));
    if (v <= 0.5 * kthr) kidx.push_back(i);
  }
  L.kernel_M2.resize(6, static_cast<Eigen::Index>(kidx.size()));
  for (std::size_t i = 0; i < kidx.size(); ++i) L.kernel_M2.col(i) = es2.eigenvectors().col(kidx[i]);
  const MatrixXd& Z = L.kernel_M2;

  for (const Cluster& c0 : cluster_symmetric(M1, opts.cluster_tol, "L0")) {
    LadderLevel lev;
    lev.kappa = c0.value;
    lev.Q = c0.vectors;
    const int n = lev.multiplicity();
    for (const Cluster& c1 : cluster_symmetric(lev.Q.transpose() * M2 * lev.Q, opts.cluster_tol, "L1"))
      lev.l1.push_back(make_space(c1.value, lev.Q * c1.vectors));

    // Principal angles between the eigenspace and Ker M2.
    std::vector<int> small, large;
    MatrixXd U = MatrixXd::Identity(n, n);
    Eigen::VectorXd angles = Eigen::VectorXd::Constant(n, 0.5 * M_PI);
    if (Z.cols() > 0) {
      Eigen::JacobiSVD<MatrixXd> svd(lev.Q.transpose() * Z, Eigen::ComputeFullU);
      U = svd.matrixU();
      for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, Z.cols()); ++i) {
        const Eigen::VectorXd v = lev.Q * U.col(i);
        const double s = (v - Z * (Z.transpose() * v)).norm();
        angles(i) = std::atan2(s, svd.singularValues()(i));
      }
    }
    for (int i = 0; i < n; ++i) {
      if (angles(i) > 0.5 * opts.angle_tol && angles(i) < 2.0 * opts.angle_tol)
        numerical_error("ladder-ambiguity in the admissible-set test for kappa = " + fmt(lev.kappa) +
                        ": principal angle " + fmt(angles(i)) + " is within a factor 2 of " + fmt(opts.angle_tol));
      (angles(i) <= 0.5 * opts.angle_tol ? small : large).push_back(i);
    }
    lev.smallest_angle = angles.minCoeff();
    lev.admissible = !small.empty();
    lev.Q0.resize(6, static_cast<Eigen::Index>(small.size()));
    lev.Qperp.resize(6, static_cast<Eigen::Index>(large.size()));
    for (std::size_t i = 0; i < small.size(); ++i) lev.Q0.col(i) = lev.Q * U.col(small[i]);
    for (std::size_t i = 0; i < large.size(); ++i) lev.Qperp.col(i) = lev.Q * U.col(large[i]);
    lev.kernel_inclusion = lev.admissible && large.empty();

    if (lev.admissible) {
      const double k = lev.kappa;
      lev.Mp0 = L.M[2] - (k / rho) * L.M[3] - 2.0 * k * M1 + k * k * MatrixXd::Identity(6, 6);
      lev.Mp1 = lev.Q0.transpose() * lev.Mp0 * lev.Q0;
      lev.Mp2 = -(k / rho) * lev.Q0.transpose() * L.M[4] * lev.Q0;
      lev.Mp3 = MatrixXd::Zero(lev.Q0.cols(), lev.Q0.cols());
      if (lev.Qperp.cols() > 0) {
        const MatrixXd B = lev.Qperp.transpose() * M2 * lev.Qperp;
        Eigen::SelfAdjointEigenSolver<MatrixXd> esb(sym(B));
        const double smin = esb.eigenvalues().cwiseAbs().minCoeff();
        if (smin <= opts.singular_tol * std::max(1.0, M2.norm()))
          numerical_error("Q_perp block of M2 is singular (smallest |eigenvalue| " + fmt(smin) + ") for kappa = " +
                          fmt(k) + "; M2 should be negative definite there");
        lev.Mp3 = -(rho / k) * (lev.Q0.transpose() * lev.Mp0 * lev.Qperp) * B.partialPivLu().solve(
                                     lev.Qperp.transpose() * lev.Mp0 * lev.Q0);
      }
      const double asym1 = (lev.Mp1 - lev.Mp1.transpose()).norm() / std::max(lev.Mp1.norm(), 1e-300);
      if (asym1 > 1e-6)
        L.diagnostics.push_back("M_p^(1) at kappa = " + fmt(k) + " has relative asymmetry " + fmt(asym1));
      for (const Cluster& c2 : cluster_symmetric(lev.Mp1, opts.cluster_tol, "L2")) {
        L2Entry e;
        e.value = c2.value;
        e.reduced = c2.vectors;
        e.basis = lev.Q0 * c2.vectors;
        e.l3_matrix = e.reduced.transpose() * (lev.Mp2 + lev.Mp3) * e.reduced;
        e.l3_asymmetry = (e.l3_matrix - e.l3_matrix.transpose()).norm() / std::max(e.l3_matrix.norm(), 1e-300);
        if (e.l3_asymmetry > 1e-6)
          L.diagnostics.push_back("M_p^(2) + M_p^(3) at kappa = " + fmt(k) + ", kappa'' = " + fmt(e.value) +
                                  " has relative asymmetry " + fmt(e.l3_asymmetry) + "; its symmetric part is used");
        for (const Cluster& c3 : cluster_symmetric(e.l3_matrix, opts.cluster_tol, "L3"))
          e.l3.push_back(make_space(c3.value, e.basis * c3.vectors));
        lev.l2.push_back(std::move(e));
      }
    }
    L.levels.push_back(std::move(lev));
  }
  return L;
}

SignFacts sign_facts(const SpectralLadder& ladder, double l1_slack) {
  SignFacts f;
  std::ostringstream os;
  const double slack = l1_slack * std::max(1.0, ladder.M[1].norm());
  for (const auto& lev : ladder.levels) {
    if (!(lev.kappa < 0)) {
      f.l0_negative = false;
      os << "kappa = " << lev.kappa << " is not negative; ";
    }
    for (const auto& s : lev.l1)
      if (s.value > slack) {
        f.l1_nonpositive = false;
        os << "kappa' = " << s.value << " is positive; ";
      }
    for (const auto& e : lev.l2)
      for (const auto& s : e.l3)
        if (!(s.value < 0)) {
          f.l3_negative = false;
          os << "kappa''' = " << s.value << " is not negative; ";
        }
  }
  f.detail = os.str();
  return f;
}

std::string ladder_to_json(const SpectralLadder& L) {
  nlohmann::json j;
  j["schema"] = "ladder-1";
  j["rho1"] = L.rho1;
  j["options"] = {{"cluster_tol", L.options.cluster_tol},
                  {"rank_tol", L.options.rank_tol},
                  {"angle_tol", L.options.angle_tol},
                  {"singular_tol", L.options.singular_tol}};
  nlohmann::json mats;
  for (int k = 0; k < 5; ++k) mats["M" + std::to_string(k + 1)] = real_matrix_json(L.M[k]);
  mats["M6_imag"] = real_matrix_json(L.M6.imag());
  j["matrices"] = mats;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lev : L.levels) {
    nlohmann::json l;
    l["kappa"] = lev.kappa;
    l["multiplicity"] = lev.multiplicity();
    l["admissible"] = lev.admissible;
    l["kernel_inclusion"] = lev.kernel_inclusion;
    l["smallest_angle"] = lev.smallest_angle;
    nlohmann::json l1 = nlohmann::json::array();
    for (const auto& s : lev.l1) l1.push_back({{"value", s.value}, {"dimension", s.basis.cols()}});
    l["L1"] = l1;
    nlohmann::json l2 = nlohmann::json::array();
    for (const auto& e : lev.l2) {
      nlohmann::json l3 = nlohmann::json::array();
      for (const auto& s : e.l3) l3.push_back({{"value", s.value}, {"dimension", s.basis.cols()}});
      l2.push_back({{"value", e.value}, {"dimension", e.basis.cols()}, {"l3_asymmetry", e.l3_asymmetry}, {"L3", l3}});
    }
    l["L2"] = l2;
    levels.push_back(l);
  }
  j["levels"] = levels;
  j["diagnostics"] = L.diagnostics;
  return j.dump(2);
}

SpectralLadder ladder_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    config_error(std::string("ladder-1: invalid JSON: ") + e.what());
  }
  if (j.value("schema", "") != "ladder-1") config_error("ladder-1: schema tag missing or wrong");
  if (!j.contains("matrices") || !j["matrices"].contains("M1") || !j["matrices"].contains("M2"))
    config_error("ladder-1: matrices M1 and M2 are required");
  EffectiveMatrixSet set;
  set.has_zero = true;
  set.rho1 = j.value("rho1", 1.0);
  for (int k = 0; k < 5; ++k) {
    const std::string key = "M" + std::to_string(k + 1);
    set.M[k] = j["matrices"].contains(key) ? MatC(real_matrix_from_json(j["matrices"][key], key).cast<cd>())
                                           : MatC::Zero(6, 6);
  }
  set.M[5] = j["matrices"].contains("M6_imag")
                 ? MatC(cd(0.0, 1.0) * real_matrix_from_json(j["matrices"]["M6_imag"], "M6_imag").cast<cd>())
                 : MatC::Zero(6, 6);
  LadderOptions o;
  if (j.contains("options")) {
    const auto& oj = j["options"];
    o.cluster_tol = oj.value("cluster_tol", o.cluster_tol);
    o.rank_tol = oj.value("rank_tol", o.rank_tol);
    o.angle_tol = oj.value("angle_tol", o.angle_tol);
    o.singular_tol = oj.value("singular_tol", o.singular_tol);
  }
  return build_ladder(set, o);
}

const char* to_string(BranchRegime r) {
  switch (r) {
    case BranchRegime::Wavelength: return "wavelength";
    case BranchRegime::Generic: return "generic";
    case BranchRegime::Exceptional: return "exceptional";
  }
  return "?";
}

cd ResonanceBranch::evaluate(double t) const {
  const cd I(0.0, 1.0);
  switch (regime) {
    case BranchRegime::Wavelength:
      return z0 - t * kappa_z0 / (2.0 * rho1 * z0);
    case BranchRegime::Generic:
      return sign * std::sqrt(t) * std::sqrt(-kappa / rho1) + I * t * kappa1 / (2.0 * rho1);
    case BranchRegime::Exceptional:
      return sign * std::sqrt(t) * std::sqrt(-kappa / rho1) +
             double(sign) * std::pow(t, 1.5) * kappa2 / (2.0 * std::sqrt(-rho1 * kappa)) +
             I * t * t * kappa3 / (2.0 * rho1);
  }
  return 0.0;
}

cd ResonanceBranch::scaled_pole(double t) const {
  const cd I(0.0, 1.0);
  switch (regime) {
    case BranchRegime::Wavelength:
      return evaluate(t);
    case BranchRegime::Generic: {
      const cd disc = std::sqrt(cd(-kappa1 * kappa1 * t - 4.0 * rho1 * kappa));
      return (I * kappa1 * std::sqrt(t) + double(sign) * disc) / (2.0 * rho1);
    }
    case BranchRegime::Exceptional:
      return sign * kappa2 / (2.0 * std::sqrt(-rho1 * kappa)) + I * kappa3 * std::sqrt(t) / (2.0 * rho1);
  }
  return 0.0;
}

cd ResonanceBranch::exact_pole(double t) const {
  switch (regime) {
    case BranchRegime::Wavelength:
      return evaluate(t);
    case BranchRegime::Generic:
      return std::sqrt(t) * scaled_pole(t);
    case BranchRegime::Exceptional:
      return sign * std::sqrt(t) * std::sqrt(-kappa / rho1) + std::pow(t, 1.5) * scaled_pole(t);
  }
  return 0.0;
}

std::vector<ResonanceBranch> wavelength_resonances(const MatC& m1_z0, cd z0, double tau, double rho1) {
  if (z0 == cd(0.0)) config_error("wavelength_resonances requires z0 != 0");
  if (!(tau >= 0.0)) config_error("tau must be non-negative");
  const Eigen::VectorXcd kap = Eigen::ComplexEigenSolver<MatC>(m1_z0, false).eigenvalues();
  std::vector<int> order(kap.size());
  for (int i = 0; i < kap.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return kap(a).real() != kap(b).real() ? kap(a).real() < kap(b).real() : kap(a).imag() < kap(b).imag();
  });
  std::vector<ResonanceBranch> out;
  for (int l : order) {
    ResonanceBranch b;
    b.regime = BranchRegime::Wavelength;
    b.id = "wl" + std::to_string(out.size());
    b.rho1 = rho1;
    b.z0 = z0;
    b.kappa_z0 = kap(l);
    b.im_order = 1;
    b.tau = tau;
    b.z = b.evaluate(tau);
    out.push_back(b);
  }
  return out;
}

std::vector<ResonanceBranch> subwavelength_resonances(const SpectralLadder& L, double tau) {
  check_ladder_args(tau);
  std::vector<ResonanceBranch> out;
  int idx = 0;
  for (const auto& lev : L.levels) {
    for (const auto& s : lev.l1) {
      // On the admissible part (the kappa' = 0 cluster, which spans the intersection with Ker M2)
      // the exceptional branches replace the generic ones.
      if (lev.admissible && std::abs(s.value) <= L.options.rank_tol * std::max(1.0, L.M[1].norm())) continue;
      for (int sign : {1, -1}) {
        ResonanceBranch b;
        b.regime = BranchRegime::Generic;
        b.id = "gen" + std::to_string(idx) + (sign > 0 ? "+" : "-");
        b.sign = sign;
        b.rho1 = L.rho1;
        b.kappa = lev.kappa;
        b.kappa1 = s.value;
        b.im_order = 1;
        b.tau = tau;
        b.z = b.evaluate(tau);
        out.push_back(b);
      }
      ++idx;
    }
    for (const auto& e : lev.l2)
      for (const auto& s : e.l3) {
        for (int sign : {1, -1}) {
          ResonanceBranch b;
          b.regime = BranchRegime::Exceptional;
          b.id = "exc" + std::to_string(idx) + (sign > 0 ? "+" : "-");
          b.sign = sign;
          b.rho1 = L.rho1;
          b.kappa = lev.kappa;
          b.kappa2 = e.value;
          b.kappa3 = s.value;
          b.im_order = 2;
          b.tau = tau;
          b.z = b.evaluate(tau);
          out.push_back(b);
        }
        ++idx;
      }
  }
  return out;
}

EffectivePencil wavelength_pencil(const MatC& m1_z0, cd z0, double rho1) {
  if (z0 == cd(0.0)) config_error("wavelength_pencil requires z0 != 0");
  EffectivePencil p;
  p.z0 = z0;
  p.rho1 = rho1;
  p.M1z0 = m1_z0;
  return p;
}

EffectivePencil zero_pencil(const EffectiveMatrixSet& set) {
  if (!set.has_zero) config_error("zero_pencil requires the zero-frequency effective matrices");
  EffectivePencil p;
  p.at_zero = true;
  p.rho1 = set.rho1;
  p.M = set.M;
  return p;
}

EffectivePencil zero_pencil(const SpectralLadder& L) {
  EffectivePencil p;
  p.at_zero = true;
  p.rho1 = L.rho1;
  for (int k = 0; k < 5; ++k) p.M[k] = L.M[k].cast<cd>();
  p.M[5] = L.M6;
  return p;
}

MatC pencil_eval(const EffectivePencil& p, double tau, cd z) {
  const cd I(0.0, 1.0);
  const double rho = p.rho1;
  if (!p.at_zero) {
    const int n = p.size();
    return 2.0 * (z - p.z0) * p.z0 * rho * MatC::Identity(n, n) + tau * p.M1z0;
  }
  const MatC Id = MatC::Identity(6, 6);
  const auto& M = p.M;
  return z * z * rho * Id + tau * M[0] - I * tau * z * M[1] - tau * tau * M[2] -
         tau * z * z * (M[3] + 2.0 * rho * M[0]) - std::pow(z, 4) * rho * rho * Id - I * tau * z * z * z * M[4] -
         tau * tau * z * M[5];
}

Eigen::VectorXcd pencil_roots(const EffectivePencil& p, double tau) {
  const cd I(0.0, 1.0);
  const double rho = p.rho1;
  if (!p.at_zero) {
    const Eigen::VectorXcd kap = Eigen::ComplexEigenSolver<MatC>(p.M1z0, false).eigenvalues();
    return (p.z0 - tau * kap.array() / (2.0 * rho * p.z0)).matrix();
  }
  const auto& M = p.M;
  const MatC Id = MatC::Identity(6, 6);
  std::array<MatC, 4> C;
  C[0] = tau * M[0] - tau * tau * M[2];
  C[1] = -I * tau * M[1] - tau * tau * M[5];
  C[2] = rho * Id - tau * (M[3] + 2.0 * rho * M[0]);
  C[3] = -I * tau * M[4];
  // Monic form z^4 I + sum_k D_k z^k with D_k = C_4^{-1} C_k and C_4 = -rho^2 I.
  MatC comp = MatC::Zero(24, 24);
  for (int k = 0; k < 3; ++k) comp.block(6 * k, 6 * (k + 1), 6, 6) = Id;
  for (int k = 0; k < 4; ++k) comp.block(18, 6 * k, 6, 6) = C[k] / (rho * rho);
  return Eigen::ComplexEigenSolver<MatC>(comp, false).eigenvalues();
}

VecC pencil_solve(const EffectivePencil& p, double tau, cd z, const VecC& a, double rcond_min) {
  const MatC A = pencil_eval(p, tau, z);
  if (a.size() != A.rows()) config_error("pencil_solve: vector size does not match the pencil");
  Eigen::JacobiSVD<MatC> svd(A);
  const double smax = svd.singularValues()(0), smin = svd.singularValues()(A.rows() - 1);
  if (!(smax > 0) || smin <= rcond_min * smax) {
    const Eigen::VectorXcd r = pencil_roots(p, tau);
    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < r.size(); ++i) dist = std::min(dist, std::abs(r(i) - z));
    numerical_error("at-resonance: effective pencil is singular at z = (" + fmt(z.real()) + ", " + fmt(z.imag()) +
                    "), tau = " + fmt(tau) + "; distance to the nearest branch " + fmt(dist));
  }
  return A.partialPivLu().solve(a);
}

double pencil_inverse_norm(const EffectivePencil& p, double tau, cd z) {
  Eigen::JacobiSVD<MatC> svd(pencil_eval(p, tau, z));
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0)) numerical_error("at-resonance: effective pencil is singular");
  return 1.0 / smin;
}

PoleDecomposition pole_decomposition_generic(const SpectralLadder& L, double kappa, double tau, cd w, const VecC& a) {
  check_ladder_args(tau);
  const LadderLevel* lev = L.find(kappa, 1e-6);
  if (!lev) config_error("pole decomposition: kappa = " + fmt(kappa) + " is not in L0");
  if (lev->admissible)
    config_error("regime error: the generic decomposition requires kappa outside the admissible set");
  if (a.size() != 6) config_error("pole decomposition: vector must have 6 entries");
  const cd I(0.0, 1.0);
  const double rho = L.rho1, st = std::sqrt(tau);
  PoleDecomposition d;
  d.regime = BranchRegime::Generic;
  d.tau = tau;
  d.scaled_freq = w;
  d.z = st * w;
  d.pole_sum = VecC::Zero(6);
  double kmin = std::numeric_limits<double>::infinity();
  for (const auto& s : lev->l1) {
    PoleTerm t;
    t.kappa1 = s.value;
    t.denominator = rho * w * w + lev->kappa - I * w * s.value * st;
    t.numerator = s.projection.cast<cd>() * a;
    t.contribution = t.numerator / (tau * t.denominator);
    d.pole_sum += t.contribution;
    d.poles.push_back(t);
    kmin = std::min(kmin, std::abs(s.value));
  }
  const MatC Q = lev->Q.cast<cd>();
  const int n = lev->multiplicity();
  const MatC red = (rho * w * w + lev->kappa) * MatC::Identity(n, n) -
                   I * st * w * (lev->Q.transpose() * L.M[1] * lev->Q).cast<cd>();
  d.leading_solve = Q * red.partialPivLu().solve(Q.transpose() * a) / tau;
  d.full_solve = pencil_solve(zero_pencil(L), tau, d.z, a);
  d.remainder = (d.full_solve - d.pole_sum).norm();
  const double g = std::abs(rho * w * w + lev->kappa);
  d.remainder_scale = (g + st) / (tau * std::sqrt(g * g + st * std::abs(w) * kmin)) * a.norm();
  return d;
}

PoleDecomposition pole_decomposition_exceptional(const SpectralLadder& L, double kappa, double kappa2, int sign,
                                                 double tau, cd w, const VecC& a) {
  check_ladder_args(tau);
  if (sign != 1 && sign != -1) config_error("pole decomposition: sign must be +1 or -1");
  const LadderLevel* lev = L.find(kappa, 1e-6);
  if (!lev) config_error("pole decomposition: kappa = " + fmt(kappa) + " is not in L0");
  if (!lev->admissible) config_error("regime error: kappa = " + fmt(kappa) + " is not in the admissible set");
  if (!lev->kernel_inclusion)
    config_error("regime error: the eigenspace of kappa = " + fmt(kappa) + " is not contained in Ker M2");
  const L2Entry* e = nullptr;
  for (const auto& x : lev->l2)
    if (std::abs(x.value - kappa2) <= 1e-6 * std::max(1.0, std::abs(kappa2))) e = &x;
  if (!e) config_error("pole decomposition: kappa'' = " + fmt(kappa2) + " is not in L2");
  if (a.size() != 6) config_error("pole decomposition: vector must have 6 entries");
  const cd I(0.0, 1.0);
  const double rho = L.rho1, st = std::sqrt(tau), s = std::sqrt(-rho * kappa);
  PoleDecomposition d;
  d.regime = BranchRegime::Exceptional;
  d.tau = tau;
  d.scaled_freq = w;
  d.z = sign * st * std::sqrt(-kappa / rho) + tau * st * w;
  d.pole_sum = VecC::Zero(6);
  const cd shift = w - double(sign) * kappa2 / (2.0 * s);
  double kmin = std::numeric_limits<double>::infinity();
  for (const auto& sp : e->l3) {
    PoleTerm t;
    t.kappa1 = sp.value;
    t.denominator = shift - I * sp.value * st / (2.0 * rho);
    t.numerator = sp.projection.cast<cd>() * a;
    t.contribution = double(sign) / (2.0 * s) * t.numerator / (tau * tau * t.denominator);
    d.pole_sum += t.contribution;
    d.poles.push_back(t);
    kmin = std::min(kmin, std::abs(sp.value));
  }
  const MatC B = e->basis.cast<cd>();
  const int n = static_cast<int>(e->basis.cols());
  const MatC red = shift * MatC::Identity(n, n) - I * st / (2.0 * rho) * sym(e->l3_matrix).cast<cd>();
  d.leading_solve = double(sign) / (2.0 * s * tau * tau) * (B * red.partialPivLu().solve(B.transpose() * a));
  d.full_solve = pencil_solve(zero_pencil(L), tau, d.z, a);
  d.remainder = (d.full_solve - d.pole_sum).norm();
  const MatC PE = (lev->Q0 * lev->Q0.transpose()).cast<cd>();
  const double pa = (PE * a).norm(), qa = (a - PE * a).norm();
  d.remainder_scale = (std::abs(shift) + st) * (pa + tau * qa) /
                      (tau * tau * std::sqrt(std::abs(shift) + st * kmin / (2.0 * rho)));
  return d;
}

}  // namespace elastres
