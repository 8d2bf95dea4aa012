#include "elastres/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "elastres/direct_oracle.hpp"
#include "elastres/errors.hpp"
#include "elastres/linalg.hpp"
#include "elastres/resolvent.hpp"

namespace elastres {

const char* const kToolVersion = "1.0.0";

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

std::string mesh_fingerprint(const SurfaceMesh& m) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& v : m.vertices) os << v(0) << ' ' << v(1) << ' ' << v(2) << '\n';
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  return fnv1a_hex(os.str());
}

std::string medium_text(const ElasticMedium& m) {
  std::ostringstream os;
  os.precision(17);
  os << m.lambda << ',' << m.mu << ',' << m.rho;
  return os.str();
}

bool wants(const RunConfig& c, const std::string& regime) {
  return std::find(c.regimes.begin(), c.regimes.end(), regime) != c.regimes.end();
}

// Number of nearly coincident eigenvalues tracked by the direct oracle for a branch.
int branch_cluster(const SpectralLadder& L, const ResonanceBranch& b) {
  const LadderLevel* lev = L.find(b.kappa, 1e-6);
  if (!lev) return 1;
  if (b.regime == BranchRegime::Generic) {
    for (const auto& s : lev->l1)
      if (std::abs(s.value - b.kappa1) <= 1e-6 * std::max(1.0, std::abs(s.value)))
        return static_cast<int>(s.basis.cols());
  } else {
    for (const auto& e : lev->l2)
      if (std::abs(e.value - b.kappa2) <= 1e-6 * std::max(1.0, std::abs(e.value)))
        for (const auto& s : e.l3)
          if (std::abs(s.value - b.kappa3) <= 1e-6 * std::max(1.0, std::abs(s.value)))
            return static_cast<int>(s.basis.cols());
  }
  return lev->multiplicity();
}

std::vector<ResonanceBranch> selected_branches(const Pipeline& p, const SpectralLadder& L, double tau) {
  std::vector<ResonanceBranch> out;
  for (auto& b : subwavelength_resonances(L, tau)) {
    if (b.sign < 0) continue;  // mirror images -conj(z)
    if (b.regime == BranchRegime::Generic && !wants(p.config(), "generic")) continue;
    if (b.regime == BranchRegime::Exceptional && !wants(p.config(), "exceptional")) continue;
    out.push_back(b);
  }
  return out;
}

std::string csv_header_field() { return "x,y,z,re_u1,im_u1,re_u2,im_u2,re_u3,im_u3,regime\n"; }

json check_json(const CheckResult& c) {
  return json{{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"threshold", c.threshold},
              {"detail", c.detail}};
}

}  // namespace

std::string zero_data_to_json(const ZeroData& z) {
  json j;
  j["schema"] = "zerodata-1";
  j["effset"] = json::parse(effset_to_json(z.set));
  j["fd_vs_analytic"] = z.fd_vs_analytic;
  j["rigid_dtn_residual"] = z.rigid_dtn_residual;
  return j.dump();
}

ZeroData zero_data_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    config_error(std::string("zero-frequency cache: ") + e.what());
  }
  if (j.value("schema", "") != "zerodata-1") config_error("zero-frequency cache: unknown schema");
  ZeroData z;
  z.set = effset_from_json(j.at("effset").dump());
  z.fd_vs_analytic = j.at("fd_vs_analytic").get<std::array<double, 3>>();
  z.rigid_dtn_residual = j.at("rigid_dtn_residual").get<std::array<double, 6>>();
  return z;
}

Pipeline::Pipeline(RunConfig cfg, std::string command, std::string config_hash,
                   std::map<std::string, std::string> config)
    : cfg_(std::move(cfg)), command_(std::move(command)), hash_(std::move(config_hash)), config_(std::move(config)) {}

const SurfaceMesh& Pipeline::mesh() {
  if (!mesh_) {
    enter("mesh");
    mesh_ = cfg_.mesh_builtin ? builtin_mesh(cfg_.shape, cfg_.mesh_level) : load_mesh(cfg_.mesh_file);
  }
  return *mesh_;
}

BoundaryAssembler& Pipeline::assembler() {
  if (!as_) as_ = std::make_unique<BoundaryAssembler>(mesh());
  return *as_;
}

const RigidMotionBasis& Pipeline::basis() {
  if (!basis_) basis_ = rigid_motion_basis(mesh());
  return *basis_;
}

double Pipeline::mesh_tol() {
  if (!mesh_tol_) {
    enter("operators");
    mesh_tol_ = mesh_tolerance(assembler(), cfg_.exterior, cfg_.interior);
  }
  return *mesh_tol_;
}

std::string Pipeline::cache_key() const {
  std::ostringstream os;
  os.precision(17);
  os << "zerodata-1|" << mesh_fingerprint(*mesh_) << '|' << medium_text(cfg_.exterior) << '|'
     << medium_text(cfg_.interior) << '|' << cfg_.fd_step;
  return fnv1a_hex(os.str());
}

const ZeroData& Pipeline::zero() {
  if (zero_) return *zero_;
  mesh();
  const fs::path dir = cfg_.cache_dir.empty() ? fs::path(cfg_.out_dir) / "cache" : fs::path(cfg_.cache_dir);
  const fs::path file = dir / ("zero-" + cache_key() + ".json");
  const fs::path nfile = dir / ("dtn0-" + cache_key() + ".elop");
  if (cfg_.cache && fs::exists(file) && fs::exists(nfile)) {
    enter("cache");
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    ZeroData z = zero_data_from_json(ss.str());
    z.n0 = load_operator(nfile.string()).mat;
    zero_ = std::move(z);
    return *zero_;
  }
  const double tol = mesh_tol();
  enter("dtn_derivatives");
  const DtNDerivatives d = dtn_derivatives(assembler(), cfg_.exterior, cfg_.interior, cfg_.fd_step);
  enter("correctors");
  const auto corr = correctors(assembler(), cfg_.interior, basis(), d.n0, d.d[0]);
  enter("effective");
  ZeroData z;
  z.set = effective_set_zero(assembler(), cfg_.interior, basis(), d, corr);
  z.set.mesh_tolerance = tol;
  z.fd_vs_analytic = d.fd_vs_analytic;
  z.n0 = d.n0;
  const Eigen::PartialPivLU<MatC> lu(d.S0.cast<cd>());
  const MatC E = basis().traces(mesh()).cast<cd>();
  const auto& W = assembler().mass();
  for (int k = 0; k < 6; ++k) {
    const VecC s = lu.solve(E.col(k));
    const VecC r = d.n0 * E.col(k) + s;
    z.rigid_dtn_residual[k] = std::sqrt(std::abs(r.dot(W * r)) / std::abs(s.dot(W * s)));
  }
  if (cfg_.cache) {
    enter("cache");
    fs::create_directories(dir);
    std::ofstream(file) << zero_data_to_json(z);
    BoundaryOperatorMatrix op;
    op.kind = OperatorKind::DtN;
    op.phase = 0;
    op.mat = z.n0;
    save_operator(op, nfile.string());
  }
  zero_ = std::move(z);
  return *zero_;
}

const SpectralLadder& Pipeline::ladder() {
  if (!ladder_) {
    const ZeroData& z = zero();
    enter("ladder");
    ladder_ = build_ladder(z.set, cfg_.ladder);
  }
  return *ladder_;
}

std::vector<NeumannEigenpair> Pipeline::spectrum() {
  BoundaryAssembler& as = assembler();
  enter("spectrum");
  NeumannOptions o;
  o.scan_step = cfg_.scan_step;
  return neumann_spectrum(as, cfg_.interior, cfg_.spectrum_lo, cfg_.spectrum_hi, o);
}

const NeumannEigenpair& Pipeline::wavelength_pair() {
  if (!wpair_) {
    const auto sp = spectrum();
    std::vector<NeumannEigenpair> pos;
    for (const auto& p : sp)
      if (!p.rigid) pos.push_back(p);
    if (cfg_.wavelength_index >= static_cast<int>(pos.size()))
      config_error("wavelength.index = " + std::to_string(cfg_.wavelength_index) + " but the window [" +
                   std::to_string(cfg_.spectrum_lo) + ", " + std::to_string(cfg_.spectrum_hi) + "] holds " +
                   std::to_string(pos.size()) + " non-zero eigenfrequencies");
    wpair_ = pos[cfg_.wavelength_index];
    if (cfg_.wavelength_interp && cfg_.exterior.lambda == cfg_.interior.lambda &&
        cfg_.exterior.mu == cfg_.interior.mu && cfg_.exterior.rho == cfg_.interior.rho) {
      enter("interpolation");
      assembler().enable_interpolation(cfg_.interior, wpair_->z0_complex, cfg_.wavelength_radius);
    }
  }
  return *wpair_;
}

const ReducedM1& Pipeline::wavelength_m1() {
  if (!wm1_) {
    const NeumannEigenpair& p = wavelength_pair();
    enter("wavelength_m1");
    wm1_ = m1_reduced(assembler(), cfg_.exterior, cfg_.interior, p);
  }
  return *wm1_;
}

std::string Pipeline::path(const std::string& name) const { return (fs::path(cfg_.out_dir) / name).string(); }

void Pipeline::write_file(const std::string& name, const std::string& content) {
  fs::create_directories(cfg_.out_dir);
  std::ofstream f(path(name));
  if (!f) config_error("cannot write " + path(name));
  f << content;
  outputs_.push_back(name);
}

void Pipeline::write_manifest(const std::string& status, const std::string& error) {
  json j;
  j["tool"] = "elastres";
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["config_hash"] = hash_;
  j["config"] = config_;
  j["status"] = status;
  if (status != "ok") {
    j["failure_stage"] = stage_;
    j["error"] = error;
  }
  j["outputs"] = outputs_;
  fs::create_directories(cfg_.out_dir);
  std::ofstream(path("MANIFEST.json")) << j.dump(2) << "\n";
}

int cmd_spectrum(Pipeline& p) {
  const auto sp = p.spectrum();
  std::ostringstream csv;
  csv.precision(17);
  csv << "index,z0,re_root,im_root,multiplicity,gap,root_residual\n";
  json j;
  j["pairs"] = json::array();
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const auto& e = sp[i];
    csv << i << ',' << e.z0 << ',' << e.z0_complex.real() << ',' << e.z0_complex.imag() << ',' << e.multiplicity
        << ',' << e.gap << ',' << e.root_residual << '\n';
    json q{{"z0", e.z0}, {"root", cjson(e.z0_complex)}, {"multiplicity", e.multiplicity}, {"gap", e.gap},
           {"root_residual", e.root_residual}, {"dip_singular_values", e.dip_singular_values}};
    if (!e.rigid) {
      p.enter("wavelength_m1");
      const ReducedM1 r = m1_reduced(p.assembler(), p.config().exterior, p.config().interior, e);
      json ks = json::array();
      bool pos = true;
      for (int k = 0; k < r.kappa.size(); ++k) {
        ks.push_back(cjson(r.kappa(k)));
        pos = pos && r.kappa(k).imag() > 0.0;
      }
      q["kappa"] = ks;
      q["im_kappa_positive"] = pos;
    }
    j["pairs"].push_back(q);
  }
  p.enter("output");
  p.write_file("spectrum.csv", csv.str());
  p.write_file("spectrum.json", j.dump(2) + "\n");
  return 0;
}

int cmd_effective(Pipeline& p) {
  const ZeroData& z = p.zero();
  const SpectralLadder& L = p.ladder();
  EffectiveTolerances tol;
  tol.mesh_tolerance = z.set.mesh_tolerance;
  tol.margin_factor = p.config().margin_factor;
  tol.rank_tol = p.config().ladder.rank_tol;
  const EffectiveReport rep = validate_effective(z.set, tol);
  p.enter("output");
  p.write_file("effset.json", effset_to_json(z.set) + "\n");
  p.write_file("ladder.json", ladder_to_json(L) + "\n");
  std::ostringstream csv;
  csv.precision(17);
  csv << "check,pass,measured,threshold\n";
  for (const auto& c : rep.checks) csv << c.name << ',' << (c.pass ? 1 : 0) << ',' << c.measured << ',' << c.threshold << '\n';
  p.write_file("effective_report.csv", csv.str());
  std::ostringstream eig;
  eig.precision(17);
  eig << "kappa,multiplicity,admissible,margin_over_mesh_tol\n";
  for (const auto& l : L.levels)
    eig << l.kappa << ',' << l.multiplicity() << ',' << (l.admissible ? 1 : 0) << ','
        << -l.kappa / std::max(z.set.mesh_tolerance, 1e-300) << '\n';
  p.write_file("m1_eigenvalues.csv", eig.str());
  BoundaryOperatorMatrix op;
  op.kind = OperatorKind::DtN;
  op.mat = z.n0;
  save_operator(op, p.path("dtn0.elop"));
  p.record_output("dtn0.elop");
  return 0;
}

int cmd_validate(Pipeline& p) {
  const ZeroData& z = p.zero();
  const SpectralLadder& L = p.ladder();
  p.enter("validate");
  EffectiveTolerances tol;
  tol.mesh_tolerance = z.set.mesh_tolerance;
  tol.margin_factor = p.config().margin_factor;
  tol.rank_tol = p.config().ladder.rank_tol;
  std::vector<CheckResult> checks = validate_effective(z.set, tol).checks;

  const SignFacts sf = sign_facts(L);
  checks.push_back({"L0_negative", sf.l0_negative, 0.0, 0.0, sf.detail});
  checks.push_back({"L1_nonpositive", sf.l1_nonpositive, 0.0, 0.0, sf.detail});
  checks.push_back({"L3_negative", sf.l3_negative, 0.0, 0.0, sf.detail});

  double rmax = 0.0;
  for (double r : z.rigid_dtn_residual) rmax = std::max(rmax, r);
  const double rthr = 10.0 * z.set.mesh_tolerance;
  checks.push_back({"DtN_rigid_identity", rmax <= rthr, rmax, rthr, "max over the six rigid motions"});
  for (int k : {0, 2}) {
    const double v = z.fd_vs_analytic[k];
    checks.push_back({"DtN_derivative_" + std::to_string(k + 1) + "_fd_vs_analytic", v >= 0.0 && v <= 1e-4, v, 1e-4,
                      "relative Frobenius disagreement"});
  }
  if (z.set.origin_symmetric) {
    const auto adm = L.admissible_set();
    checks.push_back({"admissible_set_nonempty", !adm.empty(), static_cast<double>(adm.size()), 1.0,
                      "origin-symmetric mesh"});
  }
  for (const auto& l : L.levels)
    if (l.admissible) {
      const MicroClass c = classify_micro(L, l.kappa);
      const MicroClass want = l.kernel_inclusion ? MicroClass::Dipole : MicroClass::OutOfScope;
      std::ostringstream nm;
      nm.precision(6);
      nm << "classify_kappa_" << l.kappa;
      checks.push_back({nm.str(), c == want, 0.0, 0.0, to_string(c)});
    }

  bool ok = true;
  json j;
  j["checks"] = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "check,pass,measured,threshold\n";
  for (const auto& c : checks) {
    ok = ok && c.pass;
    j["checks"].push_back(check_json(c));
    csv << c.name << ',' << (c.pass ? 1 : 0) << ',' << c.measured << ',' << c.threshold << '\n';
  }
  json margins = json::array();
  // One entry per eigenvalue of M1(0), with the ladder level it belongs to.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> m1(0.5 * (L.M[0] + L.M[0].transpose()), Eigen::EigenvaluesOnly);
  for (int k = 0; k < m1.eigenvalues().size(); ++k) {
    const double v = m1.eigenvalues()(k);
    const LadderLevel* lev = L.find(v, 1e-3 * std::max(1.0, std::abs(v)));
    margins.push_back(json{{"eigenvalue", v},
                           {"level_kappa", lev ? json(lev->kappa) : json()},
                           {"margin_over_mesh_tol", -v / std::max(z.set.mesh_tolerance, 1e-300)}});
  }
  j["m1_eigenvalue_margins"] = margins;
  j["mesh_tolerance"] = z.set.mesh_tolerance;
  j["pass"] = ok;
  p.enter("output");
  p.write_file("validation.json", j.dump(2) + "\n");
  p.write_file("validation.csv", csv.str());
  return ok ? 0 : 4;
}

int cmd_resonances(Pipeline& p) {
  const RunConfig& c = p.config();
  std::vector<ResonanceRow> rows;
  const bool sub = wants(c, "generic") || wants(c, "exceptional");
  CharacteristicOperator op(p.assembler(), c.exterior, c.interior);
  if (sub) {
    const SpectralLadder& L = p.ladder();
    for (double tau : c.taus) {
      p.enter("resonances");
      for (const auto& b : selected_branches(p, L, tau)) {
        rows.push_back({tau, b.id, "asym", b.z, 0.0});
        if (!c.direct) continue;
        p.enter("direct_oracle");
        RefineOptions ro;
        ro.cluster = branch_cluster(L, b);
        ro.accept_ratio = c.accept_ratio;
        const DirectResonance r = refine_root(op, b.z, tau, ro);
        rows.push_back({tau, b.id, "direct", r.z, r.residual});
      }
    }
  }
  if (wants(c, "wavelength")) {
    const NeumannEigenpair& pair = p.wavelength_pair();
    const ReducedM1& m1 = p.wavelength_m1();
    for (double tau : c.taus) {
      p.enter("resonances");
      const auto br = wavelength_resonances(m1.matrix, m1.z0c, tau, c.interior.rho);
      for (const auto& b : br) rows.push_back({tau, b.id, "asym", b.z, 0.0});
      if (!c.direct || br.empty()) continue;
      p.enter("direct_oracle");
      RefineOptions ro;
      ro.cluster = pair.multiplicity;
      ro.accept_ratio = c.accept_ratio;
      const DirectResonance r = refine_root(op, br[0].z, tau, ro);
      rows.push_back({tau, "wl-cluster", "direct", r.z, r.residual});
    }
  }
  p.enter("output");
  write_resonance_csv(rows, p.path("resonances.csv"));
  p.record_output("resonances.csv");
  return 0;
}

int cmd_sweep(Pipeline& p) {
  const RunConfig& c = p.config();
  if (c.taus.size() < 2) config_error("sweep needs at least two tau values");
  CharacteristicOperator op(p.assembler(), c.exterior, c.interior);
  struct Series {
    std::string id, regime;
    int expected_order = 1;
    std::vector<double> tau;
    std::vector<cd> asym, direct;
  };
  std::vector<Series> series;
  if (wants(c, "generic") || wants(c, "exceptional")) {
    const SpectralLadder& L = p.ladder();
    // One branch per selected regime: the first '+' branch of each kind.
    std::vector<ResonanceBranch> pick;
    for (const auto& b : selected_branches(p, L, c.taus[0])) {
      bool seen = false;
      for (const auto& q : pick) seen = seen || q.regime == b.regime;
      if (!seen) pick.push_back(b);
    }
    for (const auto& b0 : pick) {
      Series s;
      s.id = b0.id;
      s.regime = to_string(b0.regime);
      s.expected_order = b0.im_order;
      for (double tau : c.taus) {
        p.enter("sweep");
        ResonanceBranch b = b0;
        b.tau = tau;
        b.z = b.evaluate(tau);
        RefineOptions ro;
        ro.cluster = branch_cluster(L, b);
        ro.accept_ratio = c.accept_ratio;
        p.enter("direct_oracle");
        const DirectResonance r = refine_root(op, b.z, tau, ro);
        s.tau.push_back(tau);
        s.asym.push_back(b.z);
        s.direct.push_back(r.z);
      }
      series.push_back(std::move(s));
    }
  }
  if (wants(c, "wavelength")) {
    const NeumannEigenpair& pair = p.wavelength_pair();
    const ReducedM1& m1 = p.wavelength_m1();
    Series s;
    s.id = "wl0";
    s.regime = "wavelength";
    for (double tau : c.taus) {
      p.enter("sweep");
      const auto br = wavelength_resonances(m1.matrix, m1.z0c, tau, c.interior.rho);
      RefineOptions ro;
      ro.cluster = pair.multiplicity;
      ro.accept_ratio = c.accept_ratio;
      p.enter("direct_oracle");
      const DirectResonance r = refine_root(op, br.at(0).z, tau, ro);
      s.tau.push_back(tau);
      s.asym.push_back(br[0].z);
      s.direct.push_back(r.z);
    }
    series.push_back(std::move(s));
  }
  p.enter("output");
  json j;
  j["branches"] = json::array();
  for (const auto& s : series) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "tau,re_asym,im_asym,re_direct,im_direct,defect\n";
    std::vector<double> imd, ima, defect;
    for (std::size_t i = 0; i < s.tau.size(); ++i) {
      const double d = std::abs(s.direct[i] - s.asym[i]);
      csv << s.tau[i] << ',' << s.asym[i].real() << ',' << s.asym[i].imag() << ',' << s.direct[i].real() << ','
          << s.direct[i].imag() << ',' << d << '\n';
      imd.push_back(std::abs(s.direct[i].imag()));
      ima.push_back(std::abs(s.asym[i].imag()));
      defect.push_back(d);
    }
    p.write_file("sweep_" + s.id + ".csv", csv.str());
    json b{{"id", s.id}, {"regime", s.regime}, {"tau", s.tau}, {"defect", defect}};
    if (s.regime == "wavelength") {
      std::vector<double> dt;
      for (std::size_t i = 0; i < s.tau.size(); ++i) dt.push_back(defect[i] / s.tau[i]);
      b["defect_over_tau"] = dt;
    } else {
      b["expected_im_order"] = s.expected_order;
      b["slope_im_direct"] = loglog_slope(s.tau, imd);
      b["slope_im_asym"] = loglog_slope(s.tau, ima);
    }
    j["branches"].push_back(b);
  }
  p.write_file("sweep.json", j.dump(2) + "\n");
  return 0;
}

int cmd_field(Pipeline& p) {
  const RunConfig& c = p.config();
  std::vector<Vec3> pts;
  const Vec3 dir = c.ray.normalized();
  for (int i = 0; i < c.n_points; ++i) {
    const double r = c.n_points == 1 ? c.r_min : c.r_min + (c.r_max - c.r_min) * i / (c.n_points - 1);
    pts.push_back(c.y0 + r * dir);
  }
  MicroOptions mo;
  MicroField mf;
  std::string tag;
  const double tau = c.field_tau, eps = c.eps;
  if (c.field_regime == FieldRegime::PointScatterer) {
    const NeumannEigenpair& pair = p.wavelength_pair();
    const ReducedM1& m1 = p.wavelength_m1();
    p.enter("field");
    const double omega = c.field_omega > 0.0 ? c.field_omega : pair.z0 / eps;
    mf = point_scatterer_field(p.assembler(), c.exterior, c.interior, pair, m1.matrix, tau, eps, omega, c.forcing,
                               c.y0, pts, mo);
    tag = "point";
  } else {
    const SpectralLadder& L = p.ladder();
    p.enter("field");
    const double rho = L.rho1;
    const LadderLevel* lev = nullptr;
    for (const auto& l : L.levels) {
      const bool mono = !l.admissible, dip = l.admissible && l.kernel_inclusion;
      if (!lev && ((c.field_regime == FieldRegime::Monopole && mono) || (c.field_regime == FieldRegime::Dipole && dip)))
        lev = &l;
    }
    if (!lev)
      config_error(std::string("regime error: no eigenvalue of M1(0) supports the ") +
                   (c.field_regime == FieldRegime::Monopole ? "monopole" : "dipole") + " field");
    if (c.field_regime == FieldRegime::Monopole) {
      const double omega = c.field_omega > 0.0 ? c.field_omega : std::sqrt(tau) * std::sqrt(-lev->kappa / rho) / eps;
      mf = monopole_field(p.assembler(), c.exterior, p.basis(), L, lev->kappa, tau, eps, omega, c.forcing, c.y0, pts,
                          mo);
      tag = "monopole";
    } else {
      if (lev->l2.empty()) numerical_error("dipole field: the admissible level has no L2 entries");
      const double k2 = lev->l2[0].value, s = std::sqrt(-rho * lev->kappa);
      const double omega = c.field_omega > 0.0 ? c.field_omega
                                               : (c.field_sign * std::sqrt(tau) * std::sqrt(-lev->kappa / rho) +
                                                  std::pow(tau, 1.5) * c.field_sign * k2 / (2.0 * s)) / eps;
      mf = dipole_field(p.assembler(), c.exterior, p.basis(), L, lev->kappa, k2, c.field_sign, tau, eps, omega,
                        c.forcing, c.y0, pts, mo);
      tag = "dipole";
    }
  }
  p.enter("output");
  std::ostringstream csv;
  csv.precision(17);
  csv << csv_header_field();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    csv << pts[i](0) << ',' << pts[i](1) << ',' << pts[i](2);
    for (int k = 0; k < 3; ++k) csv << ',' << mf.field(k, i).real() << ',' << mf.field(k, i).imag();
    csv << ',' << tag << '\n';
  }
  p.write_file("field.csv", csv.str());
  json j;
  j["regime"] = tag;
  j["scaled_freq"] = cjson(mf.scaled_freq);
  json coef = json::array(), rhs = json::array(), den = json::array();
  for (int k = 0; k < mf.amplitude.coefficients.size(); ++k) coef.push_back(cjson(mf.amplitude.coefficients(k)));
  for (int k = 0; k < mf.amplitude.rhs.size(); ++k) rhs.push_back(cjson(mf.amplitude.rhs(k)));
  for (const auto& t : mf.amplitude.poles)
    den.push_back(json{{"kappa", t.kappa1}, {"denominator", cjson(t.denominator)}, {"abs", std::abs(t.denominator)}});
  j["coefficients"] = coef;
  j["rhs"] = rhs;
  j["denominators"] = den;
  j["remainder_scale"] = mf.amplitude.remainder_scale;
  json mono = json::array();
  for (int k = 0; k < 3; ++k) mono.push_back(cjson(mf.monopole(k)));
  j["monopole_vector"] = mono;
  json dip = json::array();
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) dip.push_back(cjson(mf.dipole(k, l)));
  j["dipole_tensor"] = dip;
  p.write_file("amplitude.json", j.dump(2) + "\n");
  return 0;
}

}  // namespace elastres
