// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "elastres/direct_oracle.hpp"
#include "elastres/errors.hpp"
#include "elastres/linalg.hpp"
#include "elastres/resolvent.hpp"

using namespace elastres;

namespace {

const ElasticMedium kMedium{};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

MatC diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal().toDenseMatrix().cast<cd>();
}

EffectiveMatrixSet toy_set() {
  EffectiveMatrixSet s;
  s.has_zero = true;
  s.M[0] = diag({-1, -1, -1, -2, -2, -2});
  s.M[1] = diag({-3, -3, -3, 0, 0, 0});
  s.M[2] = diag({15, 15, 15, 237, 237, 237});
  s.M[3] = diag({-0.1, -0.1, -0.1, -5, -5, -5});
  s.M[4] = diag({7, 7, 7, -5, -5, -5});
  s.M[5] = MatC::Zero(6, 6);
  return s;
}

// Level-2 sphere with its zero-frequency data, shared by several criteria.
struct Sphere2 {
  BoundaryAssembler as{builtin_mesh(ShapeSpec{}, 2)};
  RigidMotionBasis basis = rigid_motion_basis(as.mesh());
  double mesh_tol = 0.0;
  DtNDerivatives derivs;
  EffectiveMatrixSet set;
  SpectralLadder ladder;
  double build_seconds = 0.0;

  Sphere2() {
    const auto t0 = std::chrono::steady_clock::now();
    mesh_tol = mesh_tolerance(as, kMedium, kMedium);
    derivs = dtn_derivatives(as, kMedium, kMedium, 0.0);
    set = effective_set_zero(as, kMedium, basis, derivs, correctors(as, kMedium, basis, derivs.n0, derivs.d[0]));
    set.mesh_tolerance = mesh_tol;
    LadderOptions o;
    o.cluster_tol = 1e-8;
    o.angle_tol = 1e-6;
    ladder = build_ladder(set, o);
    build_seconds = seconds_since(t0);
  }
};

Sphere2& sphere2() {
  static Sphere2 s;
  return s;
}

Outcome effective_structure() {
  auto& s = sphere2();
  EffectiveTolerances tol;
  tol.mesh_tolerance = s.mesh_tol;
  const EffectiveReport r = validate_effective(s.set, tol);
  bool ok = true;
  std::string detail;
  for (const char* name : {"M1_negative_definite", "M2_nsd", "M2_rank_le_3", "M3_symmetric", "M4_symmetric",
                           "M5_symmetric", "M5_negative_on_KerM2"}) {
    const CheckResult* c = r.find(name);
    const bool pass = c && c->pass;
    ok = ok && pass;
    detail += std::string(name) + "=" + (c ? num(c->measured) : "missing") + (pass ? "" : "(fail)") + " ";
  }
  const bool fast = s.build_seconds <= 300.0;
  detail += "mesh_tol=" + num(s.mesh_tol) + " build=" + num(s.build_seconds) + "s";
  return {ok && fast, detail};
}

Outcome origin_symmetry() {
  auto& s = sphere2();
  const MatC& M1 = s.set.M[0];
  const double off = std::max(M1.block(0, 3, 3, 3).norm(), M1.block(3, 0, 3, 3).norm()) / M1.norm();
  const auto adm = s.ladder.admissible_set();
  std::string e;
  for (double k : adm) e += num(k) + " ";
  return {off <= 1e-3 && !adm.empty(), "offblock=" + num(off) + " admissible={ " + e + "}"};
}

struct WavelengthData {
  MatC m1;
  cd z0;
};
std::optional<WavelengthData> g_wavelength;

Outcome wavelength_cluster() {
  const auto t0 = std::chrono::steady_clock::now();
  BoundaryAssembler as(builtin_mesh(ShapeSpec{}, 3));
  // The unit ball's first positive Neumann eigenfrequency (c_s = 1) is the l = 2
  // torsional root x j2'(x) = j2(x), x ~ 2.501; K(z) is interpolated around it.
  as.enable_interpolation(kMedium, cd(2.52, -0.02), 0.1);
  const auto sp = neumann_spectrum(as, kMedium, 2.45, 2.58);
  if (sp.empty()) return {false, "no eigenfrequency found in [2.45, 2.58]"};
  const NeumannEigenpair& pair = sp.front();
  const ReducedM1 red = m1_reduced(as, kMedium, kMedium, pair);
  g_wavelength = WavelengthData{red.matrix, red.z0c};
  bool im_pos = true;
  for (int k = 0; k < red.kappa.size(); ++k) im_pos = im_pos && red.kappa(k).imag() > 0.0;

  const CharacteristicOperator op(as, kMedium, kMedium);
  RefineOptions ro;
  ro.cluster = pair.multiplicity;
  std::vector<double> defects;
  for (double tau : {1e-2, 3e-3, 1e-3}) {
    const auto br = wavelength_resonances(red.matrix, red.z0c, tau);
    // The cluster centre: the mean of the n asymptotic branches.
    cd asym = 0.0;
    for (const auto& b : br) asym += b.z;
    asym /= double(br.size());
    const DirectResonance r = refine_root(op, asym, tau, ro);
    defects.push_back(std::abs(r.z - asym) / tau);
  }
  bool halves = true;
  for (std::size_t i = 1; i < defects.size(); ++i) halves = halves && defects[i - 1] >= 2.0 * defects[i];
  const DiskCount dc = count_in_disk(op, pair.z0_complex, 0.05, 1e-3, 2, ro);
  const double secs = seconds_since(t0);
  std::string d = "z0=" + num(pair.z0) + " n=" + std::to_string(pair.multiplicity) + " defect/tau=";
  for (double v : defects) d += num(v) + " ";
  d += "count=" + std::to_string(dc.count) + " ImKappa>0=" + (im_pos ? "yes" : "no") + " time=" + num(secs) + "s";
  return {halves && dc.count <= pair.multiplicity && im_pos && secs <= 1200.0, d};
}

Outcome subwavelength_dichotomy() {
  auto& s = sphere2();
  const CharacteristicOperator op(s.as, kMedium, kMedium);
  const std::vector<double> taus{1e-2, 3e-3, 1e-3};
  std::optional<ResonanceBranch> generic, exceptional;
  for (const auto& b : subwavelength_resonances(s.ladder, taus[0])) {
    if (b.sign < 0) continue;
    if (b.regime == BranchRegime::Generic && !generic) generic = b;
    if (b.regime == BranchRegime::Exceptional && !exceptional) exceptional = b;
  }
  if (!generic || !exceptional) return {false, "missing generic or exceptional branch"};
  std::string d;
  bool ok = true;
  for (const auto* b : {&*generic, &*exceptional}) {
    const LadderLevel* lev = s.ladder.find(b->kappa);
    RefineOptions ro;
    ro.cluster = lev ? lev->multiplicity() : 1;
    std::vector<double> ims;
    double re_ratio = 0.0;
    for (double tau : taus) {
      const DirectResonance r = refine_root(op, b->evaluate(tau), tau, ro);
      ims.push_back(std::abs(r.z.imag()));
      re_ratio = r.z.real() / std::sqrt(tau) / std::sqrt(-b->kappa / s.ladder.rho1);
    }
    const double slope = loglog_slope(taus, ims);
    const double want = b->regime == BranchRegime::Generic ? 1.0 : 2.0;
    const double tol = b->regime == BranchRegime::Generic ? 0.2 : 0.3;
    const bool pass = std::abs(slope - want) <= tol && std::abs(re_ratio - 1.0) <= 0.02;
    ok = ok && pass;
    d += b->id + ": slope=" + num(slope) + " Re/sqrt(tau)/sqrt(-kappa/rho)=" + num(re_ratio) + " ";
  }
  return {ok, d};
}

Outcome dtn_identities() {
  auto& s = sphere2();
  const DtNOperator N(s.as, kMedium, 0.0);
  const Eigen::MatrixXd E = s.basis.traces(s.as.mesh());
  auto wn = [&](const VecC& v) { return std::sqrt(std::abs(v.dot(s.as.mass() * v))); };
  double worst = 0.0;
  for (int k = 0; k < 6; ++k) {
    const VecC e = E.col(k).cast<cd>();
    const VecC want = -N.solve_S(e);
    worst = std::max(worst, wn(N.matrix() * e - want) / wn(want));
  }
  const double d1 = s.derivs.fd_vs_analytic[0], d3 = s.derivs.fd_vs_analytic[2];
  const bool ok = worst <= 10 * s.mesh_tol && d1 >= 0 && d1 <= 1e-4 && d3 >= 0 && d3 <= 1e-4;
  return {ok, "rigid_residual=" + num(worst) + " (<= " + num(10 * s.mesh_tol) + ") fd1=" + num(d1) +
                  " fd3=" + num(d3)};
}

Outcome kernel_suite() {
  const Vec3 x(1.2, 0.4, -0.3), y(0.1, -0.2, 0.3);
  std::vector<double> hs, res;
  for (double h : {4e-2, 2e-2, 1e-2}) {
    auto u = [&](const Vec3& p) { return Vec3c(green_tensor(kMedium, p, y, cd(1.7, -0.2)).col(1)); };
    hs.push_back(h);
    res.push_back(lame_residual_fd(kMedium, u, x, cd(1.7, -0.2), h).norm());
  }
  const double pde = loglog_slope(hs, res);
  double recip = 0.0;
  for (cd z : {cd(0.0), cd(0.4), cd(2.5, -0.3)}) {
    const Mat3c a = green_tensor(kMedium, x, y, z), b = green_tensor(kMedium, y, x, z);
    recip = std::max(recip, (a - b.transpose()).norm() / a.norm());
  }
  std::vector<double> zs, st;
  for (double z : {1e-1, 3e-2, 1e-2, 3e-3}) {
    zs.push_back(z);
    st.push_back((green_tensor(kMedium, x, y, z) - kelvin_tensor(kMedium, x, y).cast<cd>()).norm());
  }
  const double stat = loglog_slope(zs, st);
  const Vec3 xh = Vec3(0.3, 0.4, 0.5).normalized();
  std::vector<double> R, ff;
  for (double r : {20.0, 40.0, 80.0, 160.0}) {
    const Mat3c G = green_tensor(kMedium, r * xh, y, 1.5);
    const Mat3c far = std::exp(cd(0, 1.5 * r / kMedium.cp())) / r * far_field_kernel(kMedium, WaveBranch::P, xh, y, 1.5) +
                      std::exp(cd(0, 1.5 * r / kMedium.cs())) / r * far_field_kernel(kMedium, WaveBranch::S, xh, y, 1.5);
    R.push_back(r);
    ff.push_back((G - far).norm());
  }
  const double far = -loglog_slope(R, ff);
  const bool ok = pde >= 1.8 && recip <= 1e-14 && stat >= 0.9 && far >= 1.9;
  return {ok, "pde_order=" + num(pde) + " reciprocity=" + num(recip) + " static_order=" + num(stat) +
                  " far_decay=" + num(far)};
}

Outcome pencil_scaling() {
  WavelengthData w;
  std::string src = "level-3 sphere M1(z0)";
  if (g_wavelength) {
    w = *g_wavelength;
  } else {
    w = {diag({-1, -2, -3, -4, -5}) * cd(1, 0.2), 2.5};
    src = "fallback toy M1(z0)";
  }
  const EffectivePencil p = wavelength_pencil(w.m1, w.z0.real(), 1.0);
  std::vector<double> sizes, norms;
  for (double s : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
    // Along tau, along omega and along the diagonal.
    for (auto [tau, dw] : {std::pair{s, 0.0}, std::pair{1e-12, s}, std::pair{s / 2, s / 2}}) {
      sizes.push_back(tau + dw);
      norms.push_back(pencil_inverse_norm(p, tau, w.z0.real() + dw));
    }
  }
  const double slope = loglog_slope(sizes, norms);
  return {std::abs(slope + 1.0) <= 0.1, src + ": slope=" + num(slope)};
}

Outcome pole_decompositions() {
  const EffectiveMatrixSet base = toy_set();
  const Eigen::MatrixXd R = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(6, 6)).householderQ();
  EffectiveMatrixSet rot = base;
  for (auto& M : rot.M) M = (R * M.real() * R.transpose()).cast<cd>();
  double worst = 0.0, worst_den = 0.0;
  VecC a(6);
  a << 1.0, -0.5, 0.25, 2.0, cd(0, 1), 0.3;
  for (const EffectiveMatrixSet* set : std::array<const EffectiveMatrixSet*, 2>{&base, &rot}) {
    const SpectralLadder L = build_ladder(*set);
    for (double tau : {1e-2, 1e-3, 1e-4}) {
      const auto g = pole_decomposition_generic(L, -1.0, tau, cd(1.3, 0.05), a);
      worst = std::max(worst, (g.leading_solve - g.pole_sum).norm() / g.pole_sum.norm());
      const LadderLevel* lev = L.find(-2.0);
      const auto e = pole_decomposition_exceptional(L, -2.0, lev->l2[0].value, 1, tau, cd(50.0, 1.0), a);
      worst = std::max(worst, (e.leading_solve - e.pole_sum).norm() / e.pole_sum.norm());
    }
    for (const auto& b : subwavelength_resonances(L, 1e-3)) {
      const cd w = b.scaled_pole(1e-3);
      VecC m = VecC::Ones(6);
      const Amplitude amp = b.regime == BranchRegime::Generic
                                ? amplitude_generic(L, b.kappa, 1e-3, w, m)
                                : amplitude_exceptional(L, b.kappa, b.kappa2, b.sign, 1e-3, w, m);
      double smallest = 1e300;
      for (const auto& t : amp.poles) smallest = std::min(smallest, std::abs(t.denominator));
      worst_den = std::max(worst_den, smallest);
    }
  }
  return {worst <= 1e-10 && worst_den <= 1e-12,
          "pole_sum_vs_solve=" + num(worst) + " denominator_at_centres=" + num(worst_den)};
}

Outcome classifier() {
  const SpectralLadder L = build_ladder(toy_set());
  EffectiveMatrixSet oos = toy_set();
  oos.M[1] = diag({-3, -3, -3, -1, -1, 0});
  const MicroClass a = classify_micro(L, -1.0), b = classify_micro(L, -2.0),
                   c = classify_micro(build_ladder(oos), -2.0);
  const bool toys = a == MicroClass::Monopole && b == MicroClass::Dipole && c == MicroClass::OutOfScope;
  auto& s = sphere2();
  bool sphere_ok = false;
  std::string sd = "no admissible level";
  for (double k : s.ladder.admissible_set()) {
    const LadderLevel* lev = s.ladder.find(k);
    const MicroClass m = classify_micro(s.ladder, k);
    sd = "kappa=" + num(k) + " inclusion=" + (lev->kernel_inclusion ? "yes" : "no") + " -> " + to_string(m);
    sphere_ok = lev->kernel_inclusion && m == MicroClass::Dipole;
  }
  return {toys && sphere_ok, std::string("toys: ") + to_string(a) + "/" + to_string(b) + "/" + to_string(c) +
                                 " sphere: " + sd};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 effective-matrix structure", effective_structure},
      {"C2 origin symmetry", origin_symmetry},
      {"C3 wavelength cluster", wavelength_cluster},
      {"C4 subwavelength dichotomy", subwavelength_dichotomy},
      {"C5 DtN identities", dtn_identities},
      {"C6 kernel suite", kernel_suite},
      {"C7 pencil scaling", pencil_scaling},
      {"C8 pole decompositions", pole_decompositions},
      {"C9 classifier", classifier},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << " | " << num(seconds_since(t0)) << "s"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
