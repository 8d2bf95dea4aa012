#include "elastres/direct_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "elastres/errors.hpp"
#include "elastres/linalg.hpp"
#include "elastres/parallel.hpp"

namespace elastres {

namespace {

std::string fmtz(cd z) {
  std::ostringstream os;
  os.precision(10);
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

bool same(const ElasticMedium& a, const ElasticMedium& b) {
  return a.lambda == b.lambda && a.mu == b.mu && a.rho == b.rho;
}

RootSample sample(const CharacteristicOperator& op, cd z, double tau, int cluster, const char* stage) {
  const MatC A = op.matrix(z, tau);
  RootSample s;
  s.z = z;
  const Eigen::PartialPivLU<MatC> lu(A);
  s.sigma = smallest_singular(A, lu, std::max(2, cluster), 1e-10).sigma(0);
  s.g = nearest_eigenvalues(A, lu, cluster + 2).values.head(cluster).mean();
  s.stage = stage;
  return s;
}

std::string snapshot(const std::vector<RootSample>& h) {
  std::ostringstream os;
  os.precision(6);
  for (const auto& s : h) os << " [" << s.stage << " z=(" << s.z.real() << "," << s.z.imag() << ") smin=" << s.sigma << "]";
  return os.str();
}

}  // namespace

CharacteristicOperator::CharacteristicOperator(const BoundaryAssembler& as, const ElasticMedium& exterior,
                                               const ElasticMedium& interior)
    : as_(as), m0_(exterior), m1_(interior), same_media_(same(exterior, interior)) {
  exterior.validate();
  interior.validate();
}

MatC CharacteristicOperator::matrix(cd z, double tau) const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) config_error("tau must be non-negative and finite");
  if (same_media_) {
    MatC K;
    as_.assemble(m1_, z, nullptr, &K);
    MatC A = (1.0 - tau) * K;
    A.diagonal().array() += 0.5 * (1.0 + tau);
    return A;
  }
  MatC S1, K1;
  as_.assemble(m1_, z, &S1, &K1);
  MatC A = K1;
  A.diagonal().array() += 0.5;
  if (tau != 0.0) {
    const DtNOperator N(as_, m0_, z);
    A -= tau * (S1 * N.matrix());
  }
  return A;
}

double char_smin(const CharacteristicOperator& op, cd z, double tau) {
  return smallest_singular(op.matrix(z, tau), 2, 1e-10).sigma(0);
}

Eigen::VectorXd char_singular_values(const CharacteristicOperator& op, cd z, double tau, int count) {
  return smallest_singular(op.matrix(z, tau), count + 2, 1e-10).sigma.head(count);
}

DirectResonance refine_root(const CharacteristicOperator& op, cd z_guess, double tau, const RefineOptions& opts) {
  if (opts.cluster < 1) config_error("refine_root: cluster must be at least 1");
  const double scale = std::max(std::abs(z_guess), 0.1);
  const double h = opts.simplex_size > 0 ? opts.simplex_size : 1e-2 * scale;
  const double trust = opts.trust_radius > 0 ? opts.trust_radius : 0.25 * scale;
  DirectResonance out;
  out.tau = tau;
  auto& hist = out.history;
  auto eval = [&](cd z, const char* stage) -> const RootSample& {
    hist.push_back(sample(op, z, tau, opts.cluster, stage));
    return hist.back();
  };

  // Simplex descent of sigma_min over (Re z, Im z).
  std::vector<RootSample> simplex{eval(z_guess, "simplex"), eval(z_guess + h, "simplex"),
                                  eval(z_guess + cd(0.0, h), "simplex")};
  out.sigma_scale = std::max({simplex[0].sigma, simplex[1].sigma, simplex[2].sigma});
  int used = 3;
  auto by_sigma = [](const RootSample& a, const RootSample& b) { return a.sigma < b.sigma; };
  while (used < opts.max_simplex) {
    std::sort(simplex.begin(), simplex.end(), by_sigma);
    const cd centroid = 0.5 * (simplex[0].z + simplex[1].z);
    const cd zr = centroid + (centroid - simplex[2].z);
    const RootSample r = eval(zr, "simplex");
    ++used;
    if (r.sigma < simplex[0].sigma && used < opts.max_simplex) {
      const RootSample e = eval(centroid + 2.0 * (centroid - simplex[2].z), "simplex");
      ++used;
      simplex[2] = e.sigma < r.sigma ? e : r;
    } else if (r.sigma < simplex[1].sigma) {
      simplex[2] = r;
    } else if (used < opts.max_simplex) {
      const RootSample c = eval(centroid + 0.5 * (simplex[2].z - centroid), "simplex");
      ++used;
      if (c.sigma < simplex[2].sigma)
        simplex[2] = c;
      else
        simplex[1] = eval(simplex[0].z + 0.5 * (simplex[1].z - simplex[0].z), "simplex"), ++used;
    }
  }
  std::sort(simplex.begin(), simplex.end(), by_sigma);

  // Muller iteration on g(z), seeded by the three simplex vertices (best last).
  cd z0 = simplex[2].z, z1 = simplex[1].z, z2 = simplex[0].z;
  cd f0 = simplex[2].g, f1 = simplex[1].g, f2 = simplex[0].g;
  bool conv = false;
  for (int it = 0; it < opts.max_polish; ++it) {
    const cd q = (z2 - z1) / (z1 - z0);
    const cd A = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
    const cd B = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
    const cd C = (1.0 + q) * f2;
    const cd disc = std::sqrt(B * B - 4.0 * A * C);
    const cd den = std::abs(B + disc) >= std::abs(B - disc) ? B + disc : B - disc;
    cd z3;
    if (std::abs(den) == 0.0) {
      // Degenerate quadratic model: fall back to the secant step.
      if (f2 == f1) break;
      z3 = z2 - f2 * (z2 - z1) / (f2 - f1);
    } else {
      z3 = z2 - (z2 - z1) * 2.0 * C / den;
    }
    if (!std::isfinite(z3.real()) || !std::isfinite(z3.imag()) || std::abs(z3 - z_guess) > trust)
      numerical_error("no-root: polishing left the trust region of radius " + std::to_string(trust) + " around " +
                      fmtz(z_guess) + "; landscape:" + snapshot(hist));
    const double step = std::abs(z3 - z2);
    const RootSample& s = eval(z3, "polish");
    z0 = z1;
    f0 = f1;
    z1 = z2;
    f1 = f2;
    z2 = z3;
    f2 = s.g;
    if (step <= opts.xtol * std::max(1.0, std::abs(z3)) || s.g == cd(0.0)) {
      conv = true;
      break;
    }
  }
  if (!conv)
    numerical_error("no-root: polishing did not converge in " + std::to_string(opts.max_polish) +
                    " iterations near " + fmtz(z_guess) + "; landscape:" + snapshot(hist));
  out.z = z2;
  out.residual = hist.back().sigma;
  out.accept_threshold = opts.accept_tol > 0 ? opts.accept_tol : opts.accept_ratio * out.sigma_scale;
  out.lower_half_plane = out.z.imag() <= opts.im_tol * std::max(1.0, std::abs(out.z));
  if (!(out.residual <= out.accept_threshold))
    numerical_error("spurious-minimum: sigma_min = " + std::to_string(out.residual) + " at " + fmtz(out.z) +
                    " exceeds the acceptance threshold " + std::to_string(out.accept_threshold));
  return out;
}

DiskCount count_in_disk(const CharacteristicOperator& op, cd center, double radius, double tau, int grid_density,
                        const RefineOptions& opts) {
  if (!(radius > 0)) config_error("count_in_disk: radius must be positive");
  if (grid_density < 0) config_error("count_in_disk: grid_density must be non-negative");
  std::vector<cd> seeds{center};
  for (int k = 0; k < grid_density; ++k)
    seeds.push_back(center + 0.5 * radius * std::polar(1.0, 2.0 * M_PI * (k + 0.5) / grid_density));
  DiskCount dc;
  dc.seeds = static_cast<int>(seeds.size());
  RefineOptions o = opts;
  if (o.trust_radius <= 0) o.trust_radius = 2.0 * radius;
  if (o.simplex_size <= 0) o.simplex_size = 0.05 * radius;
  for (const cd& s : seeds) {
    DirectResonance r;
    try {
      r = refine_root(op, s, tau, o);
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind("spurious-minimum", 0) == 0) numerical_error("count-unreliable: " + msg);
      continue;  // seeds that wander off without a root do not count
    }
    if (std::abs(r.z - center) > radius) continue;
    bool dup = false;
    for (const auto& x : dc.roots)
      if (std::abs(x.z - r.z) <= 1e-2 * radius) dup = true;
    if (!dup) {
      r.disk = 0;
      dc.roots.push_back(std::move(r));
    }
  }
  dc.count = static_cast<int>(dc.roots.size());
  return dc;
}

std::vector<LandscapeSample> char_landscape(const CharacteristicOperator& op, double re_lo, double re_hi,
                                            double im_lo, double im_hi, int n_re, int n_im, double tau) {
  if (n_re < 1 || n_im < 1) config_error("landscape grid must have at least one sample per axis");
  std::vector<LandscapeSample> out(static_cast<std::size_t>(n_re) * n_im);
  parallel_for(out.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k) % n_re, j = static_cast<int>(k) / n_re;
    const double x = n_re == 1 ? re_lo : re_lo + (re_hi - re_lo) * i / (n_re - 1);
    const double y = n_im == 1 ? im_lo : im_lo + (im_hi - im_lo) * j / (n_im - 1);
    out[k].z = cd(x, y);
    out[k].tau = tau;
    out[k].sigma = char_smin(op, out[k].z, tau);
  });
  return out;
}

void write_landscape_csv(const std::vector<LandscapeSample>& samples, const std::string& path) {
  std::ofstream f(path);
  if (!f) config_error("cannot write " + path);
  f.precision(17);
  f << "re_z,im_z,tau,sigma_min\n";
  for (const auto& s : samples) f << s.z.real() << "," << s.z.imag() << "," << s.tau << "," << s.sigma << "\n";
}

void write_resonance_csv(const std::vector<ResonanceRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) config_error("cannot write " + path);
  f.precision(17);
  f << "tau,branch_id,method,re_z,im_z,residual\n";
  for (const auto& r : rows)
    f << r.tau << "," << r.branch_id << "," << r.method << "," << r.z.real() << "," << r.z.imag() << "," << r.residual
      << "\n";
}

}  // namespace elastres
