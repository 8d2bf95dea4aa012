#pragma once
// Direct resonance oracle: scattering resonances are the complex z at which
// A(z, tau) = I/2 + K1(z) - tau S1(z) N(z) is not injective (N the exterior
// Dirichlet-to-Neumann map). Roots are located by a short simplex descent of
// sigma_min(A) followed by Muller polishing of the analytic function
// "mean of the p eigenvalues of A(z) nearest to zero".

#include <string>
#include <vector>

#include "elastres/boundary_ops.hpp"

namespace elastres {

class CharacteristicOperator {
 public:
  CharacteristicOperator(const BoundaryAssembler& as, const ElasticMedium& exterior, const ElasticMedium& interior);
  // With identical media S1 N = -I/2 + K exactly, so A = (1 + tau)/2 I + (1 - tau) K.
  MatC matrix(cd z, double tau) const;
  const BoundaryAssembler& assembler() const { return as_; }

 private:
  const BoundaryAssembler& as_;
  ElasticMedium m0_, m1_;
  bool same_media_;
};

double char_smin(const CharacteristicOperator& op, cd z, double tau);
Eigen::VectorXd char_singular_values(const CharacteristicOperator& op, cd z, double tau, int count);

struct RootSample {
  cd z;
  double sigma = 0.0;  // sigma_min(A)
  cd g;                // mean of the nearest eigenvalues
  std::string stage;   // "simplex" or "polish"
};

struct RefineOptions {
  int cluster = 1;              // number of eigenvalues averaged in the polishing function
  int max_simplex = 6;          // simplex-descent evaluations
  int max_polish = 15;          // Muller iterations
  double simplex_size = 0.0;    // initial simplex edge; 0 selects 1e-2 * max(|z_guess|, 0.1)
  double xtol = 1e-10;          // relative step tolerance of the polishing
  double trust_radius = 0.0;    // 0 selects 0.25 * max(|z_guess|, 0.1)
  double accept_ratio = 1e-4;   // accept when sigma_min <= accept_ratio * (sigma scale of the seed simplex)
  double accept_tol = 0.0;      // absolute acceptance threshold; overrides accept_ratio when positive
  double im_tol = 1e-8;         // slack for Im z <= 0
};

struct DirectResonance {
  cd z;
  double tau = 0.0;
  double residual = 0.0;       // sigma_min(A(z, tau))
  double sigma_scale = 0.0;    // sigma_min scale at the seed
  double accept_threshold = 0.0;
  bool lower_half_plane = true;
  int disk = -1;               // index of the localization disk, -1 if unassigned
  std::vector<RootSample> history;
};

// Throws a numerical error with a landscape snapshot when the polishing does not
// converge, and a spurious-minimum error when the converged point is rejected.
DirectResonance refine_root(const CharacteristicOperator& op, cd z_guess, double tau, const RefineOptions& opts = {});

struct DiskCount {
  int count = 0;
  std::vector<DirectResonance> roots;
  int seeds = 0;
};
// Seeds the centre and grid_density points on the circle of radius radius/2,
// refines each and deduplicates at 1e-2 * radius. Roots leaving the disk are
// dropped; a spurious minimum inside the disk makes the count unreliable (error).
DiskCount count_in_disk(const CharacteristicOperator& op, cd center, double radius, double tau, int grid_density,
                        const RefineOptions& opts = {});

struct LandscapeSample {
  cd z;
  double tau = 0.0;
  double sigma = 0.0;
};
std::vector<LandscapeSample> char_landscape(const CharacteristicOperator& op, double re_lo, double re_hi,
                                            double im_lo, double im_hi, int n_re, int n_im, double tau);
void write_landscape_csv(const std::vector<LandscapeSample>& samples, const std::string& path);

struct ResonanceRow {
  double tau = 0.0;
  std::string branch_id;
  std::string method;  // "asym" or "direct"
  cd z;
  double residual = 0.0;
};
void write_resonance_csv(const std::vector<ResonanceRow>& rows, const std::string& path);

}  // namespace elastres
