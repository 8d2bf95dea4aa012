#pragma once
// Flat key = value configuration with dotted section keys
// (e.g. "media.interior.mu = 1.0"); '#' starts a comment.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "elastres/boundary_ops.hpp"
#include "elastres/direct_oracle.hpp"
#include "elastres/geometry.hpp"
#include "elastres/resolvent.hpp"
#include "elastres/spectral.hpp"

namespace elastres {

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

  // Sorted "key = value" lines; the hash is FNV-1a (64 bit, hex) of this text.
  std::string canonical() const;
  std::string hash() const;
  // Config error naming the first key outside the known set.
  void check_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> kv_;
};

std::string fnv1a_hex(const std::string& text);

enum class FieldRegime { Monopole, Dipole, PointScatterer };

struct RunConfig {
  // Mesh
  bool mesh_builtin = true;
  ShapeSpec shape;
  int mesh_level = 2;
  std::string mesh_file;
  // Media
  ElasticMedium exterior, interior;
  // Contrast values and frequency windows
  std::vector<double> taus{1e-2, 3e-3, 1e-3};
  double spectrum_lo = 0.5;
  double spectrum_hi = 3.0;
  double scan_step = 0.05;
  std::vector<std::string> regimes{"generic", "exceptional"};
  // Tolerances
  LadderOptions ladder{1e-8, 1e-6, 1e-6, 1e-10};
  double accept_ratio = 1e-4;
  double fd_step = 0.0;
  double margin_factor = 1e3;
  // Wavelength regime
  int wavelength_index = 0;          // which eigenfrequency of the window
  bool wavelength_interp = true;     // Cauchy interpolation of K(z) near the anchor
  double wavelength_radius = 0.1;    // localization disk radius around z0
  bool direct = true;                // run the direct oracle next to the asymptotics
  // Micro field
  FieldRegime field_regime = FieldRegime::Monopole;
  double eps = 0.05;
  double field_tau = 1e-3;
  double field_omega = 0.0;          // physical frequency; 0 selects the branch centre
  Vec3 y0 = Vec3::Zero();
  Vec3 ray = Vec3(1.0, 0.0, 0.0);
  double r_min = 1.0, r_max = 4.0;
  int n_points = 64;
  int field_sign = 1;
  ForcingSpec forcing;
  // Output
  std::string out_dir = "out";
  std::string cache_dir;             // empty: <out>/cache
  bool cache = false;
  int threads = 1;

  static RunConfig from(const Config& c);
  static const std::set<std::string>& known_keys();
};

}  // namespace elastres
