#include "elastres/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "elastres/errors.hpp"

namespace elastres {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    config_error("config key '" + key + "': '" + v + "' is not a number");
  }
}

Vec3 get_vec3(const Config& c, const std::string& key, const Vec3& fallback) {
  if (!c.has(key)) return fallback;
  const auto v = c.get_doubles(key, {});
  if (v.size() != 3) config_error("config key '" + key + "' needs three comma-separated numbers");
  return Vec3(v[0], v[1], v[2]);
}

ElasticMedium get_medium(const Config& c, const std::string& prefix) {
  ElasticMedium m;
  m.lambda = c.get_double(prefix + ".lambda", m.lambda);
  m.mu = c.get_double(prefix + ".mu", m.mu);
  m.rho = c.get_double(prefix + ".rho", m.rho);
  for (const auto& [name, val] : {std::pair{"lambda", m.lambda}, {"mu", m.mu}, {"rho", m.rho}})
    if (!(val > 0.0) || !std::isfinite(val))
      config_error("config key '" + prefix + "." + name + "' must be positive (got " + std::to_string(val) + ")");
  return m;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      config_error(origin + ":" + std::to_string(no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) config_error(origin + ":" + std::to_string(no) + ": empty key");
    if (c.has(key)) config_error(origin + ":" + std::to_string(no) + ": duplicate key '" + key + "'");
    c.kv_[key] = val;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) config_error("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : to_double(key, it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const double x = to_double(key, it->second);
  if (x != std::floor(x) || std::abs(x) > 1e9) config_error("config key '" + key + "' must be an integer");
  return static_cast<int>(x);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  config_error("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  for (const auto& s : split(it->second)) out.push_back(to_double(key, s));
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : split(it->second);
}

std::string Config::canonical() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
  return os.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string Config::hash() const { return fnv1a_hex(canonical()); }

void Config::check_known(const std::set<std::string>& known) const {
  for (const auto& [k, v] : kv_)
    if (!known.count(k)) config_error("unknown config key '" + k + "'");
}

const std::set<std::string>& RunConfig::known_keys() {
  static const std::set<std::string> keys{
      "mesh.source", "mesh.shape", "mesh.level", "mesh.file",
      "media.exterior.lambda", "media.exterior.mu", "media.exterior.rho",
      "media.interior.lambda", "media.interior.mu", "media.interior.rho",
      "tau.values", "spectrum.lo", "spectrum.hi", "spectrum.scan_step", "regimes",
      "tol.cluster", "tol.rank", "tol.angle", "tol.singular", "tol.accept", "tol.margin", "fd.step",
      "wavelength.index", "wavelength.interp", "wavelength.radius", "resonances.direct",
      "field.regime", "field.eps", "field.tau", "field.omega", "field.y0", "field.ray", "field.r_min",
      "field.r_max", "field.points", "field.sign",
      "forcing.kind", "forcing.center", "forcing.amplitude", "forcing.width", "forcing.radius",
      "output.dir", "cache.enabled", "cache.dir", "threads"};
  return keys;
}

RunConfig RunConfig::from(const Config& c) {
  c.check_known(known_keys());
  RunConfig r;
  const std::string src = c.get("mesh.source", "builtin");
  if (src == "builtin") {
    r.mesh_builtin = true;
    r.shape = parse_shape(c.get("mesh.shape", "sphere"));
  } else if (src == "file") {
    r.mesh_builtin = false;
    r.mesh_file = c.get("mesh.file", "");
    if (r.mesh_file.empty()) config_error("config key 'mesh.file' is required when mesh.source = file");
  } else {
    config_error("config key 'mesh.source' must be 'builtin' or 'file'");
  }
  r.mesh_level = c.get_int("mesh.level", r.mesh_level);
  if (r.mesh_level < 0 || r.mesh_level > 5) config_error("config key 'mesh.level' must lie in [0, 5]");
  r.exterior = get_medium(c, "media.exterior");
  r.interior = get_medium(c, "media.interior");

  r.taus = c.get_doubles("tau.values", r.taus);
  if (r.taus.empty()) config_error("config key 'tau.values' is empty");
  for (double t : r.taus)
    if (!(t > 0.0 && t <= 0.1)) config_error("config key 'tau.values': every tau must lie in (0, 0.1]");
  r.spectrum_lo = c.get_double("spectrum.lo", r.spectrum_lo);
  r.spectrum_hi = c.get_double("spectrum.hi", r.spectrum_hi);
  r.scan_step = c.get_double("spectrum.scan_step", r.scan_step);
  if (!std::isfinite(r.spectrum_lo) || !std::isfinite(r.spectrum_hi) || !(r.spectrum_lo < r.spectrum_hi) ||
      r.spectrum_lo < 0.0)
    config_error("config keys 'spectrum.lo' / 'spectrum.hi' must form a finite non-negative window");
  if (!(r.scan_step > 0.0)) config_error("config key 'spectrum.scan_step' must be positive");
  r.regimes = c.get_strings("regimes", r.regimes);
  for (const auto& g : r.regimes)
    if (g != "wavelength" && g != "generic" && g != "exceptional")
      config_error("config key 'regimes': unknown regime '" + g + "'");

  r.ladder.cluster_tol = c.get_double("tol.cluster", r.ladder.cluster_tol);
  r.ladder.rank_tol = c.get_double("tol.rank", r.ladder.rank_tol);
  r.ladder.angle_tol = c.get_double("tol.angle", r.ladder.angle_tol);
  r.ladder.singular_tol = c.get_double("tol.singular", r.ladder.singular_tol);
  r.accept_ratio = c.get_double("tol.accept", r.accept_ratio);
  r.margin_factor = c.get_double("tol.margin", r.margin_factor);
  r.fd_step = c.get_double("fd.step", r.fd_step);
  for (const auto& [k, v] : {std::pair{"tol.cluster", r.ladder.cluster_tol}, {"tol.rank", r.ladder.rank_tol},
                             {"tol.angle", r.ladder.angle_tol}, {"tol.singular", r.ladder.singular_tol},
                             {"tol.accept", r.accept_ratio}, {"tol.margin", r.margin_factor}})
    if (!(v > 0.0) || !std::isfinite(v)) config_error(std::string("config key '") + k + "' must be positive");
  if (r.fd_step < 0.0) config_error("config key 'fd.step' must be non-negative");

  r.wavelength_index = c.get_int("wavelength.index", r.wavelength_index);
  r.wavelength_interp = c.get_bool("wavelength.interp", r.wavelength_interp);
  r.wavelength_radius = c.get_double("wavelength.radius", r.wavelength_radius);
  if (r.wavelength_index < 0) config_error("config key 'wavelength.index' must be non-negative");
  if (!(r.wavelength_radius > 0.0)) config_error("config key 'wavelength.radius' must be positive");
  r.direct = c.get_bool("resonances.direct", r.direct);

  const std::string fr = c.get("field.regime", "monopole");
  if (fr == "monopole")
    r.field_regime = FieldRegime::Monopole;
  else if (fr == "dipole")
    r.field_regime = FieldRegime::Dipole;
  else if (fr == "point")
    r.field_regime = FieldRegime::PointScatterer;
  else
    config_error("config key 'field.regime' must be monopole, dipole or point");
  r.eps = c.get_double("field.eps", r.eps);
  r.field_tau = c.get_double("field.tau", r.field_tau);
  r.field_omega = c.get_double("field.omega", r.field_omega);
  r.y0 = get_vec3(c, "field.y0", r.y0);
  r.ray = get_vec3(c, "field.ray", r.ray);
  r.r_min = c.get_double("field.r_min", r.r_min);
  r.r_max = c.get_double("field.r_max", r.r_max);
  r.n_points = c.get_int("field.points", r.n_points);
  r.field_sign = c.get_int("field.sign", r.field_sign);
  if (!(r.eps > 0.0)) config_error("config key 'field.eps' must be positive");
  if (!(r.field_tau > 0.0 && r.field_tau <= 0.1)) config_error("config key 'field.tau' must lie in (0, 0.1]");
  if (!(r.ray.norm() > 0.0)) config_error("config key 'field.ray' must be a non-zero vector");
  if (!(r.r_min > 0.0 && r.r_max > r.r_min)) config_error("config keys 'field.r_min' < 'field.r_max' required");
  if (r.n_points < 1) config_error("config key 'field.points' must be positive");
  if (r.field_sign != 1 && r.field_sign != -1) config_error("config key 'field.sign' must be 1 or -1");

  const ForcingKind fk = parse_forcing_kind(c.get("forcing.kind", "gaussian_bump"));
  const Vec3 fc = get_vec3(c, "forcing.center", Vec3(0.0, 0.0, 0.0));
  const Vec3 fa = get_vec3(c, "forcing.amplitude", Vec3(1.0, 0.0, 0.0));
  const double width = c.get_double("forcing.width", 0.2);
  const double radius = c.get_double("forcing.radius", 0.5);
  switch (fk) {
    case ForcingKind::ConstantVector: r.forcing = ForcingSpec::constant_vector(fa.cast<cd>(), fc, radius); break;
    case ForcingKind::GaussianBump: r.forcing = ForcingSpec::gaussian_bump(fc, width, fa.cast<cd>()); break;
    case ForcingKind::RegularizedPointForce:
      r.forcing = ForcingSpec::regularized_point_force(fc, fa.cast<cd>(), radius);
      break;
  }

  r.out_dir = c.get("output.dir", r.out_dir);
  r.cache = c.get_bool("cache.enabled", r.cache);
  r.cache_dir = c.get("cache.dir", r.cache_dir);
  r.threads = c.get_int("threads", r.threads);
  if (r.threads < 1) config_error("config key 'threads' must be at least 1");
  return r;
}

}  // namespace elastres
