#include "elastres/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <sstream>

#include "elastres/errors.hpp"

namespace elastres {

namespace {

using Edge = std::pair<int, int>;

Edge undirected(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

double signed_volume(const SurfaceMesh& m) {
  double v = 0.0;
  for (const auto& t : m.triangles)
    v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0;
  return v;
}

// Makes the orientation of every connected component consistent (breadth-first
// flipping) and outward (positive enclosed volume).
void orient(SurfaceMesh& m) {
  std::map<Edge, std::vector<int>> edge_tris;
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k)
      edge_tris[undirected(m.triangles[t][k], m.triangles[t][(k + 1) % 3])].push_back(t);
  for (const auto& [e, tris] : edge_tris) {
    if (tris.size() != 2)
      config_error("mesh topology error: edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                   ") is shared by " + std::to_string(tris.size()) + " triangles (surface not closed/manifold)");
  }
  auto has_directed = [&](int t, int a, int b) {
    for (int k = 0; k < 3; ++k)
      if (m.triangles[t][k] == a && m.triangles[t][(k + 1) % 3] == b) return true;
    return false;
  };
  std::vector<int> state(m.num_triangles(), -1);
  for (int seed = 0; seed < m.num_triangles(); ++seed) {
    if (state[seed] >= 0) continue;
    state[seed] = 0;
    std::queue<int> q;
    q.push(seed);
    while (!q.empty()) {
      const int t = q.front();
      q.pop();
      for (int k = 0; k < 3; ++k) {
        const int a = m.triangles[t][k], b = m.triangles[t][(k + 1) % 3];
        const auto& tris = edge_tris[undirected(a, b)];
        const int nb = tris[0] == t ? tris[1] : tris[0];
        const bool consistent = has_directed(nb, b, a);
        if (state[nb] < 0) {
          if (!consistent) std::swap(m.triangles[nb][1], m.triangles[nb][2]);
          state[nb] = 0;
          q.push(nb);
        } else if (!consistent) {
          config_error("mesh orientation error: surface is not orientable (conflict at triangle " +
                       std::to_string(nb) + ")");
        }
      }
    }
  }
  if (signed_volume(m) < 0.0)
    for (auto& t : m.triangles) std::swap(t[1], t[2]);
}

double legendre_p(int l, double x) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return p1;
}

SurfaceMesh icosphere(int level) {
  SurfaceMesh m;
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                             {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (const auto& v : raw) m.vertices.push_back(Vec3(v[0], v[1], v[2]).normalized());
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<Edge, int> mid;
    auto midpoint = [&](int a, int b) {
      const Edge e = undirected(a, b);
      auto it = mid.find(e);
      if (it != mid.end()) return it->second;
      // Symmetric in (a, b) so that antipodal edges give antipodal midpoints.
      const Vec3 v = (0.5 * (m.vertices[e.first] + m.vertices[e.second])).normalized();
      m.vertices.push_back(v);
      const int id = static_cast<int>(m.vertices.size()) - 1;
      mid.emplace(e, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& t : m.triangles) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  return m;
}

std::vector<double> parse_args(const std::string& s, const std::string& name) {
  std::vector<double> out;
  const auto lp = s.find('('), rp = s.rfind(')');
  if (lp == std::string::npos) return out;
  if (rp == std::string::npos || rp < lp) config_error("malformed shape '" + name + "'");
  std::stringstream ss(s.substr(lp + 1, rp - lp - 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      config_error("malformed numeric argument '" + tok + "' in shape '" + name + "'");
    }
  }
  return out;
}

}  // namespace

double SurfaceMesh::total_area() const {
  double a = 0.0;
  for (double x : areas) a += x;
  return a;
}

double SurfaceMesh::diameter() const {
  Vec3 lo = vertices[0], hi = vertices[0];
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

void SurfaceMesh::finalize() {
  if (vertices.empty() || triangles.empty()) config_error("mesh is empty");
  const int nv = num_vertices();
  areas.assign(triangles.size(), 0.0);
  normals.assign(triangles.size(), Vec3::Zero());
  vertex_triangles.assign(nv, {});
  h = 0.0;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv) config_error("triangle " + std::to_string(t) + " has an invalid vertex index");
      vertex_triangles[tri[k]].push_back(t);
    }
    const Vec3 c = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
    const double n2 = c.norm();
    if (!(n2 > 0.0)) config_error("degenerate triangle " + std::to_string(t) + " (zero area)");
    areas[t] = 0.5 * n2;
    normals[t] = c / n2;
    for (int k = 0; k < 3; ++k) h = std::max(h, (vertices[tri[k]] - vertices[tri[(k + 1) % 3]]).norm());
  }
  for (int v = 0; v < nv; ++v)
    if (vertex_triangles[v].empty()) config_error("vertex " + std::to_string(v) + " is not used by any triangle");
}

ShapeSpec parse_shape(const std::string& name) {
  ShapeSpec s;
  const std::string head = name.substr(0, name.find('('));
  const auto args = parse_args(name, name);
  if (head == "sphere") {
    s.kind = ShapeKind::Sphere;
  } else if (head == "ellipsoid") {
    if (args.size() != 3) config_error("ellipsoid needs three semi-axes: ellipsoid(a,b,c)");
    s.kind = ShapeKind::Ellipsoid;
    s.semi_axes = Vec3(args[0], args[1], args[2]);
    if (!(s.semi_axes.minCoeff() > 0.0)) config_error("ellipsoid semi-axes must be positive");
  } else if (head == "perturbed_sphere") {
    s.kind = ShapeKind::PerturbedSphere;
    s.legendre_coeffs = args;
  } else {
    config_error("unknown builtin shape '" + name + "' (expected sphere, ellipsoid(a,b,c), perturbed_sphere(c0,...))");
  }
  return s;
}

SurfaceMesh builtin_mesh(const ShapeSpec& shape, int level) {
  if (level < 0) config_error("mesh refinement level must be >= 0");
  SurfaceMesh m = icosphere(level);
  for (auto& v : m.vertices) {
    switch (shape.kind) {
      case ShapeKind::Sphere: break;
      case ShapeKind::Ellipsoid: v = v.cwiseProduct(shape.semi_axes); break;
      case ShapeKind::PerturbedSphere: {
        double r = 1.0;
        for (std::size_t l = 0; l < shape.legendre_coeffs.size(); ++l)
          r += shape.legendre_coeffs[l] * legendre_p(static_cast<int>(l), v.z());
        if (!(r > 0.0)) config_error("perturbed sphere radius is not positive");
        v *= r;
        break;
      }
    }
  }
  orient(m);
  m.finalize();
  return m;
}

SurfaceMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) config_error("cannot open mesh file '" + path + "'");
  SurfaceMesh m;
  auto bad = [&](const std::string& what) { config_error("mesh parse error in '" + path + "': " + what); };
  if (format == MeshFormat::OFF) {
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::stringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
    }
    std::size_t pos = 0;
    if (tokens.empty() || tokens[0] != "OFF") bad("missing OFF header");
    ++pos;
    auto next_num = [&]() -> double {
      if (pos >= tokens.size()) bad("unexpected end of file");
      try {
        return std::stod(tokens[pos++]);
      } catch (...) {
        bad("non-numeric token '" + tokens[pos - 1] + "'");
      }
      return 0.0;
    };
    const int nv = static_cast<int>(next_num()), nf = static_cast<int>(next_num());
    next_num();  // edge count (ignored)
    if (nv <= 0 || nf <= 0) bad("invalid counts");
    for (int i = 0; i < nv; ++i) {
      const double x = next_num(), y = next_num(), z = next_num();
      m.vertices.emplace_back(x, y, z);
    }
    for (int f = 0; f < nf; ++f) {
      const int k = static_cast<int>(next_num());
      if (k != 3) bad("face " + std::to_string(f) + " is not a triangle");
      std::array<int, 3> t;
      for (int j = 0; j < 3; ++j) t[j] = static_cast<int>(next_num());
      m.triangles.push_back(t);
    }
  } else {
    std::string line;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string tag;
      if (!(ss >> tag)) continue;
      if (tag == "v") {
        double x, y, z;
        if (!(ss >> x >> y >> z)) bad("malformed vertex line");
        m.vertices.emplace_back(x, y, z);
      } else if (tag == "f") {
        std::vector<int> idx;
        std::string tok;
        while (ss >> tok) {
          int i = 0;
          try {
            i = std::stoi(tok.substr(0, tok.find('/')));
          } catch (...) {
            bad("malformed face index '" + tok + "'");
          }
          idx.push_back(i < 0 ? static_cast<int>(m.vertices.size()) + i : i - 1);
        }
        if (idx.size() != 3) bad("face is not a triangle");
        m.triangles.push_back({idx[0], idx[1], idx[2]});
      }
    }
  }
  for (const auto& t : m.triangles)
    for (int i : t)
      if (i < 0 || i >= m.num_vertices()) bad("face index out of range");
  orient(m);
  m.finalize();
  return m;
}

SurfaceMesh load_mesh(const std::string& path) {
  auto ends_with = [&](const std::string& suf) {
    if (path.size() < suf.size()) return false;
    std::string tail = path.substr(path.size() - suf.size());
    std::transform(tail.begin(), tail.end(), tail.begin(), ::tolower);
    return tail == suf;
  };
  if (ends_with(".off")) return load_mesh(path, MeshFormat::OFF);
  if (ends_with(".obj")) return load_mesh(path, MeshFormat::OBJ);
  config_error("cannot infer mesh format of '" + path + "' (expected .off or .obj)");
}

void write_off(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) config_error("cannot write '" + path + "'");
  out.precision(17);
  out << "OFF\n" << mesh.num_vertices() << " " << mesh.num_triangles() << " 0\n";
  for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

void write_obj(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) config_error("cannot write '" + path + "'");
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

VolumeMoments volume_moments(const SurfaceMesh& mesh) {
  // Sum over the signed tetrahedra (0, a, b, c); exact for the polyhedron.
  VolumeMoments m;
  for (const auto& t : mesh.triangles) {
    const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
    const double v = a.dot(b.cross(c)) / 6.0;
    const Vec3 s = a + b + c;
    m.volume += v;
    m.first += v * s / 4.0;
    m.second += v / 20.0 * (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose());
  }
  return m;
}

double rigid_inner(const RigidMotion& u, const RigidMotion& v, const VolumeMoments& m) {
  // (a1 + b1 x x).(a2 + b2 x x) integrated with the volume moments.
  const double tr = m.second.trace();
  return m.volume * u.a.dot(v.a) + u.a.dot(v.b.cross(m.first)) + v.a.dot(u.b.cross(m.first)) +
         u.b.dot(v.b) * tr - u.b.dot(m.second * v.b);
}

Eigen::Matrix<double, 6, 6> RigidMotionBasis::gram() const {
  Eigen::Matrix<double, 6, 6> g;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) g(i, j) = rigid_inner(e[i], e[j], moments);
  return g;
}

Eigen::MatrixXd RigidMotionBasis::traces(const SurfaceMesh& mesh) const {
  Eigen::MatrixXd t(mesh.dofs(), 6);
  for (int k = 0; k < 6; ++k)
    for (int i = 0; i < mesh.num_vertices(); ++i) t.block<3, 1>(3 * i, k) = e[k](mesh.vertices[i]);
  return t;
}

RigidMotionBasis rigid_motion_basis(const SurfaceMesh& mesh) {
  RigidMotionBasis basis;
  basis.moments = volume_moments(mesh);
  const double vol = basis.moments.volume;
  if (!(vol > 1e-14 * std::pow(mesh.diameter(), 3)))
    config_error("rigid motion basis: enclosed volume is not positive (degenerate domain)");
  for (int k = 0; k < 3; ++k) {
    basis.e[k].a = Vec3::Unit(k) / std::sqrt(vol);
    basis.e[k].b = Vec3::Zero();
  }
  for (int k = 3; k < 6; ++k) {
    RigidMotion r;
    r.b = Vec3::Unit(k - 3);
    // Two passes of modified Gram-Schmidt for numerical orthogonality.
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < k; ++j) {
        const double c = rigid_inner(r, basis.e[j], basis.moments);
        r.a -= c * basis.e[j].a;
        r.b -= c * basis.e[j].b;
      }
    const double nrm2 = rigid_inner(r, r, basis.moments);
    if (!(nrm2 > 1e-14 * vol)) numerical_error("rigid motion basis: degenerate inertia");
    r.a /= std::sqrt(nrm2);
    r.b /= std::sqrt(nrm2);
    basis.e[k] = r;
  }
  return basis;
}

Eigen::SparseMatrix<double> mass_matrix(const SurfaceMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trip.emplace_back(mesh.triangles[t][a], mesh.triangles[t][b], mesh.areas[t] / 12.0 * (a == b ? 2.0 : 1.0));
  Eigen::SparseMatrix<double> m(mesh.num_vertices(), mesh.num_vertices());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::SparseMatrix<double> vector_mass_matrix(const SurfaceMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(27 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int k = 0; k < 3; ++k)
          trip.emplace_back(3 * mesh.triangles[t][a] + k, 3 * mesh.triangles[t][b] + k,
                            mesh.areas[t] / 12.0 * (a == b ? 2.0 : 1.0));
  Eigen::SparseMatrix<double> m(mesh.dofs(), mesh.dofs());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::VectorXd vertex_weights(const SurfaceMesh& mesh) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int a = 0; a < 3; ++a) w(mesh.triangles[t][a]) += mesh.areas[t] / 3.0;
  return w;
}

namespace {
int ray_crossings(const SurfaceMesh& mesh, const Vec3& x, const Vec3& dir) {
  int count = 0;
  for (const auto& t : mesh.triangles) {
    // Moller-Trumbore ray/triangle intersection.
    const Vec3 &p0 = mesh.vertices[t[0]], &p1 = mesh.vertices[t[1]], &p2 = mesh.vertices[t[2]];
    const Vec3 e1 = p1 - p0, e2 = p2 - p0;
    const Vec3 pv = dir.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-300) continue;
    const Vec3 tv = x - p0;
    const double u = tv.dot(pv) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 qv = tv.cross(e1);
    const double v = dir.dot(qv) / det;
    if (v < 0.0 || u + v > 1.0) continue;
    if (e2.dot(qv) / det > 0.0) ++count;
  }
  return count;
}
}  // namespace

bool point_inside(const SurfaceMesh& mesh, const Vec3& x) {
  static const std::array<Vec3, 3> dirs = [] {
    std::mt19937 rng(20240611u);
    std::normal_distribution<double> nd;
    std::array<Vec3, 3> d;
    for (auto& v : d) v = Vec3(nd(rng), nd(rng), nd(rng)).normalized();
    return d;
  }();
  int votes = 0;
  for (const auto& d : dirs) votes += ray_crossings(mesh, x, d) % 2;
  return votes >= 2;
}

InteriorGrid interior_grid(const SurfaceMesh& mesh, double spacing) {
  if (!(spacing > 0.0)) config_error("interior grid spacing must be positive");
  Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  InteriorGrid g;
  g.spacing = spacing;
  g.weight = spacing * spacing * spacing;
  // Cells are centred on the lattice c + spacing * Z^3 with c the box centre.
  const Vec3 c = 0.5 * (lo + hi);
  const Eigen::Vector3i n = ((hi - c) / spacing).array().ceil().cast<int>();
  for (int i = -n.x(); i <= n.x(); ++i)
    for (int j = -n.y(); j <= n.y(); ++j)
      for (int k = -n.z(); k <= n.z(); ++k) {
        const Vec3 x = c + spacing * Vec3(i, j, k);
        if (point_inside(mesh, x)) g.points.push_back(x);
      }
  return g;
}

}  // namespace elastres
