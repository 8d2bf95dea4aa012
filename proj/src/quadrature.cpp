#include "elastres/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace elastres {

namespace {
constexpr double kPi = 3.14159265358979323846;
std::mutex g_rule_mutex;
}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    r.x[i] = 0.5 * (1.0 - t);
    r.w[i] = 1.0 / ((1.0 - t * t) * dp * dp);  // (2/((1-t^2) P'^2)) / 2
  }
  return cache.emplace(n, std::move(r)).first->second;
}

const TriangleRule& radon7() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0, b = (9.0 + 2.0 * s15) / 21.0;
    const double c = (6.0 + s15) / 21.0, d = (9.0 - 2.0 * s15) / 21.0;
    const double wa = (155.0 - s15) / 1200.0, wc = (155.0 + s15) / 1200.0;
    // Weights below are relative to the reference area 1/2, hence the factor 2.
    r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.w.push_back(9.0 / 40.0);
    r.bary.push_back({b, a, a});
    r.bary.push_back({a, b, a});
    r.bary.push_back({a, a, b});
    for (int i = 0; i < 3; ++i) r.w.push_back(wa);
    r.bary.push_back({d, c, c});
    r.bary.push_back({c, d, c});
    r.bary.push_back({c, c, d});
    for (int i = 0; i < 3; ++i) r.w.push_back(wc);
    double sum = 0.0;
    for (double w : r.w) sum += w;
    for (double& w : r.w) w /= sum;
    return r;
  }();
  return rule;
}

const TriangleRule& duffy_rule(int n) {
  static std::map<int, TriangleRule> cache;
  const GaussRule& g = gauss_legendre(n);
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  TriangleRule r;
  // y = p0 + u (p1 - p0) + u v (p2 - p1), dS = 2 A u du dv.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = g.x[i], v = g.x[j];
      r.bary.push_back({1.0 - u, u * (1.0 - v), u * v});
      r.w.push_back(2.0 * u * g.w[i] * g.w[j]);
    }
  }
  return cache.emplace(n, std::move(r)).first->second;
}

const TetRule& tet_rule(int n) {
  static std::map<int, TetRule> cache;
  const GaussRule& g = gauss_legendre(n);
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  TetRule r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double a = g.x[i], b = g.x[j], c = g.x[k];
        const double l1 = a, l2 = (1.0 - a) * b, l3 = (1.0 - a) * (1.0 - b) * c;
        r.bary.push_back({1.0 - l1 - l2 - l3, l1, l2, l3});
        r.w.push_back(6.0 * (1.0 - a) * (1.0 - a) * (1.0 - b) * g.w[i] * g.w[j] * g.w[k]);
      }
  return cache.emplace(n, std::move(r)).first->second;
}

}  // namespace elastres
