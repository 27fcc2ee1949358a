#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core.hpp"

namespace locspec::quad {

struct Rule {
  std::vector<double> x, w;
  std::size_t size() const { return x.size(); }
};

namespace detail {

// Gauss-Legendre on [-1,1] by Newton iteration on P_n.
inline Rule legendre_unit(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

}  // namespace detail

// Cached unit rule; safe to call from several threads.
inline const Rule& gauss_legendre_unit(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  static std::mutex mtx;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::legendre_unit(n)).first;
  return it->second;
}

inline Rule gauss_legendre(int n, double a, double b) {
  const Rule& u = gauss_legendre_unit(n);
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.x[i] = c + h * u.x[i];
    r.w[i] = h * u.w[i];
  }
  return r;
}

// `panels` equal Gauss-Legendre panels of `order` nodes on [a,b].
inline Rule composite_gauss_legendre(double a, double b, int panels, int order) {
  Rule r;
  if (b <= a) return r;
  r.x.reserve(panels * order);
  r.w.reserve(panels * order);
  const double step = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    Rule g = gauss_legendre(order, a + p * step, a + (p + 1) * step);
    r.x.insert(r.x.end(), g.x.begin(), g.x.end());
    r.w.insert(r.w.end(), g.w.begin(), g.w.end());
  }
  return r;
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// Adaptive 15-point Gauss-Kronrod. b may be +infinity.
inline QuadResult adaptive(const std::function<double(double)>& f, double a, double b,
                           double rtol = 1e-10, unsigned max_depth = 15) {
  QuadResult r;
  if (b <= a) return r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rtol,
                                                                          &r.error, &l1);
  r.converged = r.error <= std::max(rtol * l1, 1e-300) * 10.0 || r.error < 1e-14;
  return r;
}

}  // namespace locspec::quad
