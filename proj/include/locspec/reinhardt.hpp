#pragma once

// Reinhardt domains through their shadows W in the absolute space
// V^d = [0, inf)^d, polyradial masks F = c + F_0(tau(z)), and integrals over W.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "phasespace.hpp"
#include "quadrature.hpp"

namespace locspec::reinhardt {

inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class ShadowKind { ball, polydisc, p_ball, weighted_quadratic, table, complement };

inline const char* kind_name(ShadowKind k) {
  switch (k) {
    case ShadowKind::ball: return "ball";
    case ShadowKind::polydisc: return "polydisc";
    case ShadowKind::p_ball: return "p-ball";
    case ShadowKind::weighted_quadratic: return "weighted-quadratic";
    case ShadowKind::table: return "table";
    case ShadowKind::complement: return "complement";
  }
  return "?";
}

// Closed, down-closed subsets of V^d (complements excepted). Every bounded
// kind is described by its section bounds: with r_1..r_{j-1} fixed, the
// admissible r_j form the interval [0, section_bound(prefix)].
struct ShadowRegion {
  ShadowKind kind = ShadowKind::ball;
  int d = 1;
  double R = 1.0;
  double p = 2.0;
  std::vector<double> radii;                      // polydisc
  std::vector<int> alpha;                         // weighted quadratic
  std::vector<std::pair<double, double>> curve;   // table: (r_1, r_2 max), r_1 ascending
  std::shared_ptr<const ShadowRegion> inner;      // complement

  bool bounded() const { return kind != ShadowKind::complement; }

  // Largest r_j such that (prefix, r_j, 0, ..., 0) lies in W; negative if
  // the prefix itself is outside.
  double section_bound(std::span<const double> prefix) const {
    const std::size_t j = prefix.size();
    switch (kind) {
      case ShadowKind::ball: {
        double s = R * R;
        for (double r : prefix) s -= r * r;
        return s < 0 ? -1.0 : std::sqrt(s);
      }
      case ShadowKind::polydisc:
        for (std::size_t i = 0; i < j; ++i)
          if (prefix[i] > radii[i]) return -1.0;
        return radii[j];
      case ShadowKind::p_ball: {
        double s = std::pow(R, p);
        for (double r : prefix) s -= std::pow(r, p);
        return s < 0 ? -1.0 : std::pow(s, 1.0 / p);
      }
      case ShadowKind::weighted_quadratic: {
        double s = R;
        for (std::size_t i = 0; i < j; ++i) s -= alpha[i] * prefix[i] * prefix[i];
        return s < 0 ? -1.0 : std::sqrt(s / alpha[j]);
      }
      case ShadowKind::table: {
        if (j == 0) return curve.back().first;
        const double r1 = prefix[0];
        if (r1 > curve.back().first) return -1.0;
        auto it = std::upper_bound(curve.begin(), curve.end(), r1,
                                   [](double v, const auto& pt) { return v < pt.first; });
        if (it == curve.begin()) return curve.front().second;
        if (it == curve.end()) return curve.back().second;
        const auto& [x0, y0] = *(it - 1);
        const auto& [x1, y1] = *it;
        return y0 + (y1 - y0) * (r1 - x0) / (x1 - x0);
      }
      case ShadowKind::complement: break;
    }
    throw std::logic_error("section_bound: complement shadows have no sections");
  }

  bool contains(std::span<const double> r) const {
    if (static_cast<int>(r.size()) != d) throw std::invalid_argument("ShadowRegion::contains: dimension mismatch");
    for (double v : r)
      if (v < 0) return false;
    if (kind == ShadowKind::complement) return !inner->contains(r);
    if (kind == ShadowKind::table && d == 1) return r[0] <= curve.back().first;
    for (int j = 0; j < d; ++j)
      if (r[j] > section_bound(r.first(j))) return false;
    return true;
  }

  // Upper corner of the bounding box (inf for complements).
  std::vector<double> box() const {
    std::vector<double> b(d, inf);
    if (!bounded()) return b;
    for (int j = 0; j < d; ++j) {
      std::vector<double> zero(j, 0.0);
      b[j] = section_bound(zero);
    }
    return b;
  }

  std::string describe() const {
    std::ostringstream os;
    os << kind_name(kind) << "(d=" << d;
    switch (kind) {
      case ShadowKind::ball: os << ",R=" << R; break;
      case ShadowKind::p_ball: os << ",R=" << R << ",p=" << p; break;
      case ShadowKind::weighted_quadratic:
        os << ",R=" << R << ",alpha=";
        for (std::size_t i = 0; i < alpha.size(); ++i) os << (i ? ":" : "") << alpha[i];
        break;
      case ShadowKind::polydisc:
        os << ",R=";
        for (std::size_t i = 0; i < radii.size(); ++i) os << (i ? ":" : "") << radii[i];
        break;
      case ShadowKind::table: os << ",points=" << curve.size(); break;
      case ShadowKind::complement: os << ",of=" << inner->describe(); break;
    }
    os << ")";
    return os.str();
  }
};

// ---------------------------------------------------------------- factories

inline ShadowRegion ball_shadow(int d, double R) {
  if (d < 1) throw config_error("ball: d must be >= 1");
  if (!(R > 0)) throw config_error("ball: radius must be positive");
  ShadowRegion s;
  s.kind = ShadowKind::ball;
  s.d = d;
  s.R = R;
  return s;
}

inline ShadowRegion polydisc_shadow(std::vector<double> radii) {
  if (radii.empty()) throw config_error("polydisc: need at least one radius");
  for (double r : radii)
    if (!(r > 0)) throw config_error("polydisc: radii must be positive");
  ShadowRegion s;
  s.kind = ShadowKind::polydisc;
  s.d = static_cast<int>(radii.size());
  s.radii = std::move(radii);
  return s;
}

inline ShadowRegion p_ball_shadow(int d, double R, double p) {
  if (d < 1) throw config_error("p-ball: d must be >= 1");
  if (!(R > 0) || !(p > 0)) throw config_error("p-ball: R and p must be positive");
  ShadowRegion s;
  s.kind = ShadowKind::p_ball;
  s.d = d;
  s.R = R;
  s.p = p;
  return s;
}

// {r : sum_j alpha_j r_j^2 <= R}. alpha_j = 0 would leave r_j unbounded.
inline ShadowRegion weighted_quadratic_shadow(std::vector<int> alpha, double R) {
  if (alpha.empty()) throw config_error("weighted-quadratic: empty alpha");
  if (!(R > 0)) throw config_error("weighted-quadratic: R must be positive");
  for (int a : alpha)
    if (a < 1) throw config_error("weighted-quadratic: alpha_j must be >= 1 (alpha_j = 0 gives an unbounded shadow)");
  ShadowRegion s;
  s.kind = ShadowKind::weighted_quadratic;
  s.d = static_cast<int>(alpha.size());
  s.R = R;
  s.alpha = std::move(alpha);
  return s;
}

// d = 1: a single point (R, *) giving [0, R]. d = 2: boundary curve r_2 = b(r_1),
// r_1 strictly ascending from 0, b non-increasing and >= 0.
inline ShadowRegion table_shadow(int d, std::vector<std::pair<double, double>> curve) {
  if (d == 1) {
    if (curve.size() != 1 || !(curve[0].first > 0)) throw config_error("table shadow (d=1): expected one positive radius");
  } else if (d == 2) {
    if (curve.size() < 2) throw config_error("table shadow (d=2): need at least two points");
    if (curve.front().first != 0.0) throw config_error("table shadow (d=2): curve must start at r_1 = 0");
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (curve[i].second < 0) throw config_error("table shadow (d=2): negative r_2");
      if (i && !(curve[i].first > curve[i - 1].first)) throw config_error("table shadow (d=2): r_1 must ascend");
      if (i && curve[i].second > curve[i - 1].second) throw config_error("table shadow (d=2): r_2 must be non-increasing");
    }
  } else {
    throw config_error("table shadow: d must be 1 or 2");
  }
  ShadowRegion s;
  s.kind = ShadowKind::table;
  s.d = d;
  s.curve = std::move(curve);
  return s;
}

inline ShadowRegion complement_shadow(const ShadowRegion& inner) {
  if (!inner.bounded()) throw config_error("complement: inner shadow must be bounded");
  ShadowRegion s;
  s.kind = ShadowKind::complement;
  s.d = inner.d;
  s.inner = std::make_shared<const ShadowRegion>(inner);
  return s;
}

struct ShadowParams {
  int d = 1;
  double R = 1.0;
  double p = 2.0;
  std::vector<double> radii;
  std::vector<int> alpha;
};

// Named constructor: "ball" | "disc" | "polydisc" | "p-ball" | "weighted-quadratic".
inline ShadowRegion shadow_of(const std::string& name, const ShadowParams& q) {
  if (name == "ball" || name == "disc") return ball_shadow(name == "disc" ? 1 : q.d, q.R);
  if (name == "polydisc") return polydisc_shadow(q.radii.empty() ? std::vector<double>(q.d, q.R) : q.radii);
  if (name == "p-ball") return p_ball_shadow(q.d, q.R, q.p);
  if (name == "weighted-quadratic") return weighted_quadratic_shadow(q.alpha, q.R);
  throw config_error("unknown shadow kind '" + name + "'");
}

// tau(z)_j = |z_j| with z_j = x_j + i w_j.
inline std::vector<double> tau(std::span<const cplx> z) {
  std::vector<double> r(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) r[j] = std::abs(z[j]);
  return r;
}

// Realizes Omega = tau^{-1}(W).
inline bool lift_membership(const ShadowRegion& W, std::span<const cplx> z) {
  if (static_cast<int>(z.size()) != W.d) throw std::invalid_argument("lift_membership: dimension mismatch");
  return W.contains(tau(z));
}

// ---------------------------------------------------------------- quadrature

using quad::QuadResult;
using RadialFn = std::function<double(std::span<const double>)>;

namespace detail {

struct Accum {
  double err = 0.0;
  bool ok = true;
};

// Iterated adaptive integral of f over {r_j in [0, upper(prefix)]}.
inline double iterate(const RadialFn& f, int d, const std::function<double(std::span<const double>)>& upper,
                      std::vector<double>& r, int j, double rtol, Accum& acc) {
  const double b = upper(std::span<const double>(r.data(), j));
  if (!(b > 0)) return 0.0;
  std::function<double(double)> g = [&](double t) {
    r[j] = t;
    if (j + 1 == d) return f(r);
    return iterate(f, d, upper, r, j + 1, rtol, acc);
  };
  const auto q = quad::adaptive(g, 0.0, b, rtol, 12);
  acc.ok = acc.ok && q.converged;
  if (j == 0) acc.err += q.error;
  return q.value;
}

}  // namespace detail

// int_{V^d} f(r) dr; f must decay (checked only through convergence).
inline QuadResult absolute_space_quadrature(int d, const RadialFn& f, double rtol = 1e-8) {
  std::vector<double> r(d, 0.0);
  detail::Accum acc;
  QuadResult out;
  out.value = detail::iterate(f, d, [](std::span<const double>) { return inf; }, r, 0, rtol, acc);
  out.error = acc.err;
  out.converged = acc.ok;
  return out;
}

// int_W f(r) dr. Bounded shadows integrate over section bounds; complements
// use int_{V^d} - int_inner.
inline QuadResult shadow_quadrature(const ShadowRegion& W, const RadialFn& f, double rtol = 1e-8) {
  if (W.kind == ShadowKind::complement) {
    auto all = absolute_space_quadrature(W.d, f, std::min(rtol, 1e-6));
    const auto in = shadow_quadrature(*W.inner, f, rtol);
    all.value -= in.value;
    all.error += in.error;
    all.converged = all.converged && in.converged;
    return all;
  }
  std::vector<double> r(W.d, 0.0);
  detail::Accum acc;
  QuadResult out;
  out.value = detail::iterate(f, W.d, [&W](std::span<const double> pre) { return W.section_bound(pre); }, r, 0, rtol, acc);
  out.error = acc.err;
  out.converged = acc.ok;
  return out;
}

// Lebesgue volume of Omega = tau^{-1}(W): (2 pi)^d int_W prod r_j dr.
inline double lifted_volume(const ShadowRegion& W) {
  if (!W.bounded()) return inf;
  const auto q = shadow_quadrature(W, [](std::span<const double> r) {
    double p = 1;
    for (double v : r) p *= 2 * pi * v;
    return p;
  });
  return q.value;
}

// ---------------------------------------------------------------- masks

enum class ProfileKind { none, indicator, gaussian, fubini_study, radial_table };

// F(z) = c + F_0(tau(z)) with F_0 either scale * chi_W, scale * e^{-pi a |r|^2},
// the Fubini-Study weight 4 / (1 + |r|^2)^2, or a radial table in |r|.
struct MaskSpec {
  int d = 1;
  double c = 0.0;
  ProfileKind kind = ProfileKind::none;
  double scale = 1.0;
  double a = 1.0;
  std::shared_ptr<const ShadowRegion> shadow;
  std::vector<std::pair<double, double>> table;  // (|r|, F_0), |r| ascending
  bool thin_at_infinity = false;                 // documented, not derived
  std::string name;
  std::shared_ptr<std::atomic<bool>> clamped = std::make_shared<std::atomic<bool>>(false);

  double profile(std::span<const double> r) const {
    switch (kind) {
      case ProfileKind::none: return 0.0;
      case ProfileKind::indicator: return shadow->contains(r) ? scale : 0.0;
      case ProfileKind::gaussian: {
        double s = 0;
        for (double v : r) s += v * v;
        return scale * std::exp(-pi * a * s);
      }
      case ProfileKind::fubini_study: {
        const double s = 1.0 + r[0] * r[0];
        return scale * 4.0 / (s * s);
      }
      case ProfileKind::radial_table: {
        double s = 0;
        for (double v : r) s += v * v;
        const double x = std::sqrt(s);
        if (x >= table.back().first) {
          if (x > table.back().first) clamped->store(true);
          return table.back().second;
        }
        auto it = std::upper_bound(table.begin(), table.end(), x, [](double v, const auto& pt) { return v < pt.first; });
        if (it == table.begin()) return table.front().second;
        const auto& [x0, y0] = *(it - 1);
        const auto& [x1, y1] = *it;
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
      }
    }
    return 0.0;
  }

  // z = (x_1..x_d, w_1..w_d).
  double operator()(std::span<const double> z) const {
    std::vector<double> r(d);
    for (int j = 0; j < d; ++j) r[j] = std::hypot(z[j], z[d + j]);
    return c + profile(r);
  }

  // Radius beyond which F_0 vanishes; inf if it never does.
  double profile_support() const {
    if (kind == ProfileKind::none) return 0.0;
    if (kind == ProfileKind::indicator && shadow->bounded()) {
      double s = 0;
      for (double b : shadow->box()) s += b * b;
      return std::sqrt(s);
    }
    if (kind == ProfileKind::radial_table && table.back().second == 0.0) return table.back().first;
    return inf;
  }

  bool integrable() const { return c == 0.0 && thin_at_infinity; }

  std::string describe() const { return name; }
};

inline MaskSpec constant_mask(int d, double c) {
  MaskSpec m;
  m.d = d;
  m.c = c;
  m.name = "constant(c=" + std::to_string(c) + ")";
  m.thin_at_infinity = true;
  return m;
}

inline MaskSpec indicator_mask(const ShadowRegion& W, double scale = 1.0, double c = 0.0) {
  MaskSpec m;
  m.d = W.d;
  m.c = c;
  m.kind = ProfileKind::indicator;
  m.scale = scale;
  m.shadow = std::make_shared<const ShadowRegion>(W);
  m.thin_at_infinity = W.bounded();
  m.name = "indicator(" + W.describe() + ")";
  return m;
}

// chi_{Omega^c} = 1 - chi_Omega in EFG form.
inline MaskSpec complement_mask(const ShadowRegion& W) {
  if (!W.bounded()) throw config_error("complement mask: shadow must be bounded");
  auto m = indicator_mask(W, -1.0, 1.0);
  m.name = "complement(" + W.describe() + ")";
  m.thin_at_infinity = true;
  return m;
}

inline MaskSpec gaussian_mask(int d, double a, double scale = 1.0) {
  if (!(a > 0)) throw config_error("gaussian mask: a must be positive");
  MaskSpec m;
  m.d = d;
  m.kind = ProfileKind::gaussian;
  m.a = a;
  m.scale = scale;
  m.thin_at_infinity = true;
  m.name = "gaussian(a=" + std::to_string(a) + ")";
  return m;
}

inline MaskSpec fubini_study_mask() {
  MaskSpec m;
  m.d = 1;
  m.kind = ProfileKind::fubini_study;
  m.thin_at_infinity = true;
  m.name = "fubini-study";
  return m;
}

inline MaskSpec radial_table_mask(int d, std::vector<std::pair<double, double>> table) {
  if (table.size() < 2) throw config_error("radial table: need at least two points");
  for (std::size_t i = 1; i < table.size(); ++i)
    if (!(table[i].first > table[i - 1].first)) throw config_error("radial table: radii must ascend");
  if (table.front().first < 0) throw config_error("radial table: negative radius");
  MaskSpec m;
  m.d = d;
  m.kind = ProfileKind::radial_table;
  m.table = std::move(table);
  m.thin_at_infinity = m.table.back().second == 0.0;
  m.name = "radial-table(" + std::to_string(m.table.size()) + " points)";
  return m;
}

inline phasespace::GridFunction sample_mask(const phasespace::PhaseGrid& g, const MaskSpec& m) {
  if (g.d != m.d) throw std::invalid_argument("sample_mask: dimension mismatch");
  return phasespace::sample_phase(g, [&m](std::span<const double> z) { return cplx(m(z)); });
}

// ---------------------------------------------------------------- polyradiality

namespace detail {

// 8-point Lagrange interpolation of F at an arbitrary phase point, or false
// if the stencil leaves the grid.
inline bool interpolate(const phasespace::GridFunction& F, std::span<const double> z, cplx& out) {
  constexpr int S = 8;
  const auto& g = F.grid;
  const int D = g.axes();
  const double h = g.h();
  std::vector<int> base(D);
  std::vector<std::array<double, S>> w(D);
  for (int a = 0; a < D; ++a) {
    const double s = (z[a] + g.L) / h;
    const int i0 = static_cast<int>(std::floor(s)) - S / 2 + 1;
    if (i0 < 0 || i0 + S > g.N) return false;
    base[a] = i0;
    for (int k = 0; k < S; ++k) {
      double l = 1.0;
      for (int m = 0; m < S; ++m)
        if (m != k) l *= (s - (i0 + m)) / double(k - m);
      w[a][k] = l;
    }
  }
  std::vector<int> k(D, 0);
  cplx acc = 0;
  while (true) {
    double wt = 1.0;
    std::size_t flat = 0;
    for (int a = 0; a < D; ++a) {
      wt *= w[a][k[a]];
      flat = flat * g.N + (base[a] + k[a]);
    }
    acc += wt * F.samples[flat];
    int a = D - 1;
    while (a >= 0 && ++k[a] == S) k[a--] = 0;
    if (a < 0) break;
  }
  out = acc;
  return true;
}

}  // namespace detail

// max over sampled componentwise rotations A of ||F - F o A||_inf / ||F||_inf,
// taken at lattice points whose rotated images keep a full interpolation
// stencil inside the grid. stride subsamples the lattice (0: 2 for d=1, 8 for d=2).
inline double polyradial_check(const phasespace::GridFunction& F, int stride = 0) {
  const auto& g = F.grid;
  const int d = g.d, D = g.axes();
  if (stride <= 0) stride = d == 1 ? 2 : 8;
  const double fmax = F.max_abs();
  if (fmax == 0) return 0.0;
  const std::vector<double> angles{pi / 7, 0.9, 2.3};
  std::vector<std::vector<double>> rots;
  if (d == 1) {
    for (double a : angles) rots.push_back({a});
  } else {
    rots = {{angles[0], 0.0}, {0.0, angles[1]}, {angles[1], angles[2]}};
  }
  std::vector<double> z(D), zr(D);
  double dev = 0;
  const double lim = g.L - 5 * g.h();
  for (std::size_t f = 0; f < F.samples.size(); ++f) {
    std::size_t r = f;
    bool keep = true;
    for (int a = D - 1; a >= 0; --a) {
      const int i = static_cast<int>(r % g.N);
      r /= g.N;
      if (i % stride) keep = false;
      z[a] = g.coord(i);
    }
    if (!keep) continue;
    bool inside = true;
    for (int j = 0; j < d; ++j) inside = inside && std::hypot(z[j], z[d + j]) <= lim;
    if (!inside) continue;
    for (const auto& th : rots) {
      for (int j = 0; j < d; ++j) {
        const double c = std::cos(th[j]), s = std::sin(th[j]);
        zr[j] = c * z[j] - s * z[d + j];
        zr[d + j] = s * z[j] + c * z[d + j];
      }
      cplx v;
      if (detail::interpolate(F, zr, v)) dev = std::max(dev, std::abs(v - F.samples[f]));
    }
  }
  return dev / fmax;
}

}  // namespace locspec::reinhardt
