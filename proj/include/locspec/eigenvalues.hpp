#pragma once

// Closed-form eigenvalues of (mixed-state) localization operators with
// polyradial masks: disc, Reinhardt shadows, weighted masks, polyradial
// states and Gaussian (Williamson) states.

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "phasespace.hpp"
#include "quadrature.hpp"
#include "reinhardt.hpp"
#include "specfun.hpp"
#include "symplectic.hpp"

namespace locspec::eigen {

using quad::QuadResult;
using reinhardt::MaskSpec;
using reinhardt::ShadowRegion;

inline constexpr double quad_rtol = 1e-10;

// ---------------------------------------------------------------- tables

struct EigenvalueTable {
  std::vector<MultiIndex> indices;
  std::vector<double> values;
  std::vector<double> errors;
  std::string tag;     // "k=..." or "state=..."
  std::string mask;    // mask descriptor
  std::string method;  // "closed-form" | "matrix"

  std::size_t size() const { return values.size(); }

  void write_csv(std::ostream& os) const {
    const int d = indices.empty() ? 1 : indices.front().dim();
    for (int j = 0; j < d; ++j) os << "n_" << j + 1 << ",";
    os << "tag,lambda,est_error,method\n";
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
      for (int j = 0; j < d; ++j) os << indices[i][j] << ",";
      os << tag << ",";
      auto r = std::to_chars(buf, buf + sizeof buf, values[i]);
      os.write(buf, r.ptr - buf) << ",";
      r = std::to_chars(buf, buf + sizeof buf, errors[i]);
      os.write(buf, r.ptr - buf) << "," << method << "\n";
    }
  }
};

// ---------------------------------------------------------------- integration of masks

namespace detail {

inline QuadResult region(int d, const std::function<double(std::span<const double>)>& upper, const reinhardt::RadialFn& f,
                         double rtol) {
  std::vector<double> r(d, 0.0);
  reinhardt::detail::Accum acc;
  QuadResult out;
  out.value = reinhardt::detail::iterate(f, d, upper, r, 0, rtol, acc);
  out.error = acc.err;
  out.converged = acc.ok;
  return out;
}

inline QuadResult add(QuadResult a, const QuadResult& b, double sb = 1.0) {
  a.value += sb * b.value;
  a.error += std::abs(sb) * b.error;
  a.converged = a.converged && b.converged;
  return a;
}

}  // namespace detail

// int_{V^d} F_0(r) f(r) dr for the profile of a mask (constant part excluded).
inline QuadResult integrate_profile(const MaskSpec& m, const reinhardt::RadialFn& f, double rtol = quad_rtol) {
  using reinhardt::ProfileKind;
  switch (m.kind) {
    case ProfileKind::none: return {};
    case ProfileKind::indicator: {
      auto q = reinhardt::shadow_quadrature(*m.shadow, f, rtol);
      q.value *= m.scale;
      q.error *= std::abs(m.scale);
      return q;
    }
    default: break;
  }
  const double R = m.profile_support();
  const reinhardt::RadialFn g = [&](std::span<const double> r) { return m.profile(r) * f(r); };
  if (std::isfinite(R)) return reinhardt::shadow_quadrature(reinhardt::ball_shadow(m.d, R), g, rtol);
  return reinhardt::absolute_space_quadrature(m.d, g, rtol);
}

// Same, in u = pi r^2 coordinates: int_{V^d} F_0(sqrt(u/pi)) f(u) du.
// Indicator shadows map to u-sections u_j <= pi b_j(r_prefix)^2.
inline QuadResult integrate_profile_u(const MaskSpec& m, const reinhardt::RadialFn& f, double rtol = quad_rtol) {
  using reinhardt::ProfileKind;
  const int d = m.d;
  auto to_r = [](std::span<const double> u) {
    std::vector<double> r(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) r[j] = std::sqrt(u[j] / pi);
    return r;
  };
  const auto all = [](std::span<const double>) { return reinhardt::inf; };
  if (m.kind == ProfileKind::none) return {};
  if (m.kind == ProfileKind::indicator) {
    const ShadowRegion& W = *m.shadow;
    const ShadowRegion& B = W.kind == reinhardt::ShadowKind::complement ? *W.inner : W;
    auto upper = [&B, &to_r](std::span<const double> pre) {
      const double b = B.section_bound(to_r(pre));
      return b < 0 ? -1.0 : pi * b * b;
    };
    QuadResult q = detail::region(d, upper, f, rtol);
    if (W.kind == reinhardt::ShadowKind::complement) q = detail::add(detail::region(d, all, f, rtol), q, -1.0);
    q.value *= m.scale;
    q.error *= std::abs(m.scale);
    return q;
  }
  const reinhardt::RadialFn g = [&](std::span<const double> u) { return m.profile(to_r(u)) * f(u); };
  const double R = m.profile_support();
  if (std::isfinite(R)) {
    const double U = pi * R * R;
    return detail::region(d, [U](std::span<const double> pre) {
      double s = U;
      for (double v : pre) s -= v;
      return s;
    }, g, rtol);
  }
  return detail::region(d, all, g, rtol);
}

// ---------------------------------------------------------------- localization with Hermite windows

// c_{n,k}(R) = (min!/max!) int_0^{pi R^2} t^{|n-k|} (L_min^{|n-k|}(t))^2 e^{-t} dt.
inline QuadResult eig_disc(int n, int k, double R) {
  if (n < 0 || k < 0) throw std::domain_error("eig_disc: negative index");
  if (!(R > 0)) throw config_error("eig_disc: R must be positive");
  return quad::adaptive([n, k](double t) { return specfun::laguerre_density(n, k, t); }, 0.0, pi * R * R, quad_rtol);
}

// Polyradial part of |V_{phi_k} phi_n|^2 in r-coordinates with the
// polycylindrical Jacobian: prod_j 2 pi r_j (min!/max!) u^{|n-k|} L^2 e^{-u}, u = pi r_j^2.
inline double shadow_density(const MultiIndex& n, const MultiIndex& k, std::span<const double> r) {
  double p = 1.0;
  for (std::size_t j = 0; j < n.dim(); ++j) p *= 2 * pi * r[j] * specfun::laguerre_density(n[j], k[j], pi * r[j] * r[j]);
  return p;
}

inline void check_pair(const MultiIndex& n, const MultiIndex& k, int d) {
  if (static_cast<int>(n.dim()) != d || static_cast<int>(k.dim()) != d) throw std::invalid_argument("eigenvalue: index dimension does not match mask");
}

// c_{n,k}(Omega) = int_W prod_j 2 pi r_j rho_{n_j,k_j}(r_j)^2 dr.
inline QuadResult eig_reinhardt(const MultiIndex& n, const MultiIndex& k, const ShadowRegion& W) {
  check_pair(n, k, W.d);
  if (!W.bounded()) throw config_error("eig_reinhardt: unbounded shadow; use an EFG mask with eig_weighted");
  return reinhardt::shadow_quadrature(W, [&](std::span<const double> r) { return shadow_density(n, k, r); }, quad_rtol);
}

// c_{n,k}(F) = c + int_{V^d} prod_j (min!/max!) u_j^{|n_j-k_j|} L^2 e^{-u_j} F_0(sqrt(u/pi)) du.
inline QuadResult eig_weighted(const MultiIndex& n, const MultiIndex& k, const MaskSpec& m) {
  check_pair(n, k, m.d);
  auto q = integrate_profile_u(m, [&](std::span<const double> u) {
    double p = 1.0;
    for (std::size_t j = 0; j < n.dim(); ++j) p *= specfun::laguerre_density(n[j], k[j], u[j]);
    return p;
  });
  q.value += m.c;
  return q;
}

// ---------------------------------------------------------------- states

// Polyradial trace class operators S described through their Weyl symbol a_S.
// Even radial function sampled at equal steps from 0; cubic B-spline, zero
// beyond the last node.
struct RadialTable {
  double r_max = 0;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline;

  RadialTable(const std::vector<double>& v, double step)
      : r_max(step * (v.size() - 1)), spline(v.begin(), v.end(), 0.0, step, 0.0) {}
  double operator()(double rho) const { return rho >= r_max ? 0.0 : spline(rho); }
};

struct StateSymbol {
  enum class Kind { parity, gaussian, hermite, grid };
  Kind kind = Kind::parity;
  int d = 1;
  std::vector<double> k;  // gaussian: Williamson diagonal, k_j >= 1/(4 pi)
  MultiIndex m{0};        // hermite state phi_m (x) phi_m
  std::shared_ptr<const phasespace::GridFunction> symbol;  // grid (d = 1)
  std::shared_ptr<const RadialTable> profile;              // radial profile of the grid symbol
  double grid_trace = 1.0;
  // grid: per-n radial profile of a_S * W(phi_n), filled on first use
  struct KernelCache {
    std::mutex mu;
    std::map<int, RadialTable> byn;
  };
  std::shared_ptr<KernelCache> kernels = std::make_shared<KernelCache>();

  double trace() const { return kind == Kind::grid ? grid_trace : 1.0; }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::parity: os << "parity"; break;
      case Kind::gaussian:
        os << "gaussian(k=";
        for (std::size_t j = 0; j < k.size(); ++j) os << (j ? ":" : "") << k[j];
        os << ")";
        break;
      case Kind::hermite: os << "hermite(" << m.str() << ")"; break;
      case Kind::grid: os << "grid"; break;
    }
    return os.str();
  }

  // Radial symbol value a(rho) for d = 1 states (parity has none).
  double radial(double rho) const {
    switch (kind) {
      case Kind::gaussian: return phasespace::heat_kernel(2 * pi * k[0], rho * rho);
      case Kind::hermite: return phasespace::hermite_wigner_radial(m[0], rho * rho);
      case Kind::grid: return (*profile)(rho);
      case Kind::parity: break;
    }
    throw std::logic_error("StateSymbol::radial: parity symbol is a delta");
  }
};

inline constexpr double gaussian_boundary = 1.0 / (4 * pi);
inline constexpr double polyradial_tol = 1e-4;

// S = 2^d P, a_S = delta.
inline StateSymbol parity_state(int d) {
  StateSymbol s;
  s.kind = StateSymbol::Kind::parity;
  s.d = d;
  return s;
}

inline StateSymbol gaussian_state(std::vector<double> k) {
  if (k.empty()) throw config_error("gaussian state: empty k");
  for (double v : k)
    if (v < gaussian_boundary * (1 - 1e-12))
      throw config_error("gaussian state: k_j = " + std::to_string(v) + " < 1/(4 pi); not a positive trace class operator");
  StateSymbol s;
  s.kind = StateSymbol::Kind::gaussian;
  s.d = static_cast<int>(k.size());
  s.k = std::move(k);
  return s;
}

// Thermal state of energy E: k = 1/(4 pi) + E/(2 pi) on every axis.
inline StateSymbol thermal_state(int d, double E) {
  if (!(E > 0)) throw config_error("thermal state: E must be positive");
  return gaussian_state(std::vector<double>(d, gaussian_boundary + E / (2 * pi)));
}

inline StateSymbol hermite_state(const MultiIndex& m) {
  StateSymbol s;
  s.kind = StateSymbol::Kind::hermite;
  s.d = m.dim();
  s.m = m;
  return s;
}

namespace detail {

// Profile along the positive x axis at step h/4 (8-point Lagrange in the grid).
inline RadialTable radial_profile(const phasespace::GridFunction& a) {
  const int n = 4 * (a.grid.N / 2 - 5);
  const double h = a.grid.h() / 4;
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) {
    cplx v;
    const std::vector<double> z{i * h, 0.0};
    reinhardt::detail::interpolate(a, z, v);
    out[i] = v.real();
  }
  return RadialTable(out, h);
}

}  // namespace detail

// Weyl symbol given on a d = 1 grid; rejected unless polyradial.
inline StateSymbol grid_state(const phasespace::GridFunction& a) {
  if (a.grid.d != 1) throw config_error("grid state: only d = 1 symbols are supported");
  const double dev = reinhardt::polyradial_check(a);
  if (dev > polyradial_tol)
    throw config_error("grid state: symbol is not polyradial (rotation deviation " + std::to_string(dev) + ")");
  StateSymbol s;
  s.kind = StateSymbol::Kind::grid;
  s.symbol = std::make_shared<const phasespace::GridFunction>(a);
  s.grid_trace = a.integral().real();
  s.profile = std::make_shared<const RadialTable>(detail::radial_profile(a));
  return s;
}

namespace detail {

inline const RadialTable& grid_kernel(const StateSymbol& s, int n) {
  std::lock_guard lock(s.kernels->mu);
  auto it = s.kernels->byn.find(n);
  if (it != s.kernels->byn.end()) return it->second;
  const auto W = phasespace::sample_phase(s.symbol->grid, [n](std::span<const double> z) {
    return cplx(phasespace::hermite_wigner_radial(n, z[0] * z[0] + z[1] * z[1]));
  });
  return s.kernels->byn.emplace(n, radial_profile(phasespace::convolve(W, *s.symbol))).first->second;
}

}  // namespace detail

// Radial kernel K(r) = (a_S * W(phi_n))(r) in one plane.
inline double smoothed_wigner(const StateSymbol& s, int j, int n, double r) {
  using K = StateSymbol::Kind;
  const double r2 = r * r;
  switch (s.kind) {
    case K::parity: return phasespace::hermite_wigner_radial(n, r2);
    case K::gaussian: {
      const double E = 2 * pi * s.k[j];
      if (E <= 0.5 * (1 + 1e-12)) return phasespace::spectrogram_limit(n, r2);
      return phasespace::heat_convolution_closed(n, E, r2);
    }
    case K::hermite: return specfun::laguerre_density(n, s.m[j], pi * r2);
    case K::grid: return detail::grid_kernel(s, n)(r);
  }
  return 0.0;
}

enum class MixedForm { smoothed_symbol, operator_formula };

// lambda_n = int F (a_S * W(phi_n)) dz = c tr S + int_{V^d} F_0(r) prod_j 2 pi r_j K_j(r_j) dr
// (smoothed_symbol), or for d = 1 the reduction
// (-1)^n int_0^inf (F * a_S)(sqrt(u / 2 pi)) L_n(2u) e^{-u} du (operator_formula).
inline QuadResult eig_mixed(const MultiIndex& n, const MaskSpec& m, const StateSymbol& s,
                            MixedForm form = MixedForm::smoothed_symbol) {
  if (static_cast<int>(n.dim()) != m.d || s.d != m.d) throw std::invalid_argument("eig_mixed: dimension mismatch");
  if (form == MixedForm::smoothed_symbol) {
    auto q = integrate_profile(m, [&](std::span<const double> r) {
      double p = 1.0;
      for (std::size_t j = 0; j < n.dim(); ++j) p *= 2 * pi * r[j] * smoothed_wigner(s, j, n[j], r[j]);
      return p;
    });
    q.value += m.c * s.trace();
    return q;
  }
  if (m.d != 1) throw config_error("eig_mixed: the operator-formula form is implemented for d = 1");
  // G(rho) = (F * a_S)(rho)
  std::function<double(double)> G;
  if (s.kind == StateSymbol::Kind::parity) {
    G = [&m](double rho) { return m.c + m.profile(std::vector<double>{rho}); };
  } else {
    G = [&m, &s](double rho) {
      auto ring = [&](double r) {
        // A(rho, r) = int_0^{2 pi} a(|rho - r e^{it}|) dt
        if (s.kind == StateSymbol::Kind::gaussian) {
          const double E = 2 * pi * s.k[0], kap = 2 * pi * rho * r / E;
          const double i0s = kap < 600 ? boost::math::cyl_bessel_i(0, kap) * std::exp(-kap)
                                       : (1 + 1 / (8 * kap)) / std::sqrt(2 * pi * kap);
          return 2 * pi / E * std::exp(-pi * (rho - r) * (rho - r) / E) * i0s;
        }
        constexpr int M = 128;
        double acc = 0;
        for (int t = 0; t < M; ++t) acc += s.radial(std::sqrt(std::max(0.0, rho * rho + r * r - 2 * rho * r * std::cos(2 * pi * t / M))));
        return acc * 2 * pi / M;
      };
      const reinhardt::RadialFn f = [&](std::span<const double> r) { return r[0] * ring(r[0]); };
      // Absolute floor: tabulated symbols carry ~1e-15 noise in the far tail.
      const double est = std::abs(integrate_profile(m, f, 1e-4).value);
      const double floor = s.kind == StateSymbol::Kind::grid ? 1e-9 : 1e-11;
      const double rtol = std::min(1e-4, std::max(floor, 1e-14 / std::max(est, 1e-300)));
      return m.c * s.trace() + integrate_profile(m, f, rtol).value;
    };
  }
  const int nn = n[0];
  if (s.kind != StateSymbol::Kind::parity) {
    // G is smooth here: spline it over the range where e^{-u} L_n(2u) matters.
    const double step = 0.01, top = std::sqrt((80.0 + 4 * nn) / (2 * pi));
    std::vector<double> v(static_cast<std::size_t>(top / step) + 2);
    parallel_chunks(v.size(), [&](std::size_t i) { v[i] = G(i * step); });
    auto table = std::make_shared<const RadialTable>(v, step);
    G = [table, direct = G](double rho) { return rho < table->r_max ? (*table)(rho) : direct(rho); };
  }
  const std::function<double(double)> integrand = [&](double u) {
    return G(std::sqrt(u / (2 * pi))) * specfun::laguerre(nn, 0.0, 2 * u) * std::exp(-u);
  };
  // A delta symbol leaves G = F, discontinuous at the edge of an indicator.
  const double edge = m.profile_support();
  QuadResult q;
  if (std::isfinite(edge) && edge > 0) {
    const double U = 2 * pi * edge * edge;
    q = detail::add(quad::adaptive(integrand, 0.0, U, 1e-10), quad::adaptive(integrand, U, reinhardt::inf, 1e-10));
  } else {
    q = quad::adaptive(integrand, 0.0, reinhardt::inf, 1e-10);
  }
  if (nn % 2) q.value = -q.value;
  return q;
}

// lambda_n for F = G o T^{-1} and the Gaussian state with Williamson diagonal k.
inline QuadResult eig_gaussian(const MultiIndex& n, const MaskSpec& G, std::vector<double> k) {
  return eig_mixed(n, G, gaussian_state(std::move(k)));
}

// Same, from the covariance matrix M = T K T^T.
inline QuadResult eig_gaussian(const MultiIndex& n, const MaskSpec& G, const symplectic::RMat& M) {
  if (!symplectic::gaussian_admissible(M))
    throw config_error("eig_gaussian: M + iJ/(4 pi) is not positive semidefinite");
  const auto w = symplectic::williamson(M);
  return eig_gaussian(n, G, std::vector<double>(w.k.data(), w.k.data() + w.k.size()));
}

// ---------------------------------------------------------------- tables

// Evaluates fn for every index in parallel (fixed chunking).
inline EigenvalueTable closed_form_table(const std::vector<MultiIndex>& indices,
                                         const std::function<QuadResult(const MultiIndex&)>& fn, std::string tag,
                                         std::string mask) {
  EigenvalueTable t;
  t.indices = indices;
  t.values.resize(indices.size());
  t.errors.resize(indices.size());
  t.tag = std::move(tag);
  t.mask = std::move(mask);
  t.method = "closed-form";
  std::vector<char> ok(indices.size(), 1);
  parallel_chunks(indices.size(), [&](std::size_t i) {
    const auto q = fn(indices[i]);
    t.values[i] = q.value;
    t.errors[i] = q.error;
    ok[i] = q.converged;
  });
  for (std::size_t i = 0; i < ok.size(); ++i)
    if (!ok[i]) throw tolerance_error("closed-form eigenvalue " + indices[i].str() + ": quadrature did not converge (error " +
                                      std::to_string(t.errors[i]) + ")");
  return t;
}

}  // namespace locspec::eigen
