#pragma once
// Dense matrices of localization and mixed-state localization operators in
// truncated Hermite and Hagedorn bases, and their diagonalization.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "eigenvalues.hpp"
#include "phasespace.hpp"
#include "quadrature.hpp"
#include "reinhardt.hpp"
#include "specfun.hpp"
#include "symplectic.hpp"

namespace locspec::opmatrix {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using reinhardt::MaskSpec;
using symplectic::RMat;
using symplectic::SymplecticMatrix;

inline constexpr double hermitian_tol = 1e-10;
inline constexpr double psd_tol = 1e-8;
inline constexpr double residual_tol = 1e-9;
inline constexpr int max_basis_d1 = 32;
inline constexpr int max_basis_d2 = 8;

// ---------------------------------------------------------------- masks

// Phase-space mask: a polyradial MaskSpec, optionally transported
// (F = base o T^{-1}); the indicator of the square [-a, a]^2 (d = 1); or a
// unit point mass at the origin.
struct PhaseMask {
  enum class Kind { polyradial, square, point };
  Kind kind = Kind::polyradial;
  MaskSpec base;
  std::optional<SymplecticMatrix> T;
  RMat Tinv;
  double a = 0;

  int dim() const { return base.d; }

  // Non-constant part F_0 at z = (x.., w..).
  double profile(std::span<const double> z) const {
    const int d = dim();
    switch (kind) {
      case Kind::square: return (std::abs(z[0]) <= a && std::abs(z[1]) <= a) ? 1.0 : 0.0;
      case Kind::point: throw std::logic_error("PhaseMask: a point mass has no pointwise value");
      case Kind::polyradial: break;
    }
    std::vector<double> r(d);
    if (T) {
      const auto zeta = phasespace::frame_coords(Tinv, z);
      for (int j = 0; j < d; ++j) r[j] = std::abs(zeta[j]);
    } else {
      for (int j = 0; j < d; ++j) r[j] = std::hypot(z[j], z[d + j]);
    }
    return base.profile(r);
  }

  double constant() const { return kind == Kind::polyradial ? base.c : 0.0; }

  std::string describe() const {
    switch (kind) {
      case Kind::square: return "square(a=" + std::to_string(a) + ")";
      case Kind::point: return "point(d=" + std::to_string(dim()) + ")";
      case Kind::polyradial: break;
    }
    std::string s = base.name;
    if (base.c != 0.0 && base.kind != reinhardt::ProfileKind::none && s.find("complement") == std::string::npos)
      s += "+" + std::to_string(base.c);
    return T ? s + " o T^-1" : s;
  }
};

inline PhaseMask radial(MaskSpec m) {
  PhaseMask p;
  p.base = std::move(m);
  return p;
}

inline PhaseMask transported(MaskSpec m, const SymplecticMatrix& T) {
  if (T.dim() != m.d) throw config_error("transported mask: frame dimension does not match the mask");
  PhaseMask p = radial(std::move(m));
  p.T = T;
  p.Tinv = T.inverse();
  return p;
}

inline PhaseMask square_mask(double a) {
  if (!(a > 0)) throw config_error("square mask: a must be positive");
  PhaseMask p;
  p.kind = PhaseMask::Kind::square;
  p.base.d = 1;
  p.a = a;
  return p;
}

inline PhaseMask point_mask(int d) {
  PhaseMask p;
  p.kind = PhaseMask::Kind::point;
  p.base.d = d;
  return p;
}

// ---------------------------------------------------------------- kernels

// Per-plane integrand: A_{mn} = int F(z) prod_j K_j(m_j, n_j; zeta_j(z)) dz.
// mixture: K_j = sum_l w_l V_{phi_l} phi_n conj(V_{phi_l} phi_m) (a window is a
// one-term mixture); wigner: K_j = W(phi_n, phi_m) (S = 2^d P).
struct Kernel {
  enum class Kind { mixture, wigner };
  Kind kind = Kind::mixture;
  std::vector<std::vector<std::pair<int, double>>> windows;  // per plane
  std::string tag;

  int dim() const { return static_cast<int>(windows.size()); }

  int max_window() const {
    int k = 0;
    for (const auto& p : windows)
      for (const auto& [l, w] : p) k = std::max(k, l);
    return k;
  }

  // tr S; the constant part c of a mask contributes c tr(S) Id.
  double trace() const {
    if (kind == Kind::wigner) return 1.0;
    double t = 1.0;
    for (const auto& p : windows) {
      double s = 0;
      for (const auto& [l, w] : p) s += w;
      t *= s;
    }
    return t;
  }
};

inline Kernel window_kernel(const MultiIndex& k) {
  Kernel K;
  for (std::size_t j = 0; j < k.dim(); ++j) K.windows.push_back({{k[j], 1.0}});
  K.tag = "k=" + k.str();
  return K;
}

// Thermal weights E^l / (E+1)^{l+1} truncated once the tail drops below cutoff.
inline std::vector<std::pair<int, double>> thermal_weights(double E, double cutoff = 1e-14) {
  if (E < 0) throw config_error("thermal weights: E must be non-negative");
  if (E == 0) return {{0, 1.0}};
  const double q = E / (E + 1);
  std::vector<std::pair<int, double>> w;
  double tail = 1.0, wl = 1.0 / (E + 1);
  for (int l = 0; tail > cutoff; ++l) {
    if (l > 400) throw config_error("thermal weights: state too hot for a window mixture (E = " + std::to_string(E) + ")");
    w.emplace_back(l, wl);
    tail *= q;
    wl *= q;
  }
  return w;
}

// Kernel of a closed-form state; grid symbols have no kernel.
inline Kernel state_kernel(const eigen::StateSymbol& s) {
  using SK = eigen::StateSymbol::Kind;
  Kernel K;
  K.tag = "state=" + s.describe();
  switch (s.kind) {
    case SK::parity:
      K.kind = Kernel::Kind::wigner;
      K.windows.assign(s.d, {});
      return K;
    case SK::hermite:
      for (int j = 0; j < s.d; ++j) K.windows.push_back({{s.m[j], 1.0}});
      return K;
    case SK::gaussian:
      // gamma_{2 pi k} is the symbol of the thermal state with E = 2 pi k - 1/2.
      for (int j = 0; j < s.d; ++j) K.windows.push_back(thermal_weights(std::max(0.0, 2 * pi * s.k[j] - 0.5)));
      return K;
    case SK::grid: break;
  }
  throw config_error("state kernel: grid symbols are assembled on the grid");
}

namespace detail {

// N x N block of plane j at zeta, out(m, n).
inline void plane_kernel(const Kernel& K, int j, int N, cplx zeta, CMat& out) {
  out.setZero(N, N);
  if (K.kind == Kernel::Kind::wigner) {
    const double g = 2 * std::exp(-2 * pi * std::norm(zeta));
    for (int m = 0; m < N; ++m)
      for (int n = 0; n < N; ++n)
        out(m, n) = ((m % 2) ? -g : g) * std::conj(specfun::complex_hermite(n, m, 2.0 * zeta));
    return;
  }
  const double g = std::exp(-pi * std::norm(zeta) / 2);
  CVec v(N);
  for (const auto& [l, w] : K.windows[j]) {
    for (int n = 0; n < N; ++n) v(n) = g * std::conj(specfun::complex_hermite(n, l, zeta));
    out.noalias() += w * v.conjugate() * v.transpose();
  }
}

// Kronecker product over planes, first plane most significant (box_indices order).
inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMat full_kernel(const Kernel& K, int N, std::span<const cplx> zeta) {
  CMat acc, pj;
  for (int j = 0; j < K.dim(); ++j) {
    plane_kernel(K, j, N, zeta[j], pj);
    acc = j ? kron(acc, pj) : pj;
  }
  return acc;
}

// ---------------------------------------------------------------- vector quadrature

using VecFn = std::function<CVec(double)>;

struct VecQuad {
  CVec value;
  double error = 0;
  bool converged = true;
};

inline void gk15(const VecFn& f, double a, double b, CVec& k, double& err) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double c = (a + b) / 2, h = (b - a) / 2;
  const CVec f0 = f(c);
  k = wk[0] * f0;
  CVec g = wg[0] * f0;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const CVec s = f(c - h * xk[i]) + f(c + h * xk[i]);
    k += wk[i] * s;
    if (i % 2 == 0) g += wg[i / 2] * s;
  }
  k *= h;
  g *= h;
  err = (k - g).cwiseAbs().maxCoeff();
}

inline void vadapt(const VecFn& f, double a, double b, double tol, int depth, VecQuad& out) {
  CVec k;
  double err;
  gk15(f, a, b, k, err);
  if (err <= tol || depth == 0) {
    if (err > tol) out.converged = false;
    if (out.value.size() == 0) out.value = CVec::Zero(k.size());
    out.value += k;
    out.error += err;
    return;
  }
  const double m = (a + b) / 2;
  const double t = std::max(tol / 2, 1e-15);
  vadapt(f, a, m, t, depth - 1, out);
  vadapt(f, m, b, t, depth - 1, out);
}

// Max-norm adaptive GK15 of a vector-valued f on [a, b]; b may be infinite.
inline VecQuad vector_adaptive(const VecFn& f, double a, double b, double tol, int depth = 30) {
  VecQuad out;
  if (std::isinf(b)) {
    const VecFn g = [&](double t) { return CVec(f(a + t / (1 - t)) / ((1 - t) * (1 - t))); };
    vadapt(g, 0.0, 1.0, tol, depth, out);
  } else {
    vadapt(f, a, b, tol, depth, out);
  }
  return out;
}

// ---------------------------------------------------------------- polar route

// int_{region} F_0(r) (x)_j R_j(r_j) dr with R_j(r) = r int_0^{2 pi} K_j(r e^{it}) dt
// (M-point trapezoid, exact for the angular frequencies present).
struct PolarProblem {
  const Kernel* K = nullptr;
  int N = 1;
  int M = 16;
  std::function<double(std::span<const double>)> F0;
  std::function<double(std::span<const double>)> upper;
  double tol = 1e-10;
};

inline CVec plane_table(const PolarProblem& P, int j, double r) {
  CMat acc = CMat::Zero(P.N, P.N), pj;
  for (int t = 0; t < P.M; ++t) {
    detail::plane_kernel(*P.K, j, P.N, std::polar(r, 2 * pi * t / P.M), pj);
    acc += pj;
  }
  acc *= r * 2 * pi / P.M;
  CVec v(P.N * P.N);
  for (int m = 0; m < P.N; ++m)
    for (int n = 0; n < P.N; ++n) v(m * P.N + n) = acc(m, n);
  return v;
}

inline CVec kron_vec(const CVec& a, const CVec& b) {
  CVec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline VecQuad polar_nested(const PolarProblem& P, std::vector<double>& r, int j) {
  const int d = static_cast<int>(r.size());
  const double b = P.upper(std::span<const double>(r.data(), j));
  Eigen::Index len = 1;
  for (int i = j; i < d; ++i) len *= P.N * P.N;
  if (!(b > 0)) return {CVec::Zero(len), 0.0, true};
  bool ok = true;
  // Non-innermost bounded variables: r = b (1 - (1-t)^2) removes the square-root
  // edge of curved sections.
  const bool graded = j + 1 < d && std::isfinite(b);
  const VecFn g = [&](double t) {
    double jac = 1.0;
    double rj = t;
    if (graded) {
      rj = b * (1 - (1 - t) * (1 - t));
      jac = 2 * b * (1 - t);
    }
    r[j] = rj;
    const CVec tab = plane_table(P, j, rj);
    if (j + 1 == d) return CVec(tab * (P.F0(r) * jac));
    auto inner = polar_nested(P, r, j + 1);
    ok = ok && inner.converged;
    return CVec(kron_vec(tab, inner.value) * jac);
  };
  auto q = graded ? vector_adaptive(g, 0.0, 1.0, P.tol) : vector_adaptive(g, 0.0, b, P.tol);
  q.converged = q.converged && ok;
  return q;
}

// Vector index sum_j (m_j N + n_j) (N^2)^{d-1-j} -> matrix (m, n).
inline CMat unflatten(const CVec& v, int d, int N) {
  int nb = 1;
  for (int j = 0; j < d; ++j) nb *= N;
  CMat A(nb, nb);
  std::vector<int> mi(d), ni(d);
  for (Eigen::Index f = 0; f < v.size(); ++f) {
    Eigen::Index rem = f;
    for (int j = d - 1; j >= 0; --j) {
      const int pair = static_cast<int>(rem % (N * N));
      rem /= N * N;
      mi[j] = pair / N;
      ni[j] = pair % N;
    }
    int m = 0, n = 0;
    for (int j = 0; j < d; ++j) {
      m = m * N + mi[j];
      n = n * N + ni[j];
    }
    A(m, n) = v(f);
  }
  return A;
}

}  // namespace detail

// ---------------------------------------------------------------- operator matrices

struct Basis {
  int d = 1;
  int N = 8;                              // functions per axis
  std::optional<SymplecticMatrix> frame;  // Hagedorn frame; Hermite when empty

  std::vector<MultiIndex> indices() const { return box_indices(d, N); }
  int size() const {
    int s = 1;
    for (int j = 0; j < d; ++j) s *= N;
    return s;
  }
  std::string describe() const { return std::string(frame ? "hagedorn" : "hermite") + "(d=" + std::to_string(d) + ",N=" + std::to_string(N) + ")"; }
};

inline Basis hermite_basis(int d, int N) { return {d, N, std::nullopt}; }
inline Basis hagedorn_basis(const SymplecticMatrix& T, int N) { return {T.dim(), N, T}; }

struct Diagnostics {
  std::string route;           // polar | cartesian | square | grid | point
  double quad_error = 0;       // estimated max entry error
  double boundary_mass = 0;    // integrand mass on the edge of the integration box
  double hermitian_dev = 0;    // max |A - A^*| before symmetrization
  double leakage = 0;          // mass of A phi_top outside the truncation, relative
  bool converged = true;
};

struct OperatorMatrix {
  std::string basis, tag, mask;
  int d = 1, N = 1;
  std::vector<MultiIndex> indices;
  CMat A;  // A(m, n) = <A phi_n, phi_m>
  Diagnostics diag;
};

struct AssemblyOptions {
  double tol = 1e-10;   // polar route, absolute on entries
  double step = 0.25;   // cartesian lattice step in frame coordinates
  double radius = 0;    // cartesian half-width in frame coordinates (0: auto)
  int square_order = 32;
  int extra = -1;       // extra functions per axis for the leakage probe (-1: 4 for d = 1, 2 for d = 2)
  bool lattice = false;  // use the cartesian lattice even when mask and basis share a frame

  int extra_for(int d) const { return extra >= 0 ? extra : (d == 1 ? 4 : 2); }
};

namespace detail {

inline void check_sizes(const PhaseMask& m, const Basis& b, const Kernel& K) {
  if (m.dim() != b.d || K.dim() != b.d) throw std::invalid_argument("opmatrix: dimension mismatch");
  if (b.d > 2) throw config_error("opmatrix: only d = 1, 2 are supported");
  const int cap = b.d == 1 ? max_basis_d1 : max_basis_d2;
  if (b.N < 1 || b.N > cap)
    throw config_error("opmatrix: N_basis must be in [1, " + std::to_string(cap) + "] for d = " + std::to_string(b.d));
  if (m.kind == PhaseMask::Kind::square && b.d != 1) throw config_error("opmatrix: square masks are d = 1");
}

inline CMat polar_route(const PhaseMask& mask, const Kernel& K, int d, int N, const AssemblyOptions& o, Diagnostics& diag) {
  using reinhardt::ProfileKind;
  const MaskSpec& m = mask.base;
  PolarProblem P;
  P.K = &K;
  P.N = N;
  P.M = 2 * (N + K.max_window()) + 8;
  P.tol = o.tol;
  const auto all = [](std::span<const double>) { return reinhardt::inf; };
  auto run = [&](std::function<double(std::span<const double>)> F0, std::function<double(std::span<const double>)> upper) {
    P.F0 = std::move(F0);
    P.upper = std::move(upper);
    std::vector<double> r(d, 0.0);
    const auto q = polar_nested(P, r, 0);
    diag.quad_error += q.error;
    diag.converged = diag.converged && q.converged;
    return unflatten(q.value, d, N);
  };
  int nb = 1;
  for (int j = 0; j < d; ++j) nb *= N;
  CMat A = m.c * K.trace() * CMat::Identity(nb, nb);
  if (m.kind == ProfileKind::none) return A;
  if (m.kind == ProfileKind::indicator) {
    const auto& W = *m.shadow;
    if (W.bounded()) return A + m.scale * run([](std::span<const double>) { return 1.0; }, [&W](std::span<const double> p) { return W.section_bound(p); });
    const auto& in = *W.inner;
    const CMat whole = run([](std::span<const double>) { return 1.0; }, all);
    const CMat inner = run([](std::span<const double>) { return 1.0; }, [&in](std::span<const double> p) { return in.section_bound(p); });
    return A + m.scale * (whole - inner);
  }
  const double R = m.profile_support();
  const auto F0 = [&m](std::span<const double> r) { return m.profile(r); };
  if (std::isfinite(R)) {
    const auto ball = reinhardt::ball_shadow(d, R);
    return A + run(F0, [ball](std::span<const double> p) { return ball.section_bound(p); });
  }
  return A + run(F0, all);
}

// Trapezoid on the lattice z = S u, u in h Z^{2d} with |u| <= L (S = basis
// frame or Id). quad_error is the difference to the 2h sublattice, a bound
// for the coarser rule.
inline CMat cartesian_route(const PhaseMask& mask, const Basis& b, const Kernel& K, int N, const AssemblyOptions& o,
                            Diagnostics& diag) {
  const int d = b.d, D = 2 * d;
  const RMat S = b.frame ? b.frame->T : RMat::Identity(D, D);
  const RMat Binv = b.frame ? b.frame->inverse() : RMat::Identity(D, D);
  const double L = o.radius > 0 ? o.radius : std::sqrt((N + K.max_window()) / pi + 12.0);
  const int half = static_cast<int>(std::ceil(L / o.step / 2)) * 2;  // even: sublattice keeps the ends
  const int n = 2 * half + 1;
  const double h = o.step;
  int nb = 1;
  for (int j = 0; j < d; ++j) nb *= N;
  std::size_t total = 1;
  for (int a = 0; a < D; ++a) total *= n;
  const std::size_t per_chunk = total / n;
  std::vector<CMat> fine(n, CMat::Zero(nb, nb)), coarse(n, CMat::Zero(nb, nb));
  std::vector<double> edge(n, 0.0);
  parallel_chunks(n, [&](std::size_t c) {
    std::vector<int> idx(D);
    std::vector<double> u(D), z(D);
    for (std::size_t f = 0; f < per_chunk; ++f) {
      std::size_t rem = f;
      idx[0] = static_cast<int>(c);
      for (int a = D - 1; a >= 1; --a) {
        idx[a] = static_cast<int>(rem % n);
        rem /= n;
      }
      bool even = true;
      double u2 = 0;
      for (int a = 0; a < D; ++a) {
        u[a] = (idx[a] - half) * h;
        u2 += u[a] * u[a];
        even = even && idx[a] % 2 == 0;
      }
      if (u2 > L * L) continue;  // beyond the Gaussian envelope
      const bool boundary = u2 > (L - h) * (L - h);
      for (int a = 0; a < D; ++a) {
        double s = 0;
        for (int e = 0; e < D; ++e) s += S(a, e) * u[e];
        z[a] = s;
      }
      const double F = mask.profile(z);
      if (F == 0.0) continue;
      const auto zeta = phasespace::frame_coords(Binv, z);
      const CMat Kz = full_kernel(K, N, zeta);
      fine[c] += F * Kz;
      if (even) coarse[c] += F * Kz;
      if (boundary) edge[c] = std::max(edge[c], std::abs(F) * Kz.diagonal().cwiseAbs().maxCoeff());
    }
  });
  CMat A = CMat::Zero(nb, nb), Ac = CMat::Zero(nb, nb);
  for (int c = 0; c < n; ++c) {
    A += fine[c];
    Ac += coarse[c];
    diag.boundary_mass = std::max(diag.boundary_mass, edge[c]);
  }
  const double w = std::pow(h, D), wc = std::pow(2 * h, D);
  A *= w;
  Ac *= wc;
  diag.quad_error = (A - Ac).cwiseAbs().maxCoeff();
  return A + mask.constant() * K.trace() * CMat::Identity(nb, nb);
}

// Tensor Gauss-Legendre on the square; error estimate from a lower order.
inline CMat square_route(const PhaseMask& mask, const Kernel& K, int N, const AssemblyOptions& o, Diagnostics& diag) {
  auto run = [&](int order) {
    const auto rule = quad::gauss_legendre(order, -mask.a, mask.a);
    CMat A = CMat::Zero(N, N);
    for (std::size_t i = 0; i < rule.x.size(); ++i)
      for (std::size_t j = 0; j < rule.x.size(); ++j) {
        const cplx zeta(rule.x[i], rule.x[j]);
        A += rule.w[i] * rule.w[j] * full_kernel(K, N, std::span<const cplx>(&zeta, 1));
      }
    return A;
  };
  const CMat A = run(o.square_order);
  diag.quad_error = (A - run(o.square_order * 3 / 4)).cwiseAbs().maxCoeff();
  return A;
}

inline CMat point_route(const Kernel& K, int d, int N) {
  const std::vector<cplx> zero(d, 0.0);
  return full_kernel(K, N, zero);
}

inline OperatorMatrix finish(CMat A, const PhaseMask& mask, const Basis& b, std::string tag, int extra, Diagnostics diag) {
  OperatorMatrix op;
  op.basis = b.describe();
  op.tag = std::move(tag);
  op.mask = mask.describe();
  op.d = b.d;
  op.N = b.N;
  op.indices = b.indices();
  const int Ne = b.N + extra;
  const auto ext = box_indices(b.d, Ne);
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    bool in = true;
    for (int j = 0; j < b.d; ++j) in = in && ext[i][j] < b.N;
    if (in) keep.push_back(static_cast<Eigen::Index>(i));
  }
  diag.hermitian_dev = (A - A.adjoint()).cwiseAbs().maxCoeff();
  // Leakage of A applied to the top truncated element (N-1, ..., N-1).
  const Eigen::Index top = keep.back();
  const double col = A.col(top).norm();
  double out = 0;
  std::vector<char> inside(ext.size(), 0);
  for (auto k : keep) inside[k] = 1;
  for (std::size_t i = 0; i < ext.size(); ++i)
    if (!inside[i]) out += std::norm(A(static_cast<Eigen::Index>(i), top));
  diag.leakage = col > 0 ? std::sqrt(out) / col : 0.0;
  op.A.resize(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j) op.A(i, j) = A(keep[i], keep[j]);
  op.A = (op.A + op.A.adjoint()).eval() / 2.0;
  op.diag = std::move(diag);
  return op;
}

inline OperatorMatrix assemble(const PhaseMask& mask, const Basis& b, const Kernel& K, const AssemblyOptions& o) {
  check_sizes(mask, b, K);
  const int extra = o.extra_for(b.d), Ne = b.N + extra;
  Diagnostics diag;
  CMat A;
  if (mask.kind == PhaseMask::Kind::point) {
    diag.route = "point";
    A = point_route(K, b.d, Ne);
  } else if (mask.kind == PhaseMask::Kind::square && !b.frame) {
    diag.route = "square";
    A = square_route(mask, K, Ne, o, diag);
  } else if (mask.kind == PhaseMask::Kind::polyradial && !mask.T && !b.frame) {
    diag.route = "polar";
    A = polar_route(mask, K, b.d, Ne, o, diag);
  } else if (mask.kind == PhaseMask::Kind::polyradial && mask.T && b.frame && !o.lattice &&
             (mask.T->T - b.frame->T).cwiseAbs().maxCoeff() <= 1e-14 * b.frame->T.cwiseAbs().maxCoeff()) {
    // z = T v has unit Jacobian and zeta(T v) = v: the polar problem in frame coordinates.
    diag.route = "polar-frame";
    A = polar_route(mask, K, b.d, Ne, o, diag);
  } else {
    diag.route = "cartesian";
    A = cartesian_route(mask, b, K, Ne, o, diag);
  }
  return finish(std::move(A), mask, b, K.tag, extra, std::move(diag));
}

// int F (W(phi_n, phi_m) * a_S) = int W(phi_n, phi_m) (F * a_S(-.)) on the
// symbol's grid (d = 1).
inline OperatorMatrix grid_route(const PhaseMask& mask, const Basis& b, const eigen::StateSymbol& s, const AssemblyOptions& o) {
  const auto& a = *s.symbol;
  const auto& g = a.grid;
  if (b.d != 1 || g.d != 1) throw config_error("assemble_mixed: grid states are d = 1");
  if (b.frame) throw config_error("assemble_mixed: grid states use the Hermite basis");
  if (mask.kind == PhaseMask::Kind::point) throw config_error("assemble_mixed: point masks need a closed-form state");
  Kernel dummy;
  dummy.windows.assign(1, {});
  check_sizes(mask, b, dummy);
  const int N = g.N, extra = o.extra_for(1), Ne = b.N + extra;
  phasespace::GridFunction F(g), rev(g);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const std::vector<double> z{g.coord(i), g.coord(j)};
      F.samples[i * N + j] = mask.profile(z);
      if (i > 0 && j > 0) rev.samples[i * N + j] = a.samples[(N - i) * N + (N - j)];
    }
  const auto G = phasespace::convolve(F, rev);
  Kernel W;
  W.kind = Kernel::Kind::wigner;
  W.windows.assign(1, {});
  CMat A = CMat::Zero(Ne, Ne), Ac = CMat::Zero(Ne, Ne);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const cplx v = G.samples[i * N + j];
      if (v == 0.0) continue;
      const cplx zeta(g.coord(i), g.coord(j));
      const CMat Kz = full_kernel(W, Ne, std::span<const cplx>(&zeta, 1));
      A += v * Kz;
      if (i % 2 == 0 && j % 2 == 0) Ac += v * Kz;
    }
  const double h = g.h();
  A *= h * h;
  Ac *= 4 * h * h;
  Diagnostics diag;
  diag.route = "grid";
  diag.quad_error = (A - Ac).cwiseAbs().maxCoeff();
  diag.boundary_mass = G.boundary;
  A += mask.constant() * s.trace() * CMat::Identity(Ne, Ne);
  return finish(std::move(A), mask, b, "state=" + s.describe(), extra, std::move(diag));
}

}  // namespace detail

// <A_F^g phi_n, phi_m> = c delta_{nm} + int F_0 V_g phi_n conj(V_g phi_m) for the
// window g = phi_k (Hermite basis) or phi_k[Q, P] (Hagedorn basis).
inline OperatorMatrix assemble_localization(const PhaseMask& mask, const MultiIndex& k, const Basis& b,
                                            const AssemblyOptions& o = {}) {
  if (k.dim() != static_cast<std::size_t>(b.d)) throw std::invalid_argument("assemble_localization: window dimension");
  return detail::assemble(mask, b, window_kernel(k), o);
}

// <(F * S) phi_n, phi_m> = int F Q_S(phi_n, phi_m). Closed-form states use
// their window mixture (or W directly for S = 2^d P); grid symbols are
// convolved on the grid.
inline OperatorMatrix assemble_mixed(const PhaseMask& mask, const eigen::StateSymbol& s, const Basis& b,
                                     const AssemblyOptions& o = {}) {
  if (s.d != b.d) throw std::invalid_argument("assemble_mixed: state dimension");
  if (s.kind == eigen::StateSymbol::Kind::grid) return detail::grid_route(mask, b, s, o);
  return detail::assemble(mask, b, state_kernel(s), o);
}

// ---------------------------------------------------------------- diagonalization

struct Spectrum {
  Eigen::VectorXd values;  // descending
  CMat vectors;            // columns, unit norm
  std::vector<MultiIndex> dominant;
  std::vector<char> untrusted;  // dominant index within 2 of the truncation edge
  double residual = 0;          // max ||A v - lambda v||
  eigen::EigenvalueTable table;
};

inline Spectrum diagonalize(const OperatorMatrix& op) {
  const Eigen::SelfAdjointEigenSolver<CMat> es(op.A);
  if (es.info() != Eigen::Success) throw tolerance_error("diagonalize: eigensolver failed");
  const Eigen::Index n = op.A.rows();
  std::vector<Eigen::Index> order(n);
  std::vector<Eigen::Index> dom(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    order[i] = i;
    es.eigenvectors().col(i).cwiseAbs().maxCoeff(&dom[i]);
  }
  // Descending; near-ties by the dominant coefficient index.
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
  for (Eigen::Index s = 0; s < n;) {
    Eigen::Index e = s + 1;
    while (e < n && es.eigenvalues()(order[e - 1]) - es.eigenvalues()(order[e]) <= 1e-12 * scale) ++e;
    std::sort(order.begin() + s, order.begin() + e, [&](Eigen::Index a, Eigen::Index b) {
      return op.indices[dom[a]] < op.indices[dom[b]];
    });
    s = e;
  }
  Spectrum sp;
  sp.values.resize(n);
  sp.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sp.values(i) = es.eigenvalues()(order[i]);
    CVec v = es.eigenvectors().col(order[i]);
    const cplx p = v(dom[order[i]]);
    v *= std::abs(p) / p;  // fix the phase: dominant coefficient real positive
    sp.vectors.col(i) = v;
    const MultiIndex& k = op.indices[dom[order[i]]];
    sp.dominant.push_back(k);
    bool edge = false;
    for (std::size_t j = 0; j < k.dim(); ++j) edge = edge || k[j] >= op.N - 2;
    sp.untrusted.push_back(edge);
    sp.residual = std::max(sp.residual, (op.A * v - sp.values(i) * v).norm());
  }
  if (sp.residual > residual_tol * scale)
    throw tolerance_error("diagonalize: residual " + std::to_string(sp.residual));
  auto& t = sp.table;
  t.indices = sp.dominant;
  t.values.assign(sp.values.data(), sp.values.data() + n);
  t.errors.assign(n, std::max(op.diag.quad_error, sp.residual));
  t.tag = op.tag;
  t.mask = op.mask;
  t.method = "matrix";
  return sp;
}

// Spectrum sorted ascending with the dominant index dropped, for multiset
// comparisons of degenerate spectra.
inline std::vector<double> sorted_values(const Spectrum& s) {
  std::vector<double> v(s.values.data(), s.values.data() + s.values.size());
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------- double orthogonality

struct DoubleOrthogonality {
  CMat gram;      // <V phi_n, V phi_m> over dz
  CMat weighted;  // same over F(z) dz
  Eigen::VectorXd b, c;
  double gram_offdiag = 0, weighted_offdiag = 0;
  std::pair<MultiIndex, MultiIndex> worst;  // location of the largest weighted off-diagonal
  bool pass(double tol) const { return gram_offdiag <= tol && weighted_offdiag <= tol; }
};

inline double max_offdiag(const CMat& A, Eigen::Index* row = nullptr, Eigen::Index* col = nullptr) {
  double m = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (i != j && std::abs(A(i, j)) > m) {
        m = std::abs(A(i, j));
        if (row) *row = i;
        if (col) *col = j;
      }
  return m;
}

// Grams of {V_g phi_n} for the window g = phi_k of the basis family; the dz
// Gram integrates the unit mask numerically rather than invoking Moyal.
inline DoubleOrthogonality verify_double_orthogonality(const Basis& b, const MultiIndex& k, const PhaseMask& mask,
                                                       const AssemblyOptions& o = {}) {
  DoubleOrthogonality r;
  AssemblyOptions oo = o;
  oo.extra = 0;
  const PhaseMask unit = radial(reinhardt::radial_table_mask(b.d, {{0.0, 1.0}, {1e6, 1.0}}));
  r.gram = assemble_localization(unit, k, b, oo).A;
  r.weighted = assemble_localization(mask, k, b, oo).A;
  r.b = r.gram.diagonal().real();
  r.c = r.weighted.diagonal().real();
  r.gram_offdiag = max_offdiag(r.gram);
  Eigen::Index i = 0, j = 0;
  r.weighted_offdiag = max_offdiag(r.weighted, &i, &j);
  const auto idx = b.indices();
  r.worst = {idx[i], idx[j]};
  return r;
}

// ---------------------------------------------------------------- export

inline void write_matrix_csv(const OperatorMatrix& op, std::ostream& os) {
  const Eigen::Index n = op.A.cols();
  for (Eigen::Index j = 0; j < n; ++j) os << (j ? "," : "") << "re_" << j << ",im_" << j;
  os << "\n";
  char buf[64];
  auto put = [&](double v) {
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, r.ptr - buf);
  };
  for (Eigen::Index i = 0; i < op.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) os << ",";
      put(op.A(i, j).real());
      os << ",";
      put(op.A(i, j).imag());
    }
    os << "\n";
  }
}

inline nlohmann::json sidecar(const OperatorMatrix& op) {
  nlohmann::json j;
  j["basis"] = op.basis;
  j["tag"] = op.tag;
  j["mask"] = op.mask;
  j["d"] = op.d;
  j["N_basis"] = op.N;
  std::vector<std::vector<int>> idx;
  for (const auto& k : op.indices) idx.push_back(k.entries());
  j["indices"] = idx;
  j["diagnostics"] = {{"route", op.diag.route},
                      {"quad_error", op.diag.quad_error},
                      {"boundary_mass", op.diag.boundary_mass},
                      {"hermitian_dev", op.diag.hermitian_dev},
                      {"leakage", op.diag.leakage},
                      {"converged", op.diag.converged}};
  return j;
}

}  // namespace locspec::opmatrix
