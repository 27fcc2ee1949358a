#pragma once

// Hagedorn wavepackets phi_k[Q,P] = (2^{|k|} k!)^{-1/2} p_k(t) phi_0[Q,P](t).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "core.hpp"
#include "specfun.hpp"
#include "symplectic.hpp"

namespace locspec::hagedorn {

using symplectic::CMat;
using symplectic::LagrangianFrame;

// Frame data needed for evaluation, computed once.
class FrameCache {
 public:
  explicit FrameCache(const LagrangianFrame& f)
      : frame_(f), d_(f.dim()), Qinv_(f.Q.inverse()), PQinv_(f.P * Qinv_), M_(Qinv_ * f.Q.conjugate()) {
    // Principal branch of det(Q)^{1/2}.
    det_sqrt_ = std::sqrt(f.Q.determinant());
    norm_ = std::pow(2.0, d_ / 4.0) / det_sqrt_;
  }

  int dim() const { return d_; }
  const LagrangianFrame& frame() const { return frame_; }
  const CMat& Qinv() const { return Qinv_; }
  const CMat& M() const { return M_; }
  cplx det_sqrt() const { return det_sqrt_; }

  cplx ground(std::span<const double> t) const {
    check(t);
    cplx q = 0.0;
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) q += t[a] * PQinv_(a, b) * t[b];
    return norm_ * std::exp(cplx(0, pi) * q);
  }

  // p_j(t) for every j in the box prod_l [0, kmax_l], lexicographic with the
  // last axis fastest.
  std::vector<cplx> prefactor_box(const MultiIndex& kmax, std::span<const double> t) const {
    check(t);
    if (static_cast<int>(kmax.dim()) != d_) throw std::invalid_argument("prefactor: index dimension mismatch");
    std::vector<int> ext(d_), stride(d_);
    std::size_t total = 1;
    for (int l = d_ - 1; l >= 0; --l) {
      ext[l] = kmax[l] + 1;
      stride[l] = static_cast<int>(total);
      total *= ext[l];
    }
    std::vector<cplx> y(d_, 0.0);
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) y[a] += Qinv_(a, b) * t[b];
    const double c = 2.0 * std::sqrt(2.0 * pi);
    std::vector<cplx> p(total);
    p[0] = 1.0;
    std::vector<int> j(d_, 0);
    for (std::size_t idx = 1; idx < total; ++idx) {
      // advance j lexicographically
      for (int l = d_ - 1; l >= 0; --l) {
        if (++j[l] < ext[l]) break;
        j[l] = 0;
      }
      int l = d_ - 1;
      while (j[l] == 0) --l;
      // p_{k+e_l} with k = j - e_l
      const std::size_t kidx = idx - stride[l];
      cplx v = c * y[l] * p[kidx];
      for (int i = 0; i < d_; ++i) {
        const int ki = j[i] - (i == l ? 1 : 0);
        if (ki > 0) v -= 2.0 * M_(l, i) * double(ki) * p[kidx - stride[i]];
      }
      p[idx] = v;
    }
    return p;
  }

  cplx prefactor(const MultiIndex& k, std::span<const double> t) const {
    return prefactor_box(k, t).back();
  }

  cplx eval(const MultiIndex& k, std::span<const double> t) const {
    const double norm = std::sqrt(std::pow(2.0, k.length()) * k.factorial());
    return prefactor(k, t) / norm * ground(t);
  }

  // All wavepackets in the box at once.
  std::vector<cplx> eval_box(const MultiIndex& kmax, std::span<const double> t) const {
    auto p = prefactor_box(kmax, t);
    const cplx g = ground(t);
    std::size_t i = 0;
    for (const auto& k : box_of(kmax)) p[i++] *= g / std::sqrt(std::pow(2.0, k.length()) * k.factorial());
    return p;
  }

  static std::vector<MultiIndex> box_of(const MultiIndex& kmax) {
    std::vector<MultiIndex> out;
    const std::size_t d = kmax.dim();
    MultiIndex k(d);
    while (true) {
      out.push_back(k);
      std::size_t l = d;
      bool done = true;
      while (l > 0) {
        --l;
        if (++k[l] <= kmax[l]) {
          done = false;
          break;
        }
        k[l] = 0;
      }
      if (done) return out;
    }
  }

 private:
  void check(std::span<const double> t) const {
    if (static_cast<int>(t.size()) != d_) throw std::invalid_argument("hagedorn: dimension mismatch");
  }

  LagrangianFrame frame_;
  int d_;
  CMat Qinv_, PQinv_, M_;
  cplx det_sqrt_, norm_;
};

struct Wavepacket {
  LagrangianFrame frame;
  MultiIndex index;
  int dim() const { return frame.dim(); }
};

inline cplx gaussian_ground(const LagrangianFrame& f, std::span<const double> t) {
  return FrameCache(f).ground(t);
}

inline cplx polynomial_prefactor(const LagrangianFrame& f, const MultiIndex& k, std::span<const double> t) {
  return FrameCache(f).prefactor(k, t);
}

inline cplx wavepacket_eval(const Wavepacket& wp, std::span<const double> t) {
  return FrameCache(wp.frame).eval(wp.index, t);
}

// sum_{k in [0, N)^d} |<f, phi_k>|^2 / ||f||^2, every integral by the trapezoid
// rule on [-L, L)^d with M points per axis. Completeness of the family shows
// up as the capture tending to 1 with N.
inline double coefficient_capture(const FrameCache& fc, int N, const std::function<cplx(std::span<const double>)>& f,
                                  double L, int M) {
  const int d = fc.dim();
  const MultiIndex kmax(std::vector<int>(d, N - 1));
  std::size_t nb = 1, pts = 1;
  for (int j = 0; j < d; ++j) {
    nb *= N;
    pts *= M;
  }
  std::vector<cplx> c(nb, 0.0);
  double norm2 = 0;
  std::vector<double> t(d);
  for (std::size_t p = 0; p < pts; ++p) {
    std::size_t r = p;
    for (int j = d - 1; j >= 0; --j) {
      t[j] = -L + 2 * L * static_cast<double>(r % M) / M;
      r /= M;
    }
    const cplx fv = f(t);
    norm2 += std::norm(fv);
    const auto box = fc.eval_box(kmax, t);
    for (std::size_t i = 0; i < nb; ++i) c[i] += fv * std::conj(box[i]);
  }
  double cap = 0;
  for (auto v : c) cap += std::norm(v);
  const double w = std::pow(2 * L / M, d);
  return cap * w / norm2;
}

struct LadderCheck {
  double residual = 0.0;  // max |A_j phi_k - sqrt(k_j) phi_{k-e_j}| over the grid
  double scale = 0.0;     // max |phi_k| over the grid
  bool annihilation = false;
};

// Applies A_j = -sqrt(pi) i sum_l (P_{lj} t_l + (i/2pi) Q_{lj} d/dt_l) with
// central differences of step h and compares with sqrt(k_j) phi_{k-e_j}
// (or with 0 when k_j = 0) at the tensor grid points given per axis.
inline LadderCheck ladder_lower(const Wavepacket& wp, int j, const std::vector<double>& axis,
                                double h = 1e-4) {
  const FrameCache fc(wp.frame);
  const int d = fc.dim();
  if (j < 0 || j >= d) throw std::invalid_argument("ladder_lower: axis out of range");
  const CMat& Q = wp.frame.Q;
  const CMat& P = wp.frame.P;
  LadderCheck out;
  out.annihilation = wp.index[j] == 0;
  const MultiIndex lower = out.annihilation ? wp.index : wp.index.minus(j);
  const double sk = std::sqrt(double(wp.index[j]));
  std::vector<std::size_t> pos(d, 0);
  std::vector<double> t(d), tp(d), tm(d);
  while (true) {
    for (int a = 0; a < d; ++a) t[a] = axis[pos[a]];
    cplx f = fc.eval(wp.index, t);
    cplx acc = 0.0;
    for (int l = 0; l < d; ++l) {
      tp = t;
      tm = t;
      tp[l] += h;
      tm[l] -= h;
      cplx df = (fc.eval(wp.index, tp) - fc.eval(wp.index, tm)) / (2.0 * h);
      acc += P(l, j) * t[l] * f + cplx(0, 1.0 / (2.0 * pi)) * Q(l, j) * df;
    }
    acc *= -std::sqrt(pi) * cplx(0, 1);
    cplx target = out.annihilation ? cplx(0.0) : sk * fc.eval(lower, t);
    out.residual = std::max(out.residual, std::abs(acc - target));
    out.scale = std::max(out.scale, std::abs(f));
    int a = d - 1;
    while (a >= 0 && ++pos[a] == axis.size()) pos[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

// Zero-diagonal prefactor: for M = [[0, e^{i theta}], [e^{i theta}, 0]],
// p~_n(s) = (-1)^b e^{i theta b} b! s_hi^{a-b} L_b^{a-b}(s_1 s_2 e^{-i theta}),
// with b = min(n), a = max(n) and s_hi the coordinate of the larger index.
inline cplx zero_diagonal_prefactor(const MultiIndex& n, double theta, cplx s1, cplx s2) {
  if (n.dim() != 2) throw std::invalid_argument("zero_diagonal_prefactor: d must be 2");
  const int a = std::max(n[0], n[1]), b = std::min(n[0], n[1]);
  const cplx s = n[0] >= n[1] ? s1 : s2;
  const double sign = (b % 2) ? -1.0 : 1.0;
  return sign * std::polar(1.0, theta * b) * std::tgamma(b + 1.0) * specfun::detail::ipow(s, a - b) *
         specfun::laguerre_complex(b, a - b, s1 * s2 * std::polar(1.0, -theta));
}

// |phi_n| for the zero-diagonal example frame (q1 = q2 = 1, theta = pi/4):
// 2^{1/4} sqrt(b!/a!) (2 pi xi)^{(a-b)/2} |L_b^{a-b}(2 pi xi)| e^{-pi xi},
// xi = t1^2 - sqrt(2) t1 t2 + t2^2.
inline double zero_diagonal_modulus(const MultiIndex& n, double t1, double t2) {
  if (n.dim() != 2) throw std::invalid_argument("zero_diagonal_modulus: d must be 2");
  const int a = std::max(n[0], n[1]), b = std::min(n[0], n[1]);
  const double xi = t1 * t1 - std::sqrt(2.0) * t1 * t2 + t2 * t2;
  const double u = 2.0 * pi * xi;
  return std::pow(2.0, 0.25) * specfun::sqrt_factorial_ratio(b, a) * std::pow(u, 0.5 * (a - b)) *
         std::abs(specfun::laguerre(b, a - b, u)) * std::exp(-pi * xi);
}

}  // namespace locspec::hagedorn
