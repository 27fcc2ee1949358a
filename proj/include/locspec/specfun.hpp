#pragma once

// Hermite functions, generalized Laguerre polynomials and complex Hermite
// polynomials, all by three-term recurrence.

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace locspec::specfun {

struct PolyEval {
  cplx value;
  int degree;
};

namespace detail {

// Beyond this order the recurrences accumulate in long double.
inline constexpr int extended_threshold = 30;

template <class R>
void hermite_fill(int nmax, double t, double* out) {
  const R rpi = std::numbers::pi_v<R>;
  R prev = 0;
  R cur = std::pow(R(2), R(0.25)) * std::exp(-rpi * R(t) * R(t));
  out[0] = double(cur);
  const R c = 2 * std::sqrt(rpi) * R(t);
  for (int m = 0; m < nmax; ++m) {
    R next = (c * cur - std::sqrt(R(m)) * prev) / std::sqrt(R(m + 1));
    prev = cur;
    cur = next;
    out[m + 1] = double(cur);
  }
}

template <class R>
void laguerre_fill(int kmax, double alpha, double t, double* out) {
  R prev = 1;
  out[0] = 1.0;
  if (kmax == 0) return;
  R cur = 1 + R(alpha) - R(t);
  out[1] = double(cur);
  for (int k = 1; k < kmax; ++k) {
    R next = ((2 * k + 1 + R(alpha) - R(t)) * cur - (k + R(alpha)) * prev) / R(k + 1);
    prev = cur;
    cur = next;
    out[k + 1] = double(cur);
  }
}

template <class R>
double laguerre_value(int k, double alpha, double t) {
  R prev = 1, cur = 1 + R(alpha) - R(t);
  for (int m = 1; m < k; ++m) {
    R next = ((2 * m + 1 + R(alpha) - R(t)) * cur - (m + R(alpha)) * prev) / R(m + 1);
    prev = cur;
    cur = next;
  }
  return double(cur);
}

inline cplx ipow(cplx z, int p) {
  cplx r = 1.0;
  for (int i = 0; i < p; ++i) r *= z;
  return r;
}

}  // namespace detail

// phi_0 .. phi_nmax at t.
inline std::vector<double> hermite_all(int nmax, double t) {
  if (nmax < 0) throw std::domain_error("hermite: negative order");
  std::vector<double> out(nmax + 1);
  if (nmax > detail::extended_threshold)
    detail::hermite_fill<long double>(nmax, t, out.data());
  else
    detail::hermite_fill<double>(nmax, t, out.data());
  return out;
}

inline double hermite(int n, double t) { return hermite_all(n, t).back(); }

inline double hermite_product(const MultiIndex& k, std::span<const double> t) {
  if (t.size() != k.dim()) throw std::invalid_argument("hermite_product: dimension mismatch");
  double p = 1.0;
  for (std::size_t j = 0; j < t.size(); ++j) p *= hermite(k[j], t[j]);
  return p;
}

inline std::vector<double> laguerre_all(int kmax, double alpha, double t) {
  if (kmax < 0) throw std::domain_error("laguerre: negative degree");
  std::vector<double> out(kmax + 1);
  if (kmax > detail::extended_threshold)
    detail::laguerre_fill<long double>(kmax, alpha, t, out.data());
  else
    detail::laguerre_fill<double>(kmax, alpha, t, out.data());
  return out;
}

inline double laguerre(int k, double alpha, double t) {
  if (k < 0) throw std::domain_error("laguerre: negative degree");
  if (k == 0) return 1.0;
  return k > detail::extended_threshold ? detail::laguerre_value<long double>(k, alpha, t)
                                        : detail::laguerre_value<double>(k, alpha, t);
}

// L_k^alpha at a complex argument (plain double recurrence).
inline cplx laguerre_complex(int k, double alpha, cplx t) {
  if (k < 0) throw std::domain_error("laguerre: negative degree");
  cplx prev = 1.0, cur = 1.0 + alpha - t;
  if (k == 0) return prev;
  for (int m = 1; m < k; ++m) {
    cplx next = ((2.0 * m + 1.0 + alpha - t) * cur - (m + alpha) * prev) / double(m + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

// sqrt(a!/b!) via log-gamma.
inline double sqrt_factorial_ratio(int a, int b) {
  return std::exp(0.5 * (std::lgamma(a + 1.0) - std::lgamma(b + 1.0)));
}

// H_{n,k}(z). The n < k branch is obtained from H_{k,n} by reflection:
// H_{n,k} = (-1)^{k-n} conj(H_{k,n}).
inline cplx complex_hermite(int n, int k, cplx z) {
  if (n < 0 || k < 0) throw std::domain_error("complex_hermite: negative index");
  if (k > n) {
    cplx h = std::conj(complex_hermite(k, n, z));
    return ((k - n) % 2) ? -h : h;
  }
  const int a = n - k;
  const double r2 = std::norm(z);
  const double pref = sqrt_factorial_ratio(k, n) * std::pow(pi, 0.5 * a);
  return pref * detail::ipow(z, a) * laguerre(k, a, pi * r2);
}

inline PolyEval complex_hermite_eval(int n, int k, cplx z) {
  return {complex_hermite(n, k, z), n + k};
}

// (min!/max!) u^{|n-k|} (L_min^{|n-k|}(u))^2 e^{-u}: the one-coordinate
// density whose integrals give the orthogonality constants. Reflection is
// applied so the power is never negative.
inline double laguerre_density(int n, int k, double u) {
  const int lo = std::min(n, k), a = std::abs(n - k);
  const double L = laguerre(lo, a, u);
  if (u <= 0.0) return a == 0 ? L * L : 0.0;
  const double logc = std::lgamma(lo + 1.0) - std::lgamma(lo + a + 1.0) + a * std::log(u) - u;
  return std::exp(logc) * L * L;
}

// sum_j C(n,j) b^j (1-b)^{n-j} L_j^0(t), checked against L_n^0(b t).
inline double laguerre_rescale(int n, double b, double t, double rtol = 1e-9) {
  if (n < 0) throw std::domain_error("laguerre_rescale: negative degree");
  const auto L = laguerre_all(n, 0.0, t);
  double sum = 0.0, scale = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0));
    const double term = std::round(binom) * std::pow(b, j) * std::pow(1.0 - b, n - j) * L[j];
    sum += term;
    scale += std::abs(term);
  }
  const double direct = laguerre(n, 0.0, b * t);
  if (std::abs(sum - direct) > rtol * std::max(1.0, scale))
    throw tolerance_error("laguerre_rescale: scaling identity violated");
  return sum;
}

}  // namespace locspec::specfun
