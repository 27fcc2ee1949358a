#pragma once

// Phase-space transforms on uniform grids and their closed forms for
// Hermite functions and Hagedorn wavepackets.

#include <Eigen/Dense>
#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "core.hpp"
#include "fft.hpp"
#include "hagedorn.hpp"
#include "specfun.hpp"
#include "symplectic.hpp"

namespace locspec::phasespace {

using symplectic::RMat;

// ---------------------------------------------------------------- lattices

// Uniform lattice on [-L, L)^{2d} with N points per axis; axes ordered
// x_1..x_d, w_1..w_d, last axis fastest in memory.
struct PhaseGrid {
  int d = 1;
  double L = 6.0;
  int N = 256;

  double h() const { return 2.0 * L / N; }
  double coord(int i) const { return -L + i * h(); }
  int axes() const { return 2 * d; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < axes(); ++a) s *= static_cast<std::size_t>(N);
    return s;
  }
  void validate() const {
    if (d < 1 || d > 2) throw config_error("PhaseGrid: d must be 1 or 2");
    if (N < 16 || !std::has_single_bit(static_cast<unsigned>(N)))
      throw config_error("PhaseGrid: N must be a power of two >= 16");
    if (!(L > 0)) throw config_error("PhaseGrid: L must be positive");
  }
  // Phase-space point for a flat index.
  void point(std::size_t flat, double* z) const {
    for (int a = axes() - 1; a >= 0; --a) {
      z[a] = coord(static_cast<int>(flat % N));
      flat /= N;
    }
  }
  bool operator==(const PhaseGrid&) const = default;

  static PhaseGrid defaults(int d) { return d == 1 ? PhaseGrid{1, 6.0, 256} : PhaseGrid{2, 5.0, 64}; }
};

// Fraction of sum |F| carried by the outer 1/16 of some axis.
inline double boundary_mass(const PhaseGrid& g, std::span<const cplx> v) {
  const int band = std::max(1, g.N / 16);
  double tot = 0.0, edge = 0.0;
  std::vector<int> idx(g.axes());
  for (std::size_t f = 0; f < v.size(); ++f) {
    std::size_t r = f;
    bool outer = false;
    for (int a = g.axes() - 1; a >= 0; --a) {
      int i = static_cast<int>(r % g.N);
      r /= g.N;
      if (i < band || i >= g.N - band) outer = true;
    }
    const double m = std::abs(v[f]);
    tot += m;
    if (outer) edge += m;
  }
  return tot > 0 ? edge / tot : 0.0;
}

struct GridFunction {
  PhaseGrid grid;
  std::vector<cplx> samples;
  double boundary = 0.0;  // boundary-mass diagnostic of the producing transform

  GridFunction() = default;
  explicit GridFunction(const PhaseGrid& g) : grid(g), samples(g.size(), 0.0) {}

  cplx& operator[](std::size_t i) { return samples[i]; }
  const cplx& operator[](std::size_t i) const { return samples[i]; }

  std::size_t flat(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * grid.N + i;
    return f;
  }
  double max_abs() const {
    double m = 0;
    for (auto v : samples) m = std::max(m, std::abs(v));
    return m;
  }
  // sum F h^{2d}
  cplx integral() const {
    cplx s = 0;
    for (auto v : samples) s += v;
    return s * std::pow(grid.h(), grid.axes());
  }
};

inline GridFunction sample_phase(const PhaseGrid& g, const std::function<cplx(std::span<const double>)>& F) {
  g.validate();
  GridFunction out(g);
  std::vector<double> z(g.axes());
  for (std::size_t f = 0; f < out.samples.size(); ++f) {
    g.point(f, z.data());
    out.samples[f] = F(z);
  }
  out.boundary = boundary_mass(g, out.samples);
  return out;
}

// Signal sampled on a time lattice of step h/m nested in a grid's x axes
// (m = N / grid.N). Oversampling keeps the frequency period m/h of the
// lattice sums clear of the grid's w range [-L, L).
struct SampledSignal {
  int d = 1;
  double L = 6.0;
  int N = 256;
  std::vector<cplx> samples;  // N^d, last axis fastest
  double h() const { return 2.0 * L / N; }
};

// Smallest power-of-two m with period m/h >= 2.5 L.
inline int default_oversample(const PhaseGrid& g) {
  int m = 1;
  while (m / g.h() < 2.5 * g.L) m *= 2;
  return m;
}

inline SampledSignal sample_signal(const PhaseGrid& g, const std::function<cplx(std::span<const double>)>& f,
                                   int oversample = 0) {
  g.validate();
  const int m = oversample > 0 ? oversample : default_oversample(g);
  if (!std::has_single_bit(static_cast<unsigned>(m))) throw config_error("sample_signal: oversample must be a power of two");
  SampledSignal s{g.d, g.L, g.N * m, {}};
  std::size_t n = 1;
  for (int a = 0; a < g.d; ++a) n *= s.N;
  s.samples.resize(n);
  std::vector<double> t(g.d);
  const double ht = s.h();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = i;
    for (int a = g.d - 1; a >= 0; --a) {
      t[a] = -g.L + static_cast<double>(r % s.N) * ht;
      r /= s.N;
    }
    s.samples[i] = f(t);
  }
  return s;
}

inline SampledSignal sample_hermite(const PhaseGrid& g, const MultiIndex& n, int oversample = 0) {
  return sample_signal(g, [&](std::span<const double> t) { return cplx(specfun::hermite_product(n, t)); }, oversample);
}

inline SampledSignal sample_wavepacket(const PhaseGrid& g, const hagedorn::FrameCache& fc, const MultiIndex& k,
                                       int oversample = 0) {
  return sample_signal(g, [&](std::span<const double> t) { return fc.eval(k, t); }, oversample);
}

inline cplx inner(const SampledSignal& f, const SampledSignal& g) {
  cplx s = 0;
  for (std::size_t i = 0; i < f.samples.size(); ++i) s += f.samples[i] * std::conj(g.samples[i]);
  return s * std::pow(f.h(), f.d);
}

// ---------------------------------------------------------------- transforms

namespace detail {

inline void check_compatible(const SampledSignal& f, const SampledSignal& g, const PhaseGrid& grid) {
  grid.validate();
  for (const auto* s : {&f, &g})
    if (s->d != grid.d || s->L != grid.L || s->N != f.N || s->N % grid.N != 0 ||
        s->samples.size() != static_cast<std::size_t>(std::pow(s->N, grid.d)))
      throw std::invalid_argument("phase-space transform: signal lattice does not match grid");
}

// out(x, w) = scale(x, w) * h_t^d sum_t f(t) conj(g(shift(x, t))) e^{-2 pi i beta <w, t>}
// where the window index along each axis is win_index(i_x * m, j_t) (or -1).
template <class WinIndex, class Scale>
GridFunction shifted_transform(const SampledSignal& f, const SampledSignal& g, const PhaseGrid& grid,
                               double beta, WinIndex win_index, Scale scale) {
  const int d = grid.d, N = grid.N, Nt = f.N, m = Nt / N;
  const double ht = f.h();
  const fft::ChirpDft cz(Nt, N, -grid.L, ht, grid.coord(0), grid.h(), beta);
  GridFunction out(grid);
  const std::size_t nt = d == 1 ? Nt : std::size_t(Nt) * Nt;
  const std::size_t nw = d == 1 ? N : std::size_t(N) * N;
  const std::size_t nx = nw;
  const double hd = std::pow(ht, d);
  const std::size_t chunks = std::min<std::size_t>(nx, 64);
  parallel_chunks(chunks, [&](std::size_t c) {
    std::vector<cplx> prod(nt), work(cz.workspace_size()), col(N);
    std::vector<double> z(2 * d);
    for (std::size_t xi = c * nx / chunks; xi < (c + 1) * nx / chunks; ++xi) {
      const int ix0 = m * (d == 1 ? static_cast<int>(xi) : static_cast<int>(xi / N));
      const int ix1 = m * (d == 1 ? 0 : static_cast<int>(xi % N));
      cplx* dst = out.samples.data() + xi * nw;
      if (d == 1) {
        for (int j = 0; j < Nt; ++j) {
          const int k = win_index(ix0, j);
          prod[j] = (k >= 0 && k < Nt) ? f.samples[j] * std::conj(g.samples[k]) : cplx(0.0);
        }
        cz.apply(prod.data(), 1, dst, 1, work.data());
      } else {
        for (int j0 = 0; j0 < Nt; ++j0) {
          const int k0 = win_index(ix0, j0);
          cplx* row = prod.data() + std::size_t(j0) * Nt;
          if (k0 < 0 || k0 >= Nt) {
            std::fill(row, row + N, cplx(0.0));
            continue;
          }
          for (int j1 = 0; j1 < Nt; ++j1) {
            const int k1 = win_index(ix1, j1);
            row[j1] = (k1 >= 0 && k1 < Nt) ? f.samples[std::size_t(j0) * Nt + j1] * std::conj(g.samples[std::size_t(k0) * Nt + k1])
                                           : cplx(0.0);
          }
          cz.apply(row, 1, row, 1, work.data());  // row now holds N outputs
        }
        for (int w1 = 0; w1 < N; ++w1) {
          cz.apply(prod.data() + w1, Nt, col.data(), 1, work.data());
          for (int w0 = 0; w0 < N; ++w0) dst[w0 * N + w1] = col[w0];
        }
      }
      for (std::size_t wi = 0; wi < nw; ++wi) {
        grid.point(xi * nw + wi, z.data());
        dst[wi] *= hd * scale(z.data());
      }
    }
  });
  out.boundary = boundary_mass(grid, out.samples);
  return out;
}

}  // namespace detail

// V_g f(x, w) = int f(t) conj(g(t - x)) e^{-2 pi i <w, t>} dt. The window
// shift is exact on the lattice: t_j - x_i sits at index j - i m + N_t/2.
inline GridFunction stft(const SampledSignal& f, const SampledSignal& g, const PhaseGrid& grid) {
  detail::check_compatible(f, g, grid);
  const int half = f.N / 2;
  return detail::shifted_transform(
      f, g, grid, 1.0, [half](int ix, int jt) { return jt - ix + half; }, [](const double*) { return cplx(1.0); });
}

// W(f,g)(x, w) = 2^d e^{4 pi i <x,w>} int f(t) conj(g(2x - t)) e^{-4 pi i <w,t>} dt,
// i.e. 2^d e^{4 pi i <x,w>} V_{g-reflected} f(2x, 2w). 2x - t_j sits at index 2im - j.
// The w-period here is m/(2h): d = 2 grids want twice default_oversample.
inline GridFunction wigner(const SampledSignal& f, const SampledSignal& g, const PhaseGrid& grid) {
  detail::check_compatible(f, g, grid);
  const int d = grid.d;
  const double pref = std::pow(2.0, d);
  return detail::shifted_transform(
      f, g, grid, 2.0, [](int ix, int jt) { return 2 * ix - jt; },
      [d, pref](const double* z) {
        double xw = 0;
        for (int a = 0; a < d; ++a) xw += z[a] * z[d + a];
        return pref * std::polar(1.0, 4 * pi * xw);
      });
}

// (W * a)(z) = int W(y) a(z - y) dy, zero-padded FFT convolution on a (2N)^{2d} lattice.
inline GridFunction convolve(const GridFunction& W, const GridFunction& a) {
  if (!(W.grid == a.grid)) throw std::invalid_argument("convolve: grid mismatch");
  const PhaseGrid& g = W.grid;
  const int D = g.axes(), N = g.N, M = 2 * N;
  std::size_t total = 1;
  for (int i = 0; i < D; ++i) total *= M;
  if (total > (std::size_t(1) << 26)) throw std::invalid_argument("convolve: padded grid too large");
  std::vector<cplx> A(total, 0.0), B(total, 0.0);
  std::vector<int> idx(D);
  for (std::size_t f = 0; f < W.samples.size(); ++f) {
    std::size_t r = f, pa = 0, pb = 0;
    for (int ax = D - 1; ax >= 0; --ax) {
      idx[ax] = static_cast<int>(r % N);
      r /= N;
    }
    for (int ax = 0; ax < D; ++ax) {
      pa = pa * M + idx[ax];
      pb = pb * M + ((idx[ax] - N / 2 + M) % M);  // kernel offset s = i - N/2
    }
    A[pa] = W.samples[f];
    B[pb] = a.samples[f];
  }
  std::vector<int> shape(D, M);
  fft::Plan fwd(shape, FFTW_FORWARD), bwd(shape, FFTW_BACKWARD);
  fwd.execute(A.data());
  fwd.execute(B.data());
  for (std::size_t i = 0; i < total; ++i) A[i] *= B[i];
  bwd.execute(A.data());
  GridFunction out(g);
  const double scale = std::pow(g.h(), D) / double(total);
  for (std::size_t f = 0; f < out.samples.size(); ++f) {
    std::size_t r = f, pa = 0;
    for (int ax = D - 1; ax >= 0; --ax) {
      idx[ax] = static_cast<int>(r % N);
      r /= N;
    }
    for (int ax = 0; ax < D; ++ax) pa = pa * M + idx[ax];
    out.samples[f] = A[pa] * scale;
  }
  out.boundary = boundary_mass(g, out.samples);
  return out;
}

// Q_S(f,g) = W(f,g) * a_S.
inline GridFunction cohen_class(const SampledSignal& f, const SampledSignal& g, const GridFunction& a_S) {
  return convolve(wigner(f, g, a_S.grid), a_S);
}

// Discrete delta (unit mass at the origin) on a grid.
inline GridFunction grid_delta(const PhaseGrid& g) {
  GridFunction out(g);
  std::vector<int> idx(g.axes(), g.N / 2);
  out.samples[out.flat(idx)] = 1.0 / std::pow(g.h(), g.axes());
  return out;
}

// ---------------------------------------------------------------- closed forms

// Complex coordinates z_j = x_j + i w_j of a phase-space point.
inline std::vector<cplx> complex_coords(std::span<const double> z) {
  const std::size_t d = z.size() / 2;
  std::vector<cplx> c(d);
  for (std::size_t j = 0; j < d; ++j) c[j] = {z[j], z[d + j]};
  return c;
}

inline double xw_product(std::span<const double> z) {
  const std::size_t d = z.size() / 2;
  double s = 0;
  for (std::size_t j = 0; j < d; ++j) s += z[j] * z[d + j];
  return s;
}

// V_{phi_k} phi_n(z) = prod_j e^{-i pi x_j w_j} e^{-pi |z_j|^2 / 2} conj(H_{n_j,k_j}(z_j)).
inline cplx hermite_stft_closed(const MultiIndex& n, const MultiIndex& k, std::span<const double> z) {
  const std::size_t d = n.dim();
  if (k.dim() != d || z.size() != 2 * d) throw std::invalid_argument("hermite_stft_closed: dimension mismatch");
  cplx v = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    const cplx zj(z[j], z[d + j]);
    v *= std::polar(std::exp(-pi * std::norm(zj) / 2), -pi * z[j] * z[d + j]) *
         std::conj(specfun::complex_hermite(n[j], k[j], zj));
  }
  return v;
}

// zeta = (T^{-1} z)_x + i (T^{-1} z)_w.
inline std::vector<cplx> frame_coords(const RMat& Tinv, std::span<const double> z) {
  const int D = static_cast<int>(z.size()), d = D / 2;
  std::vector<cplx> zeta(d);
  for (int j = 0; j < d; ++j) {
    double re = 0, im = 0;
    for (int b = 0; b < D; ++b) {
      re += Tinv(j, b) * z[b];
      im += Tinv(d + j, b) * z[b];
    }
    zeta[j] = {re, im};
  }
  return zeta;
}

// STFT of phi_n[Q,P] against the window phi_k[Q,P], given T^{-1}.
inline cplx hagedorn_stft_closed(const MultiIndex& n, const MultiIndex& k, const RMat& Tinv,
                                 std::span<const double> z) {
  const auto zeta = frame_coords(Tinv, z);
  double r2 = 0;
  cplx p = 1.0;
  for (std::size_t j = 0; j < zeta.size(); ++j) {
    r2 += std::norm(zeta[j]);
    p *= std::conj(specfun::complex_hermite(n[j], k[j], zeta[j]));
  }
  return std::polar(std::exp(-pi * r2 / 2), -pi * xw_product(z)) * p;
}

inline cplx hagedorn_stft_closed(const MultiIndex& n, const MultiIndex& k, const symplectic::LagrangianFrame& f,
                                 std::span<const double> z) {
  return hagedorn_stft_closed(n, k, symplectic::frame_to_symplectic(f).inverse(), z);
}

// Cross-Wigner W(phi_n[Q,P], phi_k[Q,P]) = 2^d (-1)^{|k|} e^{-2 pi |zeta|^2} prod conj(H_{n_j,k_j}(2 zeta_j)).
inline cplx hagedorn_wigner_closed(const MultiIndex& n, const MultiIndex& k, const RMat& Tinv,
                                   std::span<const double> z) {
  const auto zeta = frame_coords(Tinv, z);
  double r2 = 0;
  cplx p = 1.0;
  for (std::size_t j = 0; j < zeta.size(); ++j) {
    r2 += std::norm(zeta[j]);
    p *= std::conj(specfun::complex_hermite(n[j], k[j], 2.0 * zeta[j]));
  }
  const double sign = (k.length() % 2) ? -1.0 : 1.0;
  return sign * std::pow(2.0, double(zeta.size())) * std::exp(-2 * pi * r2) * p;
}

inline cplx hagedorn_wigner_closed(const MultiIndex& n, const MultiIndex& k, const symplectic::LagrangianFrame& f,
                                   std::span<const double> z) {
  return hagedorn_wigner_closed(n, k, symplectic::frame_to_symplectic(f).inverse(), z);
}

// Cross-Wigner of product Hermite functions.
inline cplx hermite_wigner_closed(const MultiIndex& n, const MultiIndex& k, std::span<const double> z) {
  const std::size_t d = n.dim();
  double r2 = 0;
  cplx p = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    const cplx zj(z[j], z[d + j]);
    r2 += std::norm(zj);
    p *= std::conj(specfun::complex_hermite(n[j], k[j], 2.0 * zj));
  }
  const double sign = (k.length() % 2) ? -1.0 : 1.0;
  return sign * std::pow(2.0, double(d)) * std::exp(-2 * pi * r2) * p;
}

// Radial Wigner distribution of phi_n in one phase plane, r2 = |z|^2.
inline double hermite_wigner_radial(int n, double r2) {
  return ((n % 2) ? -2.0 : 2.0) * std::exp(-2 * pi * r2) * specfun::laguerre(n, 0.0, 4 * pi * r2);
}

// gamma_E(z) = e^{-pi |z|^2 / E} / E on one phase plane.
inline double heat_kernel(double E, double r2) { return std::exp(-pi * r2 / E) / E; }

// (gamma_E * W(phi_n))(z) on one phase plane, E > 1/2.
inline double heat_convolution_closed(int n, double E, double r2) {
  if (!(E > 0.5)) throw std::domain_error("heat_convolution_closed: requires E > 1/2");
  if (n < 0) throw std::domain_error("heat_convolution_closed: negative order");
  const double ratio = (E - 0.5) / (E + 0.5);
  return std::pow(ratio, n) * specfun::laguerre(n, 0.0, pi * r2 / (0.25 - E * E)) * heat_kernel(E + 0.5, r2);
}

// E -> 1/2 limit: (pi |z|^2)^n / n! e^{-pi |z|^2} = |V_{phi_0} phi_n(z)|^2.
inline double spectrogram_limit(int n, double r2) {
  const double u = pi * r2;
  if (u == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(u) - std::lgamma(n + 1.0) - u);
}

// Tensorized version on R^{2d}.
inline double heat_convolution_closed(const MultiIndex& n, std::span<const double> E, std::span<const double> z) {
  const std::size_t d = n.dim();
  double v = 1.0;
  for (std::size_t j = 0; j < d; ++j) v *= heat_convolution_closed(n[j], E[j], z[j] * z[j] + z[d + j] * z[d + j]);
  return v;
}

// ---------------------------------------------------------------- Weyl, Fourier-Wigner

struct MatrixElement {
  cplx value;
  double boundary = 0.0;  // boundary mass of the integrand
  bool warning = false;
};

// <L_F phi_n, phi_m> = int F W(phi_n, phi_m) by grid quadrature.
inline MatrixElement weyl_matrix_element(const GridFunction& F, const MultiIndex& n, const MultiIndex& m) {
  const PhaseGrid& g = F.grid;
  if (static_cast<int>(n.dim()) != g.d || static_cast<int>(m.dim()) != g.d)
    throw std::invalid_argument("weyl_matrix_element: index dimension mismatch");
  std::vector<cplx> integrand(F.samples.size());
  std::vector<double> z(g.axes());
  cplx s = 0;
  for (std::size_t f = 0; f < F.samples.size(); ++f) {
    g.point(f, z.data());
    integrand[f] = F.samples[f] * hermite_wigner_closed(n, m, z);
    s += integrand[f];
  }
  MatrixElement e;
  e.value = s * std::pow(g.h(), g.axes());
  e.boundary = boundary_mass(g, integrand);
  e.warning = e.boundary > 1e-6;
  return e;
}

// F_W(S)(z) for S = sum c(a, b) phi_{basis[a]} (x) phi_{basis[b]}:
// e^{-pi |z|^2 / 2} sum c(a, b) conj(prod_j H_{n_j, m_j}(z_j)).
inline GridFunction fourier_wigner(const Eigen::MatrixXcd& c, const std::vector<MultiIndex>& basis,
                                   const PhaseGrid& g) {
  g.validate();
  if (c.rows() != c.cols() || static_cast<std::size_t>(c.rows()) != basis.size())
    throw std::invalid_argument("fourier_wigner: coefficient matrix exceeds the basis truncation");
  for (const auto& b : basis)
    if (static_cast<int>(b.dim()) != g.d) throw std::invalid_argument("fourier_wigner: index dimension mismatch");
  GridFunction out(g);
  std::vector<double> z(g.axes());
  for (std::size_t f = 0; f < out.samples.size(); ++f) {
    g.point(f, z.data());
    const auto zc = complex_coords(z);
    double r2 = 0;
    for (auto v : zc) r2 += std::norm(v);
    cplx s = 0;
    for (Eigen::Index a = 0; a < c.rows(); ++a)
      for (Eigen::Index b = 0; b < c.cols(); ++b) {
        if (c(a, b) == cplx(0.0)) continue;
        cplx p = 1.0;
        for (int j = 0; j < g.d; ++j) p *= specfun::complex_hermite(basis[a][j], basis[b][j], zc[j]);
        s += c(a, b) * std::conj(p);
      }
    out.samples[f] = std::exp(-pi * r2 / 2) * s;
  }
  out.boundary = boundary_mass(g, out.samples);
  return out;
}

// ---------------------------------------------------------------- export

inline void write_csv(const GridFunction& F, std::ostream& os) {
  const PhaseGrid& g = F.grid;
  if (g.d == 1)
    os << "x,omega,re,im\n";
  else
    os << "x1,x2,omega1,omega2,re,im\n";
  std::vector<double> z(g.axes());
  char buf[64];
  auto put = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, r.ptr - buf);
  };
  for (std::size_t f = 0; f < F.samples.size(); ++f) {
    g.point(f, z.data());
    for (double v : z) {
      put(v);
      os << ',';
    }
    put(F.samples[f].real());
    os << ',';
    put(F.samples[f].imag());
    os << '\n';
  }
}

namespace detail {
inline void put_le(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  os.write(reinterpret_cast<const char*>(&u), 8);
}
inline double get_le(std::istream& is) {
  std::uint64_t u = 0;
  is.read(reinterpret_cast<char*>(&u), 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}
}  // namespace detail

// 32-byte header: "LOCSPEC1", then d, N, L as little-endian f64; followed by
// the samples as (re, im) f64 pairs in row-major order.
inline void write_binary(const GridFunction& F, std::ostream& os) {
  os.write("LOCSPEC1", 8);
  detail::put_le(os, F.grid.d);
  detail::put_le(os, F.grid.N);
  detail::put_le(os, F.grid.L);
  for (auto v : F.samples) {
    detail::put_le(os, v.real());
    detail::put_le(os, v.imag());
  }
}

inline GridFunction read_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "LOCSPEC1", 8) != 0) throw config_error("read_binary: bad magic");
  PhaseGrid g;
  g.d = static_cast<int>(detail::get_le(is));
  g.N = static_cast<int>(detail::get_le(is));
  g.L = detail::get_le(is);
  g.validate();
  GridFunction F(g);
  for (auto& v : F.samples) {
    const double re = detail::get_le(is);
    const double im = detail::get_le(is);
    v = {re, im};
  }
  if (!is) throw config_error("read_binary: truncated file");
  F.boundary = boundary_mass(g, F.samples);
  return F;
}

}  // namespace locspec::phasespace
