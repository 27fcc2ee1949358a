#include <gtest/gtest.h>

#include <locspec/phasespace.hpp>
#include <sstream>

#include "oracles.hpp"

using namespace locspec;
using namespace locspec::phasespace;

namespace {

const PhaseGrid g1{1, 6.0, 256};

double max_diff(const GridFunction& F, const std::function<cplx(std::span<const double>)>& ref) {
  std::vector<double> z(F.grid.axes());
  double m = 0;
  for (std::size_t f = 0; f < F.samples.size(); ++f) {
    F.grid.point(f, z.data());
    m = std::max(m, std::abs(F.samples[f] - ref(z)));
  }
  return m;
}

double l2(const GridFunction& F) {
  double s = 0;
  for (auto v : F.samples) s += std::norm(v);
  return s * std::pow(F.grid.h(), F.grid.axes());
}

cplx l2_inner(const GridFunction& A, const GridFunction& B) {
  cplx s = 0;
  for (std::size_t i = 0; i < A.samples.size(); ++i) s += A.samples[i] * std::conj(B.samples[i]);
  return s * std::pow(A.grid.h(), A.grid.axes());
}

}  // namespace

TEST(Grid, Validation) {
  EXPECT_THROW((PhaseGrid{1, 6.0, 100}.validate()), config_error);
  EXPECT_THROW((PhaseGrid{3, 6.0, 16}.validate()), config_error);
  EXPECT_NO_THROW(PhaseGrid::defaults(1).validate());
  EXPECT_NO_THROW(PhaseGrid::defaults(2).validate());
  const auto f = sample_hermite(g1, MultiIndex{0});
  EXPECT_THROW(stft(f, f, PhaseGrid{1, 5.0, 256}), std::invalid_argument);
  EXPECT_EQ(default_oversample(PhaseGrid::defaults(1)), 1);
  EXPECT_EQ(default_oversample(PhaseGrid::defaults(2)), 2);
  EXPECT_THROW(sample_hermite(g1, MultiIndex{0}, 3), config_error);
}

TEST(Stft, GaussianMatchesClosedForm) {
  const auto f = sample_hermite(g1, MultiIndex{0});
  const auto V = stft(f, f, g1);
  EXPECT_LT(max_diff(V, [](auto z) { return std::polar(std::exp(-oracle::pi * (z[0] * z[0] + z[1] * z[1]) / 2), -oracle::pi * z[0] * z[1]); }), 1e-6);
  EXPECT_LT(V.boundary, 1e-6);
}

TEST(Stft, ValueAtOriginIsInnerProduct) {
  const auto f = sample_signal(g1, [](auto t) { return cplx(std::exp(-oracle::pi * (t[0] - 0.3) * (t[0] - 0.3)), 0.2 * t[0]); });
  const auto g = sample_hermite(g1, MultiIndex{2});
  const auto V = stft(f, g, g1);
  std::vector<int> origin{128, 128};
  EXPECT_NEAR(std::abs(V[V.flat(origin)] - inner(f, g)), 0.0, 1e-12);
}

TEST(Stft, HermiteClosedFormsD1) {
  std::vector<SampledSignal> h;
  for (int n = 0; n <= 3; ++n) h.push_back(sample_hermite(g1, MultiIndex{n}));
  for (int n = 0; n <= 3; ++n)
    for (int k = 0; k <= 3; ++k) {
      const auto V = stft(h[n], h[k], g1);
      EXPECT_LT(max_diff(V, [&](auto z) { return hermite_stft_closed(MultiIndex{n}, MultiIndex{k}, z); }), 1e-5)
          << n << "," << k;
    }
}

TEST(Stft, MoyalD1) {
  std::vector<SampledSignal> h;
  std::vector<GridFunction> V;
  for (int n = 0; n <= 4; ++n) h.push_back(sample_hermite(g1, MultiIndex{n}));
  const auto w1 = sample_hermite(g1, MultiIndex{1});
  const auto w2 = sample_signal(g1, [](auto t) { return cplx(specfun::hermite(1, t[0]) + 0.5 * specfun::hermite(3, t[0])); });
  for (int n = 0; n <= 4; ++n) EXPECT_NEAR(l2(stft(h[n], w1, g1)), 1.0, 1e-6);
  // <V_{g1} f1, V_{g2} f2> = <f1, f2> conj(<g1, g2>)
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      const cplx lhs = l2_inner(stft(h[n], w1, g1), stft(h[m], w2, g1));
      const cplx rhs = inner(h[n], h[m]) * std::conj(inner(w1, w2));
      EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-6) << n << "," << m;
    }
}

TEST(Stft, LaguerreConnectionModulus) {
  // |V_{phi_0} phi_n(z)| = sqrt(pi^n / n!) |z|^n e^{-pi |z|^2 / 2}
  for (int n = 0; n <= 6; ++n)
    for (double r : {0.2, 0.7, 1.5}) {
      const std::vector<double> z{r * 0.6, r * 0.8};
      const double ref = std::sqrt(std::pow(oracle::pi, n) / std::tgamma(n + 1.0)) * std::pow(r, n) * std::exp(-oracle::pi * r * r / 2);
      EXPECT_NEAR(std::abs(hermite_stft_closed(MultiIndex{n}, MultiIndex{0}, z)), ref, 1e-14);
    }
}

TEST(Wigner, HermiteD1) {
  const auto f0 = sample_hermite(g1, MultiIndex{0});
  const auto W0 = wigner(f0, f0, g1);
  EXPECT_LT(max_diff(W0, [](auto z) { return cplx(2 * std::exp(-2 * oracle::pi * (z[0] * z[0] + z[1] * z[1]))); }), 1e-6);
  const auto f1 = sample_hermite(g1, MultiIndex{1});
  const auto W1 = wigner(f1, f1, g1);
  std::vector<int> origin{128, 128};
  EXPECT_NEAR(W1[W1.flat(origin)].real(), -2.0, 1e-9);
  EXPECT_NEAR(W1.integral().real(), 1.0, 1e-9);
  for (int n = 0; n <= 3; ++n)
    for (int k = 0; k <= 3; ++k) {
      const auto W = wigner(sample_hermite(g1, MultiIndex{n}), sample_hermite(g1, MultiIndex{k}), g1);
      EXPECT_LT(max_diff(W, [&](auto z) { return hermite_wigner_closed(MultiIndex{n}, MultiIndex{k}, z); }), 1e-6);
    }
}

TEST(Wigner, MarginalIsNorm) {
  const auto f = sample_signal(g1, [](auto t) { return cplx(std::exp(-2.0 * t[0] * t[0]), std::sin(t[0]) * std::exp(-t[0] * t[0])); });
  EXPECT_NEAR(wigner(f, f, g1).integral().real(), inner(f, f).real(), 1e-9);
}

TEST(Closed, HagedornReducesToHermite) {
  const auto Tinv = symplectic::RMat::Identity(4, 4);
  for (const auto& n : box_indices(2, 3))
    for (const auto& k : box_indices(2, 3)) {
      const std::vector<double> z{0.3, -0.2, 0.5, 0.1};
      EXPECT_NEAR(std::abs(hagedorn_stft_closed(n, k, Tinv, z) - hermite_stft_closed(n, k, z)), 0.0, 1e-15);
      EXPECT_NEAR(std::abs(hagedorn_wigner_closed(n, k, Tinv, z) - hermite_wigner_closed(n, k, z)), 0.0, 1e-15);
    }
}

TEST(Closed, HagedornModulusIsPrecomposedHermite) {
  const auto f = symplectic::zero_diagonal_example();
  const auto Tinv = symplectic::frame_to_symplectic(f).inverse();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> z(4);
    for (auto& v : z) v = oracle::uniform(-1.5, 1.5);
    Eigen::Vector4d w = Tinv * Eigen::Vector4d(z[0], z[1], z[2], z[3]);
    const std::vector<double> zw(w.data(), w.data() + 4);
    for (const auto& n : box_indices(2, 3))
      for (const auto& k : box_indices(2, 2))
        EXPECT_NEAR(std::abs(hagedorn_stft_closed(n, k, Tinv, z)), std::abs(hermite_stft_closed(n, k, zw)), 1e-10);
  }
}

TEST(Closed, WignerStftIdentity) {
  // W(f, g)(z) = 2^d e^{4 pi i <x,w>} V_{g-reflected} f(2z) with g-reflected = (-1)^{|k|} phi_k.
  const auto f = symplectic::zero_diagonal_example();
  const auto Tinv = symplectic::frame_to_symplectic(f).inverse();
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> z(4), z2(4);
    for (int a = 0; a < 4; ++a) z2[a] = 2 * (z[a] = oracle::uniform(-1, 1));
    const double xw = z[0] * z[2] + z[1] * z[3];
    for (const auto& n : box_indices(2, 3))
      for (const auto& k : box_indices(2, 3)) {
        const cplx lhs = hagedorn_wigner_closed(n, k, Tinv, z);
        const cplx rhs = 4.0 * std::polar(1.0, 4 * oracle::pi * xw) * ((k.length() % 2) ? -1.0 : 1.0) *
                         hagedorn_stft_closed(n, k, Tinv, z2);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10);
      }
  }
}

TEST(Closed, HagedornMatchesGridD1) {
  // A chirped, squeezed d = 1 frame.
  symplectic::CMat Q(1, 1), P(1, 1);
  Q(0, 0) = cplx(0.9, 0.3);
  P(0, 0) = cplx(0, 1) / std::conj(Q(0, 0)) - 0.3 * Q(0, 0);
  const auto fr = symplectic::validate_frame(Q, P);
  const hagedorn::FrameCache fc(fr);
  const auto Tinv = symplectic::frame_to_symplectic(fr).inverse();
  for (int n = 0; n <= 3; ++n)
    for (int k = 0; k <= 2; ++k) {
      const auto fn = sample_wavepacket(g1, fc, MultiIndex{n}), fk = sample_wavepacket(g1, fc, MultiIndex{k});
      EXPECT_LT(max_diff(stft(fn, fk, g1), [&](auto z) { return hagedorn_stft_closed(MultiIndex{n}, MultiIndex{k}, Tinv, z); }), 1e-6);
      EXPECT_LT(max_diff(wigner(fn, fk, g1), [&](auto z) { return hagedorn_wigner_closed(MultiIndex{n}, MultiIndex{k}, Tinv, z); }), 1e-6);
    }
}

TEST(Closed, HagedornMatchesGridD2) {
  const PhaseGrid g2{2, 5.0, 64};
  const auto fr = symplectic::zero_diagonal_example();
  const hagedorn::FrameCache fc(fr);
  const auto Tinv = symplectic::frame_to_symplectic(fr).inverse();
  const std::vector<std::pair<MultiIndex, MultiIndex>> pairs{
      {MultiIndex{0, 0}, MultiIndex{0, 0}}, {MultiIndex{2, 1}, MultiIndex{0, 1}}, {MultiIndex{2, 2}, MultiIndex{1, 0}}};
  for (const auto& [n, k] : pairs) {
    const auto fn = sample_wavepacket(g2, fc, n), fk = sample_wavepacket(g2, fc, k);
    EXPECT_LT(max_diff(stft(fn, fk, g2), [&](auto z) { return hagedorn_stft_closed(n, k, Tinv, z); }), 1e-4) << n.str();
  }
  const int m = 2 * default_oversample(g2);
  const auto fn = sample_wavepacket(g2, fc, MultiIndex{1, 1}, m), fk = sample_wavepacket(g2, fc, MultiIndex{0, 1}, m);
  EXPECT_LT(max_diff(wigner(fn, fk, g2), [&](auto z) { return hagedorn_wigner_closed(MultiIndex{1, 1}, MultiIndex{0, 1}, Tinv, z); }), 1e-4);
}

TEST(Heat, Examples) {
  for (double E : {0.75, 1.0, 2.0})
    for (double r2 : {0.0, 0.3, 1.1}) EXPECT_NEAR(heat_convolution_closed(0, E, r2), heat_kernel(E + 0.5, r2), 1e-15);
  EXPECT_NEAR(heat_convolution_closed(1, 1.0, 0.0), 2.0 / 9.0, 1e-15);
  // direct 2-D integral of gamma_1(-y) W(phi_1)(y), product trapezoid on [-6, 6]^2
  const double direct = oracle::trapezoid(
      [](double x) {
        return oracle::trapezoid([x](double w) { return heat_kernel(1.0, x * x + w * w) * hermite_wigner_radial(1, x * x + w * w); }, -6, 6, 400);
      },
      -6, 6, 400);
  EXPECT_NEAR(direct, 2.0 / 9.0, 1e-8);
  EXPECT_THROW(heat_convolution_closed(1, 0.5, 0.1), std::domain_error);
}

TEST(Heat, SpectrogramLimit) {
  for (int n = 0; n <= 5; ++n)
    for (double r2 : {0.05, 0.4, 1.3}) {
      EXPECT_NEAR(heat_convolution_closed(n, 0.5 + 1e-9, r2), spectrogram_limit(n, r2), 1e-7);
      EXPECT_NEAR(spectrogram_limit(n, r2), std::norm(hermite_stft_closed(MultiIndex{n}, MultiIndex{0}, std::vector<double>{std::sqrt(r2), 0.0})), 1e-14);
    }
}

TEST(Heat, Positivity) {
  for (int n = 0; n <= 8; ++n)
    for (double E : {0.51, 0.75, 1.0, 3.0})
      for (double r2 = 0; r2 < 6; r2 += 0.13) EXPECT_GT(heat_convolution_closed(n, E, r2), 0.0);
}

TEST(Heat, MatchesFftConvolution) {
  for (int n = 0; n <= 4; ++n) {
    const auto f = sample_hermite(g1, MultiIndex{n});
    const auto W = wigner(f, f, g1);
    for (double E : {0.75, 1.0, 2.0}) {
      const auto gam = sample_phase(g1, [E](auto z) { return cplx(heat_kernel(E, z[0] * z[0] + z[1] * z[1])); });
      const auto C = convolve(W, gam);
      const double ref_max = heat_convolution_closed(n, E, 0.0);
      const double err = max_diff(C, [&](auto z) { return cplx(heat_convolution_closed(n, E, z[0] * z[0] + z[1] * z[1])); });
      EXPECT_LT(err / std::abs(ref_max), 1e-4) << n << " " << E;
    }
  }
}

TEST(Cohen, DeltaIsIdentity) {
  const auto f = sample_hermite(g1, MultiIndex{2}), g = sample_hermite(g1, MultiIndex{1});
  const auto Q = cohen_class(f, g, grid_delta(g1));
  const auto W = wigner(f, g, g1);
  double m = 0;
  for (std::size_t i = 0; i < W.samples.size(); ++i) m = std::max(m, std::abs(Q[i] - W[i]));
  EXPECT_LT(m, 1e-12);
}

TEST(Cohen, GaussianSymbolGivesHeat) {
  const auto f = sample_hermite(g1, MultiIndex{0});
  const double E = 1.0;
  const auto a = sample_phase(g1, [E](auto z) { return cplx(heat_kernel(E, z[0] * z[0] + z[1] * z[1])); });
  const auto Q = cohen_class(f, f, a);
  EXPECT_LT(max_diff(Q, [&](auto z) { return cplx(heat_convolution_closed(0, E, z[0] * z[0] + z[1] * z[1])); }), 1e-8);
}

TEST(Cohen, WindowWignerGivesSpectrogram) {
  const auto f = sample_hermite(g1, MultiIndex{2});
  const auto g = sample_hermite(g1, MultiIndex{1});
  const auto gr = sample_signal(g1, [](auto t) { return cplx(specfun::hermite(1, -t[0])); });
  const auto Q = cohen_class(f, f, wigner(gr, gr, g1));
  EXPECT_LT(max_diff(Q, [&](auto z) { return cplx(std::norm(hermite_stft_closed(MultiIndex{2}, MultiIndex{1}, z))); }), 1e-8);
}

TEST(Weyl, IdentityAndOscillator) {
  const auto one = sample_phase(g1, [](auto) { return cplx(1.0); });
  for (int n = 0; n <= 5; ++n)
    for (int m = 0; m <= 5; ++m) {
      const auto e = weyl_matrix_element(one, MultiIndex{n}, MultiIndex{m});
      EXPECT_NEAR(std::abs(e.value - (n == m ? 1.0 : 0.0)), 0.0, 1e-9);
      EXPECT_FALSE(e.warning);
    }
  const auto osc = sample_phase(g1, [](auto z) { return cplx((z[0] * z[0] + z[1] * z[1]) / 2); });
  for (int n = 0; n <= 6; ++n)
    EXPECT_NEAR(weyl_matrix_element(osc, MultiIndex{n}, MultiIndex{n}).value.real(), (2 * n + 1) / (4 * oracle::pi), 1e-9);
}

TEST(Weyl, ThermalGaussian) {
  const double E = 1.0;
  const auto g = sample_phase(g1, [E](auto z) { return cplx(heat_kernel(E + 0.5, z[0] * z[0] + z[1] * z[1])); });
  for (int n = 0; n <= 6; ++n)
    for (int m = 0; m <= 6; ++m) {
      const cplx v = weyl_matrix_element(g, MultiIndex{n}, MultiIndex{m}).value;
      const double ref = n == m ? std::pow(E, n) / std::pow(E + 1, n + 1) : 0.0;
      EXPECT_NEAR(std::abs(v - ref), 0.0, 1e-9);
    }
}

TEST(Weyl, NonDecayingSymbolWarns) {
  const PhaseGrid g{1, 3.0, 64};
  const auto wide = sample_phase(g, [](auto z) { return cplx(std::exp(2 * oracle::pi * (z[0] * z[0] + z[1] * z[1]))); });
  EXPECT_TRUE(weyl_matrix_element(wide, MultiIndex{6}, MultiIndex{6}).warning);
}

TEST(FourierWigner, GaussianAndTrace) {
  const std::vector<MultiIndex> basis{MultiIndex{0}, MultiIndex{1}, MultiIndex{2}};
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(3, 3);
  c(0, 0) = 1.0;
  const PhaseGrid g{1, 5.0, 64};
  const auto F = fourier_wigner(c, basis, g);
  EXPECT_LT(max_diff(F, [](auto z) { return cplx(std::exp(-oracle::pi * (z[0] * z[0] + z[1] * z[1]) / 2)); }), 1e-15);
  const auto I = fourier_wigner(Eigen::MatrixXcd::Identity(3, 3), basis, g);
  std::vector<int> origin{32, 32};
  EXPECT_NEAR(std::abs(I[I.flat(origin)] - 3.0), 0.0, 1e-14);
  EXPECT_THROW(fourier_wigner(Eigen::MatrixXcd::Identity(4, 4), basis, g), std::invalid_argument);
}

TEST(FourierWigner, RankOneIsAmbiguity) {
  const std::vector<MultiIndex> basis{MultiIndex{0}, MultiIndex{1}};
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
  c(1, 1) = 1.0;
  const PhaseGrid g{1, 5.0, 64};
  const auto F = fourier_wigner(c, basis, g);
  EXPECT_LT(max_diff(F, [](auto z) { return std::polar(1.0, oracle::pi * z[0] * z[1]) * hermite_stft_closed(MultiIndex{1}, MultiIndex{1}, z); }), 1e-14);
}

TEST(FourierWigner, ThermalAndHermiteStatesAreRotationInvariant) {
  const PhaseGrid g{1, 5.0, 64};
  std::vector<MultiIndex> basis;
  for (int n = 0; n < 30; ++n) basis.push_back(MultiIndex{n});
  Eigen::MatrixXcd thermal = Eigen::MatrixXcd::Zero(30, 30), pure = Eigen::MatrixXcd::Zero(30, 30);
  for (int n = 0; n < 30; ++n) thermal(n, n) = std::pow(0.5, n + 1);
  pure(3, 3) = 1.0;
  for (const auto& c : {thermal, pure}) {
    const auto F = fourier_wigner(c, basis, g);
    // quarter turn (x, w) -> (-w, x) maps lattice index (i, j) to (N - j, i)
    double dev = 0;
    for (int i = 1; i < 64; ++i)
      for (int j = 1; j < 64; ++j)
        dev = std::max(dev, std::abs(std::abs(F[i * 64 + j]) - std::abs(F[(64 - j) * 64 + i])));
    EXPECT_LT(dev / F.max_abs(), 1e-6);
  }
}

TEST(Export, BinaryRoundTripAndCsv) {
  const PhaseGrid g{1, 2.0, 16};
  const auto F = sample_phase(g, [](auto z) { return cplx(z[0], z[1] * z[1]); });
  std::stringstream ss;
  write_binary(F, ss);
  EXPECT_EQ(ss.str().size(), 32u + 16u * F.samples.size());
  EXPECT_EQ(ss.str().substr(0, 8), "LOCSPEC1");
  const auto G = read_binary(ss);
  EXPECT_EQ(G.grid, g);
  EXPECT_EQ(G.samples, F.samples);
  std::stringstream csv;
  write_csv(F, csv);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "x,omega,re,im");
  std::string first;
  std::getline(csv, first);
  EXPECT_EQ(first, "-2,-2,-2,4");
}
