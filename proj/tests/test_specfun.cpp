#include <gtest/gtest.h>

#include <locspec/specfun.hpp>

#include "oracles.hpp"

using namespace locspec;
using namespace locspec::specfun;

TEST(Hermite, SeedAndParity) {
  EXPECT_NEAR(hermite(0, 0.0), std::pow(2.0, 0.25), 1e-15);
  EXPECT_NEAR(hermite(1, 0.0), 0.0, 1e-15);
  EXPECT_THROW(hermite(-1, 0.0), std::domain_error);
  for (int n = 0; n <= 12; ++n)
    EXPECT_NEAR(hermite(n, -0.7), ((n % 2) ? -1 : 1) * hermite(n, 0.7), 1e-13);
}

TEST(Hermite, FirstOrderFromLadder) {
  // phi_1 = 2 sqrt(pi) t phi_0
  const double expect = 2.0 * std::sqrt(oracle::pi) * std::pow(2.0, 0.25) * std::exp(-oracle::pi);
  EXPECT_NEAR(hermite(1, 1.0), expect, 1e-14);
  EXPECT_NEAR(hermite(1, 1.0), 0.18218, 1e-5);
}

TEST(Hermite, Products) {
  const std::vector<double> zero{0.0, 0.0}, one{1.0, 1.0}, mixed{0.0, 1.0};
  EXPECT_NEAR(hermite_product({0, 0}, zero), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(hermite_product({1, 0}, mixed), 0.0, 1e-15);
  EXPECT_NEAR(hermite_product({1, 1}, one), hermite(1, 1.0) * hermite(1, 1.0), 1e-15);
  // 0.18218^2, rounded
  EXPECT_NEAR(hermite_product({1, 1}, one), 0.033190, 5e-6);
  EXPECT_THROW(hermite_product({1}, one), std::invalid_argument);
}

TEST(Hermite, Orthonormality) {
  // Composite trapezoid on [-8, 8], 4096 intervals.
  for (int n = 0; n <= 8; ++n)
    for (int m = 0; m <= 8; ++m) {
      const double v = oracle::trapezoid([&](double t) { return hermite(n, t) * hermite(m, t); }, -8, 8, 4096);
      EXPECT_NEAR(v, n == m ? 1.0 : 0.0, 1e-8) << n << "," << m;
    }
}

TEST(Hermite, HighOrderNormStaysUnit) {
  for (int n : {31, 40, 50}) {
    const double v = oracle::trapezoid([&](double t) { return hermite(n, t) * hermite(n, t); }, -10, 10, 8192);
    EXPECT_NEAR(v, 1.0, 1e-9) << n;
  }
}

TEST(Laguerre, Examples) {
  EXPECT_EQ(laguerre(0, 0.7, 3.1), 1.0);
  EXPECT_NEAR(laguerre(1, 0.0, 2.0), -1.0, 1e-15);
  EXPECT_NEAR(laguerre(2, 0.0, 2.0), -1.0, 1e-14);
  EXPECT_NEAR(oracle::laguerre_sum(2, 0.0, 2.0), -1.0, 1e-14);
  EXPECT_THROW(laguerre(-1, 0.0, 1.0), std::domain_error);
}

TEST(Laguerre, RecurrenceMatchesDirectSum) {
  for (int k = 0; k <= 10; ++k)
    for (double a : {0.0, 0.5, 1.0, 3.0, 7.0})
      for (double t : {0.05, 0.3, 1.0, 2.5, 6.0}) {
        const double ref = oracle::laguerre_sum(k, a, t);
        EXPECT_NEAR(laguerre(k, a, t), ref, 1e-12 * std::max(1.0, std::abs(ref))) << k << " " << a << " " << t;
      }
}

TEST(Laguerre, ComplexArgumentAgreesOnRealAxis) {
  for (int k = 0; k <= 6; ++k)
    EXPECT_NEAR(std::abs(laguerre_complex(k, 1.5, {0.8, 0.0}) - laguerre(k, 1.5, 0.8)), 0.0, 1e-13);
}

TEST(Laguerre, ReflectionIdentity) {
  // ((-t)^n/n!) L_j^{n-j}(t) = ((-t)^j/j!) L_n^{j-n}(t), with L_n^{j-n} from the direct sum.
  for (int j = 0; j <= 6; ++j)
    for (int n = 0; n <= 6; ++n)
      for (int i = 1; i <= 50; ++i) {
        const double t = 0.1 * i;
        const double lhs = std::pow(-t, n) / std::tgamma(n + 1.0) * laguerre(j, n - j, t);
        const double rhs = std::pow(-t, j) / std::tgamma(j + 1.0) * laguerre(n, j - n, t);
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(std::abs(lhs), std::abs(rhs)) + 1e-14) << j << " " << n << " " << t;
      }
}

TEST(ComplexHermite, Examples) {
  const cplx z(0.3, -0.8);
  EXPECT_NEAR(std::abs(complex_hermite(0, 0, z) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(complex_hermite(1, 0, z) - std::sqrt(oracle::pi) * z), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(complex_hermite(1, 1, 0.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(complex_hermite(1, 1, z) - (1.0 - oracle::pi * std::norm(z))), 0.0, 1e-14);
  EXPECT_EQ(complex_hermite_eval(3, 2, z).degree, 5);
}

TEST(ComplexHermite, SecondBranch) {
  // n < k: (-1)^{k-n} sqrt(n!/k!) pi^{(k-n)/2} conj(z)^{k-n} L_n^{k-n}(pi |z|^2)
  const cplx z(-0.6, 0.45);
  for (int n = 0; n <= 4; ++n)
    for (int k = n + 1; k <= 6; ++k) {
      const double a = k - n;
      const cplx ref = std::pow(-1.0, a) * std::sqrt(std::tgamma(n + 1.0) / std::tgamma(k + 1.0)) *
                       std::pow(oracle::pi, a / 2) * std::pow(std::conj(z), a) *
                       oracle::laguerre_sum(n, a, oracle::pi * std::norm(z));
      EXPECT_NEAR(std::abs(complex_hermite(n, k, z) - ref), 0.0, 1e-12);
    }
}

TEST(ComplexHermite, GaussianOrthogonality) {
  const double L = 6.0;
  const int N = 240;
  const double h = 2 * L / N;
  std::vector<std::vector<cplx>> H(25, std::vector<cplx>(N * N));
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const cplx z(-L + a * h, -L + b * h);
      const double w = std::exp(-oracle::pi * std::norm(z) / 2);
      for (int n = 0; n < 5; ++n)
        for (int k = 0; k < 5; ++k) H[n * 5 + k][a * N + b] = complex_hermite(n, k, z) * w;
    }
  for (int p = 0; p < 25; ++p)
    for (int q = 0; q < 25; ++q) {
      cplx s = 0;
      for (int i = 0; i < N * N; ++i) s += H[p][i] * std::conj(H[q][i]);
      s *= h * h;
      EXPECT_NEAR(std::abs(s - (p == q ? 1.0 : 0.0)), 0.0, 1e-6) << p << " " << q;
    }
}

TEST(LaguerreRescale, Examples) {
  for (int n = 0; n <= 6; ++n) {
    EXPECT_NEAR(laguerre_rescale(n, 1.0, 1.7), laguerre(n, 0, 1.7), 1e-12);
    EXPECT_NEAR(laguerre_rescale(n, 0.0, 1.7), 1.0, 1e-12);
  }
  EXPECT_NEAR(laguerre_rescale(2, 0.5, 2.0), -0.5, 1e-14);
  for (double b : {-3.0, 0.2, 2.5}) EXPECT_NO_THROW(laguerre_rescale(5, b, 0.9));
}

TEST(LaguerreDensity, MatchesDefinitionAndIsSymmetric) {
  for (int n = 0; n <= 4; ++n)
    for (int k = 0; k <= 4; ++k)
      for (double u : {0.0, 0.2, 1.0, 3.5}) {
        EXPECT_NEAR(laguerre_density(n, k, u), laguerre_density(k, n, u), 1e-15);
        if (k <= n) {
          const double ref = std::tgamma(k + 1.0) / std::tgamma(n + 1.0) * std::pow(u, n - k) *
                             std::pow(oracle::laguerre_sum(k, n - k, u), 2) * std::exp(-u);
          EXPECT_NEAR(laguerre_density(n, k, u), ref, 1e-13);
        }
      }
}
