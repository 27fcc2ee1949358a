#include <gtest/gtest.h>

#include <locspec/reinhardt.hpp>

#include "oracles.hpp"

using namespace locspec;
using namespace locspec::reinhardt;

namespace {

double gauss_radial(std::span<const double> r) {
  double p = 1;
  for (double v : r) p *= 2 * oracle::pi * v * std::exp(-oracle::pi * v * v);
  return p;
}

}  // namespace

TEST(Shadow, BallD1IsInterval) {
  const auto W = ball_shadow(1, 0.7);
  EXPECT_TRUE(W.contains(std::vector<double>{0.0}));
  EXPECT_TRUE(W.contains(std::vector<double>{0.7}));
  EXPECT_FALSE(W.contains(std::vector<double>{0.7000001}));
  EXPECT_EQ(W.box(), std::vector<double>{0.7});
}

TEST(Shadow, PolydiscIsRectangle) {
  const auto W = polydisc_shadow({1.0, 2.0});
  EXPECT_EQ(W.box(), (std::vector<double>{1.0, 2.0}));
  EXPECT_TRUE(W.contains(std::vector<double>{1.0, 2.0}));
  EXPECT_FALSE(W.contains(std::vector<double>{1.01, 0.5}));
  EXPECT_FALSE(W.contains(std::vector<double>{0.5, 2.01}));
}

TEST(Shadow, WeightedQuadratic) {
  const auto W = weighted_quadratic_shadow({1, 2}, 1.0);
  EXPECT_TRUE(W.contains(std::vector<double>{1.0, 0.0}));
  EXPECT_TRUE(W.contains(std::vector<double>{0.0, std::sqrt(0.5)}));
  EXPECT_FALSE(W.contains(std::vector<double>{0.0, 0.8}));
  EXPECT_TRUE(W.contains(std::vector<double>{0.6, 0.55}));  // 0.36 + 0.605
  EXPECT_FALSE(W.contains(std::vector<double>{0.6, 0.58}));
}

TEST(Shadow, PBallAndInvalidParameters) {
  const auto W = p_ball_shadow(2, 1.0, 0.5);
  EXPECT_TRUE(W.contains(std::vector<double>{0.25, 0.25}));
  EXPECT_FALSE(W.contains(std::vector<double>{0.3, 0.3}));
  EXPECT_THROW(ball_shadow(1, 0.0), config_error);
  EXPECT_THROW(polydisc_shadow({1.0, -1.0}), config_error);
  EXPECT_THROW(p_ball_shadow(2, 1.0, 0.0), config_error);
  EXPECT_THROW(weighted_quadratic_shadow({1, 0}, 1.0), config_error);
  EXPECT_THROW(shadow_of("cube", {}), config_error);
  EXPECT_THROW(table_shadow(2, {{0.0, 1.0}, {1.0, 1.5}}), config_error);
  EXPECT_EQ(shadow_of("disc", {.R = 2.0}).d, 1);
}

TEST(Lift, AgreesWithShadowOfTau) {
  const auto ball = ball_shadow(2, 1.0);
  const auto poly = polydisc_shadow({0.7, 1.2});
  const auto weighted = weighted_quadratic_shadow({1, 2}, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<cplx> z{{oracle::uniform(-1.3, 1.3), oracle::uniform(-1.3, 1.3)},
                              {oracle::uniform(-1.3, 1.3), oracle::uniform(-1.3, 1.3)}};
    const std::vector<double> r{std::abs(z[0]), std::abs(z[1])};
    EXPECT_EQ(lift_membership(ball, z), std::norm(z[0]) + std::norm(z[1]) <= 1.0);
    EXPECT_EQ(lift_membership(poly, z), r[0] <= 0.7 && r[1] <= 1.2);
    EXPECT_EQ(lift_membership(weighted, z), weighted.contains(r));
  }
}

TEST(Lift, ClosedBoundary) {
  const auto W = polydisc_shadow({1.0, 2.0});
  EXPECT_TRUE(lift_membership(W, std::vector<cplx>{std::polar(1.0, 0.3), 0.0}));
  EXPECT_TRUE(lift_membership(ball_shadow(1, 1.0), std::vector<cplx>{{0.6, 0.8}}));
  EXPECT_THROW(lift_membership(W, std::vector<cplx>{0.0}), std::invalid_argument);
}

TEST(Lift, SquareIsNotReinhardt) {
  // Two points with equal modulus, one inside [-1,1]^2 and one outside: no
  // shadow membership can separate them.
  const std::vector<cplx> in{{0.9, 0.9}}, out{{std::abs(cplx(0.9, 0.9)), 0.0}};
  EXPECT_EQ(tau(in), tau(out));
  for (const auto& W : {ball_shadow(1, 1.0), ball_shadow(1, 1.3), ball_shadow(1, 2.0)})
    EXPECT_EQ(lift_membership(W, in), lift_membership(W, out));
}

TEST(Quadrature, DiscGaussian) {
  for (double R : {0.3, 0.5642, 1.0, 2.0}) {
    const auto q = shadow_quadrature(ball_shadow(1, R), gauss_radial);
    EXPECT_TRUE(q.converged);
    EXPECT_NEAR(q.value, 1 - std::exp(-oracle::pi * R * R), 1e-12);
  }
  EXPECT_NEAR(absolute_space_quadrature(1, gauss_radial).value, 1.0, 1e-10);
  const auto c = shadow_quadrature(complement_shadow(ball_shadow(1, 0.8)), gauss_radial);
  EXPECT_NEAR(c.value, std::exp(-oracle::pi * 0.64), 1e-9);
}

TEST(Quadrature, PolydiscFactorizes) {
  const auto W = polydisc_shadow({0.6, 1.1});
  const auto q = shadow_quadrature(W, gauss_radial);
  const double a = shadow_quadrature(ball_shadow(1, 0.6), gauss_radial).value;
  const double b = shadow_quadrature(ball_shadow(1, 1.1), gauss_radial).value;
  EXPECT_NEAR(q.value, a * b, 1e-10);
}

TEST(Quadrature, BallD2ClosedForm) {
  // 1 - e^{-pi R^2} - pi R^2 e^{-pi R^2}
  const auto q = shadow_quadrature(ball_shadow(2, 1.0), gauss_radial);
  EXPECT_NEAR(q.value, 1 - std::exp(-oracle::pi) - oracle::pi * std::exp(-oracle::pi), 1e-8);
  EXPECT_NEAR(q.value, 0.8210256, 1e-7);
}

TEST(Quadrature, LiftedVolumes) {
  EXPECT_NEAR(lifted_volume(ball_shadow(1, 1.3)), oracle::pi * 1.69, 1e-10);
  EXPECT_NEAR(lifted_volume(ball_shadow(2, 1.0)) / (oracle::pi * oracle::pi / 2), 1.0, 1e-6);
  EXPECT_NEAR(lifted_volume(p_ball_shadow(2, 1.0, 1.0)) / (4 * oracle::pi * oracle::pi / 24), 1.0, 1e-6);
  EXPECT_NEAR(lifted_volume(polydisc_shadow({0.5, 2.0})), oracle::pi * 0.25 * oracle::pi * 4, 1e-9);
  // quarter-circle boundary table approximates the ball
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i <= 400; ++i) {
    const double r1 = i / 400.0;
    curve.emplace_back(r1, std::sqrt(std::max(0.0, 1 - r1 * r1)));
  }
  EXPECT_NEAR(lifted_volume(table_shadow(2, curve)) / (oracle::pi * oracle::pi / 2), 1.0, 1e-4);
}

TEST(Quadrature, BallVolumeMonteCarlo) {
  const auto W = ball_shadow(2, 1.0);
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const std::vector<cplx> z{{oracle::uniform(-1, 1), oracle::uniform(-1, 1)}, {oracle::uniform(-1, 1), oracle::uniform(-1, 1)}};
    hits += lift_membership(W, z);
  }
  const double p = double(hits) / n, mc = 16 * p, sigma = 16 * std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(lifted_volume(W), mc, 4 * sigma);
}

TEST(Mask, EvaluationAndEfgForm) {
  const auto disc = ball_shadow(1, 1.0);
  const auto m = indicator_mask(disc);
  EXPECT_EQ(m(std::vector<double>{0.6, 0.8}), 1.0);
  EXPECT_EQ(m(std::vector<double>{0.6, 0.81}), 0.0);
  const auto c = complement_mask(disc);
  EXPECT_EQ(c.c, 1.0);
  EXPECT_EQ(c(std::vector<double>{0.6, 0.7}), 0.0);
  EXPECT_EQ(c(std::vector<double>{2.0, 0.0}), 1.0);
  EXPECT_EQ(c.profile_support(), 1.0);
  const auto fs = fubini_study_mask();
  EXPECT_NEAR(fs(std::vector<double>{1.0, 0.0}), 1.0, 1e-15);
  EXPECT_TRUE(fs.thin_at_infinity);
  EXPECT_EQ(fs.profile_support(), inf);
}

TEST(Mask, RadialTableClampsAndWarns) {
  const auto m = radial_table_mask(1, {{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.25}});
  EXPECT_NEAR(m.profile(std::vector<double>{0.5}), 0.75, 1e-15);
  EXPECT_FALSE(m.clamped->load());
  EXPECT_NEAR(m.profile(std::vector<double>{3.0}), 0.25, 1e-15);
  EXPECT_TRUE(m.clamped->load());
  EXPECT_THROW(radial_table_mask(1, {{0.0, 1.0}, {0.0, 0.5}}), config_error);
}

TEST(Polyradial, Examples) {
  const phasespace::PhaseGrid g{1, 6.0, 256};
  const auto gauss = phasespace::sample_phase(g, [](auto z) { return cplx(std::exp(-oracle::pi * (z[0] * z[0] + z[1] * z[1]))); });
  EXPECT_LT(polyradial_check(gauss), 1e-6);
  EXPECT_LT(polyradial_check(sample_mask(g, fubini_study_mask())), 1e-6);
  const auto square = phasespace::sample_phase(g, [](auto z) { return cplx(std::abs(z[0]) <= 1 && std::abs(z[1]) <= 1 ? 1.0 : 0.0); });
  EXPECT_GT(polyradial_check(square), 0.5);
}

TEST(Polyradial, D2) {
  const phasespace::PhaseGrid g{2, 5.0, 64};
  const auto m = sample_mask(g, gaussian_mask(2, 0.4));
  EXPECT_LT(polyradial_check(m), 1e-6);
  // Rotating the (x_1, w_2) pair mixes the planes; not polyradial.
  const auto mixed = phasespace::sample_phase(g, [](auto z) { return cplx(std::exp(-0.4 * oracle::pi * ((z[0] + 0.5 * z[3]) * (z[0] + 0.5 * z[3]) + z[1] * z[1] + z[2] * z[2]))); });
  EXPECT_GT(polyradial_check(mixed), 1e-2);
}
