#include <gtest/gtest.h>

#include "wkg/multipliers.hpp"

using namespace wkg;

namespace {

SlicePoint<double> at(double t, double r) { return hyperboloidal_time(t, {r, 0.0, 0.0}); }

SlicePoint<double> random_point(SampleRng& g) {
  double s = std::exp(g.uniform(std::log(1.1), std::log(1e3)));
  double lam = g.uniform(1e-3, 1.0 - 1e-3);
  double l2 = lam * lam;
  double t = (s * s + l2) / (l2 + std::sqrt(l2 * l2 + (1 - l2) * (s * s + l2)));
  double r = lam * (t - 1);
  double ct = g.uniform(-1, 1), ph = g.uniform(0, 6.283185307179586), st = std::sqrt(1 - ct * ct);
  return hyperboloidal_time(t, {r * st * std::cos(ph), r * st * std::sin(ph), r * ct});
}

}  // namespace

TEST(Multipliers, KaExamples) {
  auto v = multiplier_field(make_multiplier(MultiplierKind::Ka, 1.0), at(5, 3));
  EXPECT_DOUBLE_EQ(v.Xu, 5.0);
  EXPECT_DOUBLE_EQ(v.Xr, 30.0);
  auto h = multiplier_field(make_multiplier(MultiplierKind::Ka, 0.5), at(5, 3));
  EXPECT_DOUBLE_EQ(h.Xu, 3.0);
  EXPECT_DOUBLE_EQ(h.Xr, 3.0);
}

TEST(Multipliers, YaAtZeroCollapses) {
  auto v = multiplier_field(make_multiplier(MultiplierKind::Ya, 0.0), at(9, 4));
  EXPECT_EQ(v.Xu, 1.0);
  EXPECT_EQ(v.Xr, 1.0);
}

TEST(Multipliers, ExponentRangeIsHardError) {
  EXPECT_THROW(make_multiplier(MultiplierKind::Ka, 0.45), Error);
  EXPECT_THROW(make_multiplier(MultiplierKind::Ya, 0.55), Error);
  EXPECT_THROW(make_multiplier(MultiplierKind::Kconf, 1.2), Error);
  try {
    make_multiplier(MultiplierKind::Ka, 0.3);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::exponent_range);
  }
}

TEST(Multipliers, CenterAxisForRWeight) {
  auto p = at(4, 0);
  try {
    multiplier_field(make_multiplier(MultiplierKind::Ka, 0.75), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::center_axis);
  }
  EXPECT_NO_THROW(multiplier_field(make_multiplier(MultiplierKind::T, 0.0), p));
}

TEST(Multipliers, DeformationKaEndpointsVanish) {
  for (double a : {0.5, 1.0}) {
    auto c = deformation_A(make_multiplier(MultiplierKind::Ka, a), at(5, 3));
    EXPECT_NEAR(c.Auu, 0, 1e-13);
    EXPECT_NEAR(c.Aur, 0, 1e-13);
    EXPECT_NEAR(c.Arr, 0, 1e-13);
    EXPECT_NEAR(c.Abc_scalar, 0, 1e-13);
  }
}

TEST(Multipliers, DeformationKaThreeQuarters) {
  auto c = deformation_A(make_multiplier(MultiplierKind::Ka, 0.75), at(5, 3));
  EXPECT_NEAR(c.Auu, 0, 1e-13);
  EXPECT_NEAR(c.Aur, 0, 1e-13);
  EXPECT_NEAR(c.Arr, 0, 1e-13);
  double q = (std::pow(8, 1.5) - std::pow(2, 1.5)) / 3 - 1.5 * (std::sqrt(8.0) + std::sqrt(2.0));
  EXPECT_NEAR(q, 0.2357, 1e-4);
  EXPECT_NEAR(c.Abc_scalar, q / 18, 1e-14);
  EXPECT_NEAR(c.Abc_scalar, 0.01310, 1e-5);
}

TEST(Multipliers, DeformationKconfVanishes) {
  SampleRng g(1, 0);
  for (int i = 0; i < 1000; ++i) {
    auto p = random_point(g);
    for (double a : {0.0, 0.3, 1.0}) {
      auto m = make_multiplier(MultiplierKind::Kconf, a);
      auto c = deformation_A(m, p);
      auto v = multiplier_field(m, p);
      double sc = v.Xu + v.Xr;
      ASSERT_NEAR(c.Auu, 0, 1e-13 * sc);
      ASSERT_NEAR(c.Aur, 0, 1e-13 * sc);
      ASSERT_NEAR(c.Arr, 0, 1e-13 * sc);
      ASSERT_NEAR(c.Abc_scalar * p.r * p.r, 0, 1e-13 * sc);
      ASSERT_NEAR(v.Xr / p.r - v.X_ln_Omega, 0, 1e-13 * sc);
    }
  }
}

TEST(Multipliers, KaSignPattern) {
  SampleRng g(2, 0);
  for (int i = 0; i < 2000; ++i) {
    auto p = random_point(g);
    double a = 0.5 + 0.05 * g.below(11);
    auto m = make_multiplier(MultiplierKind::Ka, a);
    auto c = deformation_A(m, p);
    auto v = multiplier_field(m, p);
    double sc = std::abs(v.dBu_Xu) + std::abs(v.dBr_Xr) + std::abs(v.dBu_Xr) + std::abs(v.Xr / p.r);
    ASSERT_LE(std::abs(c.Auu), 1e-14 * sc);
    ASSERT_LE(std::abs(c.Aur), 1e-14 * sc);
    ASSERT_LE(std::abs(c.Arr), 1e-13 * sc);
    ASSERT_GE(c.Abc_scalar * p.r * p.r, -1e-13 * sc);
  }
}

TEST(Multipliers, YaSignPattern) {
  SampleRng g(3, 0);
  for (int i = 0; i < 2000; ++i) {
    auto p = random_point(g);
    double a = 0.05 * (1 + g.below(10));
    auto c = deformation_A(make_multiplier(MultiplierKind::Ya, a), p);
    ASSERT_GE(c.Auu, -1e-12);
    ASSERT_GE(c.Arr, -1e-12);
    ASSERT_GE(c.Abc_scalar, -1e-12);
    ASSERT_LE(std::abs(c.Aur), std::sqrt(c.Auu * c.Arr) + 1e-12);
  }
}

TEST(Multipliers, ConformalPotentials) {
  EXPECT_EQ(conformal_potential(OmegaKind::r, at(5, 3)), 0.0);
  EXPECT_EQ(conformal_potential(OmegaKind::s2, at(3, 1)), 0.0);
  EXPECT_THROW(conformal_potential(OmegaKind::r, at(5, 0)), Error);
  EXPECT_THROW(conformal_potential(OmegaKind::s2, at(5, 4.5)), Error);
}

TEST(Multipliers, FluxExamples) {
  auto p = at(5, 3);
  auto T = multiplier_field(make_multiplier(MultiplierKind::T, 0), p);
  auto zero = flux_density(T, p, 0.0, 0.0, 0.0);
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_EQ(zero.coercive_lower, 0.0);
  EXPECT_EQ(zero.coercive_upper, 0.0);
  // Phi = t: dB_u = 1, dB_r = 1
  auto f = flux_density(T, p, 1.0, 1.0, 0.0);
  EXPECT_NEAR(f.value, 0.5, 1e-15);
  std::array<double, 4> xi{1, 0, 0, 0};
  EXPECT_NEAR(energy_momentum(xi, cartesian_vector(T.Xu, T.Xr, p), rescaled_normal(p).cartesian), 0.5, 1e-15);
}

TEST(Multipliers, FluxMatchesContractionAndBounds) {
  SampleRng g(4, 0);
  const MultiplierKind kinds[] = {MultiplierKind::T, MultiplierKind::Ka, MultiplierKind::Ya, MultiplierKind::Kconf};
  for (int i = 0; i < 5000; ++i) {
    auto p = random_point(g);
    auto kind = kinds[i % 4];
    double a = kind == MultiplierKind::Ka ? g.uniform(0.5, 1) : kind == MultiplierKind::Ya ? g.uniform(0, 0.5) : g.uniform(0, 1);
    auto m = make_multiplier(kind, a);
    std::array<double, 4> xi{g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)};
    auto fr = frame_transform(xi, p);
    auto X = multiplier_field(m, p);
    auto f = flux_density(m, p, fr);
    double direct = energy_momentum(xi, cartesian_vector(X.Xu, X.Xr, p), rescaled_normal(p).cartesian);
    double scale = (X.Xu + X.Xr) * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + xi[3] * xi[3]);
    ASSERT_NEAR(f.value, direct, 1e-12 * scale);
    ASSERT_LE(f.coercive_lower, f.value + 1e-12 * scale);
    ASSERT_LE(f.value, f.coercive_upper + 1e-12 * scale);
    ASSERT_GE(f.coercive_lower, -1e-12 * scale);
  }
}

TEST(Multipliers, DominantEnergy) {
  SampleRng g(6, 0);
  for (int i = 0; i < 5000; ++i) {
    auto p = random_point(g);
    auto m = make_multiplier(MultiplierKind::Kconf, g.uniform(0, 1));
    auto X = multiplier_field(m, p);
    std::array<double, 4> xi{g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)};
    std::array<double, 4> ns{p.t / p.s, p.x[0] / p.s, p.x[1] / p.s, p.x[2] / p.s};
    double q = energy_momentum(xi, ns, cartesian_vector(X.Xu, X.Xr, p));
    ASSERT_GE(q, -1e-12 * (X.Xu + X.Xr) * p.t / p.s);
  }
}

TEST(Multipliers, WeightExamples) {
  EXPECT_NEAR(q_weight(1.0, 2.0, 8.0), 0.0, 1e-13);
  EXPECT_NEAR(q_weight(0.5, 2.0, 8.0), 0.0, 1e-13);
  EXPECT_NEAR(q_weight(0.75, 2.0, 8.0), 0.2357, 1e-4);
  EXPECT_LE(q_weight(0.25, 2.0, 8.0), 1e-12);
  EXPECT_THROW(q_weight(0.5, 3.0, 3.0), Error);
  for (double a : {0.5, 0.65, 0.8, 1.0}) {
    for (double w : {0.0, 0.2, 0.7, 0.99}) {
      auto b = g_bounds(a, w);
      EXPECT_LE(b.lower, b.g + 1e-14);
      EXPECT_LE(b.g, b.upper + 1e-14);
    }
  }
}

TEST(Multipliers, ExtendedKaMatchesDouble) {
  auto pe = radial_point<extended>(extended(5), extended(3));
  auto c = deformation_A(make_multiplier(MultiplierKind::Ka, 0.75), pe);
  EXPECT_LT(abs(c.Arr), extended("1e-45"));
  EXPECT_NEAR(to_double(c.Abc_scalar), 0.2357022603955158 / 18, 1e-12);
}
