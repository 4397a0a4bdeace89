#include <gtest/gtest.h>

#include "wkg/jets.hpp"

using namespace wkg;

namespace {

// jet of s^2 = t^2 - |x|^2
CartesianJet s2_jet(double t, const std::array<double, 3>& x) {
  CartesianJet j;
  j.at({0, 0, 0, 0}) = t * t - x[0] * x[0] - x[1] * x[1] - x[2] * x[2];
  j.at({1, 0, 0, 0}) = 2 * t;
  j.at({2, 0, 0, 0}) = 2;
  for (int i = 0; i < 3; ++i) {
    MultiIndex a{0, 0, 0, 0};
    a[i + 1] = 1;
    j.at(a) = -2 * x[i];
    a[i + 1] = 2;
    j.at(a) = -2;
  }
  return j;
}

}  // namespace

TEST(Jets, SlotsAreABijection) {
  std::array<int, jet_slots> seen{};
  for (int a0 = 0; a0 <= 3; ++a0)
    for (int a1 = 0; a0 + a1 <= 3; ++a1)
      for (int a2 = 0; a0 + a1 + a2 <= 3; ++a2)
        for (int a3 = 0; a0 + a1 + a2 + a3 <= 3; ++a3) seen[jet_slot({a0, a1, a2, a3})]++;
  for (int c : seen) EXPECT_EQ(c, 1);
  EXPECT_EQ(jet_slot({2, 2, 0, 0}), -1);
}

TEST(Jets, BoostOfS2Vanishes) {
  std::array<double, 3> x{0.7, -1.2, 2.0};
  double t = 5.0;
  auto j = s2_jet(t, x);
  for (int i = 0; i < 3; ++i) {
    BoostIndex J{0, 0, 0};
    J[i] = 1;
    EXPECT_NEAR(commutator_op({0, 0, 0, 0}, J).apply(j, t, x), 0.0, 1e-13);
  }
  EXPECT_NEAR(commutator_op({0, 0, 0, 0}, {1, 1, 0}).apply(j, t, x), 0.0, 1e-12);
}

TEST(Jets, RadialBoostOfOpticalFunction) {
  // u = t - r; sum_i w_i L_i = t d_r + r d_t
  double t = 4.0;
  std::array<double, 3> x{1.0, 2.0, -2.0};
  double r = 3.0;
  RadialJet J;
  J.d[0][0] = t - r;
  J.d[1][0] = 1;
  J.d[0][1] = -1;
  auto c = radial_to_cartesian(J, x);
  double v = 0;
  for (int i = 0; i < 3; ++i) {
    BoostIndex B{0, 0, 0};
    B[i] = 1;
    v += x[i] / r * commutator_op({0, 0, 0, 0}, B).apply(c, t, x);
  }
  EXPECT_NEAR(v, r - t, 1e-14);
}

TEST(Jets, RadialToCartesianMatchesFiniteDifferences) {
  auto mc = manufactured_case(CaseKind::kg_modulated_bump);
  double t = 3.3;
  std::array<double, 3> x{0.3, -0.4, 0.5};
  auto f = [&](double tt, std::array<double, 3> y) {
    double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    return radial_to_cartesian(mc.jet(tt, r), y);
  };
  auto c = f(t, x);
  const double h = 1e-5;
  // each slot of order <= 2 differentiated once in each spatial direction
  for (int a0 = 0; a0 <= 2; ++a0)
    for (int a1 = 0; a0 + a1 <= 2; ++a1)
      for (int a2 = 0; a0 + a1 + a2 <= 2; ++a2)
        for (int a3 = 0; a0 + a1 + a2 + a3 <= 2; ++a3)
          for (int i = 0; i < 3; ++i) {
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            MultiIndex a{a0, a1, a2, a3};
            double fd = (f(t, xp)[a] - f(t, xm)[a]) / (2 * h);
            auto b = a;
            b[i + 1]++;
            EXPECT_NEAR(c[b], fd, 1e-6 * (1 + std::abs(fd)));
          }
}

TEST(Jets, AxisLimit) {
  auto mc = manufactured_case(CaseKind::kg_modulated_bump);
  auto c0 = radial_to_cartesian(mc.jet(3.0, 0.0), {0, 0, 0});
  auto c1 = radial_to_cartesian(mc.jet(3.0, 1e-6), {1e-6, 0, 0});
  const MultiIndex xx{0, 2, 0, 0}, yy{0, 0, 2, 0}, x1{0, 1, 0, 0};
  EXPECT_NEAR(c0[xx], c1[xx], 1e-6);
  EXPECT_NEAR(c0[yy], c1[yy], 1e-6);
  EXPECT_EQ(c0[x1], 0.0);
}

TEST(Jets, TimeDerivativeOfSphericalWave) {
  auto mc = manufactured_case(CaseKind::spherical_wave_bump);
  double t = 4.0;
  std::array<double, 3> x{0.5, 0.9, -1.1};
  double r = std::sqrt(0.25 + 0.81 + 1.21);
  auto c = radial_to_cartesian(mc.jet(t, r), x);
  EXPECT_NEAR(commutator_op({1, 0, 0, 0}, {0, 0, 0}).apply(c, t, x), mc.jet(t, r)(1, 0), 1e-14);
}

TEST(Jets, IndexEnumeration) {
  EXPECT_EQ(commutator_indices(0).size(), 1u);
  EXPECT_EQ(commutator_indices(1).size(), 8u);
  EXPECT_EQ(commutator_indices(2).size(), 36u);
  EXPECT_EQ(index_string(MultiIndex{0, 1, 0, 2}), "0102");
  EXPECT_EQ(commutator_op({1, 0, 0, 0}, {0, 1, 0}).order(), 2);
  EXPECT_TRUE(preserves_radial({2, 0, 0, 0}, {0, 0, 0}));
  EXPECT_FALSE(preserves_radial({0, 0, 0, 0}, {1, 0, 0}));
}

TEST(Jets, OrderGuard) {
  CartesianJet j;
  j.order = 1;
  EXPECT_THROW(j[(MultiIndex{0, 2, 0, 0})], Error);
}
