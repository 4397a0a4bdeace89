#include <gtest/gtest.h>

#include "wkg/manufactured.hpp"

using namespace wkg;

namespace {

double residual(const ManufacturedCase& c, double t, double r) {
  auto J = c.jet(t, r);
  double m = c.mass();
  return -J(2, 0) + J(0, 2) + 2 * J(0, 1) / r - m * m * J(0, 0) - c.source(t, r);
}

}  // namespace

TEST(Manufactured, UnknownKind) {
  try {
    manufactured_case("gaussian");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unknown_kind);
  }
}

TEST(Manufactured, TaylorMatchesClosedForm) {
  auto x = Taylor<4>::variable(0.3);
  auto e = exp(x * x);
  double v = std::exp(0.09);
  EXPECT_NEAR(e.derivative(1), 0.6 * v, 1e-14);
  EXPECT_NEAR(e.derivative(2), (2 + 0.36) * v, 1e-14);
  auto q = 1.0 / (1.0 + x);
  EXPECT_NEAR(q.derivative(3), -6 / std::pow(1.3, 4), 1e-13);
}

TEST(Manufactured, SphericalWaveIsHomogeneous) {
  auto c = manufactured_case(CaseKind::spherical_wave_bump);
  for (double t : {3.0, 3.7, 5.2})
    for (double r : {0.3, 0.9, 1.6, 2.5, 2.9}) {
      EXPECT_EQ(c.source(t, r), 0.0);
      auto J = c.jet(t, r);
      double scale = std::abs(J(2, 0)) + std::abs(J(0, 2)) + 1e-12;
      EXPECT_NEAR(residual(c, t, r), 0.0, 1e-10 * scale);
    }
}

TEST(Manufactured, JetsMatchFiniteDifferences) {
  const double h = 1e-4;
  for (auto k : {CaseKind::spherical_wave_bump, CaseKind::kg_modulated_bump, CaseKind::wave_with_polynomial_source}) {
    auto c = manufactured_case(k);
    for (double t : {3.2, 4.1})
      for (double r : {0.6, 1.3, 1.7}) {
        auto J = c.jet(t, r);
        for (int m = 0; m <= 2; ++m)
          for (int n = 0; m + n <= 2; ++n) {
            double dt = (c.jet(t + h, r)(m, n) - c.jet(t - h, r)(m, n)) / (2 * h);
            double dr = (c.jet(t, r + h)(m, n) - c.jet(t, r - h)(m, n)) / (2 * h);
            double tol = 1e-5 * (1 + std::abs(J(m + 1, n)) + std::abs(J(m, n + 1)));
            EXPECT_NEAR(J(m + 1, n), dt, tol) << to_string(k);
            EXPECT_NEAR(J(m, n + 1), dr, tol) << to_string(k);
          }
      }
  }
}

TEST(Manufactured, AxisSeriesContinuous) {
  auto c = manufactured_case(CaseKind::spherical_wave_bump);
  c.amp = 1.0;
  double t = 2.6;  // bump active at the axis
  auto a = c.jet(t, 1e-2 - 1e-9);
  auto b = c.jet(t, 1e-2);
  for (int m = 0; m <= 3; ++m)
    for (int n = 0; m + n <= 3; ++n) EXPECT_NEAR(a(m, n), b(m, n), 1e-6 * (1 + std::abs(b(m, n))));
  auto z = c.jet(t, 0.0);
  EXPECT_EQ(z(0, 1), 0.0);
  EXPECT_EQ(z(0, 3), 0.0);
}

TEST(Manufactured, ForcedCasesSatisfyEquation) {
  for (auto k : {CaseKind::kg_modulated_bump, CaseKind::wave_with_polynomial_source}) {
    auto c = manufactured_case(k);
    for (double t : {3.0, 4.5})
      for (double r : {0.2, 0.85, 1.2, 1.45, 1.85}) {
        double scale = std::abs(c.source(t, r)) + std::abs(c.jet(t, r)(2, 0)) + 1;
        EXPECT_NEAR(residual(c, t, r), 0.0, 1e-11 * scale) << to_string(k) << " r=" << r;
      }
  }
}

TEST(Manufactured, PolynomialSourcePlateauValue) {
  auto c = manufactured_case(CaseKind::wave_with_polynomial_source);
  EXPECT_DOUBLE_EQ(c.source(3.0, 0.5), -8.0);
  EXPECT_DOUBLE_EQ(c.source(7.0, 0.0), -8.0);
  EXPECT_EQ(c.source(3.0, 1.95), 0.0);
  EXPECT_DOUBLE_EQ(c.value(3.0, 0.5), 9.0 - 0.25);
}

TEST(Manufactured, KgSourceClosedForm) {
  auto c = manufactured_case(CaseKind::kg_modulated_bump);
  // chi(0) = 1, chi''(0) = -2/R^2
  double R = c.radius;
  double expect = std::exp(-3.0) * (-1 + 3 * (-2 / (R * R)) - 1);
  EXPECT_NEAR(c.source(3.0, 0.0), expect, 1e-14);
  EXPECT_EQ(c.source(3.0, R), 0.0);
}
