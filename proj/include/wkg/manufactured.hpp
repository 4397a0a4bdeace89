#pragma once

#include <array>
#include <cmath>
#include <string>

#include "wkg/core.hpp"
#include "wkg/taylor.hpp"

namespace wkg {

// d[m][n] = dt^m dr^n f for m + n <= 3
struct RadialJet {
  std::array<std::array<double, 4>, 4> d{};
  double operator()(int m, int n) const { return d[m][n]; }
};

enum class CaseKind { spherical_wave_bump, kg_modulated_bump, wave_with_polynomial_source };

inline const char* to_string(CaseKind k) {
  switch (k) {
    case CaseKind::spherical_wave_bump: return "spherical_wave_bump";
    case CaseKind::kg_modulated_bump: return "kg_modulated_bump";
    case CaseKind::wave_with_polynomial_source: return "wave_with_polynomial_source";
  }
  return "?";
}

inline CaseKind parse_case(const std::string& s) {
  if (s == "spherical_wave_bump") return CaseKind::spherical_wave_bump;
  if (s == "kg_modulated_bump") return CaseKind::kg_modulated_bump;
  if (s == "wave_with_polynomial_source") return CaseKind::wave_with_polynomial_source;
  throw Error(ErrorKind::unknown_kind, "manufactured case '" + s + "'");
}

namespace detail {

// exp(-1/((x-2)(3-x))) on (2,3)
template <int K>
Taylor<K> unit_bump(double x) {
  if (!(x > 2.0 && x < 3.0)) return {};
  auto X = Taylor<K>::variable(x);
  auto q = (X - 2.0) * (3.0 - X);
  return exp(-1.0 / q);
}

// exp(1 - 1/(1-(r/R)^2)) for r < R; chi(0) = 1
template <int K>
Taylor<K> round_bump(double r, double R) {
  if (!(std::abs(r) < R)) return {};
  auto X = Taylor<K>::variable(r) * (1.0 / R);
  return exp(1.0 - 1.0 / (1.0 - X * X));
}

// 1 on [0, R1], 0 beyond R2
template <int K>
Taylor<K> plateau(double r, double R1, double R2) {
  double x = (R2 - r) / (R2 - R1);
  if (x >= 1.0) return Taylor<K>::constant(1.0);
  if (x <= 0.0) return {};
  auto X = (R2 - Taylor<K>::variable(r)) * (1.0 / (R2 - R1));
  auto e0 = exp(-1.0 / X);
  auto e1 = exp(-1.0 / (1.0 - X));
  return e0 / (e0 + e1);
}

inline double binom(int n, int k) {
  double b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

}  // namespace detail

struct ManufacturedCase {
  CaseKind kind = CaseKind::spherical_wave_bump;
  double amp = 1.0;
  double c_mass = 1.0;
  double radius = 1.5;   // kg_modulated_bump support
  double inner = 0.8;    // plateau radii of wave_with_polynomial_source
  double outer = 1.9;

  // mass in  box(phi) - m^2 phi = F
  double mass() const { return kind == CaseKind::kg_modulated_bump ? c_mass : 0.0; }

  double support_radius(double t) const {
    switch (kind) {
      case CaseKind::spherical_wave_bump: return std::max(0.0, t - 2.0);
      case CaseKind::kg_modulated_bump: return radius;
      case CaseKind::wave_with_polynomial_source: return outer;
    }
    return 0;
  }

  RadialJet jet(double t, double r) const {
    RadialJet J;
    r = std::abs(r);
    switch (kind) {
      case CaseKind::spherical_wave_bump: spherical(t, r, J); break;
      case CaseKind::kg_modulated_bump: {
        auto chi = detail::round_bump<3>(r, radius);
        double e = amp * std::exp(-t);
        for (int m = 0; m <= 3; ++m)
          for (int n = 0; m + n <= 3; ++n) J.d[m][n] = (m % 2 ? -e : e) * chi.derivative(n);
        break;
      }
      case CaseKind::wave_with_polynomial_source: {
        auto chi = detail::plateau<3>(r, inner, outer);
        double ch[4];
        for (int n = 0; n <= 3; ++n) ch[n] = chi.derivative(n);
        const double tt[4] = {t * t, 2 * t, 2, 0};
        for (int m = 0; m <= 3; ++m)
          for (int n = 0; m + n <= 3; ++n) {
            double v = tt[m] * ch[n];
            if (m == 0) {
              double r2chi = r * r * ch[n];
              if (n >= 1) r2chi += 2 * n * r * ch[n - 1];
              if (n >= 2) r2chi += n * (n - 1) * ch[n - 2];
              v -= r2chi;
            }
            J.d[m][n] = amp * v;
          }
        break;
      }
    }
    return J;
  }

  double value(double t, double r) const { return jet(t, r).d[0][0]; }

  // F = box(phi) - m^2 phi
  double source(double t, double r) const {
    r = std::abs(r);
    switch (kind) {
      case CaseKind::spherical_wave_bump: return 0.0;
      case CaseKind::kg_modulated_bump: {
        auto chi = detail::round_bump<2>(r, radius);
        double c0 = chi.derivative(0), c1 = chi.derivative(1), c2 = chi.derivative(2);
        double lap = r > 1e-6 ? c2 + 2 * c1 / r : 3 * c2;
        return amp * std::exp(-t) * (-c0 + lap - c_mass * c_mass * c0);
      }
      case CaseKind::wave_with_polynomial_source: {
        auto chi = detail::plateau<2>(r, inner, outer);
        double c0 = chi.derivative(0), c1 = chi.derivative(1), c2 = chi.derivative(2);
        double lap = r > 0 ? c2 + 2 * c1 / r : 3 * c2;
        return amp * (-8 * c0 - 4 * r * c1 + (t * t - r * r) * lap);
      }
    }
    return 0;
  }

 private:
  // (f(t-r) - f(t+r)) / r with f the unit bump
  void spherical(double t, double r, RadialJet& J) const {
    if (r < 1e-2) {
      // even series in r around the axis
      auto f = detail::unit_bump<20>(t);
      for (int m = 0; m <= 3; ++m)
        for (int n = 0; m + n <= 3; ++n) {
          double v = 0;
          for (int k = 0; k <= 16; k += 2) {
            if (k < n) continue;
            double fall = 1;
            for (int i = 0; i < n; ++i) fall *= (k - i);
            double fact = 1;
            for (int i = 2; i <= k + 1; ++i) fact *= i;
            v += -2.0 * f.derivative(k + 1 + m) / fact * fall * std::pow(r, k - n);
          }
          J.d[m][n] = amp * v;
        }
      return;
    }
    auto fm = detail::unit_bump<3>(t - r);
    auto fp = detail::unit_bump<3>(t + r);
    for (int m = 0; m <= 3; ++m)
      for (int n = 0; m + n <= 3; ++n) {
        double v = 0;
        for (int k = 0; k <= n; ++k) {
          int j = m + n - k;
          double dA = ((n - k) % 2 ? -1.0 : 1.0) * fm.derivative(j) - fp.derivative(j);
          double fk = 1;
          for (int i = 2; i <= k; ++i) fk *= i;
          double g = (k % 2 ? -1.0 : 1.0) * fk / std::pow(r, k + 1);
          v += detail::binom(n, k) * dA * g;
        }
        J.d[m][n] = amp * v;
      }
  }
};

inline ManufacturedCase manufactured_case(CaseKind k) {
  ManufacturedCase c;
  c.kind = k;
  return c;
}

inline ManufacturedCase manufactured_case(const std::string& k) { return manufactured_case(parse_case(k)); }

}  // namespace wkg
