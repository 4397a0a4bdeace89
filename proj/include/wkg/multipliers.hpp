#pragma once

#include <array>
#include <string>
#include <utility>

#include "wkg/dual.hpp"
#include "wkg/geometry.hpp"

namespace wkg {

enum class MultiplierKind { T, Ka, Ya, Kconf };
enum class OmegaKind { unit, r, s2 };
enum class LambdaKind { unit, s_power };

inline const char* to_string(MultiplierKind k) {
  switch (k) {
    case MultiplierKind::T: return "T";
    case MultiplierKind::Ka: return "Ka";
    case MultiplierKind::Ya: return "Ya";
    case MultiplierKind::Kconf: return "Kconf";
  }
  return "?";
}

inline MultiplierKind parse_multiplier(const std::string& s) {
  if (s == "T") return MultiplierKind::T;
  if (s == "Ka") return MultiplierKind::Ka;
  if (s == "Ya") return MultiplierKind::Ya;
  if (s == "Kconf") return MultiplierKind::Kconf;
  throw Error(ErrorKind::unknown_kind, "multiplier '" + s + "'");
}

struct MultiplierSpec {
  MultiplierKind kind = MultiplierKind::T;
  double a = 0.0;
  OmegaKind omega = OmegaKind::unit;
  LambdaKind lambda = LambdaKind::unit;
};

inline bool exponent_valid(MultiplierKind k, double a) {
  switch (k) {
    case MultiplierKind::T: return a >= 0.0 && a <= 1.0;
    case MultiplierKind::Ka: return a >= 0.5 && a <= 1.0;
    case MultiplierKind::Ya: return a >= 0.0 && a <= 0.5;
    case MultiplierKind::Kconf: return a >= 0.0 && a <= 1.0;
  }
  return false;
}

inline MultiplierSpec make_multiplier(MultiplierKind k, double a) {
  if (!exponent_valid(k, a))
    throw Error(ErrorKind::exponent_range, std::string(to_string(k)) + " with a=" + std::to_string(a));
  MultiplierSpec m;
  m.kind = k;
  m.a = a;
  switch (k) {
    case MultiplierKind::T: break;
    case MultiplierKind::Ka:
    case MultiplierKind::Ya: m.omega = OmegaKind::r; break;
    case MultiplierKind::Kconf:
      m.omega = OmegaKind::s2;
      m.lambda = LambdaKind::s_power;
      break;
  }
  return m;
}

// (X^u, X^r) as functions of (u, ubar). Also instantiated on Dual.
template <class T>
std::pair<T, T> multiplier_components(const MultiplierSpec& m, const T& u, const T& ub) {
  const double a = m.a;
  const T one(1);
  switch (m.kind) {
    case MultiplierKind::T: return {one, T(0)};
    case MultiplierKind::Ka:
      return {one + power(u, 2 * a), (power(ub, 2 * a) - power(u, 2 * a)) / T(2)};
    case MultiplierKind::Ya: {
      T tm = bracket(u), tp = bracket(ub);
      T r = (ub - u) / T(2);
      return {one + T(2 * a) * power(tp, 2 * a - 1) * tm, power(r, 2 * a)};
    }
    case MultiplierKind::Kconf: return {u * u, (ub * ub - u * u) / T(2)};
  }
  return {one, T(0)};
}

template <class Real = double>
struct MultiplierValue {
  Real Xu{}, Xr{};
  // Bondi partials of the components.
  Real dBu_Xu{}, dBr_Xu{}, dBu_Xr{}, dBr_Xr{};
  Real Omega{}, Lambda{}, X_ln_Omega{};
};

template <class Real>
MultiplierValue<Real> multiplier_field(const MultiplierSpec& m, const SlicePoint<Real>& p) {
  if (!exponent_valid(m.kind, m.a)) throw Error(ErrorKind::exponent_range, to_string(m.kind));
  if (m.omega == OmegaKind::r && !(p.r > 0)) throw Error(ErrorKind::center_axis, "Omega = r at r = 0");
  const double a = m.a;
  const Real& u = p.u;
  const Real& ub = p.ubar;
  MultiplierValue<Real> v;
  auto [Xu, Xr] = multiplier_components<Real>(m, u, ub);
  v.Xu = Xu;
  v.Xr = Xr;
  // partials in (u, ubar)
  Real xu_u = 0, xu_ub = 0, xr_u = 0, xr_ub = 0;
  switch (m.kind) {
    case MultiplierKind::T: break;
    case MultiplierKind::Ka:
      if (a != 0) {
        xu_u = Real(2 * a) * power(u, 2 * a - 1);
        xr_u = -Real(a) * power(u, 2 * a - 1);
        xr_ub = Real(a) * power(ub, 2 * a - 1);
      }
      break;
    case MultiplierKind::Ya:
      if (a != 0) {
        Real tm = p.tau_minus, tp = p.tau_plus;
        xu_u = Real(2 * a) * power(tp, 2 * a - 1) * u / tm;
        xu_ub = Real(2 * a * (2 * a - 1)) * power(tp, 2 * a - 3) * ub * tm;
        Real rr = power((ub - u) / 2, 2 * a - 1);
        xr_u = -Real(a) * rr;
        xr_ub = Real(a) * rr;
      }
      break;
    case MultiplierKind::Kconf:
      xu_u = 2 * u;
      xr_u = -u;
      xr_ub = ub;
      break;
  }
  v.dBu_Xu = xu_u + xu_ub;
  v.dBr_Xu = 2 * xu_ub;
  v.dBu_Xr = xr_u + xr_ub;
  v.dBr_Xr = 2 * xr_ub;
  switch (m.omega) {
    case OmegaKind::unit:
      v.Omega = 1;
      v.X_ln_Omega = 0;
      break;
    case OmegaKind::r:
      v.Omega = p.r;
      v.X_ln_Omega = Xr / p.r;
      break;
    case OmegaKind::s2:
      v.Omega = u * ub;
      v.X_ln_Omega = Xu * (Real(1) / u + Real(1) / ub) + Xr * (Real(2) / ub);
      break;
  }
  v.Lambda = m.lambda == LambdaKind::unit ? Real(1) : power(p.s, 2 * a - 2);
  return v;
}

template <class Real = double>
struct CoefficientSet {
  Real Auu{}, Aur{}, Arr{};
  Real Abc_scalar{};  // multiplies delta^{bc} in angular coordinates
  Real B{};
  std::array<Real, 4> C_vector{};  // grad Lambda, Cartesian contravariant
  Real V{};
};

template <class Real>
Real conformal_potential(OmegaKind w, const SlicePoint<Real>& p) {
  if (w == OmegaKind::r && !(p.r > 0)) throw Error(ErrorKind::center_axis, "r-weight at r = 0");
  if (w == OmegaKind::s2 && !in_cone_domain(p.t, p.r)) throw Error(ErrorKind::outside_cone, "s2-weight outside K");
  return Real(0);
}

template <class Real>
CoefficientSet<Real> deformation_A(const MultiplierSpec& m, const SlicePoint<Real>& p) {
  if (!(p.r > 0)) throw Error(ErrorKind::center_axis, "deformation tensor at r = 0");
  auto v = multiplier_field(m, p);
  CoefficientSet<Real> c;
  Real k = v.Xr / p.r - v.X_ln_Omega;
  c.Auu = -v.dBr_Xu;
  c.Aur = v.dBr_Xu / 2 + k;
  c.Arr = v.dBr_Xr / 2 - v.dBu_Xu / 2 - v.dBu_Xr - k;
  c.Abc_scalar = (v.Xr / p.r - v.dBu_Xu / 2 - v.dBr_Xr / 2 - k) / (p.r * p.r);
  c.V = conformal_potential(m.omega, p);
  c.B = 0;  // X(V) - tr(A) V with V = 0
  if (m.lambda == LambdaKind::s_power) {
    Real f = Real(2 - 2 * m.a) * power(p.s, 2 * m.a - 4);
    c.C_vector = {f * p.t, f * p.x[0], f * p.x[1], f * p.x[2]};
  }
  return c;
}

// A^{ab} xi_a xi_b with Bondi covector (xi_u, xi_r) and angular part |xi_ang|^2.
template <class Real>
Real contract_A(const CoefficientSet<Real>& c, const Real& xi_u, const Real& xi_r, const Real& ang2, const Real& r) {
  return c.Auu * xi_u * xi_u + 2 * c.Aur * xi_u * xi_r + c.Arr * xi_r * xi_r + c.Abc_scalar * r * r * ang2;
}

template <class Real = double>
struct FluxDensity {
  Real value{}, coercive_lower{}, coercive_upper{};
};

// Young constant for the lower bound; eps^2 = 3/4.
inline constexpr double coercive_eps2 = 0.75;

template <class Real>
FluxDensity<Real> flux_density(const MultiplierValue<Real>& X, const SlicePoint<Real>& p,
                               const Real& Pu, const Real& Pr, const Real& ang2, const Real& b_term = Real(0)) {
  Real q = p.r / p.t;
  Real w = X.Xu * (1 - q);
  FluxDensity<Real> f;
  f.value = w * Pu * Pu + (X.Xu + X.Xr * (1 + q)) / 2 * Pr * Pr - w * Pu * Pr +
            (X.Xu + X.Xr * (1 - q)) / 2 * ang2 + b_term;
  const Real al = Real(1) / Real(coercive_eps2);
  f.coercive_lower = w * ((1 - al / 2) * Pu * Pu + (Real(1) / 2 - 1 / (2 * al)) * Pr * Pr) +
                     X.Xu / 2 * (q * Pr * Pr + ang2) + X.Xr / 2 * ((1 + q) * Pr * Pr + (1 - q) * ang2) + b_term;
  f.coercive_upper = w * Real(3) / 2 * Pu * Pu + ((X.Xu + X.Xr * (1 + q)) / 2 + w / 2) * Pr * Pr +
                     (X.Xu + X.Xr * (1 - q)) / 2 * ang2 + b_term;
  return f;
}

template <class Real>
FluxDensity<Real> flux_density(const MultiplierSpec& m, const SlicePoint<Real>& p, const FrameDerivatives<Real>& fr,
                               const Real& b_term = Real(0)) {
  Real ang2 = fr.slashed_grad * fr.slashed_grad;
  return flux_density(multiplier_field(m, p), p, fr.delB_u, fr.delB_r, ang2, b_term);
}

// Q(X, Y) for a covector xi in Cartesian components, eta = diag(-1,1,1,1).
template <class Real>
Real energy_momentum(const std::array<Real, 4>& xi, const std::array<Real, 4>& X, const std::array<Real, 4>& Y) {
  Real xX = 0, xY = 0, XY = -X[0] * Y[0], xx = -xi[0] * xi[0];
  for (int i = 0; i < 4; ++i) {
    xX += xi[i] * X[i];
    xY += xi[i] * Y[i];
  }
  for (int i = 1; i < 4; ++i) {
    XY += X[i] * Y[i];
    xx += xi[i] * xi[i];
  }
  return xX * xY - XY * xx / 2;
}

template <class Real>
std::array<Real, 4> cartesian_vector(const Real& Xu, const Real& Xr, const SlicePoint<Real>& p) {
  if (!(p.r > 0)) return {Xu + Xr, Real(0), Real(0), Real(0)};
  return {Xu + Xr, Xr * p.x[0] / p.r, Xr * p.x[1] / p.r, Xr * p.x[2] / p.r};
}

template <class Real = double>
struct GBounds {
  Real g{}, lower{}, upper{};
};

template <class Real>
Real q_weight(double a, const Real& u, const Real& ub) {
  if (!(ub > u)) throw Error(ErrorKind::degenerate, "q_weight needs u < ubar");
  Real r = (ub - u) / 2;
  Real lead = (power(ub, 2 * a) - power(u, 2 * a)) / r;
  if (a == 0) return lead;
  return lead - Real(2 * a) * (power(ub, 2 * a - 1) + power(u, 2 * a - 1));
}

template <class Real>
GBounds<Real> g_bounds(double a, const Real& w) {
  GBounds<Real> b;
  b.g = power(Real(1) + w, 2 * a) - power(Real(1) - w, 2 * a);
  b.lower = Real(2 * a) * w;
  b.upper = Real(2 * a) * (power(Real(2), 2 * a - 1) + 1) * w;
  return b;
}

}  // namespace wkg
