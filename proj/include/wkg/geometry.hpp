#pragma once

#include <array>

#include "wkg/core.hpp"

namespace wkg {

template <class Real = double>
struct SlicePoint {
  Real t{}, r{}, s{}, u{}, ubar{};
  std::array<Real, 3> x{};
  Real tau_minus{}, tau_plus{}, tau_zero{};
};

template <class Real>
SlicePoint<Real> hyperboloidal_time(const Real& t, const std::array<Real, 3>& x) {
  using std::sqrt;
  SlicePoint<Real> p;
  p.t = t;
  p.x = x;
  p.r = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (!(t > p.r)) throw Error(ErrorKind::outside_cone, "t <= |x|");
  p.u = t - p.r;
  p.ubar = t + p.r;
  p.s = sqrt(p.u * p.ubar);
  p.tau_minus = bracket(p.u);
  p.tau_plus = bracket(p.ubar);
  p.tau_zero = p.tau_minus / p.tau_plus;
  return p;
}

inline SlicePoint<double> hyperboloidal_time(double t, const std::array<double, 3>& x) {
  return hyperboloidal_time<double>(t, x);
}

// Point on the radial axis x = (r, 0, 0).
template <class Real>
SlicePoint<Real> radial_point(const Real& t, const Real& r) {
  return hyperboloidal_time<Real>(t, {r, Real(0), Real(0)});
}

template <class Real>
Real slice_height(const Real& s, const Real& r) {
  using std::sqrt;
  if (!(s > 0)) throw Error(ErrorKind::non_positive, "s must be positive");
  if (r < 0) throw Error(ErrorKind::non_positive, "r must be non-negative");
  if constexpr (std::is_floating_point_v<Real>)
    return std::hypot(s, r);
  else
    return sqrt(s * s + r * r);
}

inline double slice_height(double s, double r) { return slice_height<double>(s, r); }

// Slice point from (s, x); t is derived so that s is carried exactly.
template <class Real>
SlicePoint<Real> point_on_slice(const Real& s, const std::array<Real, 3>& x) {
  using std::sqrt;
  Real r = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  SlicePoint<Real> p = hyperboloidal_time<Real>(slice_height<Real>(s, r), x);
  p.s = s;
  return p;
}

template <class Real = double>
struct RescaledNormal {
  Real bondi_u{}, bondi_r{};
  std::array<Real, 4> cartesian{};
};

template <class Real>
RescaledNormal<Real> rescaled_normal(const SlicePoint<Real>& p) {
  RescaledNormal<Real> n;
  Real q = p.r / p.t;
  n.bondi_u = Real(1) - q;
  n.bondi_r = q;
  n.cartesian = {Real(1), p.x[0] / p.t, p.x[1] / p.t, p.x[2] / p.t};
  return n;
}

enum class Domain { K, K_int, K_wave, outside };

inline const char* to_string(Domain d) {
  switch (d) {
    case Domain::K: return "K";
    case Domain::K_int: return "K_int";
    case Domain::K_wave: return "K_wave";
    case Domain::outside: return "outside";
  }
  return "?";
}

template <class Real>
bool in_cone_domain(const Real& t, const Real& r) {
  return r < t - Real(1);
}

// K_int / K_wave refine the points of K whose s lies in [s1, s2]; other
// points of K get the plain K tag.
template <class Real>
Domain classify_domain(const SlicePoint<Real>& p, const Real& s1, const Real& s2) {
  if (!in_cone_domain(p.t, p.r)) return Domain::outside;
  if (p.s < s1 || p.s > s2) return Domain::K;
  if (p.r < p.t / 2) return Domain::K_int;
  return Domain::K_wave;
}

template <class Real>
Domain classify_domain(const SlicePoint<Real>& p) {
  return classify_domain<Real>(p, Real(0), std::numeric_limits<double>::infinity());
}

template <class Real = double>
struct FrameDerivatives {
  Real del_t{};
  std::array<Real, 3> del_i{};
  Real delu_0{};
  std::array<Real, 3> delu_i{};
  Real delu_r{};
  Real delB_u{}, delB_r{};
  Real slashed_grad{};
  bool radial_available = true;
};

template <class Real>
FrameDerivatives<Real> frame_transform(const std::array<Real, 4>& d, const SlicePoint<Real>& p) {
  using std::sqrt;
  FrameDerivatives<Real> f;
  f.del_t = d[0];
  f.delu_0 = d[0];
  for (int i = 0; i < 3; ++i) {
    f.del_i[i] = d[i + 1];
    f.delu_i[i] = d[i + 1] + (p.x[i] / p.t) * d[0];
  }
  f.delB_u = d[0];
  if (p.r == 0) {
    f.radial_available = false;
    return f;
  }
  Real dr = 0, grad2 = 0;
  for (int i = 0; i < 3; ++i) {
    dr += (p.x[i] / p.r) * d[i + 1];
    grad2 += d[i + 1] * d[i + 1];
  }
  f.delu_r = dr + (p.r / p.t) * d[0];
  f.delB_r = d[0] + dr;
  Real ang = grad2 - dr * dr;
  f.slashed_grad = ang > 0 ? sqrt(ang) : Real(0);
  return f;
}

}  // namespace wkg
