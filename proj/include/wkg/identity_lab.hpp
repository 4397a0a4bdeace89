#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wkg/dual.hpp"
#include "wkg/multipliers.hpp"
#include "wkg/parallel.hpp"

namespace wkg {

enum class Precision { f64, extended };

struct IdentityReport {
  std::string identity_id;
  std::size_t samples = 0;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::uint64_t seed = 0;
  std::size_t excluded = 0;  // not part of the JSON line

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["identity_id"] = identity_id;
    j["samples"] = samples;
    j["max_abs_residual"] = max_abs_residual;
    j["max_rel_residual"] = max_rel_residual;
    j["tolerance"] = tolerance;
    j["verdict"] = pass ? "pass" : "fail";
    j["seed"] = seed;
    return j;
  }
};

namespace lab {

struct Residual {
  double abs = 0.0, rel = 0.0;
  bool skip = false;
};

template <class Real>
Residual residual_of(const Real& diff, const Real& scale) {
  using std::abs;
  Residual r;
  r.abs = to_double(Real(abs(diff)));
  r.rel = scale > 0 ? to_double(Real(abs(diff) / scale)) : 0.0;
  return r;
}

inline std::vector<double> exponent_grid(MultiplierKind k, bool quarters) {
  std::vector<double> out;
  if (quarters) {
    for (int i = 0; i <= 4; ++i) out.push_back(i / 4.0);
  } else {
    for (int i = 0; i <= 20; ++i) out.push_back(i / 20.0);
  }
  std::vector<double> ok;
  for (double a : out)
    if (exponent_valid(k, a)) ok.push_back(a);
  return ok;
}

// Cone sample in K: log-uniform s, uniform r/(t-1), uniform direction. Drawn
// in binary64 and lifted exactly.
template <class Real>
SlicePoint<Real> sample_point(SampleRng& g) {
  double s = std::exp(g.uniform(std::log(1.1), std::log(1e3)));
  double lam = g.uniform();
  double l2 = lam * lam;
  double t = (s * s + l2) / (l2 + std::sqrt(l2 * l2 + (1 - l2) * (s * s + l2)));
  double r = lam * (t - 1);
  double ct = g.uniform(-1, 1), ph = g.uniform(0, 6.283185307179586);
  double st = std::sqrt(std::max(0.0, 1 - ct * ct));
  std::array<Real, 3> x{Real(r * st * std::cos(ph)), Real(r * st * std::sin(ph)), Real(r * ct)};
  return hyperboloidal_time<Real>(Real(t), x);
}

inline MultiplierSpec sample_multiplier(SampleRng& g, bool quarters) {
  const MultiplierKind kinds[] = {MultiplierKind::T, MultiplierKind::Ka, MultiplierKind::Ya, MultiplierKind::Kconf};
  MultiplierKind k = kinds[g.below(4)];
  auto grid = exponent_grid(k, quarters);
  return make_multiplier(k, grid[g.below(static_cast<int>(grid.size()))]);
}

template <class Real>
std::array<Real, 4> sample_covector(SampleRng& g) {
  return {Real(g.uniform(-1, 1)), Real(g.uniform(-1, 1)), Real(g.uniform(-1, 1)), Real(g.uniform(-1, 1))};
}

inline IdentityReport reduce(const std::string& id, std::size_t samples, std::uint64_t seed, double tol,
                             const std::vector<Residual>& res, bool use_abs = false) {
  IdentityReport rep;
  rep.identity_id = id;
  rep.samples = samples;
  rep.seed = seed;
  rep.tolerance = tol;
  for (const auto& r : res) {
    if (r.skip) {
      rep.excluded++;
      continue;
    }
    rep.max_abs_residual = std::max(rep.max_abs_residual, r.abs);
    rep.max_rel_residual = std::max(rep.max_rel_residual, r.rel);
  }
  rep.pass = (use_abs ? rep.max_abs_residual : rep.max_rel_residual) <= tol;
  return rep;
}

// Random polynomial in (t, x1, x2, x3) of total degree <= 4.
template <class Real>
struct Poly4 {
  std::vector<std::array<int, 4>> exps;
  std::vector<Real> coef;

  static Poly4 random(SampleRng& g) {
    Poly4 p;
    int deg = g.below(5);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        for (int c = 0; a + b + c <= deg; ++c)
          for (int d = 0; a + b + c + d <= deg; ++d) {
            p.exps.push_back({a, b, c, d});
            p.coef.push_back(Real(g.uniform(-1, 1)));
          }
    return p;
  }

  // Value and gradient by coefficient differentiation; abs_bound = same
  // with |coef| and |vars|.
  void eval(const std::array<Real, 4>& y, Real& v, std::array<Real, 4>& d, Real& vabs,
            std::array<Real, 4>& dabs) const {
    using std::abs;
    v = 0;
    vabs = 0;
    d.fill(Real(0));
    dabs.fill(Real(0));
    for (std::size_t m = 0; m < exps.size(); ++m) {
      const auto& e = exps[m];
      Real mono = coef[m];
      for (int k = 0; k < 4; ++k) mono *= ipow(y[k], e[k]);
      v += mono;
      vabs += abs(mono);
      for (int k = 0; k < 4; ++k) {
        if (e[k] == 0) continue;
        Real dm = coef[m] * Real(e[k]);
        for (int j = 0; j < 4; ++j) dm *= ipow(y[j], j == k ? e[j] - 1 : e[j]);
        d[k] += dm;
        dabs[k] += abs(dm);
      }
    }
  }

  template <class D>
  D eval_dual(const std::array<D, 4>& y) const {
    std::array<std::array<D, 5>, 4> pw;
    for (int k = 0; k < 4; ++k) {
      pw[k][0] = D(Real(1));
      for (int n = 1; n <= 4; ++n) pw[k][n] = pw[k][n - 1] * y[k];
    }
    D out(Real(0));
    for (std::size_t m = 0; m < exps.size(); ++m) {
      const auto& e = exps[m];
      out += ((pw[0][e[0]] * pw[1][e[1]]) * (pw[2][e[2]] * pw[3][e[3]])) * coef[m];
    }
    return out;
  }
};

}  // namespace lab

// Bondi component formulas against the Cartesian deformation tensor built by
// forward differentiation of the Cartesian components of X.
template <class Real>
IdentityReport check_deformation_identity(std::size_t samples, std::uint64_t seed, double tol) {
  using D = Dual<Real, 4>;
  const bool quarters = !std::is_floating_point_v<Real>;
  std::vector<lab::Residual> res(samples);
  parallel_for(samples, [&](std::size_t i) {
    using std::abs;
    SampleRng g(seed, i);
    auto p = lab::sample_point<Real>(g);
    auto m = lab::sample_multiplier(g, quarters);
    auto xi = lab::sample_covector<Real>(g);
    if (!(p.r > Real(1e-6))) {
      res[i].skip = true;
      return;
    }
    auto c = deformation_A(m, p);
    Real ang = xi[1] * xi[1] + xi[2] * xi[2] + xi[3] * xi[3];
    Real om = (p.x[0] * xi[1] + p.x[1] * xi[2] + p.x[2] * xi[3]) / p.r;
    Real xu = xi[0], xr = xi[0] + om;
    Real bondi = contract_A(c, xu, xr, ang - om * om, p.r);

    std::array<D, 4> y{D::variable(p.t, 0), D::variable(p.x[0], 1), D::variable(p.x[1], 2), D::variable(p.x[2], 3)};
    D r = sqrt(y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
    D u = y[0] - r, ub = y[0] + r;
    auto [Xu, Xr] = multiplier_components<D>(m, u, ub);
    std::array<D, 4> X{Xu + Xr, Xr * y[1] / r, Xr * y[2] / r, Xr * y[3] / r};
    D Om = m.omega == OmegaKind::unit ? D(Real(1)) : m.omega == OmegaKind::r ? r : u * ub;
    Real xlog = 0;
    for (int a = 0; a < 4; ++a) xlog += X[a].v * Om.d[a] / Om.v;
    const Real eta[4] = {-1, 1, 1, 1};
    Real div = X[0].d[0] + X[1].d[1] + X[2].d[2] + X[3].d[3];
    Real xi2 = -xi[0] * xi[0] + ang;
    Real cart = 0, scale = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Real term = (eta[a] * X[b].d[a] + eta[b] * X[a].d[b]) / 2 * xi[a] * xi[b];
        cart += term;
        scale += abs(term);
      }
    cart += (xlog - div / 2) * xi2;
    scale += (abs(xlog) + abs(div) / 2) * abs(xi2) + abs(bondi);
    res[i] = lab::residual_of<Real>(cart - bondi, scale);
  });
  return lab::reduce("deformation", samples, seed, tol, res);
}

template <class Real>
IdentityReport check_flux_identity(std::size_t samples, std::uint64_t seed, double tol) {
  const bool quarters = !std::is_floating_point_v<Real>;
  std::vector<lab::Residual> res(samples);
  parallel_for(samples, [&](std::size_t i) {
    using std::abs;
    SampleRng g(seed, i);
    auto p = lab::sample_point<Real>(g);
    auto m = lab::sample_multiplier(g, quarters);
    auto xi = lab::sample_covector<Real>(g);
    if (m.omega == OmegaKind::r && !(p.r > Real(1e-6))) {
      res[i].skip = true;
      return;
    }
    auto X = multiplier_field(m, p);
    auto fr = frame_transform(xi, p);
    auto f = flux_density(m, p, fr);
    Real direct = energy_momentum(xi, cartesian_vector(X.Xu, X.Xr, p), rescaled_normal(p).cartesian);
    Real q = p.r / p.t, ang2 = fr.slashed_grad * fr.slashed_grad;
    Real w = X.Xu * (1 - q);
    Real scale = abs(w * fr.delB_u * fr.delB_u) + abs((X.Xu + X.Xr * (1 + q)) / 2 * fr.delB_r * fr.delB_r) +
                 abs(w * fr.delB_u * fr.delB_r) + abs((X.Xu + X.Xr * (1 - q)) / 2 * ang2);
    Real bad = abs(f.value - direct);
    if (X.Xu >= 0 && X.Xr >= 0) {
      bad = std::max<Real>(bad, f.coercive_lower - f.value);
      bad = std::max<Real>(bad, f.value - f.coercive_upper);
    }
    res[i] = lab::residual_of<Real>(bad, scale);
  });
  return lab::reduce("flux", samples, seed, tol, res);
}

namespace lab {

inline constexpr double fd_potential_tol = 1e-6;

// Box of Omega^{-1} in Cartesian coordinates, term by term; returns (sum, sum of |terms|).
template <class Real>
std::pair<Real, Real> box_inverse_weight_cartesian(OmegaKind w, const SlicePoint<Real>& p) {
  using std::abs;
  std::vector<Real> terms;
  if (w == OmegaKind::r) {
    Real r2 = p.r * p.r, r5 = r2 * r2 * p.r;
    for (int i = 0; i < 3; ++i) terms.push_back((3 * p.x[i] * p.x[i] - r2) / r5);
  } else {
    Real s2 = p.u * p.ubar, s4 = s2 * s2, s6 = s4 * s2;
    terms.push_back(Real(2) / s4);
    terms.push_back(-8 * p.t * p.t / s6);
    for (int i = 0; i < 3; ++i) {
      terms.push_back(Real(2) / s4);
      terms.push_back(8 * p.x[i] * p.x[i] / s6);
    }
  }
  Real sum = 0, mag = 0;
  for (auto& t : terms) {
    sum += t;
    mag += abs(t);
  }
  return {sum, mag};
}

// Radial Bondi wave operator on Omega^{-1}(u, r) by 4th-order differences.
template <class Real>
std::pair<Real, Real> box_inverse_weight_fd(OmegaKind w, const Real& u, const Real& r) {
  using std::abs;
  using std::min;
  auto f = [&](const Real& uu, const Real& rr) -> Real {
    if (w == OmegaKind::r) return Real(1) / rr;
    return Real(1) / (uu * (uu + 2 * rr));
  };
  // step scaled by the weight's own length: r for the r-weight, u for s^2
  Real h = Real(1e-3) * (w == OmegaKind::r ? r : u);
  const int off[4] = {-2, -1, 1, 2};
  const Real c1[4] = {Real(1), Real(-8), Real(8), Real(-1)};
  auto d_r = [&](const Real& uu) {
    Real s = 0;
    for (int k = 0; k < 4; ++k) s += c1[k] * f(uu, r + off[k] * h);
    return s / (12 * h);
  };
  Real fr = d_r(u);
  Real fu = 0, fur = 0;
  for (int k = 0; k < 4; ++k) {
    fu += c1[k] * f(u + off[k] * h, r);
    fur += c1[k] * d_r(u + off[k] * h);
  }
  fu /= 12 * h;
  fur /= 12 * h;
  Real frr = (-f(u, r + 2 * h) + 16 * f(u, r + h) - 30 * f(u, r) + 16 * f(u, r - h) - f(u, r - 2 * h)) / (12 * h * h);
  Real terms[4] = {frr, -2 * fur, 2 * fr / r, -2 * fu / r};
  Real sum = 0, mag = 0;
  for (auto& t : terms) {
    sum += t;
    mag += abs(t);
  }
  return {sum, mag};
}

}  // namespace lab

// Closed-form potentials are identically 0; the Cartesian analytic box must
// cancel to tol and the finite-difference box to 1e-6. The FD part enters the
// reported relative residual rescaled by tol / 1e-6.
template <class Real>
IdentityReport check_potentials(std::size_t samples, std::uint64_t seed, double tol) {
  std::vector<lab::Residual> res(samples);
  parallel_for(samples, [&](std::size_t i) {
    using std::abs;
    SampleRng g(seed, i);
    auto p = lab::sample_point<Real>(g);
    lab::Residual out;
    bool any = false;
    for (OmegaKind w : {OmegaKind::r, OmegaKind::s2}) {
      if (w == OmegaKind::r && !(p.r > Real(1e-6))) continue;
      if (!in_cone_domain(p.t, p.r)) continue;
      any = true;
      Real closed = conformal_potential(w, p);
      auto [cs, cm] = lab::box_inverse_weight_cartesian(w, p);
      auto [fs, fm] = lab::box_inverse_weight_fd(w, p.u, p.r);
      double a = std::max(to_double(Real(abs(closed))), to_double(Real(abs(cs))));
      double rel = std::max(to_double(Real(abs(cs) / cm)), to_double(Real(abs(fs) / fm)) * tol / lab::fd_potential_tol);
      out.abs = std::max(out.abs, a);
      out.rel = std::max(out.rel, rel);
    }
    out.skip = !any;
    res[i] = out;
  });
  return lab::reduce("potentials", samples, seed, tol, res);
}

// Conjugation identities for the r- and s^2-weights, the subtraction identity
// and the tangential rewriting, with left sides by forward differentiation
// and right sides from the expanded formulas.
template <class Real>
IdentityReport check_combining_identities(std::size_t samples, std::uint64_t seed, double tol) {
  using D = Dual<Real, 4>;
  std::vector<lab::Residual> res(samples);
  parallel_for(samples, [&](std::size_t i) {
    using std::abs;
    SampleRng g(seed, i);
    auto p = lab::sample_point<Real>(g);
    auto poly = lab::Poly4<Real>::random(g);
    double a = std::is_floating_point_v<Real> ? 0.05 * (1 + g.below(20)) : 0.25 * (1 + g.below(4));
    if (!(p.r > Real(1e-6))) {
      res[i].skip = true;
      return;
    }
    std::array<Real, 4> yv{p.t, p.x[0], p.x[1], p.x[2]};
    Real phi, phia;
    std::array<Real, 4> dphi, dphia;
    poly.eval(yv, phi, dphi, phia, dphia);

    std::array<D, 4> y{D::variable(p.t, 0), D::variable(p.x[0], 1), D::variable(p.x[1], 2), D::variable(p.x[2], 3)};
    D P = poly.template eval_dual<D>(y);
    D r = sqrt(y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
    D s2 = y[0] * y[0] - (y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
    std::array<Real, 3> om{p.x[0] / p.r, p.x[1] / p.r, p.x[2] / p.r};
    auto dBr = [&](const D& f) { return f.d[0] + om[0] * f.d[1] + om[1] * f.d[2] + om[2] * f.d[3]; };
    auto dt = [&](const D& f) { return f.d[0]; };
    auto dur = [&](const D& f) { return om[0] * f.d[1] + om[1] * f.d[2] + om[2] * f.d[3] + p.r / p.t * f.d[0]; };

    D rP = r * P, sP = s2 * P;
    Real S2 = p.u * p.ubar;
    Real dBr_phi = dphi[0] + om[0] * dphi[1] + om[1] * dphi[2] + om[2] * dphi[3];
    Real dBr_abs = dphia[0] + dphia[1] + dphia[2] + dphia[3];

    lab::Residual worst;
    auto take = [&](const Real& lhs, const Real& rhs, const Real& mag) {
      auto rr = lab::residual_of<Real>(lhs - rhs, abs(lhs) + mag);
      worst.abs = std::max(worst.abs, rr.abs);
      worst.rel = std::max(worst.rel, rr.rel);
    };
    Real L1 = dBr(rP) / p.r;
    take(L1, dBr_phi + phi / p.r, dBr_abs + phia / p.r);
    Real L2 = dt(rP) / p.r;
    take(L2, dphi[0], dphia[0]);
    Real L3 = dBr(sP) / S2;
    Real R3 = dBr_phi + 2 * phi / p.ubar;
    take(L3, R3, dBr_abs + 2 * phia / p.ubar);
    Real L4 = dt(sP) / S2;
    Real R4 = dphi[0] + 2 * p.t * phi / S2;
    Real R4abs = dphia[0] + 2 * p.t * phia / S2;
    take(L4, R4, R4abs);
    Real sa = power(p.s, a), sa1 = sa / p.s;
    Real st = p.s / p.t;
    Real L5 = sa1 * st * p.u * (L4 - L2);
    take(L5, sa / p.t * (2 * p.t / p.ubar) * phi, sa1 * st * p.u * (R4abs + dphia[0]));
    Real L6 = sa * p.ubar / p.t * dur(sP) / S2;
    Real R6 = sa1 * p.ubar * st * R3 - sa1 * p.u * p.ubar / p.t * (st * R4);
    Real R6abs = sa1 * p.ubar * st * (dBr_abs + 2 * phia / p.ubar) + sa1 * p.u * p.ubar / p.t * st * R4abs;
    take(L6, R6, R6abs);
    res[i] = worst;
  });
  return lab::reduce("combining", samples, seed, tol, res);
}

// Sign pattern of q over the exponent grid, the ratio bounds with C0 = 2 and
// C1 = 2(2^{2a-1}+1), the g bounds, and the sign of f''. In binary64 the
// verdict uses residuals relative to the magnitudes of the cancelling terms;
// in extended precision it uses the absolute residual.
template <class Real>
IdentityReport check_weight_lemma(std::size_t samples, std::uint64_t seed, double tol,
                                  bool quarters = !std::is_floating_point_v<Real>) {
  const bool absolute = !std::is_floating_point_v<Real>;
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k)
    if (!quarters || k % 5 == 0) grid.push_back(k / 20.0);
  std::vector<lab::Residual> res(samples);
  parallel_for(samples, [&](std::size_t i) {
    using std::abs;
    SampleRng g(seed, i);
    auto p = lab::sample_point<Real>(g);
    if (!(p.ubar > p.u)) {
      res[i].skip = true;
      return;
    }
    lab::Residual worst;
    auto note = [&](const Real& viol, const Real& mag) {
      if (viol <= 0) return;
      double va = to_double(viol);
      worst.abs = std::max(worst.abs, va);
      worst.rel = std::max(worst.rel, mag > 0 ? to_double(Real(viol / mag)) : va);
    };
    Real r = (p.ubar - p.u) / 2;
    for (double a : grid) {
      Real q = q_weight(a, p.u, p.ubar);
      Real lead = (power(p.ubar, 2 * a) - power(p.u, 2 * a)) / r;
      Real mag = abs(lead) + Real(2 * a) * (power(p.ubar, 2 * a - 1) + power(p.u, 2 * a - 1));
      if (a == 0.0 || a == 0.5 || a == 1.0) note(abs(q), mag);
      if (a >= 0.5) note(-q, mag);
      else note(q, mag);
      Real fpp = Real(2 * a * (2 * a - 1)) * (power(p.ubar, 2 * a - 2) - power(p.u, 2 * a - 2));
      Real fmag = abs(Real(2 * a * (2 * a - 1))) * (power(p.ubar, 2 * a - 2) + power(p.u, 2 * a - 2));
      if (a >= 0.5) note(fpp, fmag);
      else note(-fpp, fmag);
      if (a >= 0.5) {
        Real ratio = (power(p.ubar, 2 * a) - power(p.u, 2 * a)) / (Real(a) * r * power(p.t, 2 * a - 1));
        Real c1 = 2 * (power(Real(2), 2 * a - 1) + 1);
        note(Real(2) - ratio, ratio);
        note(ratio - c1, ratio);
        auto gb = g_bounds(a, r / p.t);
        note(gb.lower - gb.g, gb.g);
        note(gb.g - gb.upper, gb.g);
      }
    }
    res[i] = worst;
  });
  return lab::reduce("weight_lemma", samples, seed, tol, res, absolute);
}

template <class Real>
std::vector<IdentityReport> run_identity_suite(std::size_t samples, std::uint64_t seed, double tol) {
  return {check_deformation_identity<Real>(samples, seed, tol), check_flux_identity<Real>(samples, seed + 1, tol),
          check_potentials<Real>(samples, seed + 2, tol), check_combining_identities<Real>(samples, seed + 3, tol),
          check_weight_lemma<Real>(samples, seed + 4, tol)};
}

inline std::vector<IdentityReport> run_identity_suite(Precision prec, std::size_t samples, std::uint64_t seed,
                                                      double tol) {
  if (prec == Precision::f64) return run_identity_suite<double>(samples, seed, tol);
  return run_identity_suite<extended>(samples, seed, tol);
}

}  // namespace wkg
