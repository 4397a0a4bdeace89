#pragma once

#include <json.hpp>

#include "wkg/energies.hpp"
#include "wkg/multipliers.hpp"

namespace wkg {

struct BalanceReport {
  MultiplierKind kind = MultiplierKind::T;
  double a = 0, s0 = 0, s1 = 0;
  double flux_in = 0, flux_out = 0, bulk_A = 0, bulk_C = 0, source_term = 0;
  double residual = 0;
  std::size_t layers = 0;
  std::string grid_id;

  // flux_in - flux_out - (bulk_A + bulk_C + source_term), relative to the sum of magnitudes
  void finish() {
    double scale = std::abs(flux_in) + std::abs(flux_out) + std::abs(bulk_A) + std::abs(bulk_C) +
                   std::abs(source_term);
    double d = flux_in - flux_out - bulk_A - bulk_C - source_term;
    residual = scale > 0 ? std::abs(d) / scale : 0.0;
  }
};

inline nlohmann::json to_json(const BalanceReport& r) {
  return {{"type", "balance"},
          {"multiplier", to_string(r.kind)},
          {"a", r.a},
          {"s0", r.s0},
          {"s1", r.s1},
          {"flux_in", r.flux_in},
          {"flux_out", r.flux_out},
          {"bulk_A", r.bulk_A},
          {"bulk_C", r.bulk_C},
          {"source_term", r.source_term},
          {"residual", r.residual},
          {"layers", r.layers},
          {"grid_id", r.grid_id}};
}

// Local densities of the conformal multiplier identity for Phi = Omega phi.
struct BalanceDensity {
  double flux = 0;  // Lambda Omega^-2 Q[Phi](X, N'), per dx
  double A = 0, C = 0, source = 0;  // bulk pieces per dx dt, before the s/t factor
};

struct LocalField {
  double phi = 0, phit = 0, box = 0;  // box = wave operator of phi
  std::array<double, 3> grad{};
};

// Omega^-2 and Omega^-1 are left to the caller's weights (they carry the
// r = 0 limit for Omega = r); everything returned here is multiplied by them.
inline BalanceDensity balance_density(const MultiplierSpec& m, double t, const std::array<double, 3>& x,
                                      const LocalField& f, double& inv_omega_factor) {
  auto p = hyperboloidal_time(t, x);
  const double r = p.r;
  std::array<double, 3> om{x[0] / r, x[1] / r, x[2] / r};
  std::array<double, 4> dP{};
  double Phi = f.phi;
  switch (m.omega) {
    case OmegaKind::unit:
      dP = {f.phit, f.grad[0], f.grad[1], f.grad[2]};
      inv_omega_factor = 1;
      break;
    case OmegaKind::r:
      Phi = r * f.phi;
      dP[0] = r * f.phit;
      for (int i = 0; i < 3; ++i) dP[i + 1] = om[i] * f.phi + r * f.grad[i];
      inv_omega_factor = r;  // Omega^-1 = r * Omega^-2
      break;
    case OmegaKind::s2: {
      double s2 = t * t - r * r;
      Phi = s2 * f.phi;
      dP[0] = 2 * t * f.phi + s2 * f.phit;
      for (int i = 0; i < 3; ++i) dP[i + 1] = -2 * x[i] * f.phi + s2 * f.grad[i];
      inv_omega_factor = s2;
      break;
    }
  }
  (void)Phi;
  double dr = om[0] * dP[1] + om[1] * dP[2] + om[2] * dP[3];
  double Pu = dP[0], Pr = dP[0] + dr;
  double ang2 = std::max(0.0, dP[1] * dP[1] + dP[2] * dP[2] + dP[3] * dP[3] - dr * dr);
  auto X = multiplier_field(m, p);
  auto c = deformation_A(m, p);
  auto Xc = cartesian_vector(X.Xu, X.Xr, p);
  BalanceDensity d;
  d.flux = X.Lambda * flux_density(X, p, Pu, Pr, ang2).value;
  d.A = X.Lambda * contract_A(c, Pu, Pr, ang2, r);
  d.C = energy_momentum(dP, c.C_vector, Xc);
  double XPhi = Xc[0] * dP[0] + Xc[1] * dP[1] + Xc[2] * dP[2] + Xc[3] * dP[3];
  d.source = X.Lambda * f.box * XPhi;
  return d;
}

namespace detail {

inline LocalField local_field(const FieldBand& band, std::size_t f, const HyperboloidSample& q, std::size_t k,
                              double mass) {
  LocalField L;
  if (q.mode == GridMode::radial) {
    auto J = band.radial_jet(f, false, q.index[k], q.t[k]);
    auto S = band.radial_jet(f, true, q.index[k], q.t[k]);
    L.phi = J(0, 0);
    L.phit = J(1, 0);
    L.grad = {J(0, 1), 0.0, 0.0};
    L.box = S(0, 0) + mass * mass * L.phi;
  } else {
    auto J = band.cartesian_jet(f, false, q.index[k], q.t[k]);
    auto S = band.cartesian_jet(f, true, q.index[k], q.t[k]);
    L.phi = J.v[0];
    L.phit = J[{1, 0, 0, 0}];
    L.grad = {J[{0, 1, 0, 0}], J[{0, 0, 1, 0}], J[{0, 0, 0, 1}]};
    L.box = S.v[0] + mass * mass * L.phi;
  }
  return L;
}

}  // namespace detail

// Weighted node contributions; the r = 0 node of the radial grid is evaluated a
// thousandth of a cell off the axis.
inline BalanceDensity weighted_density(const MultiplierSpec& m, const HyperboloidSample& q, std::size_t k,
                                       const LocalField& L) {
  std::array<double, 3> x = q.x[k];
  double r = q.r[k];
  if (r == 0) {
    r = 1e-3 * q.h;
    x = {r, 0.0, 0.0};
  }
  double inv = 1;
  auto d = balance_density(m, q.t[k], x, L, inv);
  double w = q.w[k];
  double wr2 = q.mode == GridMode::radial ? q.w_over_r2[k] : q.w[k] / (r * r);
  double w2, w1;  // Omega^-2 w and Omega^-1 w
  switch (m.omega) {
    case OmegaKind::unit: w2 = w1 = w; break;
    case OmegaKind::r:
      w2 = wr2;
      w1 = wr2 * inv;
      break;
    default:
      w2 = w / (inv * inv);
      w1 = w / inv;
      break;
  }
  double st = q.s / q.t[k];
  BalanceDensity out;
  out.flux = d.flux * w2;
  out.A = d.A * w2 * st;
  out.C = d.C * w2 * st;
  out.source = d.source * w1 * st;
  return out;
}

// Streams the band through s-layers between s0 and s1 and assembles both sides
// of the multiplier identity (trapezoid in s).
class BalanceVerifier {
 public:
  BalanceVerifier(const GridSpec& grid, const MultiplierSpec& m, double s0, double s1, double r_limit = -1,
                  std::size_t field = 0, double mass = 0, double u_min = 1.0)
      : m_(m), field_(field), mass_(mass), stream_(grid) {
    if (!(s1 > s0)) throw Error(ErrorKind::usage, "balance needs s1 > s0");
    auto top = hyperboloid_quadrature(s1, grid, r_limit, u_min);
    const double ds_max = grid.dt() * s0 / top.t_max();
    const long M = std::max(2L, static_cast<long>(std::ceil((s1 - s0) / ds_max)));
    const double ds = (s1 - s0) / static_cast<double>(M);
    layer_.resize(static_cast<std::size_t>(M + 1));
    report_.kind = m.kind;
    report_.a = m.a;
    report_.s0 = s0;
    report_.s1 = s1;
    report_.layers = layer_.size();
    for (long j = 0; j <= M; ++j) {
      double s = j == M ? s1 : s0 + static_cast<double>(j) * ds;
      double wt = (j == 0 || j == M) ? 0.5 * ds : ds;
      auto q = hyperboloid_quadrature(s, grid, r_limit, u_min);
      auto& L = layer_[static_cast<std::size_t>(j)];
      L.weight = wt;
      L.edge = j == 0 ? 1 : (j == M ? 2 : 0);
      L.nodes.assign(q.size(), BalanceDensity{});
      const std::size_t jj = static_cast<std::size_t>(j);
      stream_.add(
          std::move(q),
          [this, jj](HyperboloidSample& q, std::size_t k, const FieldBand& band) {
            auto Lf = detail::local_field(band, field_, q, k, mass_);
            layer_[jj].nodes[k] = weighted_density(m_, q, k, Lf);
          },
          [this, jj](HyperboloidSample&) { close(jj); });
    }
  }

  BalanceVerifier(const BalanceVerifier&) = delete;
  BalanceVerifier& operator=(const BalanceVerifier&) = delete;

  void observe(const FieldBand& band, bool final = false) { stream_.observe(band, final); }
  std::size_t pending() const { return stream_.pending(); }

  BalanceReport report() const {
    if (stream_.pending()) throw Error(ErrorKind::band_coverage, "balance layers still pending");
    BalanceReport r = report_;
    std::vector<double> A, C, S;
    for (const auto& L : layer_) {
      A.push_back(L.weight * L.A);
      C.push_back(L.weight * L.C);
      S.push_back(L.weight * L.S);
      if (L.edge == 1) r.flux_in = L.flux;
      if (L.edge == 2) r.flux_out = L.flux;
    }
    r.bulk_A = pairwise_sum(A);
    r.bulk_C = pairwise_sum(C);
    r.source_term = pairwise_sum(S);
    r.finish();
    return r;
  }

 private:
  struct Layer {
    double weight = 0;
    int edge = 0;
    double flux = 0, A = 0, C = 0, S = 0;
    std::vector<BalanceDensity> nodes;
  };

  void close(std::size_t j) {
    auto& L = layer_[j];
    std::vector<double> v(L.nodes.size());
    auto sum = [&](auto get) {
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = get(L.nodes[k]);
      return pairwise_sum(v);
    };
    if (L.edge) L.flux = sum([](const BalanceDensity& d) { return d.flux; });
    L.A = sum([](const BalanceDensity& d) { return d.A; });
    L.C = sum([](const BalanceDensity& d) { return d.C; });
    L.S = sum([](const BalanceDensity& d) { return d.source; });
    L.nodes.clear();
    L.nodes.shrink_to_fit();
  }

  MultiplierSpec m_;
  std::size_t field_;
  double mass_;
  HyperboloidStream stream_;
  std::vector<Layer> layer_;
  BalanceReport report_;
};

inline BalanceReport verify_balance(const ModelSpec& model, const GridSpec& grid, const MultiplierSpec& m, double s0,
                                    double s1, double r_limit = -1, std::size_t field = 0) {
  auto ev = Evolver::create(model, grid);
  BalanceVerifier bv(grid, m, s0, s1, r_limit, field, model.mass(field));
  ev->run([&](const FieldBand& b) { bv.observe(b, ev->done()); });
  auto r = bv.report();
  r.grid_id = std::to_string(grid.n_cells) + "/" + model.field_names()[field];
  return r;
}

struct DecayFit {
  std::string id;
  double p = 0, log_amplitude = 0, rms = 0, smin = 0, smax = 0;
  std::size_t points = 0;
};

inline nlohmann::json to_json(const DecayFit& f) {
  return {{"type", "decay_fit"}, {"series", f.id},       {"p", f.p},       {"log_amplitude", f.log_amplitude},
          {"rms", f.rms},        {"points", f.points},   {"smin", f.smin}, {"smax", f.smax}};
}

// Least squares of log(value) against log(s).
inline DecayFit fit_decay(const std::vector<std::pair<double, double>>& series, const std::string& id = "") {
  if (series.size() < 8)
    throw Error(ErrorKind::usage, "fit needs at least 8 points, got " + std::to_string(series.size()));
  const double n = static_cast<double>(series.size());
  double mx = 0, my = 0;
  for (const auto& [s, v] : series) {
    if (!(s > 0) || !(v > 0)) throw Error(ErrorKind::non_positive, "fit needs positive s and values");
    mx += std::log(s);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& [s, v] : series) {
    double dx = std::log(s) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  if (!(sxx > 0)) throw Error(ErrorKind::usage, "fit needs distinct s values");
  DecayFit f;
  f.id = id;
  f.p = sxy / sxx;
  f.log_amplitude = my - f.p * mx;
  double ss = 0;
  f.smin = series.front().first;
  f.smax = series.front().first;
  for (const auto& [s, v] : series) {
    double e = std::log(v) - (f.log_amplitude + f.p * std::log(s));
    ss += e * e;
    f.smin = std::min(f.smin, s);
    f.smax = std::max(f.smax, s);
  }
  f.rms = std::sqrt(ss / n);
  f.points = series.size();
  return f;
}

enum class EstimateKind { energy_est1, est_weight1, est_weight2, frac_conf_wave1, frac_conf_wave2 };

inline EstimateKind parse_estimate(const std::string& s) {
  if (s == "energy_est1") return EstimateKind::energy_est1;
  if (s == "est_weight1") return EstimateKind::est_weight1;
  if (s == "est_weight2") return EstimateKind::est_weight2;
  if (s == "frac_conf_wave1") return EstimateKind::frac_conf_wave1;
  if (s == "frac_conf_wave2") return EstimateKind::frac_conf_wave2;
  throw Error(ErrorKind::unknown_kind, "estimate '" + s + "'");
}

struct EstimateRatio {
  double ratio = 0;
  bool degenerate = false;
};

// sup over s in [smin, smax] of LHS(s) / (LHS(s_first) + NWa_cum(s) - NWa_cum(s_first)),
// read from the base-field rows of one grid id and exponent a. frac_conf_wave2
// compares the s^a tau_+^(1/2) sup with the |J| <= 2 boost energies instead.
inline EstimateRatio verify_estimate(const std::vector<EnergyRow>& rows, const std::vector<PointwiseRow>& pointwise,
                                     EstimateKind kind, double a, const std::string& grid_id, double smin,
                                     double smax) {
  auto lhs_of = [&](const EnergyRow& r) {
    switch (kind) {
      case EstimateKind::energy_est1: return r.n.EW;
      case EstimateKind::est_weight1: return r.n.E1a;
      case EstimateKind::est_weight2: return r.n.E2a;
      default: return r.n.EWa;
    }
  };
  EstimateRatio out;
  if (kind != EstimateKind::frac_conf_wave2) {
    const EnergyRow* first = nullptr;
    double sup = 0;
    bool any = false;
    for (const auto& r : rows) {
      if (r.grid_id != grid_id || r.a != a || r.I != "0000" || r.J != "000" || r.s < smin || r.s > smax) continue;
      if (!first) first = &r;
      double rhs = lhs_of(*first) + r.NWa_cum - first->NWa_cum;
      if (!(rhs > 0)) continue;
      sup = std::max(sup, lhs_of(r) / rhs);
      any = true;
    }
    if (!first) throw Error(ErrorKind::usage, "no rows for " + grid_id);
    out.degenerate = !any;
    out.ratio = any ? sup : 0.0;
    return out;
  }
  std::map<double, double> boost_sum;  // s -> sum over |J| <= 2 of EWa
  std::map<double, double> nw;
  for (const auto& r : rows) {
    if (r.grid_id != grid_id || r.a != a || r.I != "0000" || r.s < smin || r.s > smax) continue;
    boost_sum[r.s] += r.n.EWa;
    if (r.J == "000") nw[r.s] = r.NWa_cum;
  }
  if (boost_sum.empty()) throw Error(ErrorKind::usage, "no rows for " + grid_id);
  const double s_first = boost_sum.begin()->first;
  const double base = boost_sum.begin()->second;
  const std::string field = grid_id.substr(grid_id.rfind('/') + 1);
  double sup = 0;
  bool any = false;
  for (const auto& p : pointwise) {
    if (p.field != field || p.a != a || !boost_sum.count(p.s)) continue;
    double rhs = base + nw[p.s] - nw[s_first];
    if (!(rhs > 0)) continue;
    sup = std::max(sup, p.sup_s_a_tau_half / rhs);
    any = true;
  }
  out.degenerate = !any;
  out.ratio = any ? sup : 0.0;
  return out;
}

}  // namespace wkg
