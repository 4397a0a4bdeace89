#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "wkg/sampler.hpp"

namespace wkg {

// One quadrature point of a (commuted) field: values and first partials.
struct PointField {
  double t = 0, r = 0, w = 0, w_over_r2 = 0;
  std::array<double, 3> x{};
  double phi = 0, phit = 0, F = 0;
  std::array<double, 3> grad{};
};

namespace detail {

inline const std::array<double, 5>& gl5_nodes() {
  static const std::array<double, 5> v{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                       0.9061798459386640};
  return v;
}
inline const std::array<double, 5>& gl5_weights() {
  static const std::array<double, 5> v{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                       0.4786286704993665, 0.2369268850561891};
  return v;
}
inline constexpr int azimuths = 10;

struct OpSet {
  DiffOp d, dt, dx[3];
  explicit OpSet(const MultiIndex& I, const BoostIndex& J) {
    d = commutator_op(I, J);
    dt = d.partial(0);
    for (int i = 0; i < 3; ++i) dx[i] = d.partial(i + 1);
  }
};

}  // namespace detail

// Points of d^I L^J (field f) over H_s. Non-radial operators in radial mode use
// 5 Gauss-Legendre nodes in cos(theta) times 10 azimuths.
inline std::vector<PointField> expand_field(const HyperboloidSample& q, std::size_t f, const MultiIndex& I,
                                            const BoostIndex& J, bool angular = false) {
  detail::OpSet ops(I, J);
  const bool radial = q.mode == GridMode::radial;
  const int max_order = radial ? 3 : 2;
  if (ops.dt.order() > max_order) throw Error(ErrorKind::stencil_out_of_band, "commuted order too high for grid mode");
  const bool spread = radial && (angular || !preserves_radial(I, J));
  const std::size_t ndir = spread ? 5 * detail::azimuths : 1;
  std::vector<PointField> out(q.size() * ndir);
  parallel_for(q.size(), [&](std::size_t k) {
    for (std::size_t d = 0; d < ndir; ++d) {
      PointField p;
      p.t = q.t[k];
      p.r = q.r[k];
      double share = 1.0;
      if (spread) {
        int a = static_cast<int>(d) / detail::azimuths, b = static_cast<int>(d) % detail::azimuths;
        double ct = detail::gl5_nodes()[a], st = std::sqrt(1 - ct * ct);
        double ph = 2 * pi * b / detail::azimuths;
        p.x = {q.r[k] * st * std::cos(ph), q.r[k] * st * std::sin(ph), q.r[k] * ct};
        share = detail::gl5_weights()[a] / 2 / detail::azimuths;
      } else {
        p.x = q.x[k];
      }
      p.w = q.w[k] * share;
      p.w_over_r2 = q.w_over_r2[k] * share;
      CartesianJet j, js;
      if (radial) {
        j = radial_to_cartesian(q.rjet[f][k], p.x, 3);
        js = radial_to_cartesian(q.rsrc[f][k], p.x, 2);
      } else {
        j = q.cjet[f][k];
        js = q.csrc[f][k];
      }
      p.phi = ops.d.apply(j, p.t, p.x);
      p.phit = ops.dt.apply(j, p.t, p.x);
      for (int i = 0; i < 3; ++i) p.grad[i] = ops.dx[i].apply(j, p.t, p.x);
      p.F = ops.d.order() <= 2 ? ops.d.apply(js, p.t, p.x) : 0.0;
      out[k * ndir + d] = p;
    }
  });
  return out;
}

struct NormSet {
  double EW = 0, EKG = 0, EWa = 0, E1a = 0, E2a = 0, NWa_increment = 0, SuTau = 0;
};

enum class NormKind { EW, EKG, EWa, E1a, E2a, NWa_increment, SuTau };

inline NormKind parse_norm(const std::string& s) {
  if (s == "EW") return NormKind::EW;
  if (s == "EKG") return NormKind::EKG;
  if (s == "EWa") return NormKind::EWa;
  if (s == "E1a") return NormKind::E1a;
  if (s == "E2a") return NormKind::E2a;
  if (s == "NWa_increment") return NormKind::NWa_increment;
  if (s == "SuTau") return NormKind::SuTau;
  throw Error(ErrorKind::unknown_kind, "norm '" + s + "'");
}

// All norms as sqrt of a pairwise sum of squared pieces; c is the mass in E_KG.
inline NormSet compute_norms(const std::vector<PointField>& pts, double s, double a, double c) {
  const std::size_t n = pts.size();
  std::vector<double> ew(n), ekg(n), ewa(n), e1(n), e2(n), nw(n), su(n);
  const double sa = power(s, a), sa1 = power(s, a - 1);
  const double ea = std::max(a, 0.5);
  parallel_for(n, [&](std::size_t k) {
    const auto& p = pts[k];
    double st = s / p.t;
    double tp = bracket(p.t + p.r), tm = bracket(p.t - p.r);
    double ubar = p.t + p.r;
    double db2 = 0;
    for (int i = 0; i < 3; ++i) {
      double d = p.grad[i] + p.x[i] / p.t * p.phit;
      db2 += d * d;
    }
    double dr = 0;
    if (p.r > 0)
      for (int i = 0; i < 3; ++i) dr += p.x[i] / p.r * p.grad[i];
    double ang2 = std::max(0.0, p.grad[0] * p.grad[0] + p.grad[1] * p.grad[1] + p.grad[2] * p.grad[2] - dr * dr);
    double dBr = p.phit + dr;
    double kin = st * p.phit;
    double base = kin * kin + db2;
    ew[k] = base * p.w;
    ekg[k] = (base + c * c * p.phi * p.phi) * p.w;
    double wa = 1 + a * power(tp, a) * power(tm / tp, ea);
    double wk = wa * kin, sp = sa / p.t * p.phi;
    ewa[k] = (wk * wk + sa * sa * db2 + a * a * sp * sp) * p.w;
    double tpa2 = power(tp, 2 * a);
    double conj = p.phi + p.r * dBr;  // r times d^B_r(r phi)/r
    e1[k] = (wa * wa * (kin * kin + ang2) + tpa2 * st * st * ang2) * p.w + tpa2 * conj * conj * p.w_over_r2;
    double b1 = 1 + sa1 * tm, b2 = sa1 * tp;
    double Bu = st * (p.phit + 2 * p.t * p.phi / (s * s));
    double Br = dBr + 2 * p.phi / ubar;
    e2[k] = (b1 * b1 * (Bu * Bu + ang2) + b2 * b2 * (Br * Br + st * st * ang2)) * p.w;
    double g = power(tp, a) * st * p.F;
    nw[k] = g * g * p.w;
    double sv = sa / tp * p.phi;
    su[k] = sv * sv * p.w;
  });
  NormSet out;
  out.EW = std::sqrt(pairwise_sum(ew));
  out.EKG = std::sqrt(pairwise_sum(ekg));
  out.EWa = std::sqrt(pairwise_sum(ewa));
  out.E1a = std::sqrt(pairwise_sum(e1));
  out.E2a = std::sqrt(pairwise_sum(e2));
  out.NWa_increment = std::sqrt(pairwise_sum(nw));
  out.SuTau = std::sqrt(pairwise_sum(su));
  return out;
}

inline double evaluate_norm(NormKind kind, double a, const HyperboloidSample& q, std::size_t f, double c = 1.0,
                            const MultiIndex& I = {0, 0, 0, 0}, const BoostIndex& J = {0, 0, 0}) {
  if (!q.complete()) throw Error(ErrorKind::band_coverage, "hyperboloid sample incomplete");
  auto n = compute_norms(expand_field(q, f, I, J), q.s, a, c);
  switch (kind) {
    case NormKind::EW: return n.EW;
    case NormKind::EKG: return n.EKG;
    case NormKind::EWa: return n.EWa;
    case NormKind::E1a: return n.E1a;
    case NormKind::E2a: return n.E2a;
    case NormKind::NWa_increment: return n.NWa_increment;
    case NormKind::SuTau: return n.SuTau;
  }
  return 0;
}

enum class WeightKind { tau_half, tau_threehalf, s_a_tau_half };

inline WeightKind parse_weight(const std::string& s) {
  if (s == "tau_half") return WeightKind::tau_half;
  if (s == "tau_threehalf") return WeightKind::tau_threehalf;
  if (s == "s_a_tau_half") return WeightKind::s_a_tau_half;
  throw Error(ErrorKind::unknown_kind, "weight '" + s + "'");
}

// sup over the nodes of H_s of the weighted |field|.
inline double pointwise_sup(const HyperboloidSample& q, std::size_t f, WeightKind kind, double a = 0.5) {
  double sup = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    double v = q.mode == GridMode::radial ? q.rjet[f][k](0, 0) : q.cjet[f][k].v[0];
    double tp = bracket(q.t[k] + q.r[k]);
    double w = kind == WeightKind::tau_half ? std::sqrt(tp)
               : kind == WeightKind::tau_threehalf ? tp * std::sqrt(tp)
                                                     : power(q.s, a) * std::sqrt(tp);
    sup = std::max(sup, w * std::abs(v));
  }
  return sup;
}

struct InequalityRatio {
  double lhs = 0, rhs = 0, ratio = 0;
  bool degenerate = false;
};

// ||phi / r|| against sum_i ||dbar_i phi||
inline InequalityRatio check_hardy(const HyperboloidSample& q, std::size_t f) {
  auto pts = expand_field(q, f, {0, 0, 0, 0}, {0, 0, 0}, true);
  std::vector<double> lhs(pts.size());
  std::array<std::vector<double>, 3> comp;
  for (auto& c : comp) c.resize(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    lhs[k] = p.phi * p.phi * p.w_over_r2;
    for (int i = 0; i < 3; ++i) {
      double d = p.grad[i] + p.x[i] / p.t * p.phit;
      comp[i][k] = d * d * p.w;
    }
  }
  InequalityRatio out;
  out.lhs = std::sqrt(pairwise_sum(lhs));
  for (auto& c : comp) out.rhs += std::sqrt(pairwise_sum(c));
  out.degenerate = !(out.rhs > 0);
  out.ratio = out.degenerate ? 0.0 : out.lhs / out.rhs;
  return out;
}

// ||s^a tau_+^(1/2) phi||_inf against sum_{|J| <= 2} ||(s^a / t) L^J phi||
inline InequalityRatio check_sobolev(const HyperboloidSample& q, std::size_t f, double a) {
  InequalityRatio out;
  out.lhs = pointwise_sup(q, f, WeightKind::s_a_tau_half, a);
  const double sa = power(q.s, a);
  for (const auto& [I, J] : commutator_indices(2)) {
    if (order_of(I) != 0) continue;
    auto pts = expand_field(q, f, I, J, true);
    std::vector<double> v(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      double g = sa / pts[k].t * pts[k].phi;
      v[k] = g * g * pts[k].w;
    }
    out.rhs += std::sqrt(pairwise_sum(v));
  }
  out.degenerate = !(out.rhs > 0);
  out.ratio = out.degenerate ? 0.0 : out.lhs / out.rhs;
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

struct EnergyRow {
  double s = 0;
  NormSet n;
  double NWa_cum = 0;
  double a = 0;
  std::string I, J, grid_id;
};

inline const char* energies_header = "s,EW,EKG,EWa,E1a,E2a,NWa_cum,a,I,J,grid_id";

inline void write_energies_csv(std::ostream& o, const std::vector<EnergyRow>& rows, std::uint64_t config_hash) {
  o << "# wkgs " << artifact_version << " config_hash=" << std::hex << config_hash << std::dec << "\n";
  o << energies_header << "\n";
  for (const auto& r : rows) {
    o << format_double(r.s) << ',' << format_double(r.n.EW) << ',' << format_double(r.n.EKG) << ','
      << format_double(r.n.EWa) << ',' << format_double(r.n.E1a) << ',' << format_double(r.n.E2a) << ','
      << format_double(r.NWa_cum) << ',' << format_double(r.a) << ',' << r.I << ',' << r.J << ',' << r.grid_id
      << "\n";
  }
}

// Per-(s, field, a) pointwise diagnostics used by the decay fits.
struct PointwiseRow {
  double s = 0;
  std::string field;
  double a = 0;
  double axis_abs = 0, sup_tau_half = 0, sup_tau_threehalf = 0, sup_s_a_tau_half = 0, SuTau = 0;
};

// Collects norms for every completed hyperboloid.
class EnergyRecorder {
 public:
  EnergyRecorder(std::vector<std::string> fields, std::vector<double> a_list, int k_max, std::vector<double> masses,
                 std::string grid_tag)
      : fields_(std::move(fields)), a_list_(std::move(a_list)), masses_(std::move(masses)), tag_(std::move(grid_tag)) {
    for (const auto& ij : commutator_indices(k_max)) indices_.push_back(ij);
  }

  void record(const HyperboloidSample& q) {
    for (std::size_t f = 0; f < fields_.size(); ++f) {
      for (std::size_t ij = 0; ij < indices_.size(); ++ij) {
        const auto& [I, J] = indices_[ij];
        auto pts = expand_field(q, f, I, J);
        for (std::size_t ai = 0; ai < a_list_.size(); ++ai) {
          Entry e;
          e.s = q.s;
          e.f = f;
          e.ij = ij;
          e.ai = ai;
          e.n = compute_norms(pts, q.s, a_list_[ai], masses_[f]);
          entries_.push_back(e);
        }
      }
      for (double a : a_list_) {
        PointwiseRow p;
        p.s = q.s;
        p.field = fields_[f];
        p.a = a;
        p.axis_abs = std::abs(q.mode == GridMode::radial ? q.rjet[f][0](0, 0) : q.cjet[f][0].v[0]);
        p.sup_tau_half = pointwise_sup(q, f, WeightKind::tau_half);
        p.sup_tau_threehalf = pointwise_sup(q, f, WeightKind::tau_threehalf);
        p.sup_s_a_tau_half = pointwise_sup(q, f, WeightKind::s_a_tau_half, a);
        p.SuTau = evaluate_norm(NormKind::SuTau, a, q, f, masses_[f]);
        pointwise_.push_back(p);
      }
    }
  }

  // Rows ordered by (s, field, (I,J), a) with the trapezoid N_W^a accumulated in s.
  std::vector<EnergyRow> rows() const {
    auto sorted = entries_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& x, const Entry& y) {
      if (x.s != y.s) return x.s < y.s;
      if (x.f != y.f) return x.f < y.f;
      if (x.ij != y.ij) return x.ij < y.ij;
      return x.ai < y.ai;
    });
    std::map<std::array<std::size_t, 3>, std::pair<double, double>> last;  // (s, increment)
    std::map<std::array<std::size_t, 3>, double> cum;
    std::vector<EnergyRow> out;
    for (const auto& e : sorted) {
      std::array<std::size_t, 3> key{e.f, e.ij, e.ai};
      auto it = last.find(key);
      if (it != last.end()) cum[key] += 0.5 * (e.s - it->second.first) * (e.n.NWa_increment + it->second.second);
      last[key] = {e.s, e.n.NWa_increment};
      EnergyRow r;
      r.s = e.s;
      r.n = e.n;
      r.NWa_cum = cum[key];
      r.a = a_list_[e.ai];
      r.I = index_string(indices_[e.ij].first);
      r.J = index_string(indices_[e.ij].second);
      r.grid_id = tag_ + "/" + fields_[e.f];
      out.push_back(r);
    }
    return out;
  }

  std::vector<PointwiseRow> pointwise() const {
    auto p = pointwise_;
    std::stable_sort(p.begin(), p.end(), [](const PointwiseRow& x, const PointwiseRow& y) { return x.s < y.s; });
    return p;
  }

 private:
  struct Entry {
    double s;
    std::size_t f, ij, ai;
    NormSet n;
  };
  std::vector<std::string> fields_;
  std::vector<double> a_list_;
  std::vector<double> masses_;
  std::string tag_;
  std::vector<std::pair<MultiIndex, BoostIndex>> indices_;
  std::vector<Entry> entries_;
  std::vector<PointwiseRow> pointwise_;
};

}  // namespace wkg
