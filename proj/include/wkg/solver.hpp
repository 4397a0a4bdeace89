#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "wkg/jets.hpp"
#include "wkg/manufactured.hpp"
#include "wkg/parallel.hpp"

namespace wkg {

enum class GridMode { radial, cartesian3d };

inline const char* to_string(GridMode m) { return m == GridMode::radial ? "radial" : "cartesian3d"; }

inline GridMode parse_grid_mode(const std::string& s) {
  if (s == "radial") return GridMode::radial;
  if (s == "cartesian3d") return GridMode::cartesian3d;
  throw Error(ErrorKind::unknown_kind, "grid mode '" + s + "'");
}

struct GridSpec {
  GridMode mode = GridMode::radial;
  double extent = 40.0;  // r_max, or box half-width
  int n_cells = 1024;
  double cfl = 0.5;
  double t0 = 3.0;
  double t_end = 10.0;
  int band_depth = 6;

  double h() const { return mode == GridMode::radial ? extent / n_cells : 2 * extent / n_cells; }
  // uniform step that lands on t_end, never above cfl * h
  long steps() const { return static_cast<long>(std::ceil((t_end - t0) / (cfl * h()) - 1e-9)); }
  double dt() const { return (t_end - t0) / static_cast<double>(steps()); }
  double time_at(long k) const { return t0 + static_cast<double>(k) * dt(); }
  std::size_t points() const {
    std::size_t n = static_cast<std::size_t>(n_cells);
    return mode == GridMode::radial ? n + 1 : n * n * n;
  }

  void validate() const {
    if (!(extent > 0) || n_cells < 8) throw Error(ErrorKind::usage, "grid needs extent > 0 and n_cells >= 8");
    double lim = mode == GridMode::radial ? 0.9 : 0.45;
    if (!(cfl > 0) || cfl > lim) {
      std::ostringstream o;
      o << "cfl " << cfl << " outside (0, " << lim << "] for " << to_string(mode);
      throw Error(ErrorKind::cfl, o.str());
    }
    if (!(t_end > t0)) throw Error(ErrorKind::usage, "t_end must exceed t0");
    if (band_depth < 6) throw Error(ErrorKind::usage, "band_depth must be at least 6");
  }
};

struct ModelParams {
  double P00 = 0, Piso = 0, R_coupling = 0, H00 = 0, Hiso = 0;
  double c_mass = 1.0;
  double eps_amp = 1e-3;
  bool full_tensors = false;  // use P, H below (cartesian3d only)
  std::array<double, 16> P{}, H{};

  std::array<double, 16> tensor_P() const { return tensor(P, P00, Piso); }
  std::array<double, 16> tensor_H() const { return tensor(H, H00, Hiso); }

 private:
  std::array<double, 16> tensor(const std::array<double, 16>& M, double d0, double di) const {
    std::array<double, 16> out{};
    if (full_tensors) {
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) out[a * 4 + b] = 0.5 * (M[a * 4 + b] + M[b * 4 + a]);
    } else {
      out[0] = d0;
      out[5] = out[10] = out[15] = di;
    }
    return out;
  }
};

enum class ModelKind { linear_wave, klein_gordon, coupled };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::linear_wave: return "linear_wave";
    case ModelKind::klein_gordon: return "klein_gordon";
    case ModelKind::coupled: return "coupled";
  }
  return "?";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "linear_wave") return ModelKind::linear_wave;
  if (s == "klein_gordon") return ModelKind::klein_gordon;
  if (s == "coupled") return ModelKind::coupled;
  throw Error(ErrorKind::unknown_kind, "model '" + s + "'");
}

// profile: zero | bump | manufactured
struct DataSpec {
  std::string profile = "zero";
  double radius = 1.5;
  double amp = 1.0;
  double amp_dt = 0.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::linear_wave;
  ModelParams params;
  bool manufactured_source = false;
  ManufacturedCase mcase;
  DataSpec data;    // phi, or u in the coupled model
  DataSpec data_v;  // v in the coupled model

  std::vector<std::string> field_names() const {
    if (kind == ModelKind::coupled) return {"u", "v"};
    return {"phi"};
  }
  double mass(std::size_t f) const {
    if (kind == ModelKind::klein_gordon) return params.c_mass;
    if (kind == ModelKind::coupled && f == 1) return params.c_mass;
    return 0.0;
  }
};

struct BandSlice {
  double t = 0;
  // per field: value, first time derivative, and the source F with box(f) - m^2 f = F
  std::vector<std::vector<double>> val, vel, src;
};

class FieldBand {
 public:
  GridSpec grid;
  ModelParams params;
  std::vector<std::string> fields;
  std::uint64_t config_hash = 0;
  std::deque<BandSlice> slices;

  std::size_t size() const { return slices.size(); }
  double dt() const { return grid.dt(); }

  std::size_t field_index(const std::string& name) const {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i] == name) return i;
    throw Error(ErrorKind::unknown_kind, "field '" + name + "'");
  }

  void push(BandSlice s) {
    slices.push_back(std::move(s));
    while (slices.size() > static_cast<std::size_t>(grid.band_depth)) slices.pop_front();
  }

  // d_t^m of field f (or of its source) at grid point g on slice k.
  double stack(std::size_t k, std::size_t f, bool src, int m, std::size_t g) const {
    if (m == 0) return src ? slices[k].src[f][g] : slices[k].val[f][g];
    if (k == 0 || k + 1 >= slices.size()) throw Error(ErrorKind::stencil_out_of_band, "time stencil");
    const double dt = this->dt();
    const auto& a = src ? slices[k - 1].src[f] : slices[k - 1].vel[f];
    const auto& b = src ? slices[k].src[f] : slices[k].vel[f];
    const auto& c = src ? slices[k + 1].src[f] : slices[k + 1].vel[f];
    if (!src) {
      if (m == 1) return b[g];
      if (m == 2) return (c[g] - a[g]) / (2 * dt);
      return (c[g] - 2 * b[g] + a[g]) / (dt * dt);
    }
    if (m == 1) return (c[g] - a[g]) / (2 * dt);
    if (m == 2) return (c[g] - 2 * b[g] + a[g]) / (dt * dt);
    return 0.0;
  }

  // Four slices k0..k0+3 and cubic Lagrange weights for time t.
  bool interp_window(double t, std::size_t& k0, std::array<double, 4>& w) const {
    if (slices.size() < 6) return false;
    const double dt = this->dt();
    double x = (t - slices.front().t) / dt;
    long k = static_cast<long>(std::floor(x)) - 1;
    long kmax = static_cast<long>(slices.size()) - 5;
    k = std::clamp(k, 1L, kmax);
    double lo = slices[k].t, hi = slices[k + 3].t;
    const double slack = 1e-9 * dt;
    if (t < lo - slack || t > hi + slack) return false;
    k0 = static_cast<std::size_t>(k);
    double xi = (t - slices[k0].t) / dt;
    for (int j = 0; j < 4; ++j) {
      double v = 1;
      for (int l = 0; l < 4; ++l)
        if (l != j) v *= (xi - l) / (j - l);
      w[j] = v;
    }
    return true;
  }

  bool covers(double t) const {
    std::size_t k0;
    std::array<double, 4> w;
    return interp_window(t, k0, w);
  }

  // Radial mode: dt^m dr^n at grid node i.
  RadialJet radial_jet(std::size_t f, bool src, std::size_t i, double t) const {
    std::size_t k0;
    std::array<double, 4> w;
    if (!interp_window(t, k0, w)) throw Error(ErrorKind::stencil_out_of_band, "time " + std::to_string(t));
    const double h = grid.h();
    const long n = grid.n_cells;
    RadialJet J;
    const int mmax = src ? 2 : 3;
    for (int j = 0; j < 4; ++j) {
      std::size_t k = k0 + j;
      for (int m = 0; m <= mmax; ++m) {
        auto get = [&](long idx) {
          if (idx < 0) idx = -idx;
          if (idx > n) return 0.0;
          return stack(k, f, src, m, static_cast<std::size_t>(idx));
        };
        long ii = static_cast<long>(i);
        double f0 = get(ii), p1 = get(ii + 1), m1 = get(ii - 1);
        double d[4] = {f0, (p1 - m1) / (2 * h), (p1 - 2 * f0 + m1) / (h * h), 0.0};
        if (m == 0) d[3] = (get(ii + 2) - 2 * p1 + 2 * m1 - get(ii - 2)) / (2 * h * h * h);
        for (int nn = 0; m + nn <= 3; ++nn) J.d[m][nn] += w[j] * d[nn];
      }
    }
    return J;
  }

  // Radial mode, any r: cubic interpolation of node jets.
  RadialJet radial_jet_at(std::size_t f, bool src, double r, double t) const {
    const double h = grid.h();
    r = std::abs(r);
    double x = r / h;
    long i0 = static_cast<long>(std::floor(x)) - 1;
    if (i0 + 3 > grid.n_cells) throw Error(ErrorKind::stencil_out_of_band, "radius beyond grid");
    double xi = x - i0;
    RadialJet J;
    for (int j = 0; j < 4; ++j) {
      double wj = 1;
      for (int l = 0; l < 4; ++l)
        if (l != j) wj *= (xi - l) / (j - l);
      long idx = std::abs(i0 + j);
      auto Jn = radial_jet(f, src, static_cast<std::size_t>(idx), t);
      for (int m = 0; m <= 3; ++m)
        for (int n = 0; m + n <= 3; ++n) {
          // odd r-derivatives flip sign under reflection
          double sgn = (i0 + j < 0 && n % 2) ? -1.0 : 1.0;
          J.d[m][n] += wj * sgn * Jn.d[m][n];
        }
    }
    return J;
  }

  std::array<double, 3> cell_center(std::size_t g) const {
    const std::size_t n = static_cast<std::size_t>(grid.n_cells);
    const double h = grid.h();
    std::size_t iz = g % n, iy = (g / n) % n, ix = g / (n * n);
    return {-grid.extent + (ix + 0.5) * h, -grid.extent + (iy + 0.5) * h, -grid.extent + (iz + 0.5) * h};
  }

  // Cartesian mode: partials of order <= 2 at cell g.
  CartesianJet cartesian_jet(std::size_t f, bool src, std::size_t g, double t) const {
    std::size_t k0;
    std::array<double, 4> w;
    if (!interp_window(t, k0, w)) throw Error(ErrorKind::stencil_out_of_band, "time " + std::to_string(t));
    const long n = grid.n_cells;
    const double h = grid.h();
    long ix = static_cast<long>(g) / (n * n), iy = (static_cast<long>(g) / n) % n, iz = static_cast<long>(g) % n;
    CartesianJet J;
    J.order = 2;
    for (int j = 0; j < 4; ++j) {
      std::size_t k = k0 + j;
      for (int m = 0; m <= 2; ++m) {
        auto get = [&](long dx, long dy, long dz) {
          long a = ix + dx, b = iy + dy, c = iz + dz;
          if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n) return 0.0;
          return stack(k, f, src, m, static_cast<std::size_t>((a * n + b) * n + c));
        };
        double f0 = get(0, 0, 0);
        J.at({m, 0, 0, 0}) += w[j] * f0;
        if (m == 2) continue;
        for (int i = 0; i < 3; ++i) {
          long e[3] = {0, 0, 0};
          e[i] = 1;
          double p = get(e[0], e[1], e[2]), q = get(-e[0], -e[1], -e[2]);
          MultiIndex a{m, 0, 0, 0};
          a[i + 1] = 1;
          J.at(a) += w[j] * (p - q) / (2 * h);
          if (m == 0) {
            a[i + 1] = 2;
            J.at(a) += w[j] * (p - 2 * f0 + q) / (h * h);
          }
        }
        if (m == 0)
          for (int i = 0; i < 3; ++i)
            for (int l = i + 1; l < 3; ++l) {
              long e[3] = {0, 0, 0}, d[3] = {0, 0, 0};
              e[i] = 1;
              d[l] = 1;
              double v = get(e[0] + d[0], e[1] + d[1], e[2] + d[2]) - get(e[0] - d[0], e[1] - d[1], e[2] - d[2]) -
                         get(-e[0] + d[0], -e[1] + d[1], -e[2] + d[2]) + get(-e[0] - d[0], -e[1] - d[1], -e[2] - d[2]);
              MultiIndex a{0, 0, 0, 0};
              a[i + 1] = 1;
              a[l + 1] = 1;
              J.at(a) += w[j] * v / (4 * h * h);
            }
      }
    }
    return J;
  }

  // Cartesian jet at (t, x); 3d mode snaps x to the nearest cell center.
  CartesianJet jet_at(std::size_t f, bool src, double t, const std::array<double, 3>& x) const {
    if (grid.mode == GridMode::radial) {
      double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      return radial_to_cartesian(radial_jet_at(f, src, r, t), x, src ? 2 : 3);
    }
    const long n = grid.n_cells;
    const double h = grid.h();
    long idx[3];
    for (int i = 0; i < 3; ++i) {
      idx[i] = static_cast<long>(std::floor((x[i] + grid.extent) / h));
      if (idx[i] < 0 || idx[i] >= n) throw Error(ErrorKind::stencil_out_of_band, "point outside box");
    }
    return cartesian_jet(f, src, static_cast<std::size_t>((idx[0] * n + idx[1]) * n + idx[2]), t);
  }
};

// d^I L^J f at (t, x), evaluated from the band.
inline double commuted_field(const FieldBand& band, std::size_t f, const MultiIndex& I, const BoostIndex& J, double t,
                             const std::array<double, 3>& x) {
  DiffOp op = commutator_op(I, J);
  int max_order = band.grid.mode == GridMode::radial ? 3 : 2;
  if (op.order() > max_order) throw Error(ErrorKind::stencil_out_of_band, "commuted order too high for grid mode");
  return op.apply(band.jet_at(f, false, t, x), t, x);
}

namespace detail {

inline double profile_value(const DataSpec& d, const ManufacturedCase& mc, double t0, double r, bool dt) {
  if (d.profile == "zero") return 0.0;
  if (d.profile == "bump") return (dt ? d.amp_dt : d.amp) * round_bump<0>(r, d.radius).c[0];
  if (d.profile == "manufactured") return mc.jet(t0, r)(dt ? 1 : 0, 0);
  throw Error(ErrorKind::unknown_kind, "data profile '" + d.profile + "'");
}

inline double profile_support(const DataSpec& d, const ManufacturedCase& mc, double t) {
  if (d.profile == "zero") return 0.0;
  if (d.profile == "bump") return d.radius;
  if (d.profile == "manufactured") return mc.support_radius(t);
  throw Error(ErrorKind::unknown_kind, "data profile '" + d.profile + "'");
}

}  // namespace detail

class Evolver {
 public:
  virtual ~Evolver() = default;

  FieldBand& band() { return band_; }
  const FieldBand& band() const { return band_; }
  const ModelSpec& model() const { return model_; }
  long step_index() const { return step_; }
  long total_steps() const { return band_.grid.steps(); }
  double time() const { return band_.grid.time_at(step_); }
  bool done() const { return step_ >= total_steps(); }

  void step() {
    advance(time(), band_.dt());
    ++step_;
    auto s = make_slice(time());
    for (std::size_t f = 0; f < s.val.size(); ++f)
      for (std::size_t g = 0; g < s.val[f].size(); ++g)
        if (!std::isfinite(s.val[f][g]) || !std::isfinite(s.vel[f][g])) {
          std::ostringstream o;
          o << "non-finite " << band_.fields[f] << " at t=" << time() << " point " << g;
          throw Error(ErrorKind::numerical_abort, o.str());
        }
    band_.push(std::move(s));
  }

  // Calls on_slice after the initial slice and after every step.
  void run(const std::function<void(const FieldBand&)>& on_slice) {
    if (on_slice) on_slice(band_);
    while (!done()) {
      step();
      if (on_slice) on_slice(band_);
    }
  }

  static std::unique_ptr<Evolver> create(const ModelSpec& model, const GridSpec& grid);

 protected:
  Evolver(const ModelSpec& model, const GridSpec& grid) : model_(model) {
    grid.validate();
    band_.grid = grid;
    band_.params = model.params;
    band_.fields = model.field_names();
    model_.mcase.c_mass = model.params.c_mass;
    check_support();
  }

  void init() { band_.push(make_slice(time())); }

  virtual void advance(double t, double dt) = 0;
  virtual BandSlice make_slice(double t) const = 0;

  double data_scale() const { return model_.kind == ModelKind::coupled ? model_.params.eps_amp : 1.0; }
  const DataSpec& data(std::size_t f) const { return f == 0 ? model_.data : model_.data_v; }

  double source_at(std::size_t f, double t, double r) const {
    if (!model_.manufactured_source || model_.kind == ModelKind::coupled || f != 0) return 0.0;
    return model_.mcase.source(t, r);
  }

  ModelSpec model_;
  FieldBand band_;
  long step_ = 0;

 private:
  void check_support() const {
    const auto& g = band_.grid;
    double reach = 0;
    for (std::size_t f = 0; f < band_.fields.size(); ++f) {
      const auto& d = data(f);
      double r0 = detail::profile_support(d, model_.mcase, g.t0);
      if (r0 >= g.t0 - 1.0) {
        std::ostringstream o;
        o << "initial support radius " << r0 << " not inside r < t0 - 1 = " << g.t0 - 1;
        throw Error(ErrorKind::support_escape, o.str());
      }
      double r1 = d.profile == "manufactured" ? model_.mcase.support_radius(g.t_end) : r0 + (g.t_end - g.t0);
      if (d.profile != "zero") reach = std::max(reach, r1);
    }
    if (model_.manufactured_source) reach = std::max(reach, model_.mcase.support_radius(g.t_end));
    double edge = g.extent - 4 * g.h();
    if (reach > edge) {
      std::ostringstream o;
      o << "support reaches r=" << reach << " by t_end but the grid edge is " << g.extent;
      throw Error(ErrorKind::support_escape, o.str());
    }
  }
};

// psi = r phi on nodes r_i = i h, kick-drift-kick leapfrog.
class RadialEvolver : public Evolver {
 public:
  RadialEvolver(const ModelSpec& model, const GridSpec& grid) : Evolver(model, grid) {
    const std::size_t N = grid.points(), nf = band_.fields.size();
    const double h = grid.h();
    psi_.assign(nf, std::vector<double>(N, 0.0));
    pi_ = psi_;
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t i = 1; i + 1 < N; ++i) {
        double r = i * h;
        psi_[f][i] = data_scale() * r * detail::profile_value(data(f), model_.mcase, grid.t0, r, false);
        pi_[f][i] = data_scale() * r * detail::profile_value(data(f), model_.mcase, grid.t0, r, true);
      }
    init();
  }

 protected:
  void advance(double t, double dt) override {
    const std::size_t nf = psi_.size();
    auto acc = accel(psi_, pi_, t);
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t i = 0; i < psi_[f].size(); ++i) {
        pi_[f][i] += 0.5 * dt * acc[f][i];
        psi_[f][i] += dt * pi_[f][i];
      }
    acc = accel(psi_, pi_, t + dt);
    if (model_.kind == ModelKind::coupled) {
      // velocity-dependent source: one predictor pass
      auto pred = pi_;
      for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t i = 0; i < pred[f].size(); ++i) pred[f][i] += 0.5 * dt * acc[f][i];
      acc = accel(psi_, pred, t + dt);
    }
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t i = 0; i < pi_[f].size(); ++i) pi_[f][i] += 0.5 * dt * acc[f][i];
  }

  BandSlice make_slice(double t) const override {
    const std::size_t nf = psi_.size(), N = band_.grid.points();
    const double h = band_.grid.h();
    BandSlice s;
    s.t = t;
    s.val.resize(nf);
    s.vel.resize(nf);
    s.src.assign(nf, std::vector<double>(N, 0.0));
    for (std::size_t f = 0; f < nf; ++f) {
      s.val[f] = unscale(psi_[f]);
      s.vel[f] = unscale(pi_[f]);
    }
    if (model_.kind != ModelKind::coupled) {
      for (std::size_t i = 0; i < N; ++i) s.src[0][i] = source_at(0, t, i * h);
      return s;
    }
    const auto& P = band_.params;
    const auto& u = s.val[0];
    const auto& v = s.val[1];
    const auto& vt = s.vel[1];
    auto vr = radial_gradient(v);
    for (std::size_t i = 0; i < N; ++i) {
      s.src[0][i] = -(P.P00 * vt[i] * vt[i] + P.Piso * vr[i] * vr[i] + P.R_coupling * v[i] * v[i]);
      double lap = laplacian(psi_[1], v, i);
      double vtt = ((1 + u[i] * P.Hiso) * lap - P.c_mass * P.c_mass * v[i]) / (1 - u[i] * P.H00);
      s.src[1][i] = -u[i] * (P.H00 * vtt + P.Hiso * lap);
    }
    return s;
  }

 private:
  // phi from psi; axis value (8 psi_1 - psi_2) / (6h)
  std::vector<double> unscale(const std::vector<double>& p) const {
    const double h = band_.grid.h();
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) out[i] = p[i] / (i * h);
    out[0] = (8 * p[1] - p[2]) / (6 * h);
    return out;
  }

  std::vector<double> radial_gradient(const std::vector<double>& v) const {
    const double h = band_.grid.h();
    std::vector<double> g(v.size(), 0.0);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) g[i] = (v[i + 1] - v[i - 1]) / (2 * h);
    return g;
  }

  double laplacian(const std::vector<double>& psi, const std::vector<double>& v, std::size_t i) const {
    const double h = band_.grid.h();
    if (i == 0) return 6 * (v[1] - v[0]) / (h * h);
    if (i + 1 >= psi.size()) return 0.0;
    return (psi[i + 1] - 2 * psi[i] + psi[i - 1]) / (h * h * (i * h));
  }

  std::vector<std::vector<double>> accel(const std::vector<std::vector<double>>& psi,
                                         const std::vector<std::vector<double>>& pi, double t) const {
    const std::size_t nf = psi.size(), N = psi[0].size();
    const double h = band_.grid.h(), h2 = h * h;
    std::vector<std::vector<double>> a(nf, std::vector<double>(N, 0.0));
    if (model_.kind != ModelKind::coupled) {
      const double m2 = model_.mass(0) * model_.mass(0);
      parallel_for(N - 2, [&](std::size_t k) {
        std::size_t i = k + 1;
        double r = i * h;
        a[0][i] = (psi[0][i + 1] - 2 * psi[0][i] + psi[0][i - 1]) / h2 - m2 * psi[0][i] - r * source_at(0, t, r);
      });
      return a;
    }
    const auto& P = band_.params;
    auto u = unscale(psi[0]);
    auto v = unscale(psi[1]);
    auto vt = unscale(pi[1]);
    auto vr = radial_gradient(v);
    const double c2 = P.c_mass * P.c_mass;
    std::vector<char> bad(N, 0);
    parallel_for(N - 2, [&](std::size_t k) {
      std::size_t i = k + 1;
      double r = i * h;
      double d2u = (psi[0][i + 1] - 2 * psi[0][i] + psi[0][i - 1]) / h2;
      double d2v = (psi[1][i + 1] - 2 * psi[1][i] + psi[1][i - 1]) / h2;
      a[0][i] = d2u + r * (P.P00 * vt[i] * vt[i] + P.Piso * vr[i] * vr[i] + P.R_coupling * v[i] * v[i]);
      double den = 1 - u[i] * P.H00;
      if (!(den > 0.1)) bad[i] = 1;
      a[1][i] = ((1 + u[i] * P.Hiso) * d2v - c2 * psi[1][i]) / den;
    });
    for (std::size_t i = 0; i < N; ++i)
      if (bad[i]) throw Error(ErrorKind::numerical_abort, "quasilinear coefficient 1 - u H00 degenerate");
    return a;
  }

  std::vector<std::vector<double>> psi_, pi_;
};

// Cell-centered box, RK4, 7-point Laplacian, zero outside the box.
class CartesianEvolver : public Evolver {
 public:
  CartesianEvolver(const ModelSpec& model, const GridSpec& grid) : Evolver(model, grid) {
    const std::size_t N = grid.points(), nf = band_.fields.size();
    P_ = model.params.tensor_P();
    H_ = model.params.tensor_H();
    phi_.assign(nf, std::vector<double>(N, 0.0));
    vel_ = phi_;
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t g = 0; g < N; ++g) {
        double r = radius(g);
        phi_[f][g] = data_scale() * detail::profile_value(data(f), model_.mcase, grid.t0, r, false);
        vel_[f][g] = data_scale() * detail::profile_value(data(f), model_.mcase, grid.t0, r, true);
      }
    init();
  }

 protected:
  using State = std::vector<std::vector<double>>;

  void advance(double t, double dt) override {
    const std::size_t nf = phi_.size(), N = phi_[0].size();
    State k1p, k1v, k2p, k2v, k3p, k3v, k4p, k4v;
    rhs(phi_, vel_, t, k1p, k1v);
    auto stage = [&](const State& kp, const State& kv, double c, State& p, State& v) {
      p = phi_;
      v = vel_;
      for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t g = 0; g < N; ++g) {
          p[f][g] += c * dt * kp[f][g];
          v[f][g] += c * dt * kv[f][g];
        }
    };
    State p, v;
    stage(k1p, k1v, 0.5, p, v);
    rhs(p, v, t + 0.5 * dt, k2p, k2v);
    stage(k2p, k2v, 0.5, p, v);
    rhs(p, v, t + 0.5 * dt, k3p, k3v);
    stage(k3p, k3v, 1.0, p, v);
    rhs(p, v, t + dt, k4p, k4v);
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t g = 0; g < N; ++g) {
        phi_[f][g] += dt / 6 * (k1p[f][g] + 2 * k2p[f][g] + 2 * k3p[f][g] + k4p[f][g]);
        vel_[f][g] += dt / 6 * (k1v[f][g] + 2 * k2v[f][g] + 2 * k3v[f][g] + k4v[f][g]);
      }
  }

  BandSlice make_slice(double t) const override {
    const std::size_t nf = phi_.size(), N = phi_[0].size();
    BandSlice s;
    s.t = t;
    s.val = phi_;
    s.vel = vel_;
    s.src.assign(nf, std::vector<double>(N, 0.0));
    if (model_.kind != ModelKind::coupled) {
      for (std::size_t g = 0; g < N; ++g) s.src[0][g] = source_at(0, t, radius(g));
      return s;
    }
    parallel_for(N, [&](std::size_t g) {
      auto q = coupled_terms(phi_, vel_, g);
      s.src[0][g] = -q.quad;
      s.src[1][g] = -q.quasi;
    });
    return s;
  }

 private:
  struct Coupled {
    double quad = 0;   // P dv dv + R v^2
    double quasi = 0;  // u H dd v, with v_tt from the equation
    double vtt = 0;
  };

  double radius(std::size_t g) const {
    auto x = band_.cell_center(g);
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  }

  double at(const std::vector<double>& a, long ix, long iy, long iz) const {
    const long n = band_.grid.n_cells;
    if (ix < 0 || iy < 0 || iz < 0 || ix >= n || iy >= n || iz >= n) return 0.0;
    return a[static_cast<std::size_t>((ix * n + iy) * n + iz)];
  }

  void grad_hess(const std::vector<double>& a, std::size_t g, double& lap, std::array<double, 3>& d1,
                 std::array<std::array<double, 3>, 3>* d2) const {
    const long n = band_.grid.n_cells;
    const double h = band_.grid.h();
    long ix = static_cast<long>(g) / (n * n), iy = (static_cast<long>(g) / n) % n, iz = static_cast<long>(g) % n;
    long c[3] = {ix, iy, iz};
    double f0 = a[g];
    lap = 0;
    for (int i = 0; i < 3; ++i) {
      long p[3] = {c[0], c[1], c[2]}, q[3] = {c[0], c[1], c[2]};
      p[i]++;
      q[i]--;
      double fp = at(a, p[0], p[1], p[2]), fq = at(a, q[0], q[1], q[2]);
      d1[i] = (fp - fq) / (2 * h);
      double dd = (fp - 2 * f0 + fq) / (h * h);
      lap += dd;
      if (d2) (*d2)[i][i] = dd;
    }
    if (!d2) return;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        auto shift = [&](int si, int sj) {
          long p[3] = {c[0], c[1], c[2]};
          p[i] += si;
          p[j] += sj;
          return at(a, p[0], p[1], p[2]);
        };
        double v = (shift(1, 1) - shift(1, -1) - shift(-1, 1) + shift(-1, -1)) / (4 * h * h);
        (*d2)[i][j] = (*d2)[j][i] = v;
      }
  }

  Coupled coupled_terms(const State& p, const State& v, std::size_t g) const {
    const auto& M = band_.params;
    double lap_v, lap_vt;
    std::array<double, 3> dv, dvt;
    std::array<std::array<double, 3>, 3> hv{};
    grad_hess(p[1], g, lap_v, dv, &hv);
    grad_hess(v[1], g, lap_vt, dvt, nullptr);
    double vv = p[1][g], vt = v[1][g], u = p[0][g];
    Coupled c;
    std::array<double, 4> d{vt, dv[0], dv[1], dv[2]};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) c.quad += P_[a * 4 + b] * d[a] * d[b];
    c.quad += M.R_coupling * vv * vv;
    double rest = 0;  // H^{ab} d_a d_b v without the tt part
    for (int i = 0; i < 3; ++i) {
      rest += 2 * H_[i + 1] * dvt[i];
      for (int j = 0; j < 3; ++j) rest += H_[(i + 1) * 4 + j + 1] * hv[i][j];
    }
    double den = 1 - u * H_[0];
    if (!(den > 0.1)) throw Error(ErrorKind::numerical_abort, "quasilinear coefficient 1 - u H00 degenerate");
    c.vtt = (lap_v - M.c_mass * M.c_mass * vv + u * rest) / den;
    c.quasi = u * (H_[0] * c.vtt + rest);
    return c;
  }

  void rhs(const State& p, const State& v, double t, State& dp, State& dv) const {
    const std::size_t nf = p.size(), N = p[0].size();
    dp = v;
    dv.assign(nf, std::vector<double>(N, 0.0));
    if (model_.kind != ModelKind::coupled) {
      const double m2 = model_.mass(0) * model_.mass(0);
      parallel_for(N, [&](std::size_t g) {
        double lap;
        std::array<double, 3> d1;
        grad_hess(p[0], g, lap, d1, nullptr);
        dv[0][g] = lap - m2 * p[0][g] - source_at(0, t, radius(g));
      });
      return;
    }
    parallel_for(N, [&](std::size_t g) {
      double lap;
      std::array<double, 3> d1;
      grad_hess(p[0], g, lap, d1, nullptr);
      auto c = coupled_terms(p, v, g);
      dv[0][g] = lap + c.quad;
      dv[1][g] = c.vtt;
    });
  }

  State phi_, vel_;
  std::array<double, 16> P_{}, H_{};
};

inline std::unique_ptr<Evolver> Evolver::create(const ModelSpec& model, const GridSpec& grid) {
  if (grid.mode == GridMode::radial) return std::make_unique<RadialEvolver>(model, grid);
  return std::make_unique<CartesianEvolver>(model, grid);
}

}  // namespace wkg
