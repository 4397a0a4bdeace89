#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "wkg/solver.hpp"

namespace wkg {

inline constexpr double pi = 3.14159265358979323846;

// Nodes of H_s (t = sqrt(s^2 + r^2)) on the spatial grid, with dx weights.
struct HyperboloidSample {
  double s = 0;
  GridMode mode = GridMode::radial;
  double h = 0;
  std::vector<std::size_t> index;  // grid node (radial) or cell (3d)
  std::vector<double> r, t;
  std::vector<std::array<double, 3>> x;
  std::vector<double> w;           // integral of f dx ~ sum w f
  std::vector<double> w_over_r2;   // for integrands carrying 1/r^2; 0 where excluded
  std::size_t excluded = 0;        // 3d cells with r < h dropped from 1/r^2 terms
  std::size_t filled = 0;
  // per field: jets of the field and of its source at each node
  std::vector<std::vector<RadialJet>> rjet, rsrc;
  std::vector<std::vector<CartesianJet>> cjet, csrc;

  std::size_t size() const { return t.size(); }
  bool complete() const { return filled == size(); }
  double t_max() const { return t.empty() ? s : t.back(); }

  void allocate(std::size_t nf) {
    if (mode == GridMode::radial) {
      rjet.assign(nf, std::vector<RadialJet>(size()));
      rsrc = rjet;
    } else {
      cjet.assign(nf, std::vector<CartesianJet>(size()));
      csrc = cjet;
    }
  }

  // Fill every node of field f from exact radial jets.
  template <class JetFn, class SrcFn>
  void fill_exact(std::size_t f, JetFn jet, SrcFn src) {
    for (std::size_t k = 0; k < size(); ++k) {
      if (mode == GridMode::radial) {
        rjet[f][k] = jet(t[k], r[k]);
        rsrc[f][k] = src(t[k], r[k]);
      } else {
        cjet[f][k] = radial_to_cartesian(jet(t[k], r[k]), x[k], 2);
        csrc[f][k] = radial_to_cartesian(src(t[k], r[k]), x[k], 2);
      }
    }
    filled = size();
  }
};

// Largest radius of H_s inside K cut at u = u_min.
inline double cone_cut_radius(double s, double u_min = 1.0) { return (s * s - u_min * u_min) / (2 * u_min); }

// radial: composite Simpson in r with 4 pi r^2; 3d: cell midpoints.
inline HyperboloidSample hyperboloid_quadrature(double s, const GridSpec& grid, double r_limit = -1,
                                                double u_min = 1.0) {
  if (!(s > 0)) throw Error(ErrorKind::non_positive, "hyperboloid needs s > 0");
  HyperboloidSample q;
  q.s = s;
  q.mode = grid.mode;
  q.h = grid.h();
  const double h = q.h;
  double rcut = cone_cut_radius(s, u_min);
  if (r_limit >= 0) rcut = std::min(rcut, r_limit);
  if (grid.mode == GridMode::radial) {
    rcut = std::min(rcut, grid.extent - 3 * h);
    long M = static_cast<long>(std::floor(rcut / h + 1e-9));
    if (M % 2) --M;
    if (M < 2) throw Error(ErrorKind::band_coverage, "hyperboloid too small for the grid");
    for (long i = 0; i <= M; ++i) {
      double r = i * h;
      double c = (i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      double wr = 4 * pi * c * h / 3;
      q.index.push_back(static_cast<std::size_t>(i));
      q.r.push_back(r);
      q.t.push_back(std::sqrt(s * s + r * r));
      q.x.push_back({r, 0.0, 0.0});
      q.w_over_r2.push_back(wr);
      q.w.push_back(wr * r * r);
    }
    return q;
  }
  const std::size_t n = static_cast<std::size_t>(grid.n_cells);
  const double vol = h * h * h;
  struct Cell {
    double r;
    std::size_t g;
  };
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < n * n * n; ++g) {
    std::size_t iz = g % n, iy = (g / n) % n, ix = g / (n * n);
    if (ix == 0 || iy == 0 || iz == 0 || ix + 1 == n || iy + 1 == n || iz + 1 == n) continue;
    std::array<double, 3> x{-grid.extent + (ix + 0.5) * h, -grid.extent + (iy + 0.5) * h,
                            -grid.extent + (iz + 0.5) * h};
    double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (r < rcut) cells.push_back({r, g});
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.r < b.r; });
  for (const auto& c : cells) {
    std::size_t iz = c.g % n, iy = (c.g / n) % n, ix = c.g / (n * n);
    q.index.push_back(c.g);
    q.r.push_back(c.r);
    q.t.push_back(std::sqrt(s * s + c.r * c.r));
    q.x.push_back({-grid.extent + (ix + 0.5) * h, -grid.extent + (iy + 0.5) * h, -grid.extent + (iz + 0.5) * h});
    q.w.push_back(vol);
    if (c.r < h) {
      q.w_over_r2.push_back(0.0);
      ++q.excluded;
    } else {
      q.w_over_r2.push_back(vol / (c.r * c.r));
    }
  }
  return q;
}

// Streams band slices into registered hyperboloids. Each node is handed to its
// node callback once the band has moved past it; a completed hyperboloid goes to
// its done callback and is then released.
class HyperboloidStream {
 public:
  using NodeFn = std::function<void(HyperboloidSample&, std::size_t, const FieldBand&)>;
  using DoneFn = std::function<void(HyperboloidSample&)>;

  explicit HyperboloidStream(const GridSpec& grid) : grid_(grid) {}

  void add(HyperboloidSample q, NodeFn node, DoneFn done) {
    const double dt = grid_.dt();
    if (q.t.front() < grid_.t0 + 1.5 * dt || q.t_max() + 3 * dt > grid_.t_end) {
      std::ostringstream o;
      o << "H_s with s=" << q.s << " spans t in [" << q.t.front() << ", " << q.t_max() << "], band covers ("
        << grid_.t0 + 1.5 * dt << ", " << grid_.t_end - 3 * dt << ")";
      throw Error(ErrorKind::band_coverage, o.str());
    }
    pending_.push_back({std::move(q), std::move(node), std::move(done)});
  }

  std::size_t pending() const { return pending_.size(); }

  // Call after every pushed slice; final = true on the last slice.
  void observe(const FieldBand& band, bool final = false) {
    if (band.size() < 6) return;
    const std::size_t ns = band.size();
    double lo = band.slices[1].t;
    double hi = final ? band.slices[ns - 2].t + 1e-9 * band.dt() : band.slices[ns - 3].t;
    for (auto& p : pending_) {
      auto& q = p.q;
      std::size_t begin = q.filled, end = begin;
      while (end < q.size() && q.t[end] < hi) ++end;
      if (begin == end) continue;
      if (q.t[begin] < lo - 1e-9 * band.dt())
        throw Error(ErrorKind::band_coverage, "hyperboloid node older than the band");
      parallel_for(end - begin, [&](std::size_t j) { p.node(q, begin + j, band); });
      q.filled = end;
    }
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (it->q.complete()) {
        if (it->done) it->done(it->q);
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    if (final && !pending_.empty())
      throw Error(ErrorKind::band_coverage, "run ended before H_s with s=" + std::to_string(pending_.front().q.s));
  }

 private:
  struct Pending {
    HyperboloidSample q;
    NodeFn node;
    DoneFn done;
  };
  GridSpec grid_;
  std::vector<Pending> pending_;
};

// Fills field and source jets of every node.
class HyperboloidSampler {
 public:
  using Callback = std::function<void(const HyperboloidSample&)>;

  HyperboloidSampler(const GridSpec& grid, std::size_t n_fields, double u_min = 1.0)
      : grid_(grid), nf_(n_fields), u_min_(u_min), stream_(grid) {}

  // r_limit < 0: cut only by the cone and the grid.
  void add(double s, Callback cb, double r_limit = -1) {
    auto q = hyperboloid_quadrature(s, grid_, r_limit, u_min_);
    q.allocate(nf_);
    const std::size_t nf = nf_;
    stream_.add(
        std::move(q),
        [nf](HyperboloidSample& q, std::size_t k, const FieldBand& band) {
          for (std::size_t f = 0; f < nf; ++f) {
            if (q.mode == GridMode::radial) {
              q.rjet[f][k] = band.radial_jet(f, false, q.index[k], q.t[k]);
              q.rsrc[f][k] = band.radial_jet(f, true, q.index[k], q.t[k]);
            } else {
              q.cjet[f][k] = band.cartesian_jet(f, false, q.index[k], q.t[k]);
              q.csrc[f][k] = band.cartesian_jet(f, true, q.index[k], q.t[k]);
            }
          }
        },
        [cb = std::move(cb)](HyperboloidSample& q) {
          if (cb) cb(q);
        });
  }

  std::size_t pending() const { return stream_.pending(); }
  void observe(const FieldBand& band, bool final = false) { stream_.observe(band, final); }

 private:
  GridSpec grid_;
  std::size_t nf_;
  double u_min_;
  HyperboloidStream stream_;
};

}  // namespace wkg
