#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "wkg/core.hpp"
#include "wkg/manufactured.hpp"

namespace wkg {

using MultiIndex = std::array<int, 4>;  // counts of (d_t, d_1, d_2, d_3)

inline constexpr int jet_slots = 35;  // |alpha| <= 3 in four variables

inline int order_of(const MultiIndex& a) { return a[0] + a[1] + a[2] + a[3]; }

inline int jet_slot(const MultiIndex& a) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    int k = 0;
    for (int o = 0; o <= 3; ++o)
      for (int a0 = o; a0 >= 0; --a0)
        for (int a1 = o - a0; a1 >= 0; --a1)
          for (int a2 = o - a0 - a1; a2 >= 0; --a2) {
            int a3 = o - a0 - a1 - a2;
            t[a0 * 64 + a1 * 16 + a2 * 4 + a3] = k++;
          }
    return t;
  }();
  if (order_of(a) > 3) return -1;
  return table[a[0] * 64 + a[1] * 16 + a[2] * 4 + a[3]];
}

// Cartesian partials of a scalar at one spacetime point.
struct CartesianJet {
  std::array<double, jet_slots> v{};
  int order = 3;  // highest order filled
  double operator[](const MultiIndex& a) const {
    if (order_of(a) > order) throw Error(ErrorKind::stencil_out_of_band, "jet order exceeded");
    return v[jet_slot(a)];
  }
  double& at(const MultiIndex& a) { return v[jet_slot(a)]; }
};

// f(t, |x|) with radial jet J at the point x.
inline CartesianJet radial_to_cartesian(const RadialJet& J, const std::array<double, 3>& x, int order = 3) {
  CartesianJet c;
  c.order = order;
  double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  std::array<double, 3> w{0, 0, 0};
  if (r > 0)
    for (int i = 0; i < 3; ++i) w[i] = x[i] / r;
  auto P = [&](int i, int j) { return (i == j ? 1.0 : 0.0) - w[i] * w[j]; };
  for (int m = 0; m <= order; ++m) {
    c.at({m, 0, 0, 0}) = J(m, 0);
    if (m + 1 <= order)
      for (int i = 0; i < 3; ++i) {
        MultiIndex a{m, 0, 0, 0};
        a[i + 1]++;
        c.at(a) = r > 0 ? w[i] * J(m, 1) : 0.0;
      }
    if (m + 2 <= order)
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          MultiIndex a{m, 0, 0, 0};
          a[i + 1]++;
          a[j + 1]++;
          c.at(a) = r > 0 ? w[i] * w[j] * J(m, 2) + P(i, j) * J(m, 1) / r : (i == j ? J(m, 2) : 0.0);
        }
    if (m + 3 <= order)
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
          for (int k = j; k < 3; ++k) {
            MultiIndex a{m, 0, 0, 0};
            a[i + 1]++;
            a[j + 1]++;
            a[k + 1]++;
            double v = 0;
            if (r > 0)
              v = w[i] * w[j] * w[k] * J(m, 3) +
                  (P(i, j) * w[k] + P(i, k) * w[j] + P(j, k) * w[i]) * (J(m, 2) / r - J(m, 1) / (r * r));
            c.at(a) = v;
          }
  }
  return c;
}

// Polynomial in (t, x1, x2, x3), keyed by exponents.
using Poly = std::map<MultiIndex, double>;

inline double eval_poly(const Poly& p, double t, const std::array<double, 3>& x) {
  double s = 0;
  const double z[4] = {t, x[0], x[1], x[2]};
  for (const auto& [e, c] : p) {
    double m = c;
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < e[k]; ++i) m *= z[k];
    s += m;
  }
  return s;
}

inline Poly poly_partial(const Poly& p, int mu) {
  Poly out;
  for (const auto& [e, c] : p)
    if (e[mu] > 0) {
      auto f = e;
      f[mu]--;
      out[f] += c * e[mu];
    }
  return out;
}

inline void poly_add(Poly& into, const Poly& p, double scale, int mul_var = -1) {
  for (const auto& [e, c] : p) {
    auto f = e;
    if (mul_var >= 0) f[mul_var]++;
    into[f] += scale * c;
  }
}

// Linear differential operator sum_alpha c_alpha(t,x) d^alpha.
class DiffOp {
 public:
  DiffOp() { terms_[{0, 0, 0, 0}][{0, 0, 0, 0}] = 1.0; }

  const std::map<MultiIndex, Poly>& terms() const { return terms_; }

  int order() const {
    int o = 0;
    for (const auto& [a, p] : terms_) o = std::max(o, order_of(a));
    return o;
  }

  // d_mu o this
  DiffOp partial(int mu) const {
    DiffOp out;
    out.terms_.clear();
    for (const auto& [a, p] : terms_) {
      poly_add(out.terms_[a], poly_partial(p, mu), 1.0);
      auto b = a;
      b[mu]++;
      poly_add(out.terms_[b], p, 1.0);
    }
    out.prune();
    return out;
  }

  // L_i o this, L_i = t d_i + x^i d_t, i in {1,2,3}
  DiffOp boost(int i) const {
    DiffOp out;
    out.terms_.clear();
    for (const auto& [a, p] : terms_) {
      poly_add(out.terms_[a], poly_partial(p, i), 1.0, 0);
      poly_add(out.terms_[a], poly_partial(p, 0), 1.0, i);
      auto bi = a;
      bi[i]++;
      poly_add(out.terms_[bi], p, 1.0, 0);
      auto b0 = a;
      b0[0]++;
      poly_add(out.terms_[b0], p, 1.0, i);
    }
    out.prune();
    return out;
  }

  double apply(const CartesianJet& j, double t, const std::array<double, 3>& x) const {
    double s = 0;
    for (const auto& [a, p] : terms_) s += eval_poly(p, t, x) * j[a];
    return s;
  }

 private:
  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      auto& p = it->second;
      for (auto q = p.begin(); q != p.end();) q = q->second == 0.0 ? p.erase(q) : std::next(q);
      it = p.empty() ? terms_.erase(it) : std::next(it);
    }
  }

  std::map<MultiIndex, Poly> terms_;
};

using BoostIndex = std::array<int, 3>;

// d^I L^J with L_1^{J1} L_2^{J2} L_3^{J3} applied first (L_3 innermost).
inline DiffOp commutator_op(const MultiIndex& I, const BoostIndex& J) {
  DiffOp d;
  for (int i = 2; i >= 0; --i)
    for (int k = 0; k < J[i]; ++k) d = d.boost(i + 1);
  for (int mu = 3; mu >= 0; --mu)
    for (int k = 0; k < I[mu]; ++k) d = d.partial(mu);
  return d;
}

inline std::string index_string(const MultiIndex& I) {
  return std::to_string(I[0]) + std::to_string(I[1]) + std::to_string(I[2]) + std::to_string(I[3]);
}
inline std::string index_string(const BoostIndex& J) {
  return std::to_string(J[0]) + std::to_string(J[1]) + std::to_string(J[2]);
}

// (I, J) pairs with |I| + |J| <= k, in a fixed order.
inline std::vector<std::pair<MultiIndex, BoostIndex>> commutator_indices(int k) {
  std::vector<std::pair<MultiIndex, BoostIndex>> out;
  for (int o = 0; o <= k; ++o)
    for (int nj = 0; nj <= o; ++nj) {
      int ni = o - nj;
      for (int i0 = ni; i0 >= 0; --i0)
        for (int i1 = ni - i0; i1 >= 0; --i1)
          for (int i2 = ni - i0 - i1; i2 >= 0; --i2)
            for (int j1 = nj; j1 >= 0; --j1)
              for (int j2 = nj - j1; j2 >= 0; --j2)
                out.push_back({{i0, i1, i2, ni - i0 - i1 - i2}, {j1, j2, nj - j1 - j2}});
    }
  return out;
}

// Whether d^I L^J maps radial functions to radial functions.
inline bool preserves_radial(const MultiIndex& I, const BoostIndex& J) {
  return I[1] == 0 && I[2] == 0 && I[3] == 0 && J[0] == 0 && J[1] == 0 && J[2] == 0;
}

}  // namespace wkg
