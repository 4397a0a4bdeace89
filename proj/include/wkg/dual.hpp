#pragma once

#include <array>
#include <cmath>

#include "wkg/core.hpp"

namespace wkg {

// Forward-mode dual number with N directional slots.
template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(const T& x) : v(x) { d.fill(T(0)); }
  Dual(int x) : v(T(x)) { d.fill(T(0)); }
  Dual(double x) requires(!std::is_same_v<T, double>) : v(T(x)) { d.fill(T(0)); }

  static Dual variable(const T& x, int slot) {
    Dual r(x);
    r.d[slot] = T(1);
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    T inv = T(1) / o.v;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
    v *= inv;
    return *this;
  }
};

template <class T, int N> Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <class T, int N> Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <class T, int N> Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <class T, int N> Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }
template <class T, int N> Dual<T, N> operator+(Dual<T, N> a, const T& b) { a.v += b; return a; }
template <class T, int N> Dual<T, N> operator+(const T& b, Dual<T, N> a) { a.v += b; return a; }
template <class T, int N> Dual<T, N> operator-(Dual<T, N> a, const T& b) { a.v -= b; return a; }
template <class T, int N> Dual<T, N> operator-(const T& b, const Dual<T, N>& a) { return Dual<T, N>(b) - a; }
template <class T, int N> Dual<T, N> operator*(Dual<T, N> a, const T& b) {
  a.v *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
template <class T, int N> Dual<T, N> operator*(const T& b, Dual<T, N> a) { return a * b; }
template <class T, int N> Dual<T, N> operator/(Dual<T, N> a, const T& b) { return a * (T(1) / b); }
template <class T, int N> Dual<T, N> operator/(const T& b, const Dual<T, N>& a) { return Dual<T, N>(b) / a; }
template <class T, int N> Dual<T, N> operator-(Dual<T, N> a) {
  a.v = -a.v;
  for (auto& x : a.d) x = -x;
  return a;
}

template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& fv, const T& fd) {
  Dual<T, N> r;
  r.v = fv;
  for (int i = 0; i < N; ++i) r.d[i] = fd * a.d[i];
  return r;
}

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  using std::sqrt;
  T s = sqrt(a.v);
  return chain(a, s, T(1) / (2 * s));
}

template <class T, int N>
Dual<T, N> power(const Dual<T, N>& a, double e) {
  if (e == 0.0) return Dual<T, N>(T(1));
  T pv = power(a.v, e);
  return chain(a, pv, T(e) * power(a.v, e - 1.0));
}

template <class T, int N>
Dual<T, N> bracket(const Dual<T, N>& f) {
  return sqrt(Dual<T, N>(T(1)) + f * f);
}

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

}  // namespace wkg
