#pragma once

#include <array>
#include <cmath>

namespace wkg {

// Truncated univariate power series sum c[k] h^k.
template <int K>
struct Taylor {
  std::array<double, K + 1> c{};

  static Taylor constant(double v) {
    Taylor t;
    t.c[0] = v;
    return t;
  }
  static Taylor variable(double x0) {
    Taylor t;
    t.c[0] = x0;
    if constexpr (K >= 1) t.c[1] = 1;
    return t;
  }
  // k-th derivative at the expansion point
  double derivative(int k) const {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }
};

template <int K>
Taylor<K> operator+(Taylor<K> a, const Taylor<K>& b) {
  for (int k = 0; k <= K; ++k) a.c[k] += b.c[k];
  return a;
}
template <int K>
Taylor<K> operator-(Taylor<K> a, const Taylor<K>& b) {
  for (int k = 0; k <= K; ++k) a.c[k] -= b.c[k];
  return a;
}
template <int K>
Taylor<K> operator-(Taylor<K> a) {
  for (auto& x : a.c) x = -x;
  return a;
}
template <int K>
Taylor<K> operator+(Taylor<K> a, double b) {
  a.c[0] += b;
  return a;
}
template <int K>
Taylor<K> operator+(double b, Taylor<K> a) {
  return a + b;
}
template <int K>
Taylor<K> operator-(Taylor<K> a, double b) {
  a.c[0] -= b;
  return a;
}
template <int K>
Taylor<K> operator-(double b, const Taylor<K>& a) {
  return -a + b;
}
template <int K>
Taylor<K> operator*(Taylor<K> a, double b) {
  for (auto& x : a.c) x *= b;
  return a;
}
template <int K>
Taylor<K> operator*(double b, Taylor<K> a) {
  return a * b;
}
template <int K>
Taylor<K> operator*(const Taylor<K>& a, const Taylor<K>& b) {
  Taylor<K> r;
  for (int i = 0; i <= K; ++i)
    for (int j = 0; i + j <= K; ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}
template <int K>
Taylor<K> operator/(const Taylor<K>& a, const Taylor<K>& b) {
  Taylor<K> r;
  for (int k = 0; k <= K; ++k) {
    double v = a.c[k];
    for (int j = 1; j <= k; ++j) v -= b.c[j] * r.c[k - j];
    r.c[k] = v / b.c[0];
  }
  return r;
}
template <int K>
Taylor<K> operator/(double a, const Taylor<K>& b) {
  return Taylor<K>::constant(a) / b;
}

template <int K>
Taylor<K> exp(const Taylor<K>& a) {
  Taylor<K> r;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= K; ++k) {
    double v = 0;
    for (int j = 1; j <= k; ++j) v += j * a.c[j] * r.c[k - j];
    r.c[k] = v / k;
  }
  return r;
}

}  // namespace wkg
