#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace wkg {

using extended = boost::multiprecision::cpp_bin_float_50;

enum class ErrorKind {
  outside_cone,
  non_positive,
  center_axis,
  exponent_range,
  cfl,
  support_escape,
  numerical_abort,
  band_coverage,
  stencil_out_of_band,
  format,
  version,
  truncation,
  unknown_kind,
  degenerate,
  schema,
  usage,
  io
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::outside_cone: return "outside-cone";
    case ErrorKind::non_positive: return "non-positive";
    case ErrorKind::center_axis: return "center-axis";
    case ErrorKind::exponent_range: return "exponent-out-of-range";
    case ErrorKind::cfl: return "cfl-violation";
    case ErrorKind::support_escape: return "support-escape";
    case ErrorKind::numerical_abort: return "numerical-abort";
    case ErrorKind::band_coverage: return "band-coverage";
    case ErrorKind::stencil_out_of_band: return "stencil-out-of-band";
    case ErrorKind::format: return "format";
    case ErrorKind::version: return "version";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::unknown_kind: return "unknown-kind";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::schema: return "schema";
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind k, const std::string& msg)
      : std::runtime_error(std::string(to_string(k)) + ": " + msg), kind_(k) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

template <class Real>
Real to_real(double v) {
  return Real(v);
}

template <class Real>
double to_double(const Real& v) {
  if constexpr (std::is_floating_point_v<Real>)
    return static_cast<double>(v);
  else
    return v.template convert_to<double>();
}

template <class Real>
Real ipow(Real x, int n) {
  if (n < 0) return Real(1) / ipow(x, -n);
  Real r = 1;
  while (n) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

// x^e for x > 0. Quarter-integer exponents go through sqrt so that the
// multiprecision path stays exact to working precision and fast.
template <class Real>
Real power(const Real& x, double e) {
  using std::exp;
  using std::log;
  using std::sqrt;
  if (e == 0.0) return Real(1);
  if constexpr (std::is_floating_point_v<Real>) {
    return std::pow(x, Real(e));
  } else {
    double k = std::round(4.0 * e);
    if (std::abs(4.0 * e - k) < 1e-14 && std::abs(k) <= 64) {
      int ki = static_cast<int>(k);
      int q = ki >= 0 ? ki / 4 : -((-ki + 3) / 4);
      int rem = ki - 4 * q;
      Real out = ipow(x, q);
      if (rem & 2) out *= sqrt(x);
      if (rem & 1) out *= sqrt(sqrt(x));
      return out;
    }
    return exp(Real(e) * log(x));
  }
}

template <class Real>
Real bracket(const Real& f) {
  using std::sqrt;
  return sqrt(Real(1) + f * f);
}

// Pairwise summation; the tree shape depends only on the length.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

// splitmix64, used to derive per-sample streams from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint64_t index)
      : state_(seed ^ (0xd1b54a32d192ed03ULL * (index + 1))) {
    splitmix64(state_);
  }
  double uniform() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(uniform() * n); }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr const char* artifact_version = "0.1.0";

}  // namespace wkg
