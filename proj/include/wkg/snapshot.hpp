#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "wkg/solver.hpp"

namespace wkg {

inline constexpr std::uint32_t snapshot_version = 1;

namespace detail {

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& o) : o_(o) {}
  void u8(std::uint8_t v) { o_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    u64(v);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    o_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& o_;
};

class ByteReader {
 public:
  explicit ByteReader(std::istream& i) : i_(i) {}
  std::uint8_t u8() {
    char c;
    if (!i_.get(c)) throw Error(ErrorKind::truncation, "snapshot ended early");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string str() {
    std::uint32_t n = u32();
    if (n > (1u << 20)) throw Error(ErrorKind::format, "implausible string length");
    std::string s(n, '\0');
    if (n && !i_.read(s.data(), n)) throw Error(ErrorKind::truncation, "snapshot ended early");
    return s;
  }
  void f64s(std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (auto& x : v) x = f64();
  }

 private:
  std::istream& i_;
};

}  // namespace detail

inline void write_snapshot(const FieldBand& band, std::ostream& out) {
  detail::ByteWriter w(out);
  out.write("WKGS", 4);
  w.u32(snapshot_version);
  w.u64(band.config_hash);
  const auto& g = band.grid;
  w.u32(g.mode == GridMode::radial ? 0 : 1);
  w.f64(g.extent);
  w.u32(static_cast<std::uint32_t>(g.n_cells));
  w.f64(g.cfl);
  w.f64(g.t0);
  w.f64(g.t_end);
  w.u32(static_cast<std::uint32_t>(g.band_depth));
  const auto& p = band.params;
  for (double v : {p.P00, p.Piso, p.R_coupling, p.H00, p.Hiso, p.c_mass, p.eps_amp}) w.f64(v);
  w.u8(p.full_tensors ? 1 : 0);
  for (double v : p.P) w.f64(v);
  for (double v : p.H) w.f64(v);
  w.u32(static_cast<std::uint32_t>(band.fields.size()));
  for (const auto& f : band.fields) w.str(f);
  w.u64(g.points());
  w.u32(static_cast<std::uint32_t>(band.slices.size()));
  for (const auto& s : band.slices) {
    w.f64(s.t);
    for (std::size_t f = 0; f < band.fields.size(); ++f)
      for (const auto* arr : {&s.val[f], &s.vel[f], &s.src[f]})
        for (double v : *arr) w.f64(v);
  }
  if (!out) throw Error(ErrorKind::io, "snapshot write failed");
}

inline void write_snapshot(const FieldBand& band, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path);
  write_snapshot(band, out);
}

inline FieldBand read_snapshot(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw Error(ErrorKind::truncation, "snapshot shorter than its magic");
  if (std::memcmp(magic, "WKGS", 4) != 0) throw Error(ErrorKind::format, "bad magic");
  detail::ByteReader r(in);
  std::uint32_t ver = r.u32();
  if (ver != snapshot_version)
    throw Error(ErrorKind::version, "snapshot version " + std::to_string(ver) + ", expected " +
                                        std::to_string(snapshot_version));
  FieldBand b;
  b.config_hash = r.u64();
  auto& g = b.grid;
  std::uint32_t mode = r.u32();
  if (mode > 1) throw Error(ErrorKind::format, "unknown grid mode");
  g.mode = mode == 0 ? GridMode::radial : GridMode::cartesian3d;
  g.extent = r.f64();
  g.n_cells = static_cast<int>(r.u32());
  g.cfl = r.f64();
  g.t0 = r.f64();
  g.t_end = r.f64();
  g.band_depth = static_cast<int>(r.u32());
  auto& p = b.params;
  for (double* v : {&p.P00, &p.Piso, &p.R_coupling, &p.H00, &p.Hiso, &p.c_mass, &p.eps_amp}) *v = r.f64();
  p.full_tensors = r.u8() != 0;
  for (auto& v : p.P) v = r.f64();
  for (auto& v : p.H) v = r.f64();
  std::uint32_t nf = r.u32();
  if (nf > 16) throw Error(ErrorKind::format, "implausible field count");
  for (std::uint32_t i = 0; i < nf; ++i) b.fields.push_back(r.str());
  std::uint64_t pts = r.u64();
  if (pts != g.points()) throw Error(ErrorKind::format, "point count does not match grid");
  std::uint32_t ns = r.u32();
  for (std::uint32_t k = 0; k < ns; ++k) {
    BandSlice s;
    s.t = r.f64();
    s.val.resize(nf);
    s.vel.resize(nf);
    s.src.resize(nf);
    for (std::uint32_t f = 0; f < nf; ++f) {
      r.f64s(s.val[f], pts);
      r.f64s(s.vel[f], pts);
      r.f64s(s.src[f], pts);
    }
    b.slices.push_back(std::move(s));
  }
  return b;
}

inline FieldBand read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  return read_snapshot(in);
}

}  // namespace wkg
