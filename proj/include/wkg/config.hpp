#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wkg/balance.hpp"

namespace wkg {

using json = nlohmann::json;

struct OutputSpec {
  std::string dir = ".";
  std::string energies = "energies.csv";
  std::string pointwise = "pointwise.csv";
  std::string report = "report.jsonl";
  std::string snapshot;  // empty: none
};

struct RunConfig {
  ModelSpec model;
  GridSpec grid;
  std::vector<double> a_list{0.0};
  std::vector<std::string> norms{"EW", "EKG", "EWa", "E1a", "E2a", "NWa_increment", "SuTau"};
  int k_max = 0;
  std::vector<double> s_list;
  double r_limit = -1;
  double u_min = 1.0;
  OutputSpec out;
  std::uint64_t seed = 1;
  std::string tag = "run";

  json resolved() const;
  // output locations do not enter the hash
  std::uint64_t hash() const {
    auto j = resolved();
    j.erase("outputs");
    return fnv1a(j.dump());
  }
  std::string grid_tag() const { return tag + "-n" + std::to_string(grid.n_cells); }
};

namespace detail {

// Strict object reader: every key must be consumed, unknown keys are errors.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::schema, path_ + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  template <class T>
  void get(const std::string& k, T& out) {
    seen_.insert(k);
    if (!j_.contains(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::schema, path_ + "." + k + ": wrong type");
    }
  }

  const json& sub(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }
  std::string child(const std::string& k) const { return path_ + "." + k; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw Error(ErrorKind::schema, "unknown key '" + child(it.key()) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_data(const json& j, const std::string& path, DataSpec& d) {
  ObjectReader r(j, path);
  r.get("profile", d.profile);
  r.get("radius", d.radius);
  r.get("amp", d.amp);
  r.get("amp_dt", d.amp_dt);
  r.finish();
  if (d.profile != "zero" && d.profile != "bump" && d.profile != "manufactured")
    throw Error(ErrorKind::schema, path + ".profile: unknown profile '" + d.profile + "'");
  if (!(d.radius > 0)) throw Error(ErrorKind::schema, path + ".radius: must be positive");
}

inline json data_json(const DataSpec& d) {
  return {{"profile", d.profile}, {"radius", d.radius}, {"amp", d.amp}, {"amp_dt", d.amp_dt}};
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  RunConfig c;
  detail::ObjectReader top(j, "config");
  if (top.has("model")) {
    detail::ObjectReader r(top.sub("model"), "config.model");
    std::string kind = to_string(c.model.kind);
    r.get("kind", kind);
    try {
      c.model.kind = parse_model(kind);
    } catch (const Error&) {
      throw Error(ErrorKind::schema, "config.model.kind: unknown model '" + kind + "'");
    }
    auto& p = c.model.params;
    r.get("P00", p.P00);
    r.get("Piso", p.Piso);
    r.get("R", p.R_coupling);
    r.get("H00", p.H00);
    r.get("Hiso", p.Hiso);
    r.get("c", p.c_mass);
    r.get("eps", p.eps_amp);
    r.get("full_tensors", p.full_tensors);
    r.get("P", p.P);
    r.get("H", p.H);
    r.finish();
  }
  if (top.has("manufactured")) {
    detail::ObjectReader r(top.sub("manufactured"), "config.manufactured");
    std::string kind = to_string(c.model.mcase.kind);
    r.get("case", kind);
    try {
      c.model.mcase = manufactured_case(kind);
    } catch (const Error&) {
      throw Error(ErrorKind::schema, "config.manufactured.case: unknown case '" + kind + "'");
    }
    r.get("source", c.model.manufactured_source);
    r.get("amp", c.model.mcase.amp);
    r.finish();
    if (c.model.mcase.kind == CaseKind::kg_modulated_bump) c.model.mcase.c_mass = c.model.params.c_mass;
  }
  if (top.has("grid")) {
    detail::ObjectReader r(top.sub("grid"), "config.grid");
    std::string mode = to_string(c.grid.mode);
    r.get("mode", mode);
    try {
      c.grid.mode = parse_grid_mode(mode);
    } catch (const Error&) {
      throw Error(ErrorKind::schema, "config.grid.mode: unknown mode '" + mode + "'");
    }
    r.get("extent", c.grid.extent);
    r.get("n_cells", c.grid.n_cells);
    r.get("cfl", c.grid.cfl);
    r.get("t0", c.grid.t0);
    r.get("t_end", c.grid.t_end);
    r.get("band_depth", c.grid.band_depth);
    r.finish();
  }
  if (top.has("data")) detail::read_data(top.sub("data"), "config.data", c.model.data);
  if (top.has("data_v")) detail::read_data(top.sub("data_v"), "config.data_v", c.model.data_v);
  top.get("a_list", c.a_list);
  top.get("norms", c.norms);
  top.get("k_max", c.k_max);
  top.get("s_list", c.s_list);
  if (top.has("s_range")) {
    if (!c.s_list.empty()) throw Error(ErrorKind::schema, "config: give s_list or s_range, not both");
    detail::ObjectReader r(top.sub("s_range"), "config.s_range");
    double a = 0, b = 0;
    int n = 0;
    std::string spacing = "linear";
    r.get("start", a);
    r.get("stop", b);
    r.get("count", n);
    r.get("spacing", spacing);
    r.finish();
    if (!(a > 0) || !(b > a) || n < 2) throw Error(ErrorKind::schema, "config.s_range: need 0 < start < stop, count >= 2");
    if (spacing != "linear" && spacing != "log")
      throw Error(ErrorKind::schema, "config.s_range.spacing: 'linear' or 'log'");
    for (int i = 0; i < n; ++i) {
      double f = static_cast<double>(i) / (n - 1);
      c.s_list.push_back(i == n - 1 ? b : spacing == "linear" ? a + f * (b - a) : a * std::pow(b / a, f));
    }
  }
  top.get("r_limit", c.r_limit);
  top.get("u_min", c.u_min);
  top.get("seed", c.seed);
  top.get("tag", c.tag);
  if (top.has("outputs")) {
    detail::ObjectReader r(top.sub("outputs"), "config.outputs");
    r.get("dir", c.out.dir);
    r.get("energies", c.out.energies);
    r.get("pointwise", c.out.pointwise);
    r.get("report", c.out.report);
    r.get("snapshot", c.out.snapshot);
    r.finish();
  }
  top.finish();
  for (const auto& n : c.norms) {
    try {
      parse_norm(n);
    } catch (const Error&) {
      throw Error(ErrorKind::schema, "config.norms: unknown norm '" + n + "'");
    }
  }
  for (double a : c.a_list)
    if (!(a >= 0 && a <= 1)) throw Error(ErrorKind::schema, "config.a_list: a must lie in [0, 1]");
  int kmax_limit = c.grid.mode == GridMode::radial ? 2 : 1;
  if (c.k_max < 0 || c.k_max > kmax_limit)
    throw Error(ErrorKind::schema, "config.k_max: must lie in [0, " + std::to_string(kmax_limit) + "] for " +
                                       to_string(c.grid.mode));
  for (std::size_t i = 1; i < c.s_list.size(); ++i)
    if (!(c.s_list[i] > c.s_list[i - 1])) throw Error(ErrorKind::schema, "config.s_list: must be increasing");
  if (c.a_list.empty()) throw Error(ErrorKind::schema, "config.a_list: must not be empty");
  c.grid.validate();
  return c;
}

inline json RunConfig::resolved() const {
  const auto& p = model.params;
  json j;
  j["model"] = {{"kind", to_string(model.kind)},
                {"P00", p.P00},
                {"Piso", p.Piso},
                {"R", p.R_coupling},
                {"H00", p.H00},
                {"Hiso", p.Hiso},
                {"c", p.c_mass},
                {"eps", p.eps_amp},
                {"full_tensors", p.full_tensors},
                {"P", p.P},
                {"H", p.H}};
  j["manufactured"] = {{"case", to_string(model.mcase.kind)},
                       {"source", model.manufactured_source},
                       {"amp", model.mcase.amp}};
  j["grid"] = {{"mode", to_string(grid.mode)}, {"extent", grid.extent}, {"n_cells", grid.n_cells},
               {"cfl", grid.cfl},              {"t0", grid.t0},         {"t_end", grid.t_end},
               {"band_depth", grid.band_depth}};
  j["data"] = detail::data_json(model.data);
  j["data_v"] = detail::data_json(model.data_v);
  j["a_list"] = a_list;
  j["norms"] = norms;
  j["k_max"] = k_max;
  j["s_list"] = s_list;
  j["r_limit"] = r_limit;
  j["u_min"] = u_min;
  j["seed"] = seed;
  j["tag"] = tag;
  j["outputs"] = {{"dir", out.dir},
                  {"energies", out.energies},
                  {"pointwise", out.pointwise},
                  {"report", out.report},
                  {"snapshot", out.snapshot}};
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  try {
    return json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::schema, path + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

}  // namespace wkg
