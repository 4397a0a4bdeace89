#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>

#include "wkg/config.hpp"
#include "wkg/snapshot.hpp"

namespace wkg {

inline const char* pointwise_header = "s,axis_abs,sup_tau_half,sup_tau_threehalf,sup_s_a_tau_half,SuTau,a,grid_id";

inline void write_pointwise_csv(std::ostream& o, const std::vector<PointwiseRow>& rows, const std::string& tag,
                                std::uint64_t config_hash) {
  o << "# wkgs " << artifact_version << " config_hash=" << std::hex << config_hash << std::dec << "\n";
  o << pointwise_header << "\n";
  for (const auto& r : rows)
    o << format_double(r.s) << ',' << format_double(r.axis_abs) << ',' << format_double(r.sup_tau_half) << ','
      << format_double(r.sup_tau_threehalf) << ',' << format_double(r.sup_s_a_tau_half) << ','
      << format_double(r.SuTau) << ',' << format_double(r.a) << ',' << tag << '/' << r.field << "\n";
}

inline std::string hash_string(std::uint64_t h) {
  std::ostringstream o;
  o << std::hex << h;
  return o.str();
}

struct RunResult {
  std::vector<EnergyRow> rows;
  std::vector<PointwiseRow> pointwise;
  std::vector<json> checks;  // Hardy / Sobolev lines
  std::uint64_t hash = 0;
  long steps = 0;
};

// Evolves, samples every H_s in s_list and records norms and inequality checks.
inline RunResult run_evolution(const RunConfig& cfg, FieldBand* final_band = nullptr) {
  RunResult res;
  res.hash = cfg.hash();
  auto ev = Evolver::create(cfg.model, cfg.grid);
  ev->band().config_hash = res.hash;
  const auto fields = cfg.model.field_names();
  std::vector<double> masses(fields.size(), cfg.model.params.c_mass);
  EnergyRecorder rec(fields, cfg.a_list, cfg.k_max, masses, cfg.grid_tag());
  HyperboloidSampler hs(cfg.grid, fields.size(), cfg.u_min);
  std::vector<std::pair<double, json>> checks;
  for (double s : cfg.s_list) {
    hs.add(s, [&](const HyperboloidSample& q) {
      rec.record(q);
      for (std::size_t f = 0; f < fields.size(); ++f) {
        auto h = check_hardy(q, f);
        json j = {{"type", "hardy"}, {"s", q.s}, {"field", fields[f]}, {"lhs", h.lhs}, {"rhs", h.rhs},
                  {"ratio", h.ratio}, {"degenerate", h.degenerate}};
        checks.emplace_back(q.s, j);
        if (q.mode == GridMode::radial) {
          for (double a : cfg.a_list) {
            auto sb = check_sobolev(q, f, a);
            json k = {{"type", "sobolev"}, {"s", q.s},     {"field", fields[f]}, {"a", a},
                      {"lhs", sb.lhs},     {"rhs", sb.rhs}, {"ratio", sb.ratio}, {"degenerate", sb.degenerate}};
            checks.emplace_back(q.s, k);
          }
        }
      }
    }, cfg.r_limit);
  }
  ev->run([&](const FieldBand& b) { hs.observe(b, ev->done()); });
  res.rows = rec.rows();
  res.pointwise = rec.pointwise();
  std::stable_sort(checks.begin(), checks.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& c : checks) res.checks.push_back(std::move(c.second));
  res.steps = ev->step_index();
  if (final_band) *final_band = ev->band();
  return res;
}

inline std::string output_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out.dir) / name).string();
}

inline std::ofstream open_output(const std::string& path) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream o(path, std::ios::binary);
  if (!o) throw Error(ErrorKind::io, "cannot write " + path);
  return o;
}

inline json meta_line(const RunConfig& cfg) {
  return {{"type", "meta"},
          {"version", artifact_version},
          {"config_hash", hash_string(cfg.hash())},
          {"config", cfg.resolved()}};
}

// evolve subcommand: energies CSV, pointwise CSV, JSON-lines report, optional snapshot.
inline RunResult evolve_and_write(const RunConfig& cfg) {
  FieldBand band;
  auto res = run_evolution(cfg, cfg.out.snapshot.empty() ? nullptr : &band);
  {
    auto o = open_output(output_path(cfg, cfg.out.energies));
    write_energies_csv(o, res.rows, res.hash);
  }
  {
    auto o = open_output(output_path(cfg, cfg.out.pointwise));
    write_pointwise_csv(o, res.pointwise, cfg.grid_tag(), res.hash);
  }
  {
    auto o = open_output(output_path(cfg, cfg.out.report));
    o << meta_line(cfg).dump() << "\n";
    for (const auto& c : res.checks) o << c.dump() << "\n";
    json done = {{"type", "summary"}, {"steps", res.steps}, {"rows", res.rows.size()},
                 {"config_hash", hash_string(res.hash)}};
    o << done.dump() << "\n";
  }
  if (!cfg.out.snapshot.empty()) write_snapshot(band, output_path(cfg, cfg.out.snapshot));
  return res;
}

inline BalanceReport balance_from_config(const RunConfig& cfg, const MultiplierSpec& m, double s0, double s1,
                                         std::size_t field = 0) {
  auto ev = Evolver::create(cfg.model, cfg.grid);
  if (field >= cfg.model.field_names().size()) throw Error(ErrorKind::usage, "field index out of range");
  BalanceVerifier bv(cfg.grid, m, s0, s1, cfg.r_limit, field, cfg.model.mass(field), cfg.u_min);
  ev->run([&](const FieldBand& b) { bv.observe(b, ev->done()); });
  auto r = bv.report();
  r.grid_id = cfg.grid_tag() + "/" + cfg.model.field_names()[field];
  return r;
}

// Final-slice errors per grid: against the manufactured solution ("max_error"),
// or between successive doublings at shared nodes ("self", radial only).
inline std::vector<double> convergence_errors(const RunConfig& base, const std::vector<int>& ns,
                                              const std::string& metric) {
  if (metric != "max_error" && metric != "self")
    throw Error(ErrorKind::schema, "convergence.metric: 'max_error' or 'self'");
  std::size_t need = metric == "self" ? 3 : 2;
  if (ns.size() < need) throw Error(ErrorKind::schema, "convergence.n_cells: too few grids");
  if (metric == "max_error" && base.model.data.profile != "manufactured")
    throw Error(ErrorKind::schema, "convergence: max_error needs manufactured data");
  if (metric == "self" && base.grid.mode != GridMode::radial)
    throw Error(ErrorKind::schema, "convergence: self metric is radial only");
  std::vector<std::vector<double>> finals;
  std::vector<double> errors;
  for (int n : ns) {
    auto cfg = base;
    cfg.grid.n_cells = n;
    auto ev = Evolver::create(cfg.model, cfg.grid);
    ev->run(nullptr);
    const auto& s = ev->band().slices.back();
    if (metric == "max_error") {
      double e = 0;
      for (std::size_t g = 0; g < s.val[0].size(); ++g) {
        double rr = g * cfg.grid.h();
        if (cfg.grid.mode == GridMode::cartesian3d) {
          auto x = ev->band().cell_center(g);
          rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        }
        e = std::max(e, std::abs(s.val[0][g] - cfg.model.mcase.value(s.t, rr)));
      }
      errors.push_back(e);
    } else {
      finals.push_back(s.val[0]);
    }
  }
  if (metric == "self") {
    for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
      if (ns[k + 1] != 2 * ns[k]) throw Error(ErrorKind::schema, "convergence.n_cells: self metric needs doubling");
      double e = 0;
      for (std::size_t i = 0; i < finals[k].size(); ++i) e = std::max(e, std::abs(finals[k][i] - finals[k + 1][2 * i]));
      errors.push_back(e);
    }
  }
  return errors;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      t.header = split_csv_line(line);
      continue;
    }
    auto row = split_csv_line(line);
    if (row.size() != t.header.size()) throw Error(ErrorKind::format, path + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw Error(ErrorKind::format, path + ": empty CSV");
  return t;
}

struct SeriesFilter {
  std::string grid_id, I = "0000", J = "000";
  double a = -1;  // < 0: any
  double smin = -1e300, smax = 1e300;
};

// (s, column) pairs; rows with several matches per s are rejected.
inline std::vector<std::pair<double, double>> extract_series(const CsvTable& t, const std::string& column,
                                                             const SeriesFilter& f) {
  int cs = t.column("s"), cv = t.column(column);
  if (cs < 0) throw Error(ErrorKind::format, "CSV has no s column");
  if (cv < 0) throw Error(ErrorKind::usage, "CSV has no column '" + column + "'");
  int cg = t.column("grid_id"), ca = t.column("a"), ci = t.column("I"), cj = t.column("J");
  std::vector<std::pair<double, double>> out;
  std::set<std::string> series_ids;
  for (const auto& r : t.rows) {
    if (cg >= 0 && !f.grid_id.empty() && r[cg] != f.grid_id) continue;
    if (ca >= 0 && f.a >= 0 && std::stod(r[ca]) != f.a) continue;
    if (ci >= 0 && r[ci] != f.I) continue;
    if (cj >= 0 && r[cj] != f.J) continue;
    double s = std::stod(r[cs]);
    if (s < f.smin || s > f.smax) continue;
    series_ids.insert((cg >= 0 ? r[cg] : "") + "|" + (ca >= 0 ? r[ca] : ""));
    out.emplace_back(s, std::stod(r[cv]));
  }
  if (series_ids.size() > 1)
    throw Error(ErrorKind::usage, "several series match; narrow with --grid-id and --a");
  return out;
}

}  // namespace wkg
