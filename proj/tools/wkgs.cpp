#include <CLI11.hpp>

#include <cmath>
#include <iostream>

#include "wkg/driver.hpp"
#include "wkg/identity_lab.hpp"

using namespace wkg;

namespace {

constexpr int exit_pass = 0, exit_fail = 1, exit_usage = 2, exit_abort = 3;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::numerical_abort:
    case ErrorKind::support_escape: return exit_abort;
    default: return exit_usage;
  }
}

int cmd_check_identities(std::size_t samples, std::uint64_t seed, double tol, const std::string& precision) {
  Precision p = precision == "extended" ? Precision::extended : Precision::f64;
  if (!(tol > 0)) tol = p == Precision::f64 ? 1e-10 : 1e-25;
  if (samples == 0) std::cerr << "warning: --samples 0, every check passes vacuously\n";
  auto reports = run_identity_suite(p, samples, seed, tol);
  bool ok = true;
  for (const auto& r : reports) {
    auto j = r.to_json();
    j["precision"] = precision;
    j["version"] = artifact_version;
    std::cout << j.dump() << "\n";
    ok = ok && r.pass;
  }
  return ok ? exit_pass : exit_fail;
}

int cmd_evolve(const std::string& path) {
  auto cfg = load_config(path);
  auto res = evolve_and_write(cfg);
  json j = {{"type", "evolve"},
            {"config_hash", hash_string(res.hash)},
            {"version", artifact_version},
            {"steps", res.steps},
            {"rows", res.rows.size()},
            {"energies", output_path(cfg, cfg.out.energies)},
            {"pointwise", output_path(cfg, cfg.out.pointwise)},
            {"report", output_path(cfg, cfg.out.report)}};
  if (!cfg.out.snapshot.empty()) j["snapshot"] = output_path(cfg, cfg.out.snapshot);
  std::cout << j.dump() << "\n";
  return exit_pass;
}

int cmd_verify_balance(const std::string& path, const std::string& mult, double a, double s0, double s1,
                       std::size_t field, double tol) {
  auto cfg = load_config(path);
  auto m = make_multiplier(parse_multiplier(mult), a);
  auto r = balance_from_config(cfg, m, s0, s1, field);
  auto j = to_json(r);
  j["tolerance"] = tol;
  j["verdict"] = r.residual <= tol ? "pass" : "fail";
  j["config_hash"] = hash_string(cfg.hash());
  j["version"] = artifact_version;
  std::cout << j.dump() << "\n";
  return r.residual <= tol ? exit_pass : exit_fail;
}

int cmd_fit_decay(const std::string& input, const std::string& column, const SeriesFilter& f) {
  auto t = read_csv(input);
  auto series = extract_series(t, column, f);
  std::string id = column + (f.grid_id.empty() ? "" : "@" + f.grid_id);
  auto fit = fit_decay(series, id);
  auto j = to_json(fit);
  j["input"] = input;
  j["version"] = artifact_version;
  std::cout << j.dump() << "\n";
  return exit_pass;
}

// conv.json: {"run": RunConfig, "n_cells": [...], "metric": "max_error" | "self",
//             "expected_order": p, "tolerance": dp}
int cmd_convergence(const std::string& path) {
  json j = read_json_file(path);
  detail::ObjectReader r(j, "convergence");
  std::vector<int> ns;
  std::string metric = "max_error";
  double expected = -1, tol = 0.2;
  r.get("n_cells", ns);
  r.get("metric", metric);
  r.get("expected_order", expected);
  r.get("tolerance", tol);
  if (!j.contains("run")) throw Error(ErrorKind::schema, "convergence.run: missing");
  auto base = parse_config(r.sub("run"));
  r.finish();
  auto errors = convergence_errors(base, ns, metric);
  bool ok = true;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    json line = {{"type", "convergence"}, {"metric", metric}, {"n_cells", ns[k]}, {"error", errors[k]}};
    if (k > 0) {
      double ratio = static_cast<double>(ns[k]) / ns[k - 1];
      double order = std::log(errors[k - 1] / errors[k]) / std::log(ratio);
      line["order"] = order;
      if (expected >= 0 && !(std::abs(order - expected) <= tol)) ok = false;
    }
    line["config_hash"] = hash_string(base.hash());
    std::cout << line.dump() << "\n";
  }
  if (expected >= 0) {
    json s = {{"type", "convergence_summary"}, {"expected_order", expected}, {"tolerance", tol},
              {"verdict", ok ? "pass" : "fail"}, {"version", artifact_version}};
    std::cout << s.dump() << "\n";
  }
  return ok ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wkgs: hyperboloidal energy laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", artifact_version);

  auto* ci = app.add_subcommand("check-identities", "Randomized pointwise identity checks");
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double tol = 0;
  std::string precision = "f64";
  ci->add_option("--samples", samples, "sample count");
  ci->add_option("--seed", seed, "RNG seed");
  ci->add_option("--tol", tol, "relative tolerance (default 1e-10 f64, 1e-25 extended)");
  ci->add_option("--precision", precision, "f64 or extended")->check(CLI::IsMember({"f64", "extended"}));

  auto* evo = app.add_subcommand("evolve", "Evolve and record hyperboloidal energies");
  std::string config;
  evo->add_option("--config", config, "run configuration (JSON)")->required();

  auto* vb = app.add_subcommand("verify-balance", "Multiplier identity balance between two hyperboloids");
  std::string mult = "T";
  double a = 0, s0 = 0, s1 = 0, btol = 1e-3;
  std::size_t field = 0;
  vb->add_option("--config", config, "run configuration (JSON)")->required();
  vb->add_option("--multiplier", mult, "T, Ka, Ya or Kconf")->required()->check(CLI::IsMember({"T", "Ka", "Ya", "Kconf"}));
  vb->add_option("--a", a, "exponent");
  vb->add_option("--s0", s0, "first hyperboloid")->required();
  vb->add_option("--s1", s1, "last hyperboloid")->required();
  vb->add_option("--field", field, "field index");
  vb->add_option("--tol", btol, "residual tolerance");

  auto* fd = app.add_subcommand("fit-decay", "Power-law fit of a CSV column against s");
  std::string input, column;
  SeriesFilter filter;
  fd->add_option("--input", input, "energies or pointwise CSV")->required();
  fd->add_option("--column", column, "column to fit")->required();
  fd->add_option("--smin", filter.smin, "smallest s");
  fd->add_option("--smax", filter.smax, "largest s");
  fd->add_option("--grid-id", filter.grid_id, "grid_id filter");
  fd->add_option("--a", filter.a, "a filter");
  fd->add_option("--I", filter.I, "I filter (energies CSV)");
  fd->add_option("--J", filter.J, "J filter (energies CSV)");

  auto* cv = app.add_subcommand("convergence", "Observed order over refinements");
  std::string conv;
  cv->add_option("--config", conv, "convergence configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? exit_pass : exit_usage;
  }

  try {
    if (*ci) return cmd_check_identities(samples, seed, tol, precision);
    if (*evo) return cmd_evolve(config);
    if (*vb) return cmd_verify_balance(config, mult, a, s0, s1, field, btol);
    if (*fd) return cmd_fit_decay(input, column, filter);
    if (*cv) return cmd_convergence(conv);
  } catch (const Error& e) {
    std::cerr << "wkgs: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "wkgs: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}
