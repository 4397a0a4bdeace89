#include <gtest/gtest.h>

#include "wkg/balance.hpp"

using namespace wkg;

namespace {

ModelSpec forced_wave() {
  ModelSpec m;
  m.kind = ModelKind::linear_wave;
  m.mcase = manufactured_case(CaseKind::wave_with_polynomial_source);
  m.data.profile = "manufactured";
  m.manufactured_source = true;
  return m;
}

ModelSpec free_wave() {
  ModelSpec m;
  m.kind = ModelKind::linear_wave;
  m.mcase = manufactured_case(CaseKind::spherical_wave_bump);
  m.data.profile = "manufactured";
  return m;
}

GridSpec grid(int n, double extent, double t_end) {
  GridSpec g;
  g.extent = extent;
  g.n_cells = n;
  g.t0 = 3;
  g.t_end = t_end;
  return g;
}

}  // namespace

TEST(Balance, ZeroField) {
  ModelSpec m;
  auto r = verify_balance(m, grid(128, 8, 6), make_multiplier(MultiplierKind::Ka, 0.75), 4.0, 5.0, 2.5);
  EXPECT_EQ(r.flux_in, 0.0);
  EXPECT_EQ(r.flux_out, 0.0);
  EXPECT_EQ(r.bulk_A, 0.0);
  EXPECT_EQ(r.bulk_C, 0.0);
  EXPECT_EQ(r.source_term, 0.0);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(Balance, FreeWaveEnergyFlux) {
  auto coarse = verify_balance(free_wave(), grid(512, 12, 8), make_multiplier(MultiplierKind::T, 0.0), 4.0, 5.0, 5.0);
  auto r = verify_balance(free_wave(), grid(1024, 12, 8), make_multiplier(MultiplierKind::T, 0.0), 4.0, 5.0, 5.0);
  EXPECT_EQ(r.bulk_A, 0.0);
  EXPECT_EQ(r.source_term, 0.0);
  EXPECT_GT(r.flux_in, 0.0);
  EXPECT_LT(r.residual, 1e-3);
  EXPECT_GE(coarse.residual / r.residual, 3.4);
}

TEST(Balance, ForcedResidualConverges) {
  for (auto [k, a] : {std::pair{MultiplierKind::T, 0.0}, std::pair{MultiplierKind::Ka, 0.75}}) {
    std::vector<double> res;
    for (int n : {256, 512, 1024})
      res.push_back(verify_balance(forced_wave(), grid(n, 4, 6), make_multiplier(k, a), 4.0, 5.0, 2.5).residual);
    EXPECT_GE(res[0] / res[1], 3.4) << to_string(k);
    EXPECT_GE(res[1] / res[2], 3.4) << to_string(k);
    EXPECT_LT(res[2], 1e-4);
  }
}

TEST(Balance, ConformalOnFreeWave) {
  auto m = make_multiplier(MultiplierKind::Kconf, 0.5);
  auto coarse = verify_balance(free_wave(), grid(512, 12, 8), m, 4.0, 5.0, 5.0);
  auto r = verify_balance(free_wave(), grid(1024, 12, 8), m, 4.0, 5.0, 5.0);
  EXPECT_LE(std::abs(r.bulk_A), 1e-10 * r.flux_in);
  EXPECT_GE(r.bulk_C, 0.0);
  EXPECT_LT(r.residual, 1e-3);
  EXPECT_GE(coarse.residual / r.residual, 3.4);
}

TEST(Balance, KaBulkSign) {
  for (double a : {0.5, 0.75, 1.0}) {
    auto r = verify_balance(free_wave(), grid(512, 12, 8), make_multiplier(MultiplierKind::Ka, a), 4.0, 5.0, 5.0);
    EXPECT_GE(r.bulk_A, -1e-10 * r.flux_in) << a;
    EXPECT_LT(r.residual, 1e-3) << a;
  }
}

TEST(Balance, Coverage) {
  auto g = grid(256, 8, 6);
  EXPECT_THROW(BalanceVerifier(g, make_multiplier(MultiplierKind::T, 0.0), 4.0, 5.9, 2.5), Error);
  EXPECT_THROW(BalanceVerifier(g, make_multiplier(MultiplierKind::T, 0.0), 5.0, 4.0, 2.5), Error);
}

TEST(DecayFit, ExactPowerLaw) {
  std::vector<std::pair<double, double>> v, c, scaled;
  for (int i = 0; i < 12; ++i) {
    double s = 2.0 + 1.5 * i;
    v.push_back({s, 10 * std::pow(s, -1.5)});
    c.push_back({s, 3.0});
    scaled.push_back({s, 7e5 * 10 * std::pow(s, -1.5)});
  }
  auto f = fit_decay(v, "x");
  EXPECT_NEAR(f.p, -1.5, 1e-12);
  EXPECT_NEAR(f.log_amplitude, std::log(10.0), 1e-11);
  EXPECT_LT(f.rms, 1e-12);
  EXPECT_EQ(f.points, 12u);
  EXPECT_EQ(f.smin, 2.0);
  EXPECT_NEAR(fit_decay(c).p, 0.0, 1e-14);
  EXPECT_NEAR(fit_decay(scaled).p, f.p, 1e-12);
}

TEST(DecayFit, Errors) {
  std::vector<std::pair<double, double>> v;
  for (int i = 1; i <= 7; ++i) v.push_back({double(i), 1.0});
  EXPECT_THROW(fit_decay(v), Error);
  v.push_back({8.0, 0.0});
  try {
    fit_decay(v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_positive);
  }
}

TEST(Estimate, Ratios) {
  std::vector<EnergyRow> rows;
  for (int i = 0; i < 5; ++i) {
    EnergyRow r;
    r.s = 2 + i;
    r.a = 0.5;
    r.I = "0000";
    r.J = "000";
    r.grid_id = "g/phi";
    r.n.EW = 1.0;
    r.n.E1a = 2.0 + (i == 3 ? 0.1 : 0.0);
    r.n.E2a = 1.0;
    r.NWa_cum = 0.0;
    rows.push_back(r);
  }
  EXPECT_DOUBLE_EQ(verify_estimate(rows, {}, EstimateKind::energy_est1, 0.5, "g/phi", 0, 100).ratio, 1.0);
  EXPECT_DOUBLE_EQ(verify_estimate(rows, {}, EstimateKind::est_weight1, 0.5, "g/phi", 0, 100).ratio, 1.05);
  for (auto& r : rows) r.n = NormSet{};
  EXPECT_TRUE(verify_estimate(rows, {}, EstimateKind::est_weight2, 0.5, "g/phi", 0, 100).degenerate);
  EXPECT_THROW(verify_estimate(rows, {}, EstimateKind::est_weight2, 0.5, "h/phi", 0, 100), Error);
  EXPECT_THROW(parse_estimate("nope"), Error);
}
