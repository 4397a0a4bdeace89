#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run wkgs(const std::string& args) {
  std::string cmd = std::string(WKGS_BIN) + " " + args + " 2>cli_stderr.txt";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string stderr_text() {
  std::ifstream in("cli_stderr.txt");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<nlohmann::json> lines(const std::string& s) {
  std::vector<nlohmann::json> out;
  std::size_t a = 0;
  while (a < s.size()) {
    auto b = s.find('\n', a);
    if (b == std::string::npos) b = s.size();
    if (b > a) out.push_back(nlohmann::json::parse(s.substr(a, b - a)));
    a = b + 1;
  }
  return out;
}

const std::string data_dir = WKGS_TEST_DATA;

}  // namespace

TEST(Cli, CheckIdentities) {
  auto r = wkgs("check-identities --samples 500 --seed 3");
  EXPECT_EQ(r.code, 0);
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  for (const auto& l : ls) EXPECT_EQ(l["verdict"], "pass");
  auto f = wkgs("check-identities --samples 500 --tol 1e-18 --precision f64");
  EXPECT_EQ(f.code, 1);
  auto z = wkgs("check-identities --samples 0");
  EXPECT_EQ(z.code, 0);
  EXPECT_NE(stderr_text().find("warning"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(wkgs("").code, 2);
  EXPECT_EQ(wkgs("evolve").code, 2);
  EXPECT_EQ(wkgs("check-identities --precision quad").code, 2);
  auto m = wkgs("evolve --config missing_file.json");
  EXPECT_EQ(m.code, 2);
  EXPECT_NE(stderr_text().find("missing_file.json"), std::string::npos);
  {
    std::ofstream o("bad_key.json");
    o << R"({"grid": {"n_cels": 64}})";
  }
  EXPECT_EQ(wkgs("evolve --config bad_key.json").code, 2);
  EXPECT_NE(stderr_text().find("config.grid.n_cels"), std::string::npos);
}

TEST(Cli, EvolveFitBalance) {
  std::filesystem::remove_all("small_run_out");
  auto r = wkgs("evolve --config " + data_dir + "/small_run.json");
  ASSERT_EQ(r.code, 0) << stderr_text();
  auto meta = lines(r.out).at(0);
  const std::string hash = meta["config_hash"];
  for (auto name : {"energies.csv", "pointwise.csv"}) {
    std::ifstream in(std::string("small_run_out/") + name);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "# wkgs 0.1.0 config_hash=" + hash);
  }
  EXPECT_TRUE(std::filesystem::exists("small_run_out/final.wkgs"));
  std::ifstream rep("small_run_out/report.jsonl");
  std::string l1;
  std::getline(rep, l1);
  auto j = nlohmann::json::parse(l1);
  EXPECT_EQ(j["config_hash"], hash);
  EXPECT_EQ(j["config"]["grid"]["n_cells"], 512);

  auto f = wkgs("fit-decay --input small_run_out/energies.csv --column EW --a 0");
  ASSERT_EQ(f.code, 0) << stderr_text();
  auto fit = lines(f.out).at(0);
  EXPECT_NEAR(fit["p"].get<double>(), 0.0, 0.01);
  EXPECT_EQ(fit["points"], 10);
  EXPECT_EQ(wkgs("fit-decay --input small_run_out/energies.csv --column EW").code, 2);
  EXPECT_EQ(wkgs("fit-decay --input small_run_out/energies.csv --column nope --a 0").code, 2);
  auto pw = wkgs("fit-decay --input small_run_out/pointwise.csv --column sup_tau_half --a 0.5 --smin 3.6");
  EXPECT_EQ(pw.code, 0) << stderr_text();
  EXPECT_EQ(lines(pw.out).at(0)["points"], 9);

  auto b = wkgs("verify-balance --config " + data_dir + "/small_run.json --multiplier T --s0 4 --s1 5 --tol 1e-2");
  ASSERT_EQ(b.code, 0) << stderr_text();
  auto bl = lines(b.out).at(0);
  EXPECT_EQ(bl["verdict"], "pass");
  EXPECT_EQ(bl["config_hash"], hash);
  EXPECT_EQ(wkgs("verify-balance --config " + data_dir + "/small_run.json --multiplier Ka --a 0.2 --s0 4 --s1 5").code,
            2);
  EXPECT_EQ(wkgs("verify-balance --config " + data_dir + "/small_run.json --multiplier T --s0 4 --s1 7.9").code, 2);
}

TEST(Cli, Convergence) {
  auto r = wkgs("convergence --config " + data_dir + "/small_conv.json");
  EXPECT_EQ(r.code, 0) << stderr_text();
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_NEAR(ls[1]["order"].get<double>(), 2.0, 0.3);
  EXPECT_EQ(ls[2]["verdict"], "pass");
}
