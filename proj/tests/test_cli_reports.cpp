#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twohop/cli_reports.hpp"

using namespace twohop;

namespace {

const char* kGoodSource =
    "# binary symmetric hops\n"
    "x_size = 2\n"
    "y_size = 2\n"
    "z_size = 2\n"
    "p_x = 0.6 0.4\n"
    "p_y_given_x = 0.2 0.8  0.8 0.2\n"
    "p_z_given_y = 0.2 0.8  0.8 0.2   # Z = Y xor S\n";

std::string parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_source_config(in, "src.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::pair<int, std::string> run_cli(const std::string& args) {
  const std::string cmd = std::string(TWOHOP_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

RunConfig config(const std::string& command) {
  RunConfig c;
  c.command = command;
  return c;
}

}  // namespace

TEST(SourceConfig, ParsesAndMatchesBuiltin) {
  std::istringstream in(kGoodSource);
  const TwoHopSource s = parse_source_config(in);
  const TwoHopSource b = builtin_source();
  EXPECT_NEAR(s.info_xy(), b.info_xy(), 1e-12);
  EXPECT_NEAR(s.info_yz(), b.info_yz(), 1e-12);
}

TEST(SourceConfig, ErrorsCarryLineNumbers) {
  std::string bad = kGoodSource;
  bad.replace(bad.find("0.2 0.8  0.8 0.2\n"), 16, "0.2 0.7  0.8 0.2");
  EXPECT_NE(parse_error(bad).find("src.cfg"), std::string::npos);
  EXPECT_NE(parse_error("x_size = 2\nfoo = 1\n").find("src.cfg:2"), std::string::npos);
  EXPECT_NE(parse_error("x_size = 2\nx_size = 3\n").find(":2:"), std::string::npos);
  EXPECT_NE(parse_error("x_size 2\n").find(":1:"), std::string::npos);
  EXPECT_NE(parse_error("x_size = two\n").find(":1:"), std::string::npos);
  std::string short_px = kGoodSource;
  short_px.replace(short_px.find("p_x = 0.6 0.4"), 13, "p_x = 1.0    ");
  EXPECT_NE(parse_error(short_px).find(":5:"), std::string::npos);
  EXPECT_NE(parse_error("x_size = 2\n").find("missing key"), std::string::npos);
}

TEST(Csv, RoundTripIsExact) {
  std::vector<ReportRow> rows(3);
  rows[0].kind = "region";
  rows[0].variant = "full";
  rows[0].r1 = 0.1 + 0.2;
  rows[0].theta1_eps = 1.0 / 3.0;
  rows[0].quantize();
  rows[1].kind = "frontier";
  rows[1].variant = "tied_u1";
  rows[1].theta1 = 0.169743069706874;
  rows[1].status = "infeasible";
  rows[2].kind = "fixed_corner";
  rows[2].variant = "fixed";
  rows[2].rate_used_2 = 1e-17;
  std::stringstream ss;
  write_csv(ss, rows);
  const auto back = read_csv(ss);
  EXPECT_EQ(back, rows);
  std::stringstream again;
  write_csv(again, back);
  std::stringstream first;
  write_csv(first, rows);
  EXPECT_EQ(first.str(), again.str());
}

TEST(Grid, ParseAndExpand) {
  EXPECT_EQ(expand_grid(parse_grid("0.3:0.1:0.8")).size(), 6u);
  EXPECT_EQ(expand_grid(parse_grid("0.3:0.1:0.8")).back(), 0.8);
  EXPECT_TRUE(expand_grid(parse_grid("0.5:0.1:0.4")).empty());
  EXPECT_THROW(parse_grid("0.3-0.8"), ConfigError);
  EXPECT_THROW(parse_grid("0.3:0:0.8"), ConfigError);
}

TEST(CmdRegion, ReferenceRowAndZeroEps) {
  auto cfg = config("region");
  cfg.grid = "0.3:0.1:0.8";
  const auto rows = cmd_region(cfg);
  ASSERT_EQ(rows.size(), 6u);
  const auto& r = rows[2];
  EXPECT_EQ(r.r1, 0.5);
  EXPECT_NEAR(r.theta1_fix, 0.162282, 1e-3);
  EXPECT_NEAR(r.theta1_eps, 0.169743, 1e-3);
  EXPECT_NEAR(r.theta2_fix, 0.325872, 1e-3);
  EXPECT_NEAR(r.theta2_eps, 0.340886, 1e-3);
  cfg.eps1 = cfg.eps2 = 0.0;
  for (const auto& row : cmd_region(cfg)) {
    EXPECT_EQ(row.theta1_eps, row.theta1_fix);
    EXPECT_EQ(row.theta2_eps, row.theta2_fix);
  }
}

TEST(CmdRegion, EmptyGridSucceedsWithHeaderOnly) {
  auto cfg = config("region");
  cfg.grid = "0.5:0.1:0.4";
  std::ostringstream out, err;
  EXPECT_EQ(run(cfg, out, err), kExitOk);
  std::istringstream in(out.str());
  EXPECT_TRUE(read_csv(in).empty());
}

TEST(CmdFrontier, EndpointsAndGuards) {
  auto cfg = config("frontier");
  cfg.eps1 = 0.05, cfg.eps2 = 0.15;
  cfg.grid = "0:0.169743069578874:0.169743069578874";
  auto rows = cmd_frontier(cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[1].theta1, 0.169743069578874, 1e-12);
  EXPECT_NEAR(rows[1].theta2, 0.358132875286663, 2e-3);
  EXPECT_EQ(rows.back().kind, "fixed_corner");

  cfg.eps1 = 0.15, cfg.eps2 = 0.05;
  cfg.variants = {"tied_u2"};
  cfg.grid = "0.186759600912282:1:0.186759600912282";
  rows = cmd_frontier(cfg);
  ASSERT_GE(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_NEAR(rows[0].theta2, 0.171142727863628, 3e-3);

  cfg.grid = "0.3:1:0.3";
  rows = cmd_frontier(cfg);
  EXPECT_EQ(rows[0].status, "infeasible");

  cfg.eps2 = cfg.eps1;
  std::ostringstream out, err;
  EXPECT_EQ(run(cfg, out, err), kExitConfigError);
  EXPECT_NE(err.str().find("region"), std::string::npos);
}

TEST(CmdSimulate, EqualRegimeAlphaWithinSlack) {
  auto cfg = config("simulate");
  cfg.n = 200;
  cfg.trials = 10000;
  const auto j = cmd_simulate(cfg);
  EXPECT_LE(j["alpha1"]["value"].get<double>(), cfg.eps1 + 0.03);
  EXPECT_LE(j["alpha2"]["value"].get<double>(), cfg.eps2 + 0.03);
  EXPECT_EQ(j["alpha1"]["trials"].get<std::size_t>(), 10000u);
}

TEST(CmdSimulate, ValidationAndDeterminism) {
  auto cfg = config("simulate");
  cfg.trials = 0;
  std::ostringstream o1, e1;
  EXPECT_EQ(run(cfg, o1, e1), kExitConfigError);

  cfg.trials = 200;
  cfg.eps1 = 0.05, cfg.eps2 = 0.15;
  cfg.theta1 = 0.05;
  cfg.r1 = cfg.r2 = 0.25;
  const auto tr1 = std::filesystem::temp_directory_path() / "twohop_tr1.ndjson";
  const auto tr2 = std::filesystem::temp_directory_path() / "twohop_tr2.ndjson";
  std::ostringstream a, b, err;
  cfg.transcript = tr1.string();
  EXPECT_EQ(run(cfg, a, err), kExitOk);
  cfg.transcript = tr2.string();
  cfg.threads = 3;
  EXPECT_EQ(run(cfg, b, err), kExitOk);
  EXPECT_EQ(a.str(), b.str());
  std::ifstream f1(tr1), f2(tr2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  const std::string t1 = s1.str();
  EXPECT_EQ(t1, s2.str());
  EXPECT_EQ(std::count(t1.begin(), t1.end(), '\n'), 400);

  cfg.theta1 = 0.5;  // beyond the frontier
  std::ostringstream c;
  EXPECT_EQ(run(cfg, c, err), kExitConfigError);
}

TEST(CmdSimulate, TableBackendGuardIsAConfigError) {
  auto cfg = config("simulate");
  cfg.n = 200;
  cfg.codebook = "table";
  std::ostringstream out, err;
  EXPECT_EQ(run(cfg, out, err), kExitConfigError);
  EXPECT_NE(err.str().find("ensemble"), std::string::npos);
}

TEST(CmdValidate, DefaultSuitePassesAndReportsDeltas) {
  auto cfg = config("validate");
  cfg.oracle_resolution = 0.01;
  const auto [j, pass] = cmd_validate(cfg);
  EXPECT_TRUE(pass);
  int oracle_checks = 0;
  for (const auto& c : j["checks"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
    if (c["name"].get<std::string>().rfind("oracle_", 0) == 0) {
      ++oracle_checks;
      EXPECT_LE(c["delta"].get<double>(), 0.02);
    }
  }
  EXPECT_EQ(oracle_checks, 6);
}

TEST(CmdValidate, CorruptedSourceIsReported) {
  std::string bad = kGoodSource;
  bad.replace(bad.find("p_x = 0.6 0.4"), 13, "p_x = 0.6 0.5");
  const auto path = temp_file("twohop_bad.cfg", bad);
  auto cfg = config("validate");
  cfg.source = path.string();
  std::ostringstream out, err;
  EXPECT_EQ(run(cfg, out, err), kExitConfigError);
  EXPECT_NE(err.str().find("twohop_bad.cfg"), std::string::npos);
}

TEST(Binary, ExitCodesAndSourceFiles) {
  const auto good = temp_file("twohop_good.cfg", kGoodSource);
  auto [rc, out] = run_cli("--source " + good.string() + " --command region --grid 0.5:0.1:0.5");
  EXPECT_EQ(rc, 0);
  EXPECT_NE(out.find("0.340885"), std::string::npos);
  EXPECT_EQ(run_cli("--command region --eps1 0.05 --eps2 0.1").first, 2);
  EXPECT_EQ(run_cli("--command nonsense").first, 2);
  EXPECT_EQ(run_cli("--command region --r1 abc").first, 2);
  EXPECT_EQ(run_cli("").first, 2);
  EXPECT_EQ(run_cli("--source /nonexistent.cfg --command region").first, 2);
  EXPECT_EQ(run_cli("--command simulate --trials 0").first, 2);
  EXPECT_EQ(run_cli("--help").first, 0);
}
