// Command layer behind tools/twohop_cli: source ingestion, CSV/JSON reports
// and the validation suite. Kept in the header library so it can be tested
// without spawning processes.
#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "twohop/exponent_regions.hpp"
#include "twohop/forwarding.hpp"
#include "twohop/probability.hpp"
#include "twohop/twohop_sim.hpp"

namespace twohop {

/// Bad input: unreadable or malformed files, inconsistent options.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitValidationFailed = 1, kExitConfigError = 2 };

inline constexpr const char* kBuiltinSourceName = "dsbs-example";

inline TwoHopSource builtin_source() { return binary_xor_source(0.4, 0.8, 0.8); }

// Source files ------------------------------------------------------------------
//
//   # comment
//   x_size = 2
//   y_size = 2
//   z_size = 2
//   p_x = 0.6 0.4
//   p_y_given_x = 0.68 0.32  0.32 0.68     (row-major, one row per x)
//   p_z_given_y = 0.68 0.32  0.32 0.68

inline TwoHopSource parse_source_config(std::istream& in, const std::string& name = "<source>") {
  std::map<std::string, std::pair<std::vector<double>, int>> fields;
  std::string line;
  int lineno = 0;
  auto fail = [&](int at, const std::string& msg) -> void {
    throw ConfigError(name + ":" + std::to_string(at) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = values'");
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    static const std::vector<std::string> known = {"x_size", "y_size", "z_size", "p_x", "p_y_given_x", "p_z_given_y"};
    if (std::find(known.begin(), known.end(), key) == known.end()) fail(lineno, "unknown key '" + key + "'");
    if (fields.contains(key)) fail(lineno, "duplicate key '" + key + "'");
    std::istringstream vs(line.substr(eq + 1));
    std::vector<double> vals;
    std::string tok;
    while (vs >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) fail(lineno, "not a number: '" + tok + "'");
      vals.push_back(v);
    }
    if (vals.empty()) fail(lineno, "no values for '" + key + "'");
    fields[key] = {std::move(vals), lineno};
  }
  for (const char* k : {"x_size", "y_size", "z_size", "p_x", "p_y_given_x", "p_z_given_y"})
    if (!fields.contains(k)) fail(lineno, std::string("missing key '") + k + "'");

  auto size_of = [&](const char* k) {
    const auto& [v, at] = fields[k];
    if (v.size() != 1 || v[0] < 1 || v[0] > 255 || v[0] != std::floor(v[0])) fail(at, std::string(k) + " must be an integer in 1..255");
    return static_cast<std::size_t>(v[0]);
  };
  const std::size_t xs = size_of("x_size"), ys = size_of("y_size"), zs = size_of("z_size");
  auto expect = [&](const char* k, std::size_t count) -> const std::vector<double>& {
    const auto& [v, at] = fields[k];
    if (v.size() != count)
      fail(at, std::string(k) + " needs " + std::to_string(count) + " values, got " + std::to_string(v.size()));
    return v;
  };
  try {
    Pmf p_x(expect("p_x", xs));
    auto p_yx = ConditionalPmf::from_row_major(xs, ys, expect("p_y_given_x", xs * ys));
    auto p_zy = ConditionalPmf::from_row_major(ys, zs, expect("p_z_given_y", ys * zs));
    return compose_two_hop(std::move(p_x), std::move(p_yx), std::move(p_zy));
  } catch (const InvalidDistribution& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const DimensionMismatch& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

inline TwoHopSource load_source(const std::string& spec) {
  if (spec == kBuiltinSourceName) return builtin_source();
  std::ifstream f(spec);
  if (!f) throw ConfigError("cannot open source file '" + spec + "'");
  return parse_source_config(f, spec);
}

// CSV -------------------------------------------------------------------------------

/// Rounds to 15 significant digits, the precision of every report.
inline double quantize15(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

inline std::string format15(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline double parse_cell(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("CSV: not a number: '" + s + "'");
  return v;
}

inline bool same_value(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

/// One report row. Region rows fill the *_fix and *_eps columns;
/// frontier rows fill theta1/theta2 and the rates actually used. Unused
/// cells are NaN and serialize as empty.
struct ReportRow {
  std::string kind;     // region | frontier | fixed_corner
  std::string variant;  // full | tied_u1 | tied_u2 | tied_both | fixed
  double r1 = NAN, r2 = NAN, eps1 = NAN, eps2 = NAN;
  double theta1_fix = NAN, theta1_eps = NAN, theta2_fix = NAN, theta2_eps = NAN;
  double theta1 = NAN, theta2 = NAN, rate_used_1 = NAN, rate_used_2 = NAN;
  std::string status = "ok";  // ok | infeasible

  ReportRow& quantize() {
    for (double* v : numbers()) *v = quantize15(*v);
    return *this;
  }

  std::array<double*, 12> numbers() {
    return {&r1, &r2, &eps1, &eps2, &theta1_fix, &theta1_eps, &theta2_fix, &theta2_eps,
            &theta1, &theta2, &rate_used_1, &rate_used_2};
  }
  std::array<double, 12> values() const {
    return {r1, r2, eps1, eps2, theta1_fix, theta1_eps, theta2_fix, theta2_eps, theta1, theta2, rate_used_1, rate_used_2};
  }

  friend bool operator==(const ReportRow& a, const ReportRow& b) {
    const auto va = a.values(), vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i)
      if (!same_value(va[i], vb[i])) return false;
    return a.kind == b.kind && a.variant == b.variant && a.status == b.status;
  }
};

inline const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h = {"kind",       "variant",    "r1",         "r2",          "eps1",
                                             "eps2",       "theta1_fix", "theta1_eps", "theta2_fix",  "theta2_eps",
                                             "theta1",     "theta2",     "rate_used_1", "rate_used_2", "status"};
  return h;
}

inline void write_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  const auto& h = csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << "\n";
  for (const auto& row : rows) {
    os << row.kind << "," << row.variant;
    for (double v : row.values()) os << "," << format15(v);
    os << "," << row.status << "\n";
  }
}

inline std::vector<ReportRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("CSV: missing header");
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != csv_header().size()) throw ConfigError("CSV: wrong number of cells in '" + line + "'");
    ReportRow r;
    r.kind = cells[0];
    r.variant = cells[1];
    auto nums = r.numbers();
    for (std::size_t i = 0; i < nums.size(); ++i) *nums[i] = parse_cell(cells[2 + i]);
    r.status = cells.back();
    rows.push_back(r);
  }
  return rows;
}

// Run configuration ---------------------------------------------------------------

struct GridSpec {
  double start = 0.0, step = 0.0, end = 0.0;
};

inline GridSpec parse_grid(const std::string& s) {
  GridSpec g;
  char a = 0, b = 0;
  std::istringstream is(s);
  if (!(is >> g.start >> a >> g.step >> b >> g.end) || a != ':' || b != ':' || !is.eof())
    throw ConfigError("grid must look like start:step:end, got '" + s + "'");
  if (!(g.step > 0.0)) throw ConfigError("grid step must be positive");
  return g;
}

/// start, start+step, ... up to end; empty when end < start.
inline std::vector<double> expand_grid(const GridSpec& g) {
  std::vector<double> v;
  for (std::size_t k = 0;; ++k) {
    const double x = quantize15(g.start + static_cast<double>(k) * g.step);
    if (x > g.end + 1e-9 * g.step) break;
    v.push_back(x);
    if (v.size() > 1000000) throw ConfigError("grid has more than 10^6 points");
  }
  return v;
}

struct RunConfig {
  std::string source = kBuiltinSourceName;
  std::string command;  // region | frontier | simulate | validate
  double r1 = 0.5, r2 = 0.5;
  double eps1 = 0.05, eps2 = 0.05;
  std::optional<std::string> grid;
  std::vector<std::string> variants = {"full"};
  double theta1 = 0.0;  // operating point for simulate in the unequal regimes
  std::size_t n = 100;
  double mu = 0.0;  // 0 = n^{-1/3}
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::string codebook = "auto";
  std::string transcript;
  std::string out;
  unsigned threads = 0;
  double oracle_resolution = 0.01;
  OptimizerConfig optimizer;

  void validate() const {
    static const std::vector<std::string> cmds = {"region", "frontier", "simulate", "validate"};
    if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
      throw ConfigError("unknown command '" + command + "'");
    if (!(r1 >= 0.0 && r2 >= 0.0)) throw ConfigError("rates must be >= 0");
    for (double e : {eps1, eps2})
      if (!(e >= 0.0 && e < 1.0)) throw ConfigError("eps must lie in [0, 1)");
    if (command == "simulate") {
      if (trials == 0) throw ConfigError("trials must be >= 1");
      if (n == 0) throw ConfigError("n must be >= 1");
      if (mu < 0.0) throw ConfigError("mu must be > 0 (0 selects n^{-1/3})");
    }
    if (!(oracle_resolution > 0.0 && oracle_resolution <= 0.5)) throw ConfigError("oracle resolution must be in (0, 0.5]");
    for (const auto& v : variants) {
      try {
        parse_variant(v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    try {
      parse_backend(codebook);
      optimizer.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

// Commands ------------------------------------------------------------------------

/// Maximum-rate and expected-rate exponents over R = R1 = R2 at eps1 = eps2.
inline std::vector<ReportRow> cmd_region(const RunConfig& cfg) {
  if (cfg.eps1 != cfg.eps2) throw ConfigError("region needs eps1 = eps2; use --command frontier otherwise");
  const auto grid = cfg.grid ? expand_grid(parse_grid(*cfg.grid)) : std::vector<double>{cfg.r1};
  RegionSolver solver(load_source(cfg.source), cfg.optimizer);
  std::vector<ReportRow> rows;
  for (double r : grid) {
    const RateBudget b{r, r};
    const auto [corner, sol] = solver.region_equal_eps(b, cfg.eps1);
    ReportRow row;
    row.kind = "region";
    row.variant = "full";
    row.r1 = row.r2 = r;
    row.eps1 = row.eps2 = cfg.eps1;
    row.theta1_fix = solver.theta1_fix(r);
    row.theta2_fix = solver.theta2_fix(b);
    row.theta1_eps = corner.theta1;
    row.theta2_eps = corner.theta2;
    row.rate_used_1 = sol.rates_used.r1;
    row.rate_used_2 = sol.rates_used.r2;
    rows.push_back(row.quantize());
  }
  return rows;
}

/// theta2-versus-theta1 frontiers for the requested variants plus the
/// maximum-rate corner. Without a grid, theta1 runs over [0, max] in 40 steps.
inline std::vector<ReportRow> cmd_frontier(const RunConfig& cfg) {
  if (cfg.eps1 == cfg.eps2) throw ConfigError("frontier needs eps1 != eps2; use --command region for eps1 = eps2");
  RegionSolver solver(load_source(cfg.source), cfg.optimizer);
  const RateBudget b{cfg.r1, cfg.r2};
  const EpsilonPair eps{cfg.eps1, cfg.eps2};
  std::vector<double> grid;
  if (cfg.grid) {
    grid = expand_grid(parse_grid(*cfg.grid));
  } else {
    const double top = solver.max_theta1(b, eps);
    for (int k = 0; k < 40; ++k) grid.push_back(quantize15(top * k / 40.0));
    grid.push_back(top);
  }
  std::vector<ReportRow> rows;
  auto base = [&](const char* kind, std::string variant) {
    ReportRow r;
    r.kind = kind;
    r.variant = std::move(variant);
    r.r1 = cfg.r1, r.r2 = cfg.r2, r.eps1 = cfg.eps1, r.eps2 = cfg.eps2;
    return r;
  };
  for (const auto& name : cfg.variants) {
    const Variant v = parse_variant(name);
    const Frontier f = regime_for(eps) == Regime::eps2_greater ? solver.frontier_eps2_greater(b, eps, grid, v)
                                                               : solver.frontier_eps1_greater(b, eps, grid, v);
    for (const auto& p : f.points) {
      auto r = base("frontier", name);
      r.theta1 = p.theta1;
      r.theta2 = p.theta2;
      r.rate_used_1 = p.solution.rates_used.r1;
      r.rate_used_2 = p.solution.rates_used.r2;
      rows.push_back(r.quantize());
    }
    for (double t : f.infeasible_theta1) {
      auto r = base("frontier", name);
      r.theta1 = t;
      r.status = "infeasible";
      rows.push_back(r.quantize());
    }
  }
  const auto fixed = solver.fixed_solution(b);
  auto r = base("fixed_corner", "fixed");
  r.theta1 = fixed.achieved.theta1;
  r.theta2 = fixed.achieved.theta2;
  r.rate_used_1 = fixed.rates_used.r1;
  r.rate_used_2 = fixed.rates_used.r2;
  rows.push_back(r.quantize());
  return rows;
}

inline nlohmann::json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"count", e.count}, {"trials", e.trials}, {"ci95", {e.lower, e.upper}}};
}

inline nlohmann::json branches_json(const std::array<std::size_t, 4>& c) {
  nlohmann::json j = nlohmann::json::object();
  for (Branch b : {Branch::S, Branch::Dprime, Branch::Ddprime, Branch::atypical})
    j[std::string(to_string(b))] = c[static_cast<std::size_t>(b)];
  return j;
}

/// Channels for the simulator: the E1 corner, or the frontier point at theta1.
inline AuxiliarySolution simulation_channels(const RegionSolver& solver, const RunConfig& cfg) {
  const RateBudget b{cfg.r1, cfg.r2};
  const EpsilonPair eps{cfg.eps1, cfg.eps2};
  switch (regime_for(eps)) {
    case Regime::equal: return solver.region_equal_eps(b, cfg.eps1).second;
    case Regime::eps2_greater:
      return solver.frontier_point_eps2_greater(b, eps, cfg.theta1, parse_variant(cfg.variants.front())).solution;
    default:
      return solver.frontier_point_eps1_greater(b, eps, cfg.theta1, parse_variant(cfg.variants.front())).solution;
  }
}

inline nlohmann::json cmd_simulate(const RunConfig& cfg, std::ostream* transcript = nullptr) {
  const TwoHopSource src = load_source(cfg.source);
  RegionSolver solver(src, cfg.optimizer);
  AuxiliarySolution channels;
  try {
    channels = simulation_channels(solver, cfg);
  } catch (const InfeasibleTheta1& e) {
    throw ConfigError(std::string("simulate: ") + e.what());
  }

  SchemeParams p;
  p.source = src;
  p.eps = {cfg.eps1, cfg.eps2};
  p.regime = regime_for(p.eps);
  p.n = cfg.n;
  p.mu = cfg.mu;
  p.channels = channels;
  p.partition_seed = derive_seed(cfg.seed, 11);
  p.codebook_seed = derive_seed(cfg.seed, 12);
  p.noise_seed = derive_seed(cfg.seed, 13);
  p.backend = parse_backend(cfg.codebook);
  const PartitionRule rule = default_partition(p);

  std::optional<Scheme> scheme;
  try {
    scheme.emplace(p, rule);
  } catch (const CodebookTooLarge& e) {
    throw ConfigError(std::string(e.what()) + " (try --codebook ensemble, or lower --r1/--r2 or --n)");
  }
  TranscriptSink sink;
  if (transcript)
    sink = [&](std::size_t i, const TrialOutcome& t) {
      *transcript << transcript_line(static_cast<std::size_t>(t.hyp) * cfg.trials + i, t) << "\n";
    };
  const SimulationStats st = estimate_errors(*scheme, cfg.trials, cfg.seed, cfg.threads, sink);

  nlohmann::json warnings = nlohmann::json::array();
  if (scheme->partitioner().capped())
    warnings.push_back("target Pr[S] exceeds Pr[T_mu(P_X)]; S was capped to the typical set");
  if (p.eps.beyond_fixed_rate_range()) warnings.push_back("eps >= 0.5: maximum-rate comparison is outside its proven range");

  auto infos = [&](ChannelRole role, bool first_hop) -> nlohmann::json {
    if (!channels.has(role)) return nullptr;
    const auto [rin, rout] = first_hop ? detail::info_pair(src.p_x, src.p_y_given_x, channels.channel(role))
                                       : detail::info_pair(src.p_y, src.p_z_given_y, channels.channel(role));
    return {{"rate_info", rin}, {"forwarded_info", rout}};
  };
  nlohmann::json theory = {{"theta1", channels.achieved.theta1},
                           {"theta2", channels.achieved.theta2},
                           {"rates_used", {channels.rates_used.r1, channels.rates_used.r2}}};
  for (ChannelRole role : {ChannelRole::u1, ChannelRole::u1_prime, ChannelRole::u1_dprime})
    if (channels.has(role)) theory["channels"][std::string(to_string(role))] = infos(role, true);
  for (ChannelRole role : {ChannelRole::u2, ChannelRole::u2_prime, ChannelRole::u2_dprime})
    if (channels.has(role)) theory["channels"][std::string(to_string(role))] = infos(role, false);

  return {
      {"command", "simulate"},
      {"regime", to_string(p.regime)},
      {"source", cfg.source},
      {"r", {cfg.r1, cfg.r2}},
      {"eps", {cfg.eps1, cfg.eps2}},
      {"n", cfg.n},
      {"mu", scheme->mu()},
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"codebook_backend", scheme->uses_tables() ? "table" : "ensemble"},
      {"partition",
       {{"s_prob", rule.s_prob},
        {"d2_prob", rule.d2_prob},
        {"typical_probability", scheme->partitioner().typical_probability()},
        {"capped", scheme->partitioner().capped()}}},
      {"alpha1", estimate_json(st.alpha1_hat)},
      {"alpha2", estimate_json(st.alpha2_hat)},
      {"beta1", estimate_json(st.beta1_hat)},
      {"beta2", estimate_json(st.beta2_hat)},
      {"beta1_conditional", {{"mean", st.beta1_conditional.mean}, {"std_error", st.beta1_conditional.std_error}}},
      {"beta2_conditional", {{"mean", st.beta2_conditional.mean}, {"std_error", st.beta2_conditional.std_error}}},
      {"mean_len1", st.mean_len1},
      {"mean_len2", st.mean_len2},
      {"length_budget", {static_cast<double>(cfg.n) * cfg.r1, static_cast<double>(cfg.n) * cfg.r2}},
      {"branches_h0", branches_json(st.branch_counts_h0)},
      {"branches_h1", branches_json(st.branch_counts_h1)},
      {"theory", theory},
      {"warnings", warnings},
  };
}

/// Oracle equivalence and invariant checks on the configured source.
/// Returns the report and whether every check passed.
inline std::pair<nlohmann::json, bool> cmd_validate(const RunConfig& cfg) {
  const TwoHopSource src = load_source(cfg.source);
  RegionSolver solver(src, cfg.optimizer);
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  auto record = [&](std::string name, double delta, double tol, bool pass) {
    checks.push_back({{"name", std::move(name)}, {"pass", pass}, {"delta", delta}, {"tolerance", tol}});
    all = all && pass;
  };

  // Optimizer versus exhaustive grid, where the grid is tractable.
  const double res = cfg.oracle_resolution;
  for (Side side : {Side::tx_to_relay, Side::relay_to_rx}) {
    const std::size_t in = side == Side::tx_to_relay ? src.x_size() : src.y_size();
    if (in > 2) continue;
    for (double cap : {0.1, 0.3, 0.5}) {
      const double got = solver.forward(side, cap).value;
      const double ref = brute_force_oracle(src, side, cap, res);
      const double d = std::abs(got - ref);
      record(std::string("oracle_") + (side == Side::tx_to_relay ? "tx" : "relay") + "_cap_" + format15(cap), d,
             2.0 * res, d <= 2.0 * res);
    }
  }

  // Monotone in the cap, and never above the unconstrained information.
  for (Side side : {Side::tx_to_relay, Side::relay_to_rx}) {
    double prev = 0.0, worst = 0.0;
    const double ceiling = side == Side::tx_to_relay ? src.info_xy() : src.info_yz();
    for (int k = 0; k <= 19; ++k) {
      const double v = solver.forward(side, 0.05 * k).value;
      worst = std::max({worst, prev - v, v - ceiling});
      prev = v;
    }
    record(std::string("monotone_") + (side == Side::tx_to_relay ? "tx" : "relay"), worst, 1e-9, worst <= 1e-9);
  }

  const double dpi = std::max(src.info_xz() - src.info_xy(), src.info_xz() - src.info_yz());
  record("data_processing", std::max(0.0, dpi), 1e-12, dpi <= 1e-12);
  const double mi_gap = std::abs(mutual_information(src.p_xy) -
                                 (entropy(src.p_xy.marginal(0)) + entropy(src.p_xy.marginal(1)) - entropy(src.p_xy)));
  record("mutual_information_identity", mi_gap, 1e-9, mi_gap <= 1e-9);

  const RateBudget b{cfg.r1, cfg.r2};
  const double eps = std::min(cfg.eps1, cfg.eps2);
  const auto [corner, sol] = solver.region_equal_eps(b, eps);
  record("equal_eps_solution_verified", 0.0, 1e-9, verify_solution(src, sol, b, {eps, eps}, Regime::equal));
  const double boost = std::abs(corner.theta1 - solver.theta1_fix(cfg.r1 / (1.0 - eps)));
  record("boost_identity", boost, 1e-12, boost <= 1e-12);

  const auto fixed = solver.fixed_solution(b);
  for (const EpsilonPair pair : {EpsilonPair{eps, eps + 0.1}, EpsilonPair{eps + 0.1, eps}}) {
    const Regime regime = regime_for(pair);
    const std::string tag = std::string(to_string(regime));
    const double top = solver.max_theta1(b, pair);
    const std::vector<double> grid = {0.0, quantize15(fixed.achieved.theta1), quantize15(0.5 * (top + fixed.achieved.theta1)), top};
    auto trace = [&](Variant v) {
      return regime == Regime::eps2_greater ? solver.frontier_eps2_greater(b, pair, grid, v)
                                            : solver.frontier_eps1_greater(b, pair, grid, v);
    };
    const Frontier full = trace(Variant::full);
    bool verified = !full.points.empty();
    for (const auto& p : full.points) verified = verified && verify_solution(src, p.solution, b, pair, regime);
    record(tag + "_solutions_verified", 0.0, 1e-9, verified);

    double worst = 0.0;
    for (Variant v : {Variant::tied_u1, Variant::tied_u2, Variant::tied_both}) {
      if (regime == Regime::eps2_greater && v != Variant::tied_u1) continue;
      const Frontier tied = trace(v);
      for (const auto& tp : tied.points)
        for (const auto& fp : full.points)
          if (fp.theta1 == tp.theta1) worst = std::max(worst, tp.theta2 - fp.theta2);
    }
    record(tag + "_full_dominates_tied", worst, 1e-9, worst <= 1e-9);

    double fixed_gap = 0.0;
    for (const auto& fp : full.points)
      if (fp.theta1 <= fixed.achieved.theta1) fixed_gap = std::max(fixed_gap, fixed.achieved.theta2 - fp.theta2);
    record(tag + "_contains_fixed_corner", fixed_gap, 1e-9, fixed_gap <= 1e-9);
  }
  return {{{"command", "validate"}, {"source", cfg.source}, {"passed", all}, {"checks", checks}}, all};
}

/// Runs one command; returns the process exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.out.empty()) {
      file.open(cfg.out);
      if (!file) throw ConfigError("cannot write '" + cfg.out + "'");
      sink = &file;
    }
    if (cfg.command == "region") {
      write_csv(*sink, cmd_region(cfg));
    } else if (cfg.command == "frontier") {
      write_csv(*sink, cmd_frontier(cfg));
    } else if (cfg.command == "simulate") {
      std::ofstream tr;
      if (!cfg.transcript.empty()) {
        tr.open(cfg.transcript);
        if (!tr) throw ConfigError("cannot write '" + cfg.transcript + "'");
      }
      *sink << cmd_simulate(cfg, cfg.transcript.empty() ? nullptr : &tr).dump(2) << "\n";
    } else {
      const auto [report, pass] = cmd_validate(cfg);
      *sink << report.dump(2) << "\n";
      if (!pass) {
        err << "validation failed\n";
        return kExitValidationFailed;
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace twohop
