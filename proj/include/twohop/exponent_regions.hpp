// Type-II error exponent regions of the two-hop network X -> relay(Y) -> receiver(Z)
// under maximum-rate and expected-rate constraints.
//
// Every region reduces to rate-constrained forwarding problems
//
//   F(c) = max I(U1;Y) s.t. I(U1;X) <= c      (transmitter -> relay)
//   G(c) = max I(U2;Z) s.t. I(U2;Y) <= c      (relay -> receiver)
//
// because each auxiliary channel enters the objective and the exponent
// constraints only through its own forwarded information, monotonically.
// The frontiers are then searches over how the rate budgets are split between
// the primed and double-primed channels.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "twohop/forwarding.hpp"
#include "twohop/parallel.hpp"
#include "twohop/probability.hpp"

namespace twohop {

struct InfeasibleTheta1 : std::domain_error {
  using std::domain_error::domain_error;
};
struct UnsupportedAlphabet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Rates in bits per source symbol.
struct RateBudget {
  double r1 = 0.0;
  double r2 = 0.0;

  void validate() const {
    if (!(r1 >= 0.0) || !(r2 >= 0.0)) throw std::invalid_argument("RateBudget: rates must be >= 0");
  }
};

/// Permissible type-I error probabilities at the relay (eps1) and receiver (eps2).
struct EpsilonPair {
  double eps1 = 0.0;
  double eps2 = 0.0;

  void validate() const {
    for (double e : {eps1, eps2})
      if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("EpsilonPair: each eps must lie in [0, 1)");
  }
  /// The maximum-rate region is only established for eps <= 1/2.
  bool beyond_fixed_rate_range() const { return eps1 >= 0.5 || eps2 >= 0.5; }
};

struct ExponentPair {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

enum class Side { tx_to_relay, relay_to_rx };
enum class Regime { equal, eps2_greater, eps1_greater, fixed };
enum class Variant { full, tied_u1, tied_u2, tied_both };
enum class ChannelRole { u1, u1_prime, u1_dprime, u2, u2_prime, u2_dprime };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::equal: return "equal";
    case Regime::eps2_greater: return "eps2_greater";
    case Regime::eps1_greater: return "eps1_greater";
    case Regime::fixed: return "fixed";
  }
  return "?";
}
inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::tied_u1: return "tied_u1";
    case Variant::tied_u2: return "tied_u2";
    case Variant::tied_both: return "tied_both";
  }
  return "?";
}
inline std::string_view to_string(ChannelRole c) {
  switch (c) {
    case ChannelRole::u1: return "u1";
    case ChannelRole::u1_prime: return "u1_prime";
    case ChannelRole::u1_dprime: return "u1_dprime";
    case ChannelRole::u2: return "u2";
    case ChannelRole::u2_prime: return "u2_prime";
    case ChannelRole::u2_dprime: return "u2_dprime";
  }
  return "?";
}
inline Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::full, Variant::tied_u1, Variant::tied_u2, Variant::tied_both})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}
inline Regime regime_for(const EpsilonPair& eps) {
  if (eps.eps1 == eps.eps2) return Regime::equal;
  return eps.eps2 > eps.eps1 ? Regime::eps2_greater : Regime::eps1_greater;
}

/// Budget allocation between the primed and double-primed scheme versions.
struct RateSplit {
  double r1_prime = 0.0, r1_dprime = 0.0;
  double r2_prime = 0.0, r2_dprime = 0.0;
};

struct AuxiliarySolution {
  std::map<ChannelRole, ConditionalPmf> channels;
  std::optional<RateSplit> rate_split;
  ExponentPair achieved;
  RateBudget rates_used;

  bool has(ChannelRole role) const { return channels.contains(role); }
  const ConditionalPmf& channel(ChannelRole role) const {
    auto it = channels.find(role);
    if (it == channels.end())
      throw std::out_of_range("AuxiliarySolution: no channel " + std::string(to_string(role)));
    return it->second;
  }
};

struct FrontierPoint {
  double theta1 = 0.0;  // requested lower bound on the relay exponent
  double theta2 = 0.0;  // best receiver exponent under it
  AuxiliarySolution solution;
};

/// Pareto frontier theta2_max(theta1): theta1 strictly increasing, theta2
/// non-increasing.
struct Frontier {
  std::vector<FrontierPoint> points;
  std::vector<double> infeasible_theta1;
  Regime regime = Regime::fixed;
  Variant variant = Variant::full;
};

namespace detail {

/// I(U;In) and I(U;Out) for U | In ~ channel, recomputed from scratch.
inline std::pair<double, double> info_pair(const Pmf& p_in, const ConditionalPmf& forward,
                                           const ConditionalPmf& channel) {
  const JointPmf u_in = JointPmf::from_marginal_and_channel(p_in, channel);
  const JointPmf u_out = JointPmf::from_marginal_and_channel(
      u_in.marginal(1), cascade(u_in.transposed().conditional(), forward));
  return {mutual_information(u_in), mutual_information(u_out)};
}

}  // namespace detail

/// Solver for all regions of one source. Forwarding solves are memoized per
/// (side, cap) and shared between frontier points; the cache is thread-safe.
class RegionSolver {
 public:
  RegionSolver(TwoHopSource src, OptimizerConfig cfg) : src_(std::move(src)), cfg_(cfg) {
    cfg_.validate();
  }

  const TwoHopSource& source() const noexcept { return src_; }
  const OptimizerConfig& config() const noexcept { return cfg_; }

  const ForwardedInfo& forward(Side side, double cap) const {
    if (!(cap >= 0.0)) throw std::invalid_argument("forward: rate cap must be >= 0");
    const auto key = std::make_pair(side, std::bit_cast<std::uint64_t>(cap));
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) return *it->second;
    }
    auto solved = std::make_unique<ForwardedInfo>(
        side == Side::tx_to_relay ? max_forwarded_info(src_.p_x, src_.p_y_given_x, cap, cfg_)
                                  : max_forwarded_info(src_.p_y, src_.p_z_given_y, cap, cfg_));
    std::lock_guard lock(mu_);
    auto [it, inserted] = cache_.try_emplace(key, std::move(solved));
    return *it->second;
  }

  double theta1_fix(double r1) const { return forward(Side::tx_to_relay, r1).value; }
  double theta2_fix(const RateBudget& r) const {
    r.validate();
    return theta1_fix(r.r1) + forward(Side::relay_to_rx, r.r2).value;
  }

  /// Corner of the maximum-rate rectangle with the channels achieving it.
  AuxiliarySolution fixed_solution(const RateBudget& r) const {
    r.validate();
    const auto& a = forward(Side::tx_to_relay, r.r1);
    const auto& b = forward(Side::relay_to_rx, r.r2);
    AuxiliarySolution s;
    s.channels.emplace(ChannelRole::u1, a.channel);
    s.channels.emplace(ChannelRole::u2, b.channel);
    s.achieved = {a.value, a.value + b.value};
    s.rates_used = {a.rate, b.rate};
    return s;
  }

  /// eps1 = eps2 = eps: the region is the rectangle below the returned corner;
  /// the expected-rate constraint boosts both budgets by 1/(1-eps).
  std::pair<ExponentPair, AuxiliarySolution> region_equal_eps(const RateBudget& r, double eps) const {
    r.validate();
    EpsilonPair{eps, eps}.validate();
    const auto& a = forward(Side::tx_to_relay, r.r1 / (1.0 - eps));
    const auto& b = forward(Side::relay_to_rx, r.r2 / (1.0 - eps));
    AuxiliarySolution s;
    s.channels.emplace(ChannelRole::u1, a.channel);
    s.channels.emplace(ChannelRole::u2, b.channel);
    s.achieved = {a.value, a.value + b.value};
    s.rates_used = {(1.0 - eps) * a.rate, (1.0 - eps) * b.rate};
    return {s.achieved, std::move(s)};
  }

  /// Largest relay exponent reachable in either unequal regime.
  double max_theta1(const RateBudget& r, const EpsilonPair& eps) const {
    return forward(Side::tx_to_relay, r.r1 / (1.0 - eps.eps1)).value;
  }

  // eps2 > eps1 ------------------------------------------------------------

  FrontierPoint frontier_point_eps2_greater(const RateBudget& r, const EpsilonPair& eps,
                                            double theta1, Variant variant) const {
    check_unequal(r, eps, Regime::eps2_greater);
    const E2 ctx{this, r, eps};
    std::optional<E2::Candidate> best;
    auto consider = [&](std::optional<E2::Candidate> c) {
      if (c && c->feasible(theta1) && (!best || c->theta2 > best->theta2)) best = c;
    };
    // U1'' = U1' is admissible for every variant; the split grid below
    // includes the split that leaves U1'' without rate.
    consider(ctx.tied(theta1));
    if (variant == Variant::full || variant == Variant::tied_u2) {
      const int steps = split_steps();
      std::optional<double> s_best;
      double v_best = -1.0;
      for (int k = 0; k <= steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        const auto c = ctx.at_split(s);
        if (c->feasible(theta1) && c->theta2 > v_best) v_best = c->theta2, s_best = s;
      }
      if (s_best) {
        auto f = [&](double s) {
          const auto c = ctx.at_split(s);
          return c->feasible(theta1) ? c->theta2 : -1.0;
        };
        consider(ctx.at_split(pattern_search_1d(f, *s_best, 0.5 / steps)));
      }
    }
    if (!best) throw InfeasibleTheta1("no channels reach theta1 = " + std::to_string(theta1));
    return {theta1, best->theta2, ctx.solution(*best)};
  }

  Frontier frontier_eps2_greater(const RateBudget& r, const EpsilonPair& eps,
                                 std::vector<double> theta1_grid, Variant variant) const {
    check_unequal(r, eps, Regime::eps2_greater);
    return trace(std::move(theta1_grid), Regime::eps2_greater, variant, [&](double t1) {
      return frontier_point_eps2_greater(r, eps, t1, variant);
    });
  }

  // eps1 > eps2 ------------------------------------------------------------

  FrontierPoint frontier_point_eps1_greater(const RateBudget& r, const EpsilonPair& eps,
                                            double theta1, Variant variant) const {
    check_unequal(r, eps, Regime::eps1_greater);
    const E3 ctx{this, r, eps};
    const bool free1 = variant == Variant::full || variant == Variant::tied_u2;
    const bool free2 = variant == Variant::full || variant == Variant::tied_u1;
    std::optional<E3::Candidate> best;
    auto consider = [&](const E3::Candidate& c) {
      if (c.feasible(theta1) && (!best || c.theta2 > best->theta2)) best = c;
    };
    // Tied shapes on each hop: double-primed equal to primed, or rate-free.
    const std::vector<E3::Caps1> tied1 = {ctx.tied1(), ctx.split1(1.0)};
    const std::vector<E3::Caps2> tied2 = {ctx.tied2(), ctx.split2(1.0)};
    for (const auto& a : tied1)
      for (const auto& b : tied2) consider(ctx.eval(a, b));

    const int steps = split_steps();
    const double h = 1.0 / steps;
    if (free1 && free2) {
      std::optional<std::pair<int, int>> cell;
      double v_best = -1.0;
      for (int i = 0; i <= steps; ++i) {
        const auto a = ctx.split1(i * h);
        if (!(a.v_prime >= theta1)) continue;
        for (int j = 0; j <= steps; ++j) {
          const auto c = ctx.eval(a, ctx.split2(j * h));
          if (c.theta2 > v_best) v_best = c.theta2, cell = std::make_pair(i, j);
        }
      }
      if (cell) {
        // Golden section on s1 around the best cell, with s2 set by the
        // crossing of the two receiver terms at each s1.
        auto inner = [&](double s1) {
          const auto a = ctx.split1(s1);
          if (!(a.v_prime >= theta1)) return E3::Candidate{};
          return ctx.eval(a, ctx.split2(best_s2(ctx, a, cell->second * h, h)));
        };
        const double lo = std::max(0.0, cell->first * h - h), hi = std::min(1.0, cell->first * h + h);
        consider(golden_max(lo, hi, inner));
      }
    } else if (free1) {
      for (const auto& b : tied2) {
        auto f = [&](double s1) {
          const auto c = ctx.eval(ctx.split1(s1), b);
          return c.feasible(theta1) ? c.theta2 : -1.0;
        };
        consider(ctx.eval(ctx.split1(grid_then_refine(f, steps)), b));
      }
    } else if (free2) {
      for (const auto& a : tied1) {
        if (!(a.v_prime >= theta1)) continue;
        consider(ctx.eval(a, ctx.split2(best_s2(ctx, a, 0.5, 0.5))));
      }
    }
    if (!best) throw InfeasibleTheta1("no channels reach theta1 = " + std::to_string(theta1));
    return {theta1, best->theta2, ctx.solution(*best)};
  }

  Frontier frontier_eps1_greater(const RateBudget& r, const EpsilonPair& eps,
                                 std::vector<double> theta1_grid, Variant variant) const {
    check_unequal(r, eps, Regime::eps1_greater);
    return trace(std::move(theta1_grid), Regime::eps1_greater, variant, [&](double t1) {
      return frontier_point_eps1_greater(r, eps, t1, variant);
    });
  }

 private:
  // Forwarded information at one cap, as needed by the frontier arithmetic.
  struct Leg {
    double cap = 0.0;
    double value = 0.0;
    double rate = 0.0;
    const ConditionalPmf* channel = nullptr;
  };
  Leg leg(Side side, double cap) const {
    const auto& f = forward(side, cap);
    return {cap, f.value, f.rate, &f.channel};
  }

  int split_steps() const {
    return std::max(1, static_cast<int>(std::lround(1.0 / cfg_.split_resolution)));
  }

  static void check_unequal(const RateBudget& r, const EpsilonPair& eps, Regime regime) {
    r.validate();
    eps.validate();
    if (regime_for(eps) != regime)
      throw std::invalid_argument(std::string("frontier: eps pair does not match regime ") +
                                  std::string(to_string(regime)));
  }

  // Compass search with step halving on a 1-D function over [0, 1].
  static double pattern_search_1d(const std::function<double(double)>& f, double x, double step) {
    double fx = f(x);
    while (step > 1e-8) {
      bool moved = false;
      for (double cand : {std::min(1.0, x + step), std::max(0.0, x - step)}) {
        const double fc = f(cand);
        if (fc > fx) {
          x = cand, fx = fc, moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    return x;
  }

  static double grid_then_refine(const std::function<double(double)>& f, int steps) {
    double s_best = 0.0, v_best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
      const double s = static_cast<double>(k) / steps;
      const double v = f(s);
      if (v > v_best) v_best = v, s_best = s;
    }
    return pattern_search_1d(f, s_best, 0.5 / steps);
  }

  template <class Eval>
  static std::invoke_result_t<Eval&, double> golden_max(double lo, double hi, Eval&& eval) {
    constexpr double g = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    auto fc = eval(c), fd = eval(d);
    auto best = fc.theta2 >= fd.theta2 ? fc : fd;
    while (b - a > 1e-6) {
      if (fc.theta2 >= fd.theta2) {
        b = d, d = c, fd = fc;
        c = b - g * (b - a);
        fc = eval(c);
      } else {
        a = c, c = d, fc = fd;
        d = a + g * (b - a);
        fd = eval(d);
      }
      for (const auto* x : {&fc, &fd})
        if (x->theta2 > best.theta2) best = *x;
    }
    for (double edge : {lo, hi}) {
      auto e = eval(edge);
      if (e.theta2 > best.theta2) best = e;
    }
    return best;
  }

  // eps2 > eps1: theta1 <= min{I(U1';Y), I(U1'';Y)}, theta2 <= I(U1';Y) + I(U2';Z),
  // R1 >= (1-eps2) I(U1';X) + (eps2-eps1) I(U1'';X), R2 >= (1-eps2) I(U2';Y).
  struct E2 {
    const RegionSolver* solver;
    RateBudget r;
    EpsilonPair eps;

    struct Candidate {
      Leg u1p, u1d, u2p;
      RateSplit split;
      double theta1 = 0.0, theta2 = -1.0;
      bool feasible(double t1) const { return theta1 >= t1; }
    };

    Candidate make(double c1p, double c1d, RateSplit split) const {
      Candidate c;
      c.u1p = solver->leg(Side::tx_to_relay, c1p);
      c.u1d = solver->leg(Side::tx_to_relay, c1d);
      c.u2p = solver->leg(Side::relay_to_rx, r.r2 / (1.0 - eps.eps2));
      c.split = split;
      c.theta1 = std::min(c.u1p.value, c.u1d.value);
      c.theta2 = c.u1p.value + c.u2p.value;
      return c;
    }
    std::optional<Candidate> at_split(double s) const {
      return make(s * r.r1 / (1.0 - eps.eps2), (1.0 - s) * r.r1 / (eps.eps2 - eps.eps1),
                  {s * r.r1, (1.0 - s) * r.r1, r.r2, 0.0});
    }
    std::optional<Candidate> tied(double) const {
      const double c = r.r1 / (1.0 - eps.eps1);
      const double s = (1.0 - eps.eps2) / (1.0 - eps.eps1);
      return make(c, c, {s * r.r1, (1.0 - s) * r.r1, r.r2, 0.0});
    }
    AuxiliarySolution solution(const Candidate& c) const {
      AuxiliarySolution s;
      s.channels.emplace(ChannelRole::u1_prime, *c.u1p.channel);
      s.channels.emplace(ChannelRole::u1_dprime, *c.u1d.channel);
      s.channels.emplace(ChannelRole::u2_prime, *c.u2p.channel);
      s.rate_split = c.split;
      s.achieved = {c.theta1, c.theta2};
      s.rates_used = {(1.0 - eps.eps2) * c.u1p.rate + (eps.eps2 - eps.eps1) * c.u1d.rate,
                      (1.0 - eps.eps2) * c.u2p.rate};
      return s;
    }
  };

  // eps1 > eps2: theta1 <= I(U1';Y),
  // theta2 <= min{I(U1';Y) + I(U2';Z), I(U1'';Y) + I(U2'';Z)},
  // R_i >= (1-eps1) I(Ui'; .) + (eps1-eps2) I(Ui''; .).
  struct E3 {
    const RegionSolver* solver;
    RateBudget r;
    EpsilonPair eps;

    struct Caps1 {
      Leg prime, dprime;
      double r_prime = 0.0, r_dprime = 0.0;
      double v_prime = 0.0;
    };
    using Caps2 = Caps1;
    struct Candidate {
      Caps1 a;
      Caps2 b;
      double theta1 = 0.0, theta2 = -1.0;
      bool feasible(double t1) const { return theta2 >= 0.0 && theta1 >= t1; }
    };

    Caps1 make(Side side, double budget, double c_prime, double c_dprime, double s) const {
      Caps1 c;
      c.prime = solver->leg(side, c_prime);
      c.dprime = solver->leg(side, c_dprime);
      c.r_prime = s * budget;
      c.r_dprime = (1.0 - s) * budget;
      c.v_prime = c.prime.value;
      return c;
    }
    Caps1 split1(double s) const {
      return make(Side::tx_to_relay, r.r1, s * r.r1 / (1.0 - eps.eps1),
                  (1.0 - s) * r.r1 / (eps.eps1 - eps.eps2), s);
    }
    Caps2 split2(double s) const {
      return make(Side::relay_to_rx, r.r2, s * r.r2 / (1.0 - eps.eps1),
                  (1.0 - s) * r.r2 / (eps.eps1 - eps.eps2), s);
    }
    Caps1 tied1() const {
      const double c = r.r1 / (1.0 - eps.eps2);
      return make(Side::tx_to_relay, r.r1, c, c, (1.0 - eps.eps1) / (1.0 - eps.eps2));
    }
    Caps2 tied2() const {
      const double c = r.r2 / (1.0 - eps.eps2);
      return make(Side::relay_to_rx, r.r2, c, c, (1.0 - eps.eps1) / (1.0 - eps.eps2));
    }
    Candidate eval(const Caps1& a, const Caps2& b) const {
      Candidate c{a, b};
      c.theta1 = a.prime.value;
      c.theta2 = std::min(a.prime.value + b.prime.value, a.dprime.value + b.dprime.value);
      return c;
    }
    AuxiliarySolution solution(const Candidate& c) const {
      AuxiliarySolution s;
      s.channels.emplace(ChannelRole::u1_prime, *c.a.prime.channel);
      s.channels.emplace(ChannelRole::u1_dprime, *c.a.dprime.channel);
      s.channels.emplace(ChannelRole::u2_prime, *c.b.prime.channel);
      s.channels.emplace(ChannelRole::u2_dprime, *c.b.dprime.channel);
      s.rate_split = RateSplit{c.a.r_prime, c.a.r_dprime, c.b.r_prime, c.b.r_dprime};
      s.achieved = {c.theta1, c.theta2};
      const double w1 = 1.0 - eps.eps1, w2 = eps.eps1 - eps.eps2;
      s.rates_used = {w1 * c.a.prime.rate + w2 * c.a.dprime.rate,
                      w1 * c.b.prime.rate + w2 * c.b.dprime.rate};
      return s;
    }
  };

  // For fixed first-hop legs, min(A + G'(s2), B + G''(s2)) has an increasing
  // and a decreasing term in s2; the maximizer is their crossing or an end.
  double best_s2(const E3& ctx, const E3::Caps1& a, double center, double half_width) const {
    auto gap = [&](double s2) {
      const auto b = ctx.split2(s2);
      return (a.prime.value + b.prime.value) - (a.dprime.value + b.dprime.value);
    };
    auto solve = [&](double lo, double hi) -> std::optional<double> {
      double glo = gap(lo), ghi = gap(hi);
      if (glo >= 0.0) return lo == 0.0 ? std::optional<double>(0.0) : std::nullopt;
      if (ghi <= 0.0) return hi == 1.0 ? std::optional<double>(1.0) : std::nullopt;
      while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) < 0.0 ? lo : hi) = mid;
      }
      // Either side of the crossing may hold the larger minimum.
      const auto el = ctx.eval(a, ctx.split2(lo)), eh = ctx.eval(a, ctx.split2(hi));
      return el.theta2 >= eh.theta2 ? lo : hi;
    };
    if (auto s = solve(std::max(0.0, center - half_width), std::min(1.0, center + half_width))) return *s;
    return *solve(0.0, 1.0);
  }

  template <class PointFn>
  Frontier trace(std::vector<double> grid, Regime regime, Variant variant, PointFn&& point) const {
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<std::optional<FrontierPoint>> pts(grid.size());
    parallel_for(grid.size(), cfg_.threads, [&](std::size_t i) {
      try {
        pts[i] = point(grid[i]);
      } catch (const InfeasibleTheta1&) {
      }
    });
    Frontier f;
    f.regime = regime;
    f.variant = variant;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (pts[i]) f.points.push_back(std::move(*pts[i]));
      else f.infeasible_theta1.push_back(grid[i]);
    }
    // A solution feasible at a larger theta1 is feasible at every smaller one.
    for (std::size_t i = f.points.size(); i-- > 1;) {
      auto& lo = f.points[i - 1];
      const auto& hi = f.points[i];
      if (hi.theta2 > lo.theta2) {
        lo.theta2 = hi.theta2;
        lo.solution = hi.solution;
      }
    }
    return f;
  }

  TwoHopSource src_;
  OptimizerConfig cfg_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<Side, std::uint64_t>, std::unique_ptr<ForwardedInfo>> cache_;
};

// ---------------------------------------------------------------------------
// Free-function surface

inline ForwardedInfo max_forwarded_info(const TwoHopSource& src, Side side, double rate_cap,
                                        const OptimizerConfig& cfg) {
  return side == Side::tx_to_relay ? max_forwarded_info(src.p_x, src.p_y_given_x, rate_cap, cfg)
                                   : max_forwarded_info(src.p_y, src.p_z_given_y, rate_cap, cfg);
}

inline double theta2_fix(const TwoHopSource& src, const RateBudget& r, const OptimizerConfig& cfg) {
  return RegionSolver(src, cfg).theta2_fix(r);
}

inline std::pair<ExponentPair, AuxiliarySolution> region_equal_eps(const TwoHopSource& src,
                                                                   const RateBudget& r, double eps,
                                                                   const OptimizerConfig& cfg) {
  return RegionSolver(src, cfg).region_equal_eps(r, eps);
}

inline Frontier frontier_eps2_greater(const TwoHopSource& src, const RateBudget& r,
                                      const EpsilonPair& eps, std::vector<double> grid,
                                      Variant variant, const OptimizerConfig& cfg) {
  return RegionSolver(src, cfg).frontier_eps2_greater(r, eps, std::move(grid), variant);
}

inline Frontier frontier_eps1_greater(const TwoHopSource& src, const RateBudget& r,
                                      const EpsilonPair& eps, std::vector<double> grid,
                                      Variant variant, const OptimizerConfig& cfg) {
  return RegionSolver(src, cfg).frontier_eps1_greater(r, eps, std::move(grid), variant);
}

/// Exhaustive grid over P_{U|In} with |U| = u_cardinality: the best I(U;Out)
/// among grid channels with I(U;In) <= rate_cap. Independent of the solver.
inline double brute_force_oracle(const TwoHopSource& src, Side side, double rate_cap,
                                 double grid_resolution, std::size_t u_cardinality = 2) {
  const Pmf& p_in = side == Side::tx_to_relay ? src.p_x : src.p_y;
  const ConditionalPmf& fwd = side == Side::tx_to_relay ? src.p_y_given_x : src.p_z_given_y;
  const std::size_t m = p_in.size();
  if (m > 4) throw UnsupportedAlphabet("brute_force_oracle: input alphabet larger than 4");
  if (u_cardinality < 1 || u_cardinality > 3)
    throw UnsupportedAlphabet("brute_force_oracle: |U| must be 1..3");
  if (!(grid_resolution > 0.0 && grid_resolution <= 1.0))
    throw std::invalid_argument("brute_force_oracle: resolution must be in (0, 1]");
  const int steps = static_cast<int>(std::lround(1.0 / grid_resolution));
  const auto rows = detail::compositions(steps, u_cardinality);
  if (std::pow(static_cast<double>(rows.size()), static_cast<double>(m)) > 5e8)
    throw UnsupportedAlphabet("brute_force_oracle: grid too large");

  double best = 0.0;
  std::vector<std::size_t> odo(m, 0);
  for (;;) {
    std::vector<Pmf> w;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> row(u_cardinality);
      double used = 0.0;
      for (std::size_t k = 0; k + 1 < u_cardinality; ++k)
        used += (row[k] = static_cast<double>(rows[odo[i]][k]) / steps);
      row.back() = 1.0 - used;
      w.emplace_back(std::move(row));
    }
    const auto [rate, value] = detail::info_pair(p_in, fwd, ConditionalPmf(std::move(w)));
    if (rate <= rate_cap + 1e-12) best = std::max(best, value);
    std::size_t i = 0;
    while (i < m && ++odo[i] == rows.size()) odo[i++] = 0;
    if (i == m) break;
  }
  return best;
}

/// Recomputes every information quantity from the stored channels and checks
/// the regime's constraints and the recorded exponents and rates.
inline bool verify_solution(const TwoHopSource& src, const AuxiliarySolution& sol,
                            const RateBudget& r, const EpsilonPair& eps, Regime regime,
                            double tol = 1e-9) {
  auto near = [&](double a, double b) { return std::abs(a - b) <= tol; };
  auto info1 = [&](ChannelRole c) { return detail::info_pair(src.p_x, src.p_y_given_x, sol.channel(c)); };
  auto info2 = [&](ChannelRole c) { return detail::info_pair(src.p_y, src.p_z_given_y, sol.channel(c)); };
  try {
    if (regime != Regime::fixed && regime_for(eps) != regime) return false;
    if (sol.rate_split) {
      const auto& s = *sol.rate_split;
      for (double x : {s.r1_prime, s.r1_dprime, s.r2_prime, s.r2_dprime})
        if (x < -tol) return false;
      if (!near(s.r1_prime + s.r1_dprime, r.r1)) return false;
      if (regime == Regime::eps1_greater && !near(s.r2_prime + s.r2_dprime, r.r2)) return false;
    }
    switch (regime) {
      case Regime::fixed:
      case Regime::equal: {
        const double k = regime == Regime::fixed ? 1.0 : 1.0 - eps.eps1;
        const auto [rx1, ry1] = info1(ChannelRole::u1);
        const auto [ry2, rz2] = info2(ChannelRole::u2);
        return k * rx1 <= r.r1 + tol && k * ry2 <= r.r2 + tol && near(sol.achieved.theta1, ry1) &&
               near(sol.achieved.theta2, ry1 + rz2) && near(sol.rates_used.r1, k * rx1) &&
               near(sol.rates_used.r2, k * ry2);
      }
      case Regime::eps2_greater: {
        const auto [xp, yp] = info1(ChannelRole::u1_prime);
        const auto [xd, yd] = info1(ChannelRole::u1_dprime);
        const auto [y2, z2] = info2(ChannelRole::u2_prime);
        const double a = 1.0 - eps.eps2, b = eps.eps2 - eps.eps1;
        const double used1 = a * xp + b * xd, used2 = a * y2;
        bool ok = used1 <= r.r1 + tol && used2 <= r.r2 + tol &&
                  near(sol.achieved.theta1, std::min(yp, yd)) && near(sol.achieved.theta2, yp + z2) &&
                  near(sol.rates_used.r1, used1) && near(sol.rates_used.r2, used2);
        if (ok && sol.rate_split)
          ok = a * xp <= sol.rate_split->r1_prime + tol && b * xd <= sol.rate_split->r1_dprime + tol;
        return ok;
      }
      case Regime::eps1_greater: {
        const auto [xp, yp] = info1(ChannelRole::u1_prime);
        const auto [xd, yd] = info1(ChannelRole::u1_dprime);
        const auto [y2p, z2p] = info2(ChannelRole::u2_prime);
        const auto [y2d, z2d] = info2(ChannelRole::u2_dprime);
        const double a = 1.0 - eps.eps1, b = eps.eps1 - eps.eps2;
        const double used1 = a * xp + b * xd, used2 = a * y2p + b * y2d;
        bool ok = used1 <= r.r1 + tol && used2 <= r.r2 + tol && near(sol.achieved.theta1, yp) &&
                  near(sol.achieved.theta2, std::min(yp + z2p, yd + z2d)) &&
                  near(sol.rates_used.r1, used1) && near(sol.rates_used.r2, used2);
        if (ok && sol.rate_split)
          ok = a * xp <= sol.rate_split->r1_prime + tol && b * xd <= sol.rate_split->r1_dprime + tol &&
               a * y2p <= sol.rate_split->r2_prime + tol && b * y2d <= sol.rate_split->r2_dprime + tol;
        return ok;
      }
    }
  } catch (const std::exception&) {
    return false;
  }
  return false;
}

}  // namespace twohop
