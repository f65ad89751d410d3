#include <gtest/gtest.h>

#include "twohop/exponent_regions.hpp"

using namespace twohop;

namespace {

const TwoHopSource& dsbs_source() {
  static const TwoHopSource s = binary_xor_source(0.4, 0.8, 0.8);
  return s;
}

const RegionSolver& solver() {
  static const RegionSolver s(dsbs_source(), OptimizerConfig{});
  return s;
}

}  // namespace

TEST(Theta2Fix, ReferenceValuesAndLimits) {
  const auto& src = dsbs_source();
  EXPECT_NEAR(theta2_fix(src, {0.5, 0.5}, OptimizerConfig{}), 0.325872480392762, 1e-3);
  EXPECT_NEAR(theta2_fix(src, {0.0, 0.0}, OptimizerConfig{}), 0.0, 1e-12);
  EXPECT_NEAR(theta2_fix(src, {entropy(src.p_x), entropy(src.p_y)}, OptimizerConfig{}), 0.541988627549646, 1e-3);
}

TEST(RegionEqualEps, ReferenceCorner) {
  const auto [corner, sol] = solver().region_equal_eps({0.5, 0.5}, 0.05);
  EXPECT_NEAR(corner.theta1, 0.169743069706874, 1e-3);
  EXPECT_NEAR(corner.theta2, 0.340885797698503, 1e-3);
  EXPECT_TRUE(verify_solution(dsbs_source(), sol, {0.5, 0.5}, {0.05, 0.05}, Regime::equal));
}

TEST(RegionEqualEps, ZeroEpsIsFixedRateAndZeroBudgetIsOrigin) {
  const auto [c0, s0] = solver().region_equal_eps({0.4, 0.3}, 0.0);
  EXPECT_NEAR(c0.theta1, solver().theta1_fix(0.4), 1e-12);
  EXPECT_NEAR(c0.theta2, solver().theta2_fix({0.4, 0.3}), 1e-12);
  const auto [cz, sz] = solver().region_equal_eps({0.0, 0.0}, 0.05);
  EXPECT_NEAR(cz.theta1, 0.0, 1e-12);
  EXPECT_NEAR(cz.theta2, 0.0, 1e-12);
}

TEST(RegionEqualEps, BoostIdentity) {
  for (double r : {0.2, 0.5, 0.7}) {
    const auto [c, s] = solver().region_equal_eps({r, r}, 0.05);
    EXPECT_NEAR(c.theta1, solver().theta1_fix(r / 0.95), 2e-3);
    EXPECT_NEAR(c.theta2, solver().theta2_fix({r / 0.95, r / 0.95}), 2e-3);
  }
  EXPECT_NEAR(solver().theta1_fix(0.5 / 0.95), 0.169743069706874, 1e-3);
}

TEST(FrontierEps2Greater, ReferencePoints) {
  const EpsilonPair eps{0.05, 0.15};
  const RateBudget r{0.5, 0.5};
  EXPECT_NEAR(solver().frontier_point_eps2_greater(r, eps, 0.0, Variant::full).theta2, 0.375149407228070, 2e-3);
  EXPECT_NEAR(solver().frontier_point_eps2_greater(r, eps, 0.162282395565877, Variant::full).theta2,
              0.359001888537195, 2e-3);
  for (double t1 : {0.0, 0.08, 0.169})
    EXPECT_NEAR(solver().frontier_point_eps2_greater(r, eps, t1, Variant::tied_u1).theta2, 0.358132875286663, 2e-3);
  EXPECT_THROW(solver().frontier_point_eps2_greater(r, eps, 0.2, Variant::full), InfeasibleTheta1);
}

TEST(FrontierEps1Greater, ReferencePoints) {
  const EpsilonPair eps{0.15, 0.05};
  const RateBudget r{0.5, 0.5};
  for (double t1 : {0.0, 0.1, 0.169743069706874})
    EXPECT_NEAR(solver().frontier_point_eps1_greater(r, eps, t1, Variant::full).theta2, 0.340885797698502, 2e-3);
  const double tmax = solver().max_theta1(r, eps);
  EXPECT_NEAR(tmax, 0.186759601321881, 2e-3);
  EXPECT_NEAR(solver().frontier_point_eps1_greater(r, eps, tmax, Variant::full).theta2, 0.272352262830495, 3e-3);
  EXPECT_NEAR(solver().frontier_point_eps1_greater(r, eps, tmax, Variant::tied_both).theta2, 0.171142727863628, 3e-3);
  EXPECT_NEAR(solver().frontier_point_eps1_greater(r, eps, tmax, Variant::tied_u2).theta2, 0.171142727863628, 3e-3);
  EXPECT_THROW(solver().frontier_point_eps1_greater(r, eps, tmax + 0.01, Variant::full), InfeasibleTheta1);
}

TEST(Frontier, ParetoShapeDominanceAndVerification) {
  const RateBudget r{0.5, 0.5};
  const ExponentPair fixed{solver().theta1_fix(0.5), solver().theta2_fix(r)};
  struct Case {
    EpsilonPair eps;
    Regime regime;
    std::vector<Variant> tied;
  };
  for (const Case& c : {Case{{0.05, 0.15}, Regime::eps2_greater, {Variant::tied_u1}},
                        Case{{0.15, 0.05}, Regime::eps1_greater, {Variant::tied_u1, Variant::tied_u2, Variant::tied_both}}}) {
    std::vector<double> grid;
    for (int k = 0; k <= 8; ++k) grid.push_back(0.18 * k / 8);
    auto run = [&](Variant v) {
      return c.regime == Regime::eps2_greater ? solver().frontier_eps2_greater(r, c.eps, grid, v)
                                              : solver().frontier_eps1_greater(r, c.eps, grid, v);
    };
    const Frontier full = run(Variant::full);
    ASSERT_FALSE(full.points.empty());
    for (std::size_t i = 0; i < full.points.size(); ++i) {
      const auto& p = full.points[i];
      EXPECT_TRUE(verify_solution(dsbs_source(), p.solution, r, c.eps, c.regime)) << p.theta1;
      EXPECT_GE(p.solution.achieved.theta1, p.theta1 - 1e-9);
      if (i) {
        EXPECT_GT(p.theta1, full.points[i - 1].theta1);
        EXPECT_LE(p.theta2, full.points[i - 1].theta2 + 1e-12);
      }
      if (p.theta1 <= fixed.theta1) { EXPECT_GE(p.theta2, fixed.theta2 - 1e-9); }
    }
    for (Variant v : c.tied) {
      const Frontier t = run(v);
      for (const auto& tp : t.points)
        for (const auto& fp : full.points)
          if (fp.theta1 == tp.theta1) { EXPECT_GE(fp.theta2, tp.theta2 - 1e-9) << to_string(v) << " " << tp.theta1; }
    }
  }
}

TEST(VerifySolution, DetectsViolationsAndAcceptsHandBuiltIdentity) {
  const auto& src = dsbs_source();
  const double eps = 0.05;
  // U1 = X, U2 constant, with R1 = (1 - eps) H(X) exactly.
  AuxiliarySolution sol;
  sol.channels.emplace(ChannelRole::u1, ConditionalPmf::identity(2));
  sol.channels.emplace(ChannelRole::u2, ConditionalPmf::constant(2, Pmf::point_mass(2, 0)));
  const double r1 = (1 - eps) * entropy(src.p_x);
  sol.achieved = {src.info_xy(), src.info_xy()};
  sol.rates_used = {r1, 0.0};
  EXPECT_TRUE(verify_solution(src, sol, {r1, 0.0}, {eps, eps}, Regime::equal));
  EXPECT_FALSE(verify_solution(src, sol, {r1 - 0.01, 0.0}, {eps, eps}, Regime::equal));
  sol.achieved.theta2 += 1e-6;
  EXPECT_FALSE(verify_solution(src, sol, {r1, 0.0}, {eps, eps}, Regime::equal));

  auto [c, s] = solver().region_equal_eps({0.5, 0.5}, eps);
  EXPECT_TRUE(verify_solution(src, s, {0.5, 0.5}, {eps, eps}, Regime::equal));
  EXPECT_FALSE(verify_solution(src, s, {0.5 - 0.01, 0.5}, {eps, eps}, Regime::equal));
  EXPECT_FALSE(verify_solution(src, s, {0.5, 0.5}, {eps, eps + 0.1}, Regime::equal));
}
