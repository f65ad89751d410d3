#pragma once

#include "twohop/twohop_sim.hpp"

namespace fixtures {

inline const twohop::TwoHopSource& dsbs_source() {
  static const twohop::TwoHopSource s = twohop::binary_xor_source(0.4, 0.8, 0.8);
  return s;
}

/// Equal-eps channels optimal at the given common rate.
inline twohop::AuxiliarySolution equal_channels(double r, double eps = 0.05) {
  return twohop::RegionSolver(dsbs_source(), twohop::OptimizerConfig{}).region_equal_eps({r, r}, eps).second;
}

inline twohop::AuxiliarySolution bsc_channels(twohop::Regime regime, double flip = 0.1) {
  using twohop::ChannelRole;
  twohop::AuxiliarySolution sol;
  const auto bsc = twohop::ConditionalPmf::bsc(flip);
  if (regime == twohop::Regime::equal) {
    sol.channels.emplace(ChannelRole::u1, bsc);
    sol.channels.emplace(ChannelRole::u2, bsc);
    return sol;
  }
  for (ChannelRole c : {ChannelRole::u1_prime, ChannelRole::u1_dprime, ChannelRole::u2_prime, ChannelRole::u2_dprime})
    sol.channels.emplace(c, bsc);
  return sol;
}

inline twohop::SchemeParams params(twohop::Regime regime, twohop::EpsilonPair eps, std::size_t n, double mu,
                                   twohop::AuxiliarySolution channels) {
  twohop::SchemeParams p;
  p.source = dsbs_source();
  p.regime = regime;
  p.n = n;
  p.mu = mu;
  p.eps = eps;
  p.channels = std::move(channels);
  return p;
}

}  // namespace fixtures
