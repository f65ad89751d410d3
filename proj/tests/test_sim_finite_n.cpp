// Finite-blocklength targets for the full scheme with the channels that are
// optimal for the equal-eps region at R1 = R2 = 0.5.
#include <gtest/gtest.h>

#include <cmath>

#include "sim_fixtures.hpp"

using namespace twohop;
using fixtures::dsbs_source;

namespace {

const AuxiliarySolution& channels() {
  static const AuxiliarySolution s = fixtures::equal_channels(0.5);
  return s;
}

}  // namespace

TEST(FiniteN, EncoderZeroFractionAtN200) {
  const auto& src = dsbs_source();
  const double mu = 0.05;
  const std::size_t n = 200;
  const HopCode hop(src.p_x, src.p_y_given_x, channels().channel(ChannelRole::u1), n, mu);
  Rng rng(200);
  int zeros = 0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) zeros += tx_encode_basic(sample_iid(src.p_x, n, rng), hop, rng).str() == "0";
  const double frac = zeros / double(draws);
  RecordProperty("zero_fraction", std::to_string(frac));
  EXPECT_LE(frac, 0.05) << "Pr[X^n atypical] = " << 1 - typical_set_probability(src.p_x, n, mu);
}

TEST(FiniteN, RelayAcceptanceUnderH1BelowExponentialBound) {
  const auto& src = dsbs_source();
  const double mu = 0.05, delta = 0.05;
  const std::size_t n = 200;
  auto p = fixtures::params(Regime::equal, {0.05, 0.05}, n, mu, channels());
  const auto st = estimate_errors(p, default_partition(p), 10000, 31);
  const double info = detail::info_pair(src.p_x, src.p_y_given_x, channels().channel(ChannelRole::u1)).second;
  const double bound = std::exp2(-static_cast<double>(n) * (info - delta));
  // beta1_conditional averages Pr[H_Y = 0 | M1] exactly over the relay's
  // observation; beta1_hat is the raw frequency.
  EXPECT_LE(st.beta1_hat.value, bound);
  EXPECT_LE(st.beta1_conditional.mean, bound)
      << "raw " << st.beta1_hat.value << ", exponent " << -std::log2(st.beta1_conditional.mean) / n << " vs "
      << info - delta;
}

TEST(FiniteN, EqualRegimeErrorsAndLengthsAtN200) {
  auto p = fixtures::params(Regime::equal, {0.05, 0.05}, 200, 0.0, channels());
  const auto st = estimate_errors(p, default_partition(p), 10000, 41);
  EXPECT_LE(st.alpha1_hat.value, 0.08);
  EXPECT_LE(st.alpha2_hat.value, 0.08);
  EXPECT_LE(st.mean_len1, 200 * 0.5 * 1.1) << "mu = " << p.effective_mu();
}
