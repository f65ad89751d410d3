#include <gtest/gtest.h>

#include <cmath>

#include "twohop/typical_sampling.hpp"

using namespace twohop;

namespace {

// Brute force over all |G|^n sequences.
double brute_box_probability(const Sequence& cond, const JointPmf& ref, const Pmf& q, double mu) {
  const std::size_t n = cond.size(), g = q.size();
  Sequence s(n, 0);
  double total = 0.0;
  for (;;) {
    if (is_strongly_typical(cond, s, ref, mu)) {
      double p = 1.0;
      for (Symbol v : s) p *= q[v];
      total += p;
    }
    std::size_t i = 0;
    while (i < n && ++s[i] == g) s[i++] = 0;
    if (i == n) break;
  }
  return total;
}

}  // namespace

TEST(TypicalityBox, MatchesBruteForce) {
  const JointPmf ref = JointPmf::from_marginal_and_channel(
      Pmf({0.3, 0.7}), ConditionalPmf({Pmf({0.2, 0.5, 0.3}), Pmf({0.6, 0.1, 0.3})}));
  const Pmf q = ref.marginal(1);
  Rng rng(3);
  for (std::size_t n : {4u, 7u, 10u}) {
    for (double mu : {0.05, 0.15, 0.3}) {
      const TypicalityBox box(ref, q, mu, n);
      for (int rep = 0; rep < 3; ++rep) {
        const Sequence c = sample_iid(ref.marginal(0), n, rng);
        const double brute = brute_box_probability(c, ref, q, mu);
        const double lp = box.log_probability(c);
        if (brute == 0.0) EXPECT_FALSE(std::isfinite(lp));
        else EXPECT_NEAR(std::exp(lp), brute, 1e-12 + 1e-9 * brute);
      }
    }
  }
}

TEST(TypicalityBox, SamplesLieInsideTheEvent) {
  const JointPmf ref = JointPmf::from_marginal_and_channel(Pmf({0.4, 0.6}), ConditionalPmf::bsc(0.2));
  const TypicalityBox box(ref, ref.marginal(1), 0.05, 200);
  Rng rng(11);
  int found = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Sequence c = sample_iid(ref.marginal(0), 200, rng);
    auto s = box.sample(c, rng);
    if (!s) continue;
    ++found;
    ASSERT_TRUE(is_strongly_typical(c, s->first, ref, 0.05));
    ASSERT_NEAR(s->second, box.log_probability(c), 1e-9);
  }
  EXPECT_GT(found, 0);
}

TEST(TypicalityBox, ConditionalDrawIsUniformWithinAType) {
  // Given the event, every arrangement of a fixed count vector is equally
  // likely: check position-wise frequencies for a one-group box.
  const JointPmf ref({1, 2}, {0.5, 0.5});
  const TypicalityBox box(ref, Pmf({0.5, 0.5}), 0.01, 6);  // forces exactly three ones
  Rng rng(5);
  std::vector<int> hits(6, 0);
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    auto s = box.sample(Sequence(6, 0), rng);
    ASSERT_TRUE(s.has_value());
    int ones = 0;
    for (std::size_t t = 0; t < 6; ++t) ones += s->first[t], hits[t] += s->first[t];
    ASSERT_EQ(ones, 3);
  }
  for (int h : hits) EXPECT_NEAR(h / double(draws), 0.5, 0.01);
}

TEST(TypicalSetProbability, BinomialSum) {
  const std::size_t n = 100;
  const double p = 0.4, mu = 0.05;
  double direct = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    if (std::abs(k / double(n) - p) <= mu)
      direct += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                         k * std::log(p) + (n - k) * std::log(1 - p));
  EXPECT_NEAR(typical_set_probability(Pmf::bernoulli(p), n, mu), direct, 1e-12);
}

TEST(AnySuccessProbability, ClosedForm) {
  EXPECT_NEAR(any_success_probability(std::log(0.1), std::log(3.0)), 1 - std::pow(0.9, 3), 1e-12);
  EXPECT_NEAR(any_success_probability(std::log(1e-20), std::log(1e19)), 1 - std::exp(-0.1), 1e-9);
  EXPECT_EQ(any_success_probability(-INFINITY, 10.0), 0.0);
  EXPECT_EQ(any_success_probability(0.0, 0.0), 1.0);
}
