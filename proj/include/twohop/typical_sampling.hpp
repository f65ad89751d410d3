// Exact probabilities and conditional sampling for strong-typicality events
// of i.i.d. sequences.
//
// For a fixed sequence c and G^n ~ i.i.d. Q, the event (c, G^n) in T_mu(P_CG)
// factorizes over the positions grouped by the symbol of c: within a group
// of size k the counts of G are Multinomial(k, Q) and must fall in a box of
// per-cell count intervals. Enumerating the box gives the exact probability,
// and a draw from the box followed by a random arrangement inside each
// group is an exact draw of G^n conditioned on the event.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "twohop/probability.hpp"
#include "twohop/random.hpp"

namespace twohop {

class LogFactorial {
 public:
  explicit LogFactorial(std::size_t n) : table_(n + 1, 0.0) {
    for (std::size_t k = 2; k <= n; ++k) table_[k] = table_[k - 1] + std::log(static_cast<double>(k));
  }
  double operator()(std::size_t k) const { return table_.at(k); }
  std::size_t limit() const noexcept { return table_.size() - 1; }

 private:
  std::vector<double> table_;
};

/// Counts c in [0, cap] with typical_count(c, n, p, mu); empty as lo > hi.
inline std::pair<long, long> typical_count_range(std::size_t n, double p, double mu, std::size_t cap) {
  if (p == 0.0) return {0, 0};
  const double nd = static_cast<double>(n);
  long lo = std::max(0L, static_cast<long>(std::floor(nd * (p - mu))) - 1);
  long hi = std::min(static_cast<long>(cap), static_cast<long>(std::ceil(nd * (p + mu))) + 1);
  while (lo <= hi && !typical_count(static_cast<std::size_t>(lo), n, p, mu)) ++lo;
  while (hi >= lo && !typical_count(static_cast<std::size_t>(hi), n, p, mu)) --hi;
  return {lo, hi};
}

inline double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

namespace detail {

// Visits every count vector of a k-trial multinomial inside [lo, hi] with its
// natural-log probability.
template <class Visit>
void enumerate_box(std::size_t k, std::span<const double> q, const std::vector<long>& lo,
                   const std::vector<long>& hi, const LogFactorial& lf, Visit&& visit) {
  const std::size_t d = q.size();
  for (std::size_t j = 0; j < d; ++j)
    if (lo[j] > hi[j]) return;
  std::vector<double> logq(d);
  for (std::size_t j = 0; j < d; ++j) logq[j] = q[j] > 0.0 ? std::log(q[j]) : -std::numeric_limits<double>::infinity();
  // Suffix sums bound the remaining mass so dead branches are cut early.
  std::vector<long> lo_tail(d + 1, 0), hi_tail(d + 1, 0);
  for (std::size_t j = d; j-- > 0;) lo_tail[j] = lo_tail[j + 1] + lo[j], hi_tail[j] = hi_tail[j + 1] + hi[j];
  const long total = static_cast<long>(k);
  if (total < lo_tail[0] || total > hi_tail[0]) return;

  std::vector<long> c(d, 0);
  auto rec = [&](auto& self, std::size_t j, long left, double acc) -> void {
    if (j + 1 == d) {
      if (left < lo[j] || left > hi[j]) return;
      if (left > 0 && q[j] <= 0.0) return;
      c[j] = left;
      visit(c, acc - lf(static_cast<std::size_t>(left)) + (left > 0 ? left * logq[j] : 0.0));
      return;
    }
    const long from = std::max(lo[j], left - hi_tail[j + 1]);
    const long to = std::min(hi[j], left - lo_tail[j + 1]);
    for (long v = from; v <= to; ++v) {
      if (v > 0 && q[j] <= 0.0) break;
      c[j] = v;
      self(self, j + 1, left - v, acc - lf(static_cast<std::size_t>(v)) + (v > 0 ? v * logq[j] : 0.0));
    }
  };
  rec(rec, 0, total, lf(k));
}

}  // namespace detail

/// Typicality event of (c, G^n) for a conditioning sequence c and G^n ~ Q^n,
/// with reference joint P_CG (axes: conditioning symbol, generated symbol).
class TypicalityBox {
 public:
  TypicalityBox(JointPmf reference, Pmf q, double mu, std::size_t n)
      : ref_(std::move(reference)), q_(std::move(q)), mu_(mu), n_(n), lf_(n) {
    ref_.require_two_axes("TypicalityBox");
    if (ref_.dims()[1] != q_.size()) throw DimensionMismatch("TypicalityBox: generator alphabet mismatch");
    if (!(mu > 0.0)) throw std::invalid_argument("TypicalityBox: mu must be positive");
  }

  const JointPmf& reference() const noexcept { return ref_; }
  const Pmf& generator() const noexcept { return q_; }

  /// Natural log of Pr[(c, G^n) in T_mu(P_CG)].
  double log_probability(const Sequence& cond) const {
    double total = 0.0;
    for (const auto& g : groups(cond)) {
      std::vector<double> terms;
      detail::enumerate_box(g.size, q_.probs(), g.lo, g.hi, lf_,
                            [&](const std::vector<long>&, double lp) { terms.push_back(lp); });
      total += log_sum_exp(terms);
      if (!std::isfinite(total)) break;
    }
    return total;
  }

  /// Exact draw of G^n conditioned on the event with its natural-log
  /// probability; nullopt when the event is empty.
  std::optional<std::pair<Sequence, double>> sample(const Sequence& cond, Rng& rng) const {
    Sequence out(cond.size());
    double total = 0.0;
    for (const auto& g : groups(cond)) {
      std::vector<std::vector<long>> vecs;
      std::vector<double> lps;
      detail::enumerate_box(g.size, q_.probs(), g.lo, g.hi, lf_, [&](const std::vector<long>& c, double lp) {
        vecs.push_back(c);
        lps.push_back(lp);
      });
      if (vecs.empty()) return std::nullopt;
      const double z = log_sum_exp(lps);
      total += z;
      std::vector<double> w(lps.size());
      for (std::size_t i = 0; i < lps.size(); ++i) w[i] = std::exp(lps[i] - z);
      const auto& pick = vecs[rng.categorical(w)];
      std::vector<Symbol> fill;
      fill.reserve(g.size);
      for (std::size_t j = 0; j < pick.size(); ++j) fill.insert(fill.end(), static_cast<std::size_t>(pick[j]), static_cast<Symbol>(j));
      rng.shuffle(fill);
      for (std::size_t i = 0; i < g.positions.size(); ++i) out[g.positions[i]] = fill[i];
    }
    return std::make_pair(std::move(out), total);
  }

 private:
  struct Group {
    std::size_t size = 0;
    std::vector<std::size_t> positions;
    std::vector<long> lo, hi;
  };

  std::vector<Group> groups(const Sequence& cond) const {
    if (cond.size() != n_) throw LengthMismatch("TypicalityBox: sequence length differs from n");
    const std::size_t cs = ref_.dims()[0], gs = ref_.dims()[1];
    std::vector<Group> gr(cs);
    for (std::size_t t = 0; t < cond.size(); ++t) {
      if (cond[t] >= cs) throw std::invalid_argument("TypicalityBox: symbol out of range");
      gr[cond[t]].positions.push_back(t);
    }
    for (std::size_t a = 0; a < cs; ++a) {
      auto& g = gr[a];
      g.size = g.positions.size();
      g.lo.resize(gs);
      g.hi.resize(gs);
      for (std::size_t u = 0; u < gs; ++u) {
        const auto [lo, hi] = typical_count_range(n_, ref_(a, u), mu_, g.size);
        g.lo[u] = lo, g.hi[u] = hi;
      }
    }
    return gr;
  }

  JointPmf ref_;
  Pmf q_;
  double mu_;
  std::size_t n_;
  LogFactorial lf_;
};

/// Pr[X^n in T_mu(P)] for X^n ~ P^n, by enumeration of the types.
inline double typical_set_probability(const Pmf& p, std::size_t n, double mu) {
  if (n == 0) throw std::invalid_argument("typical_set_probability: n must be >= 1");
  JointPmf ref({1, p.size()}, std::vector<double>(p.probs().begin(), p.probs().end()));
  TypicalityBox box(std::move(ref), p, mu, n);
  return std::exp(box.log_probability(Sequence(n, 0)));
}

/// Probability that at least one of M i.i.d. trials succeeds, each with
/// probability exp(log_p), where ln M = log_m.
inline double any_success_probability(double log_p, double log_m) {
  if (!std::isfinite(log_p)) return 0.0;
  if (log_p >= 0.0) return 1.0;
  // -ln(1-p), accurate both for tiny p and p close to 1.
  const double neg_log1m = log_p < -30.0 ? log_p : std::log(-std::log1p(-std::exp(log_p)));
  return -std::expm1(-std::exp(log_m + neg_log1m));
}

}  // namespace twohop
