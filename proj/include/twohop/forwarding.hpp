// Rate-constrained forwarding solver:
//
//   maximize I(U; Out)  over P_{U|In}  subject to  I(U; In) <= cap,
//
// where In ~ p_in and Out | In ~ forward. With (In, Out) = (X, Y) this is the
// relay-side problem, with (Y, Z) the receiver-side one.
//
// Method: exhaustive grid over the rows of P_{U|In}, then Nelder-Mead over
// per-row logits started from the best grid cells. Every candidate channel is
// made feasible by mixing it toward the constant channel with the same output
// marginal; I(U; In) is convex along that segment and vanishes at the far end,
// so a root bracket always exists.
#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "twohop/probability.hpp"
#include "twohop/random.hpp"

namespace twohop {

struct OptimizerConfig {
  /// |U|; 0 selects |In| + 1.
  std::size_t u_cardinality = 0;
  /// Step of the exhaustive grid over each row of P_{U|In}.
  double grid_resolution = 0.1;
  /// Nelder-Mead iteration budget per start.
  int refine_iterations = 800;
  /// Feasibility slack on the rate constraint and simplex convergence size.
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed;
  /// Grid cells kept as Nelder-Mead starting points.
  int grid_starts = 2;
  /// Extra seeded random starts.
  int random_starts = 1;
  /// Upper bound on grid cells; the resolution is coarsened to fit.
  std::size_t max_grid_cells = 250000;
  /// Step of the outer grid over rate-split fractions.
  double split_resolution = 0.02;
  /// Worker threads for independent frontier points; 0 = hardware concurrency.
  unsigned threads = 0;

  void validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("OptimizerConfig: tolerance must be > 0");
    if (!(grid_resolution > 0.0 && grid_resolution <= 1.0))
      throw std::invalid_argument("OptimizerConfig: grid_resolution must be in (0, 1]");
    if (refine_iterations < 0)
      throw std::invalid_argument("OptimizerConfig: refine_iterations must be >= 0");
    if (!(split_resolution > 0.0 && split_resolution <= 1.0))
      throw std::invalid_argument("OptimizerConfig: split_resolution must be in (0, 1]");
  }
};

struct ForwardedInfo {
  ConditionalPmf channel;  // P_{U|In}
  double value = 0.0;      // I(U; Out)
  double rate = 0.0;       // I(U; In)
};

/// Fast evaluator of I(U;In) and I(U;Out) for a fixed (p_in, forward) pair.
/// Channels are flat row-major |In| x |U| arrays.
class ForwardingProblem {
 public:
  ForwardingProblem(Pmf p_in, ConditionalPmf forward, std::size_t u_size)
      : p_in_(std::move(p_in)), forward_(std::move(forward)), u_(u_size) {
    if (p_in_.size() != forward_.input_size())
      throw DimensionMismatch("ForwardingProblem: input pmf and channel disagree on |In|");
    if (u_ < 1) throw std::invalid_argument("ForwardingProblem: |U| must be >= 1");
    m_ = p_in_.size();
    k_ = forward_.output_size();
    const Pmf p_out = push_forward(p_in_, forward_);
    p_out_.assign(p_out.probs().begin(), p_out.probs().end());
    pu_.resize(u_);
    q_.resize(u_ * k_);
  }

  std::size_t in_size() const noexcept { return m_; }
  std::size_t u_size() const noexcept { return u_; }
  const Pmf& p_in() const noexcept { return p_in_; }
  const ConditionalPmf& forward() const noexcept { return forward_; }

  double rate(const double* w) const {
    output_marginal(w);
    double r = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (p_in_[i] == 0.0) continue;
      double s = 0.0;
      for (std::size_t u = 0; u < u_; ++u) s += detail::plogpq(w[i * u_ + u], pu_[u]);
      r += p_in_[i] * s;
    }
    return std::max(0.0, r);
  }

  double value(const double* w) const {
    output_marginal(w);
    std::fill(q_.begin(), q_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double pi = p_in_[i];
      if (pi == 0.0) continue;
      for (std::size_t u = 0; u < u_; ++u) {
        const double a = pi * w[i * u_ + u];
        if (a == 0.0) continue;
        for (std::size_t o = 0; o < k_; ++o) q_[u * k_ + o] += a * forward_(i, o);
      }
    }
    double v = 0.0;
    for (std::size_t u = 0; u < u_; ++u)
      for (std::size_t o = 0; o < k_; ++o) v += detail::plogpq(q_[u * k_ + o], pu_[u] * p_out_[o]);
    return std::max(0.0, v);
  }

  /// Mixes `w` in place toward the constant channel until I(U;In) <= cap.
  /// Returns the resulting rate.
  double repair(double* w, double cap, double tol) const {
    const std::size_t n = m_ * u_;
    double r0 = rate(w);
    if (r0 <= cap) return r0;
    base_.assign(w, w + n);
    pu_fixed_ = pu_;
    trial_.resize(n);
    auto& base = base_;
    auto& pu = pu_fixed_;
    auto& trial = trial_;
    auto mix = [&](double t) {
      for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t u = 0; u < u_; ++u)
          trial[i * u_ + u] = (1.0 - t) * base[i * u_ + u] + t * pu[u];
    };
    auto f = [&](double t) {
      mix(t);
      return rate(trial.data()) - cap;
    };
    // Illinois false position on f(t) with f(0) > 0 >= f(1).
    double lo = 0.0, hi = 1.0, flo = r0 - cap, fhi = -cap;
    int side = 0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      double t = (fhi == flo) ? 0.5 * (lo + hi) : hi - fhi * (hi - lo) / (fhi - flo);
      if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
      const double ft = f(t);
      if (ft > 0.0) {
        lo = t, flo = ft;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = t, fhi = ft;
        if (side == 1) flo *= 0.5;
        side = 1;
        if (-ft <= tol) break;
      }
    }
    mix(hi);
    std::copy(trial.begin(), trial.end(), w);
    return rate(w);
  }

  ConditionalPmf to_channel(const std::vector<double>& w) const {
    std::vector<Pmf> rows;
    for (std::size_t i = 0; i < m_; ++i) {
      std::vector<double> r(w.begin() + i * u_, w.begin() + (i + 1) * u_);
      double s = 0.0;
      for (double& x : r) s += (x = std::max(0.0, x));
      for (double& x : r) x /= s;
      rows.emplace_back(std::move(r));
    }
    return ConditionalPmf(std::move(rows));
  }

 private:
  void output_marginal(const double* w) const {
    std::fill(pu_.begin(), pu_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t u = 0; u < u_; ++u) pu_[u] += p_in_[i] * w[i * u_ + u];
  }

  Pmf p_in_;
  ConditionalPmf forward_;
  std::size_t u_, m_ = 0, k_ = 0;
  std::vector<double> p_out_;
  mutable std::vector<double> pu_, q_, base_, pu_fixed_, trial_;
};

namespace detail {

/// All compositions of `total` into `parts` non-negative integers, in
/// lexicographic order.
inline std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(parts, 0);
  auto rec = [&](auto&& self, std::size_t k, int left) -> void {
    if (k + 1 == parts) {
      cur[k] = left;
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      cur[k] = c;
      self(self, k + 1, left - c);
    }
  };
  rec(rec, 0, total);
  return out;
}

inline double binomial_count(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Grid steps per unit, coarsened until (#row compositions)^rows fits the budget.
inline int grid_steps(double resolution, std::size_t u, std::size_t rows, std::size_t budget) {
  int steps = std::max(1, static_cast<int>(std::lround(1.0 / resolution)));
  while (steps > 1 &&
         std::pow(binomial_count(steps + static_cast<int>(u) - 1, static_cast<int>(u) - 1),
                  static_cast<double>(rows)) > static_cast<double>(budget))
    --steps;
  return steps;
}

inline void softmax_rows(const double* logits, std::size_t rows, std::size_t u, double* w) {
  for (std::size_t i = 0; i < rows; ++i) {
    double mx = 0.0;  // implicit last logit is 0
    for (std::size_t k = 0; k + 1 < u; ++k) mx = std::max(mx, logits[i * (u - 1) + k]);
    double s = 0.0;
    for (std::size_t k = 0; k < u; ++k) {
      const double l = (k + 1 < u) ? logits[i * (u - 1) + k] : 0.0;
      s += (w[i * u + k] = std::exp(l - mx));
    }
    for (std::size_t k = 0; k < u; ++k) w[i * u + k] /= s;
  }
}

}  // namespace detail

/// Solves the forwarding problem. Deterministic for a given (config, cap).
inline ForwardedInfo max_forwarded_info(const Pmf& p_in, const ConditionalPmf& forward, double cap,
                                        const OptimizerConfig& cfg) {
  cfg.validate();
  if (!(cap >= 0.0)) throw std::invalid_argument("max_forwarded_info: rate cap must be >= 0");
  const std::size_t m = p_in.size();
  const std::size_t u = cfg.u_cardinality ? cfg.u_cardinality : m + 1;
  ForwardingProblem prob(p_in, forward, u);

  if (cap == 0.0) {
    return {ConditionalPmf::constant(m, Pmf::point_mass(u, 0)), 0.0, 0.0};
  }

  const std::size_t n = m * u;
  struct Candidate {
    std::vector<double> w;
    double value;
  };
  std::vector<Candidate> best;  // sorted by value desc, earliest grid index wins ties
  const auto keep = static_cast<std::size_t>(std::max(1, cfg.grid_starts));
  auto offer = [&](const std::vector<double>& w, double v) {
    if (best.size() == keep && v <= best.back().value) return;
    auto pos = std::find_if(best.begin(), best.end(), [&](const Candidate& c) { return v > c.value; });
    best.insert(pos, Candidate{w, v});
    if (best.size() > keep) best.pop_back();
  };

  // Exhaustive grid over the rows.
  const int steps = detail::grid_steps(cfg.grid_resolution, u, m, cfg.max_grid_cells);
  const auto comps = detail::compositions(steps, u);
  std::vector<std::size_t> odo(m, 0);
  std::vector<double> w(n);
  const double coarse_tol = 1e-9;
  for (;;) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < u; ++k) w[i * u + k] = comps[odo[i]][k] / static_cast<double>(steps);
    prob.repair(w.data(), cap, coarse_tol);
    offer(w, prob.value(w.data()));
    std::size_t i = 0;
    while (i < m && ++odo[i] == comps.size()) odo[i++] = 0;
    if (i == m) break;
  }

  // Nelder-Mead refinement on logits.
  const std::size_t dim = m * (u - 1);
  struct Ctx {
    const ForwardingProblem* prob;
    std::size_t m, u;
    double cap, tol;
    std::vector<double> w;
  } ctx{&prob, m, u, cap, cfg.tolerance * 1e-2, std::vector<double>(n)};
  auto objective = [](const gsl_vector* x, void* p) -> double {
    auto* c = static_cast<Ctx*>(p);
    detail::softmax_rows(x->data, c->m, c->u, c->w.data());
    c->prob->repair(c->w.data(), c->cap, c->tol);
    return -c->prob->value(c->w.data());
  };

  std::vector<std::vector<double>> starts;
  for (const auto& c : best) {
    std::vector<double> l(dim);
    for (std::size_t i = 0; i < m; ++i) {
      const double last = std::log(std::max(c.w[i * u + u - 1], 1e-6));
      for (std::size_t k = 0; k + 1 < u; ++k)
        l[i * (u - 1) + k] = std::log(std::max(c.w[i * u + k], 1e-6)) - last;
    }
    starts.push_back(std::move(l));
  }
  std::mt19937_64 rng(splitmix64(cfg.seed ^ std::bit_cast<std::uint64_t>(cap)));
  for (int r = 0; r < cfg.random_starts; ++r) {
    std::vector<double> l(dim);
    for (auto& x : l) x = 4.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
    starts.push_back(std::move(l));
  }

  if (dim > 0 && cfg.refine_iterations > 0) {
    gsl_set_error_handler_off();
    gsl_multimin_function fn{objective, dim, &ctx};
    const gsl_multimin_fminimizer_type* type = gsl_multimin_fminimizer_nmsimplex2;
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(type, dim);
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    for (const auto& start : starts) {
      std::copy(start.begin(), start.end(), x->data);
      // Two passes: a restart re-inflates the simplex around the first optimum.
      for (double step_size : {1.0, 0.1}) {
        gsl_vector_set_all(step, step_size);
        gsl_multimin_fminimizer_set(s, &fn, x, step);
        for (int it = 0; it < cfg.refine_iterations; ++it) {
          if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
          if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), cfg.tolerance) == GSL_SUCCESS)
            break;
        }
        gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(s));
      }
      detail::softmax_rows(x->data, m, u, ctx.w.data());
      prob.repair(ctx.w.data(), cap, ctx.tol);
      offer(ctx.w, prob.value(ctx.w.data()));
    }
    gsl_vector_free(step);
    gsl_vector_free(x);
    gsl_multimin_fminimizer_free(s);
  }

  ForwardedInfo out;
  out.channel = prob.to_channel(best.front().w);
  const JointPmf p_u_in = JointPmf::from_marginal_and_channel(p_in, out.channel);
  out.rate = mutual_information(p_u_in);
  out.value = mutual_information(JointPmf::from_marginal_and_channel(
      p_u_in.marginal(1), cascade(p_u_in.transposed().conditional(), forward)));
  return out;
}

}  // namespace twohop
