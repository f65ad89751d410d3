// Test-only reference computations, written independently of the library's
// optimizer.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double entropy(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p)
    if (v > 0.0) s -= v * std::log2(v);
  return s;
}

/// max I(U;Out) s.t. I(U;In) <= cap for binary In ~ Bern(p1) and forward
/// rows w0, w1, by Lagrange duality: for each slope lambda the best value of
/// I(U;Out) - lambda I(U;In) is read off the lower convex envelope of
/// q -> H(Out | In ~ Bern(q)) - lambda h(q) at q = p1.
inline double forwarding_dual(double p1, const std::vector<double>& w0, const std::vector<double>& w1, double cap,
                              int grid = 20001) {
  auto out_entropy = [&](double q) {
    std::vector<double> mix(w0.size());
    for (std::size_t j = 0; j < w0.size(); ++j) mix[j] = (1.0 - q) * w0[j] + q * w1[j];
    return entropy(mix);
  };
  const double h_in = h2(p1), h_out = out_entropy(p1);
  std::vector<double> qs(grid), base(grid), hq(grid);
  for (int i = 0; i < grid; ++i) {
    qs[i] = static_cast<double>(i) / (grid - 1);
    base[i] = out_entropy(qs[i]);
    hq[i] = h2(qs[i]);
  }
  auto envelope_at = [&](double lambda) {
    // Lower hull by monotone chain, then linear interpolation at p1.
    std::vector<int> hull;
    auto f = [&](int i) { return base[i] - lambda * hq[i]; };
    for (int i = 0; i < grid; ++i) {
      while (hull.size() >= 2) {
        const int a = hull[hull.size() - 2], b = hull.back();
        const double cross = (qs[b] - qs[a]) * (f(i) - f(a)) - (f(b) - f(a)) * (qs[i] - qs[a]);
        if (cross <= 0.0) hull.pop_back();
        else break;
      }
      hull.push_back(i);
    }
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
      const int a = hull[k], b = hull[k + 1];
      if (qs[a] <= p1 && p1 <= qs[b]) {
        const double t = (p1 - qs[a]) / (qs[b] - qs[a]);
        return (1.0 - t) * f(a) + t * f(b);
      }
    }
    return f(hull.back());
  };
  auto dual = [&](double lambda) { return lambda * cap + (h_out - lambda * h_in) - envelope_at(lambda); };
  double lo = 0.0, hi = 1.0;
  constexpr double g = 0.6180339887498949;
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = dual(c), fd = dual(d);
  for (int it = 0; it < 60; ++it) {
    if (fc <= fd) {
      hi = d, d = c, fd = fc;
      c = hi - g * (hi - lo);
      fc = dual(c);
    } else {
      lo = c, c = d, fc = fd;
      d = lo + g * (hi - lo);
      fd = dual(d);
    }
  }
  return std::min({fc, fd, dual(0.0)});
}

}  // namespace oracle
