// Finite-alphabet probability machinery: pmfs, conditional pmfs, dense joint
// tables, information measures in bits, empirical types and strong typicality.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twohop {

using Symbol = std::uint8_t;
using Sequence = std::vector<Symbol>;

inline constexpr double kPmfTolerance = 1e-12;

struct InvalidDistribution : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct AbsoluteContinuityViolation : std::domain_error {
  using std::domain_error::domain_error;
};
struct EmptySequence : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void validate_probs(std::span<const double> probs, const char* what) {
  if (probs.empty()) throw InvalidDistribution(std::string(what) + ": empty support");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0)
      throw InvalidDistribution(std::string(what) + ": negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kPmfTolerance)
    throw InvalidDistribution(std::string(what) + ": entries sum to " + std::to_string(sum));
}

// p * log2(p / q) with the 0 log 0 = 0 convention; caller guarantees q > 0 when p > 0.
inline double plogpq(double p, double q) { return p > 0.0 ? p * std::log2(p / q) : 0.0; }

}  // namespace detail

/// A validated probability mass function over {0, ..., size()-1}.
/// Invalid input is rejected, never renormalized.
class Pmf {
 public:
  Pmf() = default;
  explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    detail::validate_probs(probs_, "Pmf");
  }

  static Pmf uniform(std::size_t size) {
    if (size == 0) throw InvalidDistribution("Pmf: empty support");
    return Pmf(std::vector<double>(size, 1.0 / static_cast<double>(size)));
  }
  static Pmf point_mass(std::size_t size, std::size_t at) {
    if (at >= size) throw std::out_of_range("Pmf::point_mass");
    std::vector<double> p(size, 0.0);
    p[at] = 1.0;
    return Pmf(std::move(p));
  }
  static Pmf bernoulli(double p1) { return Pmf({1.0 - p1, p1}); }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
};

/// Row-stochastic matrix P(out | in); row i is a Pmf over outputs.
class ConditionalPmf {
 public:
  ConditionalPmf() = default;
  explicit ConditionalPmf(std::vector<Pmf> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw InvalidDistribution("ConditionalPmf: no rows");
    for (const auto& r : rows_)
      if (r.size() != rows_.front().size())
        throw DimensionMismatch("ConditionalPmf: ragged rows");
  }
  /// Row-major `in x out` matrix.
  static ConditionalPmf from_row_major(std::size_t in, std::size_t out,
                                       std::span<const double> values) {
    if (in == 0 || out == 0 || values.size() != in * out)
      throw DimensionMismatch("ConditionalPmf: expected " + std::to_string(in * out) +
                              " entries, got " + std::to_string(values.size()));
    std::vector<Pmf> rows;
    rows.reserve(in);
    for (std::size_t i = 0; i < in; ++i)
      rows.emplace_back(std::vector<double>(values.begin() + i * out,
                                            values.begin() + (i + 1) * out));
    return ConditionalPmf(std::move(rows));
  }
  static ConditionalPmf identity(std::size_t size) {
    std::vector<Pmf> rows;
    for (std::size_t i = 0; i < size; ++i) rows.push_back(Pmf::point_mass(size, i));
    return ConditionalPmf(std::move(rows));
  }
  /// Every input maps to the same output law, so the output carries no information.
  static ConditionalPmf constant(std::size_t in, const Pmf& out) {
    return ConditionalPmf(std::vector<Pmf>(in, out));
  }
  /// Binary symmetric channel with the given crossover probability.
  static ConditionalPmf bsc(double crossover) {
    return ConditionalPmf({Pmf({1.0 - crossover, crossover}), Pmf({crossover, 1.0 - crossover})});
  }

  std::size_t input_size() const noexcept { return rows_.size(); }
  std::size_t output_size() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
  const Pmf& row(std::size_t i) const { return rows_[i]; }
  double operator()(std::size_t in, std::size_t out) const { return rows_[in][out]; }

  std::vector<double> row_major() const {
    std::vector<double> v;
    v.reserve(input_size() * output_size());
    for (const auto& r : rows_) v.insert(v.end(), r.probs().begin(), r.probs().end());
    return v;
  }

  friend bool operator==(const ConditionalPmf&, const ConditionalPmf&) = default;

 private:
  std::vector<Pmf> rows_;
};

/// Dense joint pmf over a product alphabet, stored row-major (last axis fastest).
class JointPmf {
 public:
  JointPmf() = default;
  JointPmf(std::vector<std::size_t> dims, std::vector<double> probs)
      : dims_(std::move(dims)), probs_(std::move(probs)) {
    if (dims_.empty()) throw DimensionMismatch("JointPmf: no axes");
    std::size_t total = 1;
    for (auto d : dims_) {
      if (d == 0) throw DimensionMismatch("JointPmf: zero-sized axis");
      total *= d;
    }
    if (total != probs_.size())
      throw DimensionMismatch("JointPmf: table has " + std::to_string(probs_.size()) +
                              " entries, dims imply " + std::to_string(total));
    detail::validate_probs(probs_, "JointPmf");
  }

  /// P(a, b) = P(a) P(b | a).
  static JointPmf from_marginal_and_channel(const Pmf& p_a, const ConditionalPmf& p_b_given_a) {
    if (p_a.size() != p_b_given_a.input_size())
      throw DimensionMismatch("JointPmf: marginal size " + std::to_string(p_a.size()) +
                              " vs channel input size " +
                              std::to_string(p_b_given_a.input_size()));
    const std::size_t na = p_a.size(), nb = p_b_given_a.output_size();
    std::vector<double> t(na * nb);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) t[a * nb + b] = p_a[a] * p_b_given_a(a, b);
    return JointPmf({na, nb}, std::move(t));
  }

  static JointPmf product(const Pmf& p_a, const Pmf& p_b) {
    return from_marginal_and_channel(p_a, ConditionalPmf::constant(p_a.size(), p_b));
  }

  std::size_t rank() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double at(std::size_t flat) const { return probs_[flat]; }
  double operator()(std::size_t a, std::size_t b) const { return probs_[a * dims_[1] + b]; }

  Pmf marginal(std::size_t axis) const {
    if (axis >= dims_.size()) throw DimensionMismatch("JointPmf::marginal: bad axis");
    std::vector<double> m(dims_[axis], 0.0);
    std::size_t stride = 1;
    for (std::size_t k = axis + 1; k < dims_.size(); ++k) stride *= dims_[k];
    for (std::size_t i = 0; i < probs_.size(); ++i) m[(i / stride) % dims_[axis]] += probs_[i];
    clamp_sum(m);
    return Pmf(std::move(m));
  }

  /// Two-axis table with the axes swapped.
  JointPmf transposed() const {
    require_two_axes("transposed");
    const std::size_t na = dims_[0], nb = dims_[1];
    std::vector<double> t(na * nb);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) t[b * na + a] = probs_[a * nb + b];
    return JointPmf({nb, na}, std::move(t));
  }

  /// Conditional of axis 1 given axis 0. Rows with zero mass are set uniform.
  ConditionalPmf conditional() const {
    require_two_axes("conditional");
    const std::size_t na = dims_[0], nb = dims_[1];
    std::vector<Pmf> rows;
    for (std::size_t a = 0; a < na; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < nb; ++b) s += probs_[a * nb + b];
      std::vector<double> r(nb, 1.0 / static_cast<double>(nb));
      if (s > 0.0)
        for (std::size_t b = 0; b < nb; ++b) r[b] = probs_[a * nb + b] / s;
      clamp_sum(r);
      rows.emplace_back(std::move(r));
    }
    return ConditionalPmf(std::move(rows));
  }

  void require_two_axes(const char* what) const {
    if (dims_.size() != 2)
      throw DimensionMismatch(std::string("JointPmf::") + what + ": needs exactly two axes");
  }

 private:
  // Sums of floating-point products can drift by a few ulps; fold the residue
  // into the largest entry so derived pmfs stay inside the validation tolerance.
  static void clamp_sum(std::vector<double>& v) {
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    auto it = std::max_element(v.begin(), v.end());
    *it = std::max(0.0, *it + (1.0 - s));
  }

  std::vector<std::size_t> dims_;
  std::vector<double> probs_;
};

// ---------------------------------------------------------------------------
// Information measures (bits)

inline double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return std::max(0.0, h);
}
inline double entropy(const Pmf& p) { return entropy(p.probs()); }
inline double entropy(const JointPmf& j) { return entropy(j.probs()); }

/// I(A;B) for a two-axis joint pmf.
inline double mutual_information(const JointPmf& j) {
  j.require_two_axes("mutual_information");
  const Pmf pa = j.marginal(0), pb = j.marginal(1);
  const std::size_t na = pa.size(), nb = pb.size();
  double mi = 0.0;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b)
      mi += detail::plogpq(j(a, b), pa[a] * pb[b]);
  return std::max(0.0, mi);
}

/// I(A;B) where A ~ p_a and B | A ~ channel.
inline double mutual_information(const Pmf& p_a, const ConditionalPmf& channel) {
  return mutual_information(JointPmf::from_marginal_and_channel(p_a, channel));
}

inline double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw DimensionMismatch("kl_divergence: alphabet sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] == 0.0)
      throw AbsoluteContinuityViolation("kl_divergence: support(p) not contained in support(q)");
    d += detail::plogpq(p[i], q[i]);
  }
  return std::max(0.0, d);
}

/// Composition of output law: P_B(b) = sum_a P_A(a) W(b|a).
inline Pmf push_forward(const Pmf& p_a, const ConditionalPmf& channel) {
  return JointPmf::from_marginal_and_channel(p_a, channel).marginal(1);
}

/// Cascade of two channels A -> B -> C, giving P(C | A).
inline ConditionalPmf cascade(const ConditionalPmf& ab, const ConditionalPmf& bc) {
  if (ab.output_size() != bc.input_size()) throw DimensionMismatch("cascade: inner sizes differ");
  std::vector<Pmf> rows;
  for (std::size_t a = 0; a < ab.input_size(); ++a) rows.push_back(push_forward(ab.row(a), bc));
  return ConditionalPmf(std::move(rows));
}

// ---------------------------------------------------------------------------
// Two-hop source X -> Y -> Z

/// Joint law P_X P_{Y|X} P_{Z|Y} with the derived joints and marginals cached.
/// Z depends on (X, Y) only through Y by construction.
struct TwoHopSource {
  Pmf p_x;
  ConditionalPmf p_y_given_x;
  ConditionalPmf p_z_given_y;
  JointPmf p_xy;
  JointPmf p_yz;
  Pmf p_y;
  Pmf p_z;

  std::size_t x_size() const noexcept { return p_x.size(); }
  std::size_t y_size() const noexcept { return p_y.size(); }
  std::size_t z_size() const noexcept { return p_z.size(); }

  double info_xy() const { return mutual_information(p_xy); }
  double info_yz() const { return mutual_information(p_yz); }
  double info_xz() const { return mutual_information(p_x, cascade(p_y_given_x, p_z_given_y)); }
};

inline TwoHopSource compose_two_hop(Pmf p_x, ConditionalPmf p_y_given_x, ConditionalPmf p_z_given_y) {
  if (p_x.size() != p_y_given_x.input_size())
    throw DimensionMismatch("compose_two_hop: |X| = " + std::to_string(p_x.size()) +
                            " but P_{Y|X} has " + std::to_string(p_y_given_x.input_size()) +
                            " rows");
  if (p_y_given_x.output_size() != p_z_given_y.input_size())
    throw DimensionMismatch("compose_two_hop: |Y| = " + std::to_string(p_y_given_x.output_size()) +
                            " but P_{Z|Y} has " + std::to_string(p_z_given_y.input_size()) +
                            " rows");
  TwoHopSource s;
  s.p_xy = JointPmf::from_marginal_and_channel(p_x, p_y_given_x);
  s.p_y = s.p_xy.marginal(1);
  s.p_yz = JointPmf::from_marginal_and_channel(s.p_y, p_z_given_y);
  s.p_z = s.p_yz.marginal(1);
  s.p_x = std::move(p_x);
  s.p_y_given_x = std::move(p_y_given_x);
  s.p_z_given_y = std::move(p_z_given_y);
  return s;
}

/// X ~ Bern(p_x), Y = X xor T, Z = Y xor S with T ~ Bern(p_t), S ~ Bern(p_s).
inline TwoHopSource binary_xor_source(double p_x, double p_t, double p_s) {
  return compose_two_hop(Pmf::bernoulli(p_x), ConditionalPmf::bsc(p_t), ConditionalPmf::bsc(p_s));
}

// ---------------------------------------------------------------------------
// Empirical types and strong typicality

inline Pmf empirical_type(std::span<const Symbol> seq, std::size_t alphabet_size) {
  if (seq.empty()) throw EmptySequence("empirical_type: empty sequence");
  std::vector<double> counts(alphabet_size, 0.0);
  for (Symbol s : seq) {
    if (s >= alphabet_size) throw std::invalid_argument("empirical_type: symbol out of range");
    counts[s] += 1.0;
  }
  const double n = static_cast<double>(seq.size());
  for (double& c : counts) c /= n;
  // Integer counts over n may miss 1 by an ulp or two.
  double s = std::accumulate(counts.begin(), counts.end(), 0.0);
  *std::max_element(counts.begin(), counts.end()) += 1.0 - s;
  return Pmf(std::move(counts));
}

/// Per-cell strong typicality predicate: |count/n - p| <= mu, and count = 0
/// whenever p = 0.
inline bool typical_count(std::size_t count, std::size_t n, double p, double mu) noexcept {
  if (p == 0.0) return count == 0;
  return std::abs(static_cast<double>(count) / static_cast<double>(n) - p) <= mu;
}

/// Joint symbol counts of aligned sequences against a table of the given dims.
inline std::vector<std::size_t> joint_counts(std::span<const Sequence> seqs,
                                             const std::vector<std::size_t>& dims) {
  if (seqs.size() != dims.size())
    throw DimensionMismatch("joint_counts: " + std::to_string(seqs.size()) + " sequences for " +
                            std::to_string(dims.size()) + " axes");
  const std::size_t n = seqs.front().size();
  for (const auto& s : seqs)
    if (s.size() != n) throw LengthMismatch("joint_counts: sequences are not aligned");
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  std::vector<std::size_t> counts(total, 0);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const Symbol s = seqs[k][t];
      if (s >= dims[k]) throw std::invalid_argument("joint_counts: symbol out of range");
      flat = flat * dims[k] + s;
    }
    ++counts[flat];
  }
  return counts;
}

/// Membership in the strongly typical set T_mu(P) for aligned sequences.
inline bool is_strongly_typical(std::span<const Sequence> seqs, const JointPmf& reference,
                                double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("is_strongly_typical: mu must be positive");
  if (seqs.empty()) throw DimensionMismatch("is_strongly_typical: no sequences");
  if (seqs.front().empty()) throw EmptySequence("is_strongly_typical: need sequences of length >= 1");
  const auto counts = joint_counts(seqs, reference.dims());
  const std::size_t n = seqs.front().size();
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (!typical_count(counts[i], n, reference.at(i), mu)) return false;
  return true;
}

inline bool is_strongly_typical(const Sequence& seq, const Pmf& reference, double mu) {
  const Sequence* one = &seq;
  return is_strongly_typical(std::span<const Sequence>(one, 1),
                             JointPmf({reference.size()},
                                      std::vector<double>(reference.probs().begin(),
                                                          reference.probs().end())),
                             mu);
}

inline bool is_strongly_typical(const Sequence& a, const Sequence& b, const JointPmf& reference,
                                double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("is_strongly_typical: mu must be positive");
  reference.require_two_axes("is_strongly_typical");
  if (a.size() != b.size() || a.empty())
    throw LengthMismatch("is_strongly_typical: sequences are not aligned");
  const std::size_t na = reference.dims()[0], nb = reference.dims()[1];
  std::vector<std::size_t> counts(na * nb, 0);
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] >= na || b[t] >= nb) throw std::invalid_argument("is_strongly_typical: symbol out of range");
    ++counts[a[t] * nb + b[t]];
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (!typical_count(counts[i], a.size(), reference.at(i), mu)) return false;
  return true;
}

}  // namespace twohop
