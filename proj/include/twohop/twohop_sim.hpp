// Finite-blocklength simulation of the basic two-hop scheme and its
// variable-length wrappers.
//
// Two codebook backends share one code path:
//  - table: explicit codebooks of ceil(2^{n(I+mu)}) i.i.d. entries, fixed
//    across trials; limited by codebook_entry_limit();
//  - ensemble: a fresh random codebook per trial, never materialized. The
//    encoder's success event and the selected codeword are drawn from their
//    exact laws (see typical_sampling.hpp), so estimates are averages over
//    the random-coding ensemble. This is the only way to reach the rates of
//    interest at n in the hundreds.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twohop/bitstring.hpp"
#include "twohop/exponent_regions.hpp"
#include "twohop/parallel.hpp"
#include "twohop/probability.hpp"
#include "twohop/random.hpp"
#include "twohop/typical_sampling.hpp"

namespace twohop {

struct CodebookTooLarge : std::length_error {
  using std::length_error::length_error;
};
struct UnknownIndex : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct InfeasibleTarget : std::domain_error {
  using std::domain_error::domain_error;
};

enum class Branch { S, Dprime, Ddprime, atypical };

inline std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::S: return "S";
    case Branch::Dprime: return "Dprime";
    case Branch::Ddprime: return "Ddprime";
    case Branch::atypical: return "atypical";
  }
  return "?";
}

inline constexpr std::size_t kDefaultCodebookEntryLimit = std::size_t{1} << 24;
inline constexpr const char* kCodebookLimitEnv = "TWOHOP_MAX_CODEBOOK_ENTRIES";

/// Entry cap for explicit codebooks; the environment variable overrides.
inline std::size_t codebook_entry_limit() {
  if (const char* env = std::getenv(kCodebookLimitEnv)) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultCodebookEntryLimit;
}

/// ceil(2^{n * rate}), or nullopt once it no longer fits in 63 bits.
inline std::optional<std::uint64_t> codebook_size(double rate, std::size_t n) {
  const double l2 = static_cast<double>(n) * rate;
  if (l2 > 62.0) return std::nullopt;
  return static_cast<std::uint64_t>(std::ceil(std::exp2(l2)));
}

struct Codebook {
  std::vector<Sequence> entries;  // entry m is entries[m - 1]
  std::size_t n = 0;
  Pmf gen_pmf = Pmf::uniform(1);
  std::uint64_t seed = 0;
  double rate_target = 0.0;

  std::size_t size() const noexcept { return entries.size(); }
};

inline Codebook generate_codebook(const Pmf& pmf, double rate_target, std::size_t n, std::uint64_t seed,
                                  std::size_t limit = codebook_entry_limit()) {
  if (n == 0) throw std::invalid_argument("generate_codebook: n must be >= 1");
  if (!(rate_target >= 0.0)) throw std::invalid_argument("generate_codebook: rate must be >= 0");
  const auto m = codebook_size(rate_target, n);
  if (!m || *m > limit)
    throw CodebookTooLarge("generate_codebook: 2^" + std::to_string(n * rate_target) +
                           " entries exceed the limit of " + std::to_string(limit) +
                           "; lower the rate or n, use the ensemble backend, or raise " + kCodebookLimitEnv);
  Codebook cb{{}, n, pmf, seed, rate_target};
  cb.entries.reserve(*m);
  Rng rng(seed);
  for (std::uint64_t i = 0; i < *m; ++i) cb.entries.push_back(sample_iid(pmf, n, rng));
  return cb;
}

/// Random index string for an index uniform on {1, ..., M}, M = ceil(2^log2_m).
inline BitString sample_index_string(double log2_m, Rng& rng) {
  if (log2_m <= 52.0) return string_encode(1 + rng.below(static_cast<std::uint64_t>(std::ceil(std::exp2(log2_m)))));
  // Only the bit length matters beyond this point: Pr[len = K] = (f-1)/f and
  // Pr[len = K-j] = 2^-j / f with f = M / 2^{K-1}.
  const double top = std::floor(log2_m);
  const auto k = static_cast<std::size_t>(top) + 1;
  const double f = std::exp2(log2_m - top);
  std::size_t len = k;
  double u = rng.uniform();
  if (u >= (f - 1.0) / f) {
    u = (u - (f - 1.0) / f) * f;
    std::size_t j = 1;
    for (double edge = 0.5; u >= edge && j + 1 < k; edge += std::exp2(-static_cast<double>(j + 1))) ++j;
    len = k - j;
  }
  BitString s("1");
  for (std::size_t i = 1; i < len; ++i) s.push_back(rng.next() >> 63);
  return s;
}

/// One codebook C_U of one hop: generated i.i.d. P_U, searched for joint
/// typicality with the hop input, and checked against the hop output.
class HopCode {
 public:
  HopCode(const Pmf& p_in, const ConditionalPmf& forward, const ConditionalPmf& channel, std::size_t n,
          double mu, std::optional<Codebook> table = std::nullopt)
      : n_(n),
        mu_(mu),
        p_in_(p_in),
        p_u_(push_forward(p_in, channel)),
        info_(mutual_information(p_in, channel)),
        encode_box_(JointPmf::from_marginal_and_channel(p_in, channel), p_u_, mu, n),
        check_box_(make_check_ref(p_in, forward, channel), push_forward(p_in, forward), mu, n),
        table_(std::move(table)) {
    if (channel.input_size() != p_in.size() || forward.input_size() != p_in.size())
      throw DimensionMismatch("HopCode: channel input alphabet differs from the hop input");
    if (table_ && table_->n != n) throw LengthMismatch("HopCode: codebook blocklength differs from n");
  }

  std::size_t n() const noexcept { return n_; }
  double mu() const noexcept { return mu_; }
  const Pmf& input_pmf() const noexcept { return p_in_; }
  const Pmf& codeword_pmf() const noexcept { return p_u_; }
  double information() const noexcept { return info_; }
  double rate() const noexcept { return info_ + mu_; }
  double log2_size() const noexcept { return static_cast<double>(n_) * rate(); }
  bool has_table() const noexcept { return table_.has_value(); }
  const Codebook& table() const { return table_.value(); }

  /// Reference joint of (input, codeword) used by the encoder's search.
  const JointPmf& encode_reference() const noexcept { return encode_box_.reference(); }
  /// Reference joint of (codeword, output) used by the decision check.
  const JointPmf& check_reference() const noexcept { return check_box_.reference(); }
  /// Check event against an output drawn i.i.d. from its marginal.
  const TypicalityBox& check_box() const noexcept { return check_box_; }

  struct Pick {
    Sequence codeword;
    double success = 0.0;  // probability that some codeword qualifies
    std::size_t table_index = 0;
  };

  /// Codeword the encoder would select given that a qualifying index exists.
  std::optional<Pick> conditional_pick(const Sequence& in, Rng& rng) const {
    if (table_) {
      std::vector<std::size_t> hits;
      for (std::size_t m = 0; m < table_->size(); ++m)
        if (is_strongly_typical(in, table_->entries[m], encode_reference(), mu_)) hits.push_back(m);
      if (hits.empty()) return std::nullopt;
      const std::size_t m = hits[rng.below(hits.size())];
      return Pick{table_->entries[m], 1.0, m};
    }
    auto s = encode_box_.sample(in, rng);
    if (!s) return std::nullopt;
    return Pick{std::move(s->first), any_success_probability(s->second, log_size())};
  }

  struct Encoded {
    BitString index;
    Sequence codeword;
  };

  /// Search for indices with (u(m), in) jointly typical; uniform pick.
  std::optional<Encoded> encode(const Sequence& in, Rng& rng) const {
    auto pick = conditional_pick(in, rng);
    if (!pick) return std::nullopt;
    if (table_) return Encoded{string_encode(pick->table_index + 1), std::move(pick->codeword)};
    if (!rng.bernoulli(pick->success)) return std::nullopt;
    return Encoded{sample_index_string(log2_size(), rng), std::move(pick->codeword)};
  }

  /// Codeword for a received index. The ensemble backend has no table, so
  /// the codeword produced by the encoder travels alongside the bits.
  const Sequence& lookup(const BitString& index, const Sequence* carried) const {
    if (table_) {
      const std::uint64_t m = string_decode(index);
      if (m > table_->size())
        throw UnknownIndex("index " + std::to_string(m) + " exceeds codebook size " + std::to_string(table_->size()));
      return table_->entries[m - 1];
    }
    if (!carried) throw std::logic_error("HopCode::lookup: ensemble codeword missing");
    return *carried;
  }

 private:
  static JointPmf make_check_ref(const Pmf& p_in, const ConditionalPmf& forward, const ConditionalPmf& channel) {
    const JointPmf u_in = JointPmf::from_marginal_and_channel(p_in, channel).transposed();
    return JointPmf::from_marginal_and_channel(u_in.marginal(0), cascade(u_in.conditional(), forward));
  }

  double log_size() const {
    const double l2 = log2_size();
    return l2 <= 52.0 ? std::log(std::ceil(std::exp2(l2))) : l2 * std::log(2.0);
  }

  std::size_t n_;
  double mu_;
  Pmf p_in_, p_u_;
  double info_;
  TypicalityBox encode_box_, check_box_;
  std::optional<Codebook> table_;
};

// Basic scheme, single version ----------------------------------------------

/// Transmitter: string(m1) for a uniformly picked jointly typical index, else "0".
inline BitString tx_encode_basic(const Sequence& x, const HopCode& cb, Rng& rng,
                                 std::optional<Sequence>* codeword = nullptr) {
  if (x.size() != cb.n()) throw LengthMismatch("tx_encode_basic: sequence length differs from codebook n");
  if (is_strongly_typical(x, cb.input_pmf(), cb.mu()))
    if (auto e = cb.encode(x, rng)) {
      if (codeword) *codeword = std::move(e->codeword);
      return e->index;
    }
  return BitString("0");
}

struct RelayDecision {
  int h_hat_y = 1;
  BitString m2{"0"};
  std::optional<Sequence> codeword;
};

inline RelayDecision relay_step_basic(const Sequence& y, const BitString& m1, const HopCode& cb1,
                                      const HopCode& cb2, Rng& rng, const Sequence* carried = nullptr) {
  if (y.size() != cb1.n() || y.size() != cb2.n()) throw LengthMismatch("relay_step_basic: lengths differ");
  const Message msg = parse(m1, false);
  RelayDecision d;
  if (msg.degenerate) return d;
  if (!is_strongly_typical(cb1.lookup(msg.payload, carried), y, cb1.check_reference(), cb1.mu())) return d;
  d.h_hat_y = 0;
  if (auto e = cb2.encode(y, rng)) {
    d.m2 = e->index;
    d.codeword = std::move(e->codeword);
  }
  return d;
}

inline int rx_decide_basic(const Sequence& z, const BitString& m2, const HopCode& cb2,
                           const Sequence* carried = nullptr) {
  if (z.size() != cb2.n()) throw LengthMismatch("rx_decide_basic: length differs from codebook n");
  const Message msg = parse(m2, false);
  if (msg.degenerate) return 1;
  return is_strongly_typical(cb2.lookup(msg.payload, carried), z, cb2.check_reference(), cb2.mu()) ? 0 : 1;
}

// Partition -------------------------------------------------------------------

struct PartitionRule {
  double s_prob = 0.0;   // target Pr[S]
  double d2_prob = 0.0;  // target Pr[D'']
  std::uint64_t seed = 0;

  void validate() const {
    if (!(s_prob >= 0.0 && d2_prob >= 0.0 && s_prob + d2_prob <= 1.0 + 1e-12))
      throw std::invalid_argument("PartitionRule: need s_prob, d2_prob >= 0 with sum <= 1");
  }
};

/// Seeded-hash thinning: typical sequences enter S with probability
/// q_S = s_prob / Pr[T_mu(P_X)]; the rest split so that Pr[D''] = d2_prob.
class Partitioner {
 public:
  Partitioner(PartitionRule rule, const Pmf& p_x, std::size_t n, double mu, bool strict = false)
      : rule_(rule), p_x_(p_x), n_(n), mu_(mu) {
    rule_.validate();
    typical_prob_ = typical_set_probability(p_x, n, mu);
    if (rule_.s_prob > typical_prob_) {
      if (strict)
        throw InfeasibleTarget("Pr[S] = " + std::to_string(rule_.s_prob) +
                               " exceeds Pr[T_mu(P_X)] = " + std::to_string(typical_prob_));
      capped_ = true;
    }
    q_s_ = typical_prob_ > 0.0 ? std::min(1.0, rule_.s_prob / typical_prob_) : 0.0;
    const double s_eff = q_s_ * typical_prob_;
    q_d_ = s_eff < 1.0 ? std::min(1.0, rule_.d2_prob / (1.0 - s_eff)) : 0.0;
  }

  const PartitionRule& rule() const noexcept { return rule_; }
  double typical_probability() const noexcept { return typical_prob_; }
  double s_inclusion() const noexcept { return q_s_; }
  double d2_inclusion() const noexcept { return q_d_; }
  /// The S target was larger than the typical set could hold.
  bool capped() const noexcept { return capped_; }

  Branch assign(const Sequence& x) const {
    if (x.size() != n_) throw LengthMismatch("Partitioner: sequence length differs from n");
    std::uint64_t h = derive_seed(rule_.seed, n_);
    for (Symbol s : x) h = splitmix64(h ^ (0x100u + s));
    const double u_s = static_cast<double>(splitmix64(h ^ 0x5u) >> 11) * 0x1.0p-53;
    const double u_d = static_cast<double>(splitmix64(h ^ 0xdu) >> 11) * 0x1.0p-53;
    if (u_s < q_s_ && is_strongly_typical(x, p_x_, mu_)) return Branch::S;
    return u_d < q_d_ ? Branch::Ddprime : Branch::Dprime;
  }

 private:
  PartitionRule rule_;
  Pmf p_x_;
  std::size_t n_;
  double mu_;
  double typical_prob_ = 0.0, q_s_ = 0.0, q_d_ = 0.0;
  bool capped_ = false;
};

inline Branch partition_assign(const Sequence& x, const PartitionRule& rule, const Pmf& p_x, double mu) {
  return Partitioner(rule, p_x, x.size(), mu).assign(x);
}

// Scheme ------------------------------------------------------------------------

enum class CodebookBackend { automatic, table, ensemble };

inline std::string_view to_string(CodebookBackend b) {
  switch (b) {
    case CodebookBackend::automatic: return "auto";
    case CodebookBackend::table: return "table";
    case CodebookBackend::ensemble: return "ensemble";
  }
  return "?";
}
inline CodebookBackend parse_backend(std::string_view s) {
  for (auto b : {CodebookBackend::automatic, CodebookBackend::table, CodebookBackend::ensemble})
    if (to_string(b) == s) return b;
  throw std::invalid_argument("unknown codebook backend '" + std::string(s) + "'");
}

struct SchemeParams {
  TwoHopSource source = binary_xor_source(0.4, 0.8, 0.8);
  Regime regime = Regime::equal;
  std::size_t n = 100;
  double mu = 0.0;  // 0 selects n^{-1/3}
  EpsilonPair eps;
  AuxiliarySolution channels;
  std::uint64_t partition_seed = 1;
  std::uint64_t codebook_seed = 2;
  std::uint64_t noise_seed = 3;
  CodebookBackend backend = CodebookBackend::automatic;

  static double default_mu(std::size_t n) { return std::cbrt(1.0 / static_cast<double>(n)); }
  double effective_mu() const { return mu > 0.0 ? mu : default_mu(n); }

  void validate() const {
    if (n == 0) throw std::invalid_argument("SchemeParams: n must be >= 1");
    if (mu < 0.0) throw std::invalid_argument("SchemeParams: mu must be > 0 (or 0 for the default)");
    eps.validate();
    if (regime == Regime::fixed) throw std::invalid_argument("SchemeParams: no simulator for the fixed regime");
    if (regime_for(eps) != regime)
      throw std::invalid_argument("SchemeParams: eps pair does not match regime " + std::string(to_string(regime)));
    for (ChannelRole role : required_channels(regime))
      if (!channels.has(role))
        throw std::invalid_argument("SchemeParams: missing channel " + std::string(to_string(role)));
  }

  static std::vector<ChannelRole> required_channels(Regime r) {
    switch (r) {
      case Regime::equal: return {ChannelRole::u1, ChannelRole::u2};
      case Regime::eps2_greater: return {ChannelRole::u1_prime, ChannelRole::u1_dprime, ChannelRole::u2_prime};
      case Regime::eps1_greater:
        return {ChannelRole::u1_prime, ChannelRole::u1_dprime, ChannelRole::u2_prime, ChannelRole::u2_dprime};
      case Regime::fixed: break;
    }
    return {};
  }
};

/// Pr[S] = min(eps1, eps2) - mu, Pr[D''] = |eps2 - eps1|.
inline PartitionRule default_partition(const SchemeParams& p) {
  const double mu = p.effective_mu();
  return {std::max(0.0, std::min(p.eps.eps1, p.eps.eps2) - mu), std::abs(p.eps.eps2 - p.eps.eps1), p.partition_seed};
}

struct TrialOutcome {
  int hyp = 0;
  int h_hat_y = 1;
  int h_hat_z = 1;
  std::size_t len_m1 = 1;
  std::size_t len_m2 = 1;
  Branch branch = Branch::Dprime;    // atypical overrides D'/D'' when x is not typical
  Branch assigned = Branch::Dprime;  // raw partition cell
  BitString m1{"0"}, m2{"0"};
  // Under H=1: Pr[H_Y = 0] and Pr[H_Z = 0] given the transmitter's message,
  // averaged analytically over the relay and receiver observations.
  double beta1_conditional = 0.0;
  double beta2_conditional = 0.0;
};

class Scheme {
 public:
  struct Version {
    HopCode hop1;
    std::optional<HopCode> hop2;
  };

  Scheme(SchemeParams params, PartitionRule rule)
      : params_(std::move(params)),
        mu_(params_.effective_mu()),
        partitioner_((params_.validate(), rule), params_.source.p_x, params_.n, mu_) {
    const auto& src = params_.source;
    const auto& ch = params_.channels;
    const bool flagged = params_.regime != Regime::equal;
    const ChannelRole a1 = flagged ? ChannelRole::u1_prime : ChannelRole::u1;
    const ChannelRole a2 = flagged ? ChannelRole::u2_prime : ChannelRole::u2;

    struct Spec {
      const Pmf* in;
      const ConditionalPmf* fwd;
      const ConditionalPmf* chan;
    };
    std::vector<Spec> specs = {{&src.p_x, &src.p_y_given_x, &ch.channel(a1)},
                               {&src.p_y, &src.p_z_given_y, &ch.channel(a2)}};
    if (flagged) specs.push_back({&src.p_x, &src.p_y_given_x, &ch.channel(ChannelRole::u1_dprime)});
    if (params_.regime == Regime::eps1_greater)
      specs.push_back({&src.p_y, &src.p_z_given_y, &ch.channel(ChannelRole::u2_dprime)});

    const std::size_t limit = codebook_entry_limit();
    bool tables = params_.backend == CodebookBackend::table;
    if (params_.backend == CodebookBackend::automatic) {
      double total = 0.0;
      tables = true;
      for (const auto& s : specs) {
        const auto m = codebook_size(mutual_information(*s.in, *s.chan) + mu_, params_.n);
        if (!m || *m > limit) tables = false;
        else total += static_cast<double>(*m) * static_cast<double>(params_.n);
      }
      if (total > static_cast<double>(limit) * 16.0) tables = false;
    }
    tables_ = tables;

    std::vector<HopCode> hops;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& s = specs[i];
      std::optional<Codebook> cb;
      if (tables) {
        const Pmf p_u = push_forward(*s.in, *s.chan);
        cb = generate_codebook(p_u, mutual_information(*s.in, *s.chan) + mu_, params_.n,
                               derive_seed(params_.codebook_seed, i), limit);
      }
      hops.emplace_back(*s.in, *s.fwd, *s.chan, params_.n, mu_, std::move(cb));
    }
    primary_.emplace(Version{hops[0], hops[1]});
    if (flagged) secondary_.emplace(Version{hops[2], params_.regime == Regime::eps1_greater
                                                          ? std::optional<HopCode>(hops[3])
                                                          : std::nullopt});
  }

  const SchemeParams& params() const noexcept { return params_; }
  double mu() const noexcept { return mu_; }
  const Partitioner& partitioner() const noexcept { return partitioner_; }
  bool uses_tables() const noexcept { return tables_; }
  bool flagged() const noexcept { return params_.regime != Regime::equal; }
  const Version& primary() const { return *primary_; }
  const Version& secondary() const { return secondary_.value(); }

  /// One trial. forced overrides the partition cell (S, Dprime or Ddprime).
  TrialOutcome run_trial(int hyp, std::uint64_t trial_seed, std::optional<Branch> forced = std::nullopt) const {
    if (hyp != 0 && hyp != 1) throw std::invalid_argument("run_trial: hyp must be 0 or 1");
    const auto& src = params_.source;
    const std::size_t n = params_.n;
    Rng noise(derive_seed(trial_seed, 1)), coder(derive_seed(trial_seed, 2));

    const Sequence x = sample_iid(src.p_x, n, noise);
    const Sequence y = hyp == 0 ? sample_through(src.p_y_given_x, x, noise) : sample_iid(src.p_y, n, noise);
    const Sequence z = hyp == 0 ? sample_through(src.p_z_given_y, y, noise) : sample_iid(src.p_z, n, noise);

    TrialOutcome out;
    out.hyp = hyp;
    out.assigned = forced.value_or(partitioner_.assign(x));
    if (out.assigned == Branch::Ddprime && !flagged())
      throw std::invalid_argument("run_trial: no double-primed version in the equal regime");
    if (out.assigned == Branch::atypical) throw std::invalid_argument("run_trial: atypical is not a partition cell");
    out.branch = out.assigned;
    if (out.branch != Branch::S && !is_strongly_typical(x, src.p_x, mu_)) out.branch = Branch::atypical;

    // Transmitter.
    Message m1 = Message::zero();
    std::optional<Sequence> u1;
    const Version* version = nullptr;
    if (out.branch == Branch::Dprime || out.branch == Branch::Ddprime) {
      version = out.branch == Branch::Ddprime ? &*secondary_ : &*primary_;
      if (auto e = version->hop1.encode(x, coder)) {
        m1 = Message::with(flag_for(out.branch), std::move(e->index));
        u1 = std::move(e->codeword);
      }
    }
    out.m1 = emit(m1, flagged());

    // Relay, working from the bits only.
    const Message r = parse(out.m1, flagged());
    Message m2 = Message::zero();
    std::optional<Sequence> u2;
    out.h_hat_y = 1;
    if (!r.degenerate) {
      const Version& v = r.flag == Flag::dprimed ? *secondary_ : *primary_;
      const bool pass =
          is_strongly_typical(v.hop1.lookup(r.payload, u1 ? &*u1 : nullptr), y, v.hop1.check_reference(), mu_);
      auto forward_y = [&] {
        if (auto e = v.hop2->encode(y, coder)) {
          u2 = std::move(e->codeword);
          return std::optional<BitString>(std::move(e->index));
        }
        return std::optional<BitString>();
      };
      if (r.flag != Flag::dprimed) {
        out.h_hat_y = pass ? 0 : 1;
        if (pass)
          if (auto idx = forward_y()) m2 = Message::with(r.flag, std::move(*idx));
      } else if (params_.regime == Regime::eps2_greater) {
        out.h_hat_y = pass ? 0 : 1;
        m2 = Message::with(Flag::dprimed, BitString());
      } else {
        // The tentative decision only steers what is sent on.
        out.h_hat_y = 1;
        m2 = Message::with(Flag::dprimed, BitString());
        if (pass)
          if (auto idx = forward_y()) m2.payload = std::move(*idx);
      }
    }
    out.m2 = emit(m2, flagged());

    // Receiver.
    const Message q = parse(out.m2, flagged());
    out.h_hat_z = 1;
    if (!q.degenerate && !q.payload.empty()) {
      const Version& v = q.flag == Flag::dprimed ? *secondary_ : *primary_;
      out.h_hat_z = is_strongly_typical(v.hop2->lookup(q.payload, u2 ? &*u2 : nullptr), z,
                                        v.hop2->check_reference(), mu_)
                        ? 0
                        : 1;
    }
    out.len_m1 = out.m1.length();
    out.len_m2 = out.m2.length();

    if (hyp == 1 && version && !m1.degenerate) conditional_betas(out, *version, *u1, trial_seed);
    return out;
  }

 private:
  Flag flag_for(Branch b) const {
    if (!flagged()) return Flag::none;
    return b == Branch::Ddprime ? Flag::dprimed : Flag::primed;
  }

  // Under H=1 the relay and receiver observations are independent of u1,
  // so the pass probabilities of the two checks are box probabilities.
  void conditional_betas(TrialOutcome& out, const Version& v, const Sequence& u1, std::uint64_t trial_seed) const {
    const bool dprimed = out.branch == Branch::Ddprime;
    Rng rng(derive_seed(trial_seed, 3));
    auto pass = v.hop1.check_box().sample(u1, rng);
    if (!pass) return;
    const double a = std::exp(pass->second);
    const bool relay_decides = !(dprimed && params_.regime == Regime::eps1_greater);
    const bool forwards = v.hop2.has_value();
    out.beta1_conditional = relay_decides ? a : 0.0;
    if (!forwards) return;
    auto pick = v.hop2->conditional_pick(pass->first, rng);
    if (!pick) return;
    const double r = std::exp(v.hop2->check_box().log_probability(pick->codeword));
    out.beta2_conditional = a * pick->success * r;
  }

  SchemeParams params_;
  double mu_;
  Partitioner partitioner_;
  bool tables_ = false;
  std::optional<Version> primary_, secondary_;
};

inline TrialOutcome run_trial(const Scheme& scheme, int hyp, std::uint64_t trial_seed,
                              std::optional<Branch> forced = std::nullopt) {
  return scheme.run_trial(hyp, trial_seed, forced);
}

// Statistics --------------------------------------------------------------------

struct Estimate {
  std::size_t count = 0;
  std::size_t trials = 0;
  double value = 0.0;
  double lower = 0.0;  // Wilson 95% interval
  double upper = 0.0;
};

inline Estimate wilson_estimate(std::size_t count, std::size_t trials) {
  Estimate e{count, trials};
  if (trials == 0) return e;
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(count) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  e.value = p;
  e.lower = count == 0 ? 0.0 : std::max(0.0, center - half);
  e.upper = count == trials ? 1.0 : std::min(1.0, center + half);
  return e;
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct SimulationStats {
  std::size_t trials = 0;  // per hypothesis
  Estimate alpha1_hat, alpha2_hat;  // H=0: decisions equal to 1
  Estimate beta1_hat, beta2_hat;    // H=1: decisions equal to 0
  MeanEstimate beta1_conditional, beta2_conditional;
  double mean_len1 = 0.0, mean_len2 = 0.0;  // under H=0
  std::array<std::size_t, 4> branch_counts_h0{}, branch_counts_h1{};  // indexed by Branch
};

using TranscriptSink = std::function<void(std::size_t trial_index, const TrialOutcome&)>;

/// NDJSON line for one trial.
inline std::string transcript_line(std::size_t index, const TrialOutcome& t) {
  std::ostringstream os;
  os << "{\"trial_index\":" << index << ",\"hyp\":" << t.hyp << ",\"branch\":\"" << to_string(t.branch)
     << "\",\"len_m1\":" << t.len_m1 << ",\"len_m2\":" << t.len_m2 << ",\"h_hat_y\":" << t.h_hat_y
     << ",\"h_hat_z\":" << t.h_hat_z << "}";
  return os.str();
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t noise_seed, std::size_t index, int hyp) {
  return derive_seed(derive_seed(master, noise_seed), index, static_cast<std::uint64_t>(hyp));
}

/// trials draws under each hypothesis. Results are reduced in trial order,
/// so the output is independent of the thread count.
inline SimulationStats estimate_errors(const Scheme& scheme, std::size_t trials, std::uint64_t master_seed,
                                       unsigned threads = 0, const TranscriptSink& sink = {}) {
  if (trials == 0) throw std::invalid_argument("estimate_errors: trials must be >= 1");
  SimulationStats st;
  st.trials = trials;
  for (int hyp : {0, 1}) {
    std::vector<TrialOutcome> outs(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
      outs[i] = scheme.run_trial(hyp, trial_seed(master_seed, scheme.params().noise_seed, i, hyp));
    });
    std::size_t c1 = 0, c2 = 0;
    double l1 = 0.0, l2 = 0.0, b1 = 0.0, b2 = 0.0, b1sq = 0.0, b2sq = 0.0;
    auto& branches = hyp == 0 ? st.branch_counts_h0 : st.branch_counts_h1;
    for (std::size_t i = 0; i < trials; ++i) {
      const auto& t = outs[i];
      if (sink) sink(i, t);
      ++branches[static_cast<std::size_t>(t.branch)];
      if (hyp == 0) {
        c1 += t.h_hat_y == 1;
        c2 += t.h_hat_z == 1;
        l1 += static_cast<double>(t.len_m1);
        l2 += static_cast<double>(t.len_m2);
      } else {
        c1 += t.h_hat_y == 0;
        c2 += t.h_hat_z == 0;
        b1 += t.beta1_conditional, b1sq += t.beta1_conditional * t.beta1_conditional;
        b2 += t.beta2_conditional, b2sq += t.beta2_conditional * t.beta2_conditional;
      }
    }
    const double nn = static_cast<double>(trials);
    if (hyp == 0) {
      st.alpha1_hat = wilson_estimate(c1, trials);
      st.alpha2_hat = wilson_estimate(c2, trials);
      st.mean_len1 = l1 / nn;
      st.mean_len2 = l2 / nn;
    } else {
      st.beta1_hat = wilson_estimate(c1, trials);
      st.beta2_hat = wilson_estimate(c2, trials);
      auto mean_se = [&](double s, double sq) {
        const double m = s / nn;
        const double var = trials > 1 ? std::max(0.0, (sq - nn * m * m) / (nn - 1.0)) : 0.0;
        return MeanEstimate{m, std::sqrt(var / nn)};
      };
      st.beta1_conditional = mean_se(b1, b1sq);
      st.beta2_conditional = mean_se(b2, b2sq);
    }
  }
  return st;
}

inline SimulationStats estimate_errors(const SchemeParams& params, const PartitionRule& rule, std::size_t trials,
                                       std::uint64_t master_seed) {
  return estimate_errors(Scheme(params, rule), trials, master_seed);
}

}  // namespace twohop
