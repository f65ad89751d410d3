// Bit-string messages: minimal binary index strings and flag framing.
#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace twohop {

struct FramingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class BitString {
 public:
  BitString() = default;
  explicit BitString(std::string bits) : bits_(std::move(bits)) {
    for (char c : bits_)
      if (c != '0' && c != '1') throw FramingError("BitString: characters must be 0 or 1");
  }

  std::size_t length() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  char operator[](std::size_t i) const { return bits_[i]; }
  const std::string& str() const noexcept { return bits_; }

  void append(const BitString& tail) { bits_ += tail.bits_; }
  void push_back(bool bit) { bits_.push_back(bit ? '1' : '0'); }
  BitString substr(std::size_t from) const { return BitString(bits_.substr(from)); }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::string bits_;
};

/// Shortest binary representation of m >= 1; always starts with 1.
inline BitString string_encode(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("string_encode: index must be >= 1");
  std::string s;
  for (int b = std::bit_width(m) - 1; b >= 0; --b) s.push_back((m >> b) & 1u ? '1' : '0');
  return BitString(std::move(s));
}

inline std::uint64_t string_decode(const BitString& b) {
  if (b.empty()) throw FramingError("string_decode: empty payload");
  if (b[0] != '1') throw FramingError("string_decode: leading zero is reserved for flags");
  if (b.length() > 64) throw FramingError("string_decode: payload exceeds 64 bits");
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < b.length(); ++i) m = (m << 1) | (b[i] == '1' ? 1u : 0u);
  return m;
}

/// Which scheme version a message belongs to.
enum class Flag { none, primed, dprimed };

/// Parsed message. degenerate = the single bit "0". A flagged message may
/// carry an empty payload only for the double-primed flag ("11" alone).
struct Message {
  bool degenerate = true;
  Flag flag = Flag::none;
  BitString payload;

  static Message zero() { return {}; }
  static Message with(Flag f, BitString payload) { return {false, f, std::move(payload)}; }

  friend bool operator==(const Message&, const Message&) = default;
};

/// flagged = the unequal-eps framing with two-bit version prefixes.
inline BitString emit(const Message& m, bool flagged) {
  if (m.degenerate) return BitString("0");
  if (!flagged) {
    if (m.flag != Flag::none) throw FramingError("emit: flag in unflagged framing");
    if (m.payload.empty() || m.payload[0] != '1') throw FramingError("emit: payload must start with 1");
    return m.payload;
  }
  if (m.flag == Flag::none) throw FramingError("emit: flagged framing needs a version flag");
  if (!m.payload.empty() && m.payload[0] != '1') throw FramingError("emit: payload must start with 1");
  if (m.flag == Flag::primed && m.payload.empty()) throw FramingError("emit: primed message without payload");
  BitString out(m.flag == Flag::primed ? "10" : "11");
  out.append(m.payload);
  return out;
}

inline Message parse(const BitString& b, bool flagged) {
  if (b.empty()) throw FramingError("parse: empty message");
  if (b[0] == '0') {
    if (b.length() != 1) throw FramingError("parse: degenerate message must be the single bit 0");
    return Message::zero();
  }
  if (!flagged) return Message::with(Flag::none, b);
  if (b.length() < 2) throw FramingError("parse: truncated flag");
  const Flag f = b[1] == '0' ? Flag::primed : Flag::dprimed;
  BitString payload = b.substr(2);
  if (!payload.empty() && payload[0] != '1') throw FramingError("parse: payload must start with 1");
  if (f == Flag::primed && payload.empty()) throw FramingError("parse: primed message without payload");
  return Message::with(f, std::move(payload));
}

}  // namespace twohop
