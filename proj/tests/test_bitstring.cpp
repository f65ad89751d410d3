#include <gtest/gtest.h>

#include "twohop/bitstring.hpp"
#include "twohop/random.hpp"

using namespace twohop;

TEST(StringEncode, MinimalRepresentation) {
  EXPECT_EQ(string_encode(1).str(), "1");
  EXPECT_EQ(string_encode(6).str(), "110");
  EXPECT_EQ(string_encode(~std::uint64_t{0}).length(), 64u);
  EXPECT_THROW(string_encode(0), std::invalid_argument);
}

TEST(StringEncode, RoundTripExhaustive) {
  for (std::uint64_t m = 1; m <= 4096; ++m) {
    const BitString b = string_encode(m);
    ASSERT_EQ(b[0], '1');
    ASSERT_EQ(string_decode(b), m);
    // Independent length oracle: floor(log2 m) + 1.
    std::size_t len = 0;
    for (std::uint64_t v = m; v; v >>= 1) ++len;
    ASSERT_EQ(b.length(), len);
  }
}

TEST(StringDecode, RejectsLeadingZeroAndEmpty) {
  EXPECT_THROW(string_decode(BitString("011")), FramingError);
  EXPECT_THROW(string_decode(BitString("")), FramingError);
  EXPECT_THROW(BitString("102"), FramingError);
}

TEST(Framing, DegenerateAndFlags) {
  EXPECT_EQ(emit(Message::zero(), false).str(), "0");
  EXPECT_EQ(emit(Message::zero(), true).str(), "0");
  EXPECT_EQ(emit(Message::with(Flag::primed, string_encode(5)), true).str(), "10101");
  EXPECT_EQ(emit(Message::with(Flag::dprimed, BitString()), true).str(), "11");
  EXPECT_EQ(emit(Message::with(Flag::none, string_encode(5)), false).str(), "101");
  EXPECT_THROW(emit(Message::with(Flag::primed, BitString()), true), FramingError);
  EXPECT_THROW(emit(Message::with(Flag::primed, string_encode(2)), false), FramingError);
  EXPECT_THROW(parse(BitString("00"), true), FramingError);
  EXPECT_THROW(parse(BitString("1"), true), FramingError);
  EXPECT_THROW(parse(BitString("10"), true), FramingError);
  EXPECT_THROW(parse(BitString("110"), true), FramingError);
}

TEST(Framing, RoundTripRandomMessages) {
  Rng rng(77);
  for (int i = 0; i < 10000; ++i) {
    const bool flagged = rng.bernoulli(0.5);
    Message m;
    const double u = rng.uniform();
    if (u < 0.2) {
      m = Message::zero();
    } else {
      const BitString idx = string_encode(1 + rng.below(std::uint64_t{1} << (1 + rng.below(62))));
      if (!flagged) m = Message::with(Flag::none, idx);
      else if (u < 0.6) m = Message::with(Flag::primed, idx);
      else m = Message::with(Flag::dprimed, u < 0.8 ? idx : BitString());
    }
    const BitString wire = emit(m, flagged);
    ASSERT_GE(wire.length(), 1u);
    ASSERT_EQ(parse(wire, flagged), m);
    const std::size_t expected = m.degenerate ? 1 : m.payload.length() + (flagged ? 2 : 0);
    ASSERT_EQ(wire.length(), expected);
  }
}
