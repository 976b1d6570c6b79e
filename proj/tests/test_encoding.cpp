#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "rcs/encoding.hpp"

using namespace rcs;

namespace {

Params p(int k, std::int64_t ell = 1) { return Params(k, Rational(ell)); }

BitString bits(const char* s) { return parse_bitstring(s); }
KString ks(const char* s) { return parse_kstring(s); }

}  // namespace

TEST(Params, Validation) {
  EXPECT_THROW(Params(0, Rational(1)), std::invalid_argument);
  EXPECT_THROW(Params(17, Rational(1)), std::invalid_argument);
  EXPECT_THROW(Params(2, Rational(-1)), std::invalid_argument);
  Params q(4, Rational(1));
  EXPECT_EQ(q.alphabet_size(), 16u);
  EXPECT_EQ(q.gamma(), Rational(1, 4));
  EXPECT_DOUBLE_EQ(q.membership_probability(), 0.5);
  EXPECT_DOUBLE_EQ(Params(2, Rational(3, 2)).membership_probability(), 0.35355339059327373);
}

TEST(Text, RoundTrip) {
  EXPECT_EQ(to_string(ks("3,2")), "3,2");
  EXPECT_TRUE(ks("").empty());
  EXPECT_EQ(to_string(bits("1110")), "1110");
  EXPECT_THROW(parse_bitstring("102"), std::invalid_argument);
  EXPECT_THROW(parse_kstring("1,,2"), std::invalid_argument);
  EXPECT_EQ(bits_of_index(6, 4), bits("0110"));
}

TEST(Iota, Symbols) {
  EXPECT_EQ(iota_symbol(3, p(2)), bits("11"));
  EXPECT_EQ(iota_symbol(2, p(2)), bits("10"));
  EXPECT_EQ(iota_symbol(0, p(2)), bits("00"));
  EXPECT_THROW(iota_symbol(4, p(2)), std::out_of_range);
}

TEST(Iota, Strings) {
  EXPECT_EQ(iota_string(ks("3,2"), p(2)), bits("1110"));
  EXPECT_TRUE(iota_string(KString{}, p(2)).empty());
  EXPECT_EQ(iota_string(ks("0,3"), p(2)), bits("0011"));
  EXPECT_EQ(iota_inverse(bits("1110"), p(2)), ks("3,2"));
  EXPECT_TRUE(iota_inverse(BitString{}, p(2)).empty());
  EXPECT_THROW(iota_inverse(bits("111"), p(2)), std::invalid_argument);
  EXPECT_THROW(validate(ks("1,4"), p(2)), std::out_of_range);
}

TEST(Iota, RoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    int k = 1 + static_cast<int>(rng() % 6);
    Params q = p(k);
    std::size_t len = rng() % 9;
    KString s;
    for (std::size_t i = 0; i < len; ++i) s.symbols.push_back(static_cast<std::uint32_t>(rng() % q.alphabet_size()));
    BitString b = iota_string(s, q);
    ASSERT_EQ(b.size(), len * static_cast<std::size_t>(k));
    ASSERT_EQ(iota_inverse(b, q), s);

    BitString r;
    for (std::size_t i = 0; i < 2 * len; ++i) r.bits.push_back(static_cast<std::uint8_t>(rng() & 1));
    ASSERT_EQ(iota_string(iota_inverse(r, p(2)), p(2)), r);
  }
}

TEST(Iota, Injective) {
  // all strings of length <= 3 over K = 4 have distinct images
  Params q = p(2);
  std::set<BitString> seen;
  std::size_t count = 0;
  for (std::uint64_t i = 0; i < 1 + 4 + 16 + 64; ++i) {
    seen.insert(iota_string(f_enumerate(i, q), q));
    ++count;
  }
  EXPECT_EQ(seen.size(), count);
}

TEST(SplitDepths, Examples) {
  EXPECT_EQ(split_depths(bits("1110"), bits("1101"), p(2)), (SplitDepths{2, 2, 1}));
  EXPECT_EQ(split_depths(bits("1110"), bits("1111"), p(2)), (SplitDepths{3, 2, 1}));
  EXPECT_EQ(split_depths(bits("10110"), bits("10110"), p(2)), (SplitDepths{5, 4, 2}));
  EXPECT_THROW(split_depths(bits("10"), bits("101"), p(2)), std::invalid_argument);
}

TEST(SplitDepths, Property) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5000; ++trial) {
    int k = 1 + static_cast<int>(rng() % 4);
    std::size_t n = rng() % 12;
    BitString a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.bits.push_back(static_cast<std::uint8_t>(rng() & 1));
      b.bits.push_back(rng() % 4 == 0 ? static_cast<std::uint8_t>(rng() & 1) : a.bits.back());
    }
    SplitDepths d = split_depths(a, b, p(k));
    ASSERT_LE(d.block_aligned, d.common);
    ASSERT_LE(d.common, n);
    ASSERT_EQ(d.symbol_common * static_cast<std::size_t>(k), d.block_aligned);
    ASSERT_EQ(a == b, d.common == n);
  }
}

TEST(CommonPrefix, KStrings) {
  EXPECT_EQ(common_prefix_length(ks("3,2,1"), ks("3,0,1")), 1u);
  EXPECT_EQ(common_prefix_length(ks("3,2"), ks("3,2,1")), 2u);
  EXPECT_EQ(common_prefix_length(KString{}, ks("1")), 0u);
}

TEST(Enumeration, Examples) {
  EXPECT_TRUE(f_enumerate(0, p(2)).empty());
  EXPECT_EQ(f_enumerate(1, p(2)), ks("0"));
  EXPECT_EQ(f_enumerate(4, p(2)), ks("3"));
  EXPECT_EQ(f_enumerate(5, p(2)), ks("0,0"));
  EXPECT_EQ(f_index(ks("3"), p(2)), 4u);
  EXPECT_EQ(f_enumerate(3, p(1)), ks("0,0"));
}

TEST(Enumeration, LengthLexOracle) {
  // independent oracle: generate strings by length, each length in lexicographic order
  for (int k : {1, 2, 3}) {
    Params q = p(k);
    std::uint32_t big_k = q.alphabet_size();
    std::uint64_t index = 0;
    for (std::size_t len = 0; len <= 4; ++len) {
      std::uint64_t count = 1;
      for (std::size_t i = 0; i < len; ++i) count *= big_k;
      for (std::uint64_t c = 0; c < count; ++c, ++index) {
        KString s;
        std::uint64_t v = c;
        s.symbols.assign(len, 0);
        for (std::size_t i = len; i-- > 0;) {
          s.symbols[i] = static_cast<std::uint32_t>(v % big_k);
          v /= big_k;
        }
        ASSERT_EQ(f_enumerate(index, q), s);
        ASSERT_EQ(f_index(s, q), index);
      }
    }
  }
}

TEST(Enumeration, MutualInverse) {
  for (int k : {1, 2, 4}) {
    for (std::uint64_t i = 0; i <= 100000; ++i) ASSERT_EQ(f_index(f_enumerate(i, p(k)), p(k)), i);
  }
}

TEST(Enumeration, Overflow) {
  KString long_string;
  long_string.symbols.assign(40, 3);
  EXPECT_THROW(f_index(long_string, p(2)), std::overflow_error);
  EXPECT_NO_THROW(f_enumerate(std::numeric_limits<std::uint64_t>::max(), p(2)));
}
