#pragma once

// Finite strings over the 2^k-ary and binary alphabets, the block encoding
// between them, common-prefix depths and the length-lexicographic numbering
// of K-ary strings.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rcs/rational.hpp"

namespace rcs {

/// Symbol width k and membership exponent ell.
///
/// Each K-ary string (K = 2^k) belongs to the random set independently with
/// probability 2^-ell; gamma = ell / k is the matching energy exponent.
class Params {
 public:
  static constexpr int kMaxWidth = 16;

  Params(int k, Rational ell);

  int k() const { return k_; }
  const Rational& ell() const { return ell_; }
  std::uint32_t alphabet_size() const { return std::uint32_t{1} << k_; }
  Rational gamma() const { return ell_ / Rational(k_); }
  /// 2^-ell as a double.
  double membership_probability() const;

  friend bool operator==(const Params&, const Params&) = default;

 private:
  int k_;
  Rational ell_;
};

struct KString {
  std::vector<std::uint32_t> symbols;

  std::size_t size() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
  KString prefix(std::size_t len) const;

  friend auto operator<=>(const KString&, const KString&) = default;
  friend bool operator==(const KString&, const KString&) = default;
};

struct BitString {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  bool empty() const { return bits.empty(); }
  BitString prefix(std::size_t len) const;
  bool is_prefix_of(const BitString& other) const;
  BitString child(std::uint8_t bit) const;

  friend auto operator<=>(const BitString&, const BitString&) = default;
  friend bool operator==(const BitString&, const BitString&) = default;
};

/// Comma-separated decimal symbols, e.g. "3,2". The empty string is "".
std::string to_string(const KString& s);
KString parse_kstring(std::string_view text);
/// 0/1 text, e.g. "1110".
std::string to_string(const BitString& s);
BitString parse_bitstring(std::string_view text);

/// The length-n string whose bits, read MSB first, spell `index`.
BitString bits_of_index(std::uint64_t index, std::size_t n);

/// Throws std::out_of_range if a symbol is >= K.
void validate(const KString& s, const Params& params);

BitString iota_symbol(std::uint32_t symbol, const Params& params);
BitString iota_string(const KString& sigma, const Params& params);
KString iota_inverse(const BitString& tau, const Params& params);

struct SplitDepths {
  std::size_t common;          // longest common binary prefix
  std::size_t block_aligned;   // k * floor(common / k)
  std::size_t symbol_common;   // block_aligned / k

  friend bool operator==(const SplitDepths&, const SplitDepths&) = default;
};

SplitDepths split_depths(const BitString& sigma, const BitString& tau, const Params& params);

/// Length of the longest common prefix of two K-ary strings.
std::size_t common_prefix_length(const KString& a, const KString& b);

/// Length-lexicographic bijection between naturals and K-ary strings;
/// index 0 is the empty string. Throws std::overflow_error past 2^64.
KString f_enumerate(std::uint64_t index, const Params& params);
std::uint64_t f_index(const KString& sigma, const Params& params);

}  // namespace rcs
