#include "rcs/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rcs {

Params::Params(int k, Rational ell) : k_(k), ell_(ell) {
  if (k < 1 || k > kMaxWidth) {
    throw std::invalid_argument("k must be in [1, " + std::to_string(kMaxWidth) + "], got " +
                                std::to_string(k));
  }
  if (ell < Rational(0)) throw std::invalid_argument("ell must be >= 0, got " + ell.str());
}

double Params::membership_probability() const {
  return std::exp2(-ell_.to_double());
}

KString KString::prefix(std::size_t len) const {
  if (len > symbols.size()) throw std::out_of_range("prefix longer than string");
  return KString{{symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(len)}};
}

BitString BitString::prefix(std::size_t len) const {
  if (len > bits.size()) throw std::out_of_range("prefix longer than string");
  return BitString{{bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(len)}};
}

bool BitString::is_prefix_of(const BitString& other) const {
  return bits.size() <= other.bits.size() && std::equal(bits.begin(), bits.end(), other.bits.begin());
}

BitString BitString::child(std::uint8_t bit) const {
  BitString c = *this;
  c.bits.push_back(bit);
  return c;
}

std::string to_string(const KString& s) {
  std::string out;
  for (std::size_t i = 0; i < s.symbols.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(s.symbols[i]);
  }
  return out;
}

KString parse_kstring(std::string_view text) {
  KString s;
  if (text.empty()) return s;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = text.find(',', pos);
    std::string_view tok = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw std::invalid_argument("malformed K-ary string '" + std::string(text) + "'");
    }
    s.symbols.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return s;
}

std::string to_string(const BitString& s) {
  std::string out;
  out.reserve(s.bits.size());
  for (auto b : s.bits) out.push_back(b ? '1' : '0');
  return out;
}

BitString parse_bitstring(std::string_view text) {
  BitString s;
  s.bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("malformed bit string '" + std::string(text) + "'");
    s.bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return s;
}

BitString bits_of_index(std::uint64_t index, std::size_t n) {
  BitString s;
  s.bits.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.bits[i] = static_cast<std::uint8_t>((index >> (n - 1 - i)) & 1u);
  return s;
}

void validate(const KString& s, const Params& params) {
  for (auto a : s.symbols) {
    if (a >= params.alphabet_size()) {
      throw std::out_of_range("symbol " + std::to_string(a) + " out of range for K=" +
                              std::to_string(params.alphabet_size()));
    }
  }
}

// Most significant bit first: iota(2) = <1,0> for k = 2.
BitString iota_symbol(std::uint32_t symbol, const Params& params) {
  if (symbol >= params.alphabet_size()) {
    throw std::out_of_range("symbol " + std::to_string(symbol) + " out of range for K=" +
                            std::to_string(params.alphabet_size()));
  }
  BitString out;
  out.bits.resize(static_cast<std::size_t>(params.k()));
  for (int i = 0; i < params.k(); ++i) {
    out.bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((symbol >> (params.k() - 1 - i)) & 1u);
  }
  return out;
}

BitString iota_string(const KString& sigma, const Params& params) {
  BitString out;
  out.bits.reserve(sigma.size() * static_cast<std::size_t>(params.k()));
  for (auto a : sigma.symbols) {
    auto block = iota_symbol(a, params);
    out.bits.insert(out.bits.end(), block.bits.begin(), block.bits.end());
  }
  return out;
}

KString iota_inverse(const BitString& tau, const Params& params) {
  const auto k = static_cast<std::size_t>(params.k());
  if (tau.size() % k != 0) {
    throw std::invalid_argument("bit string length " + std::to_string(tau.size()) +
                                " is not a multiple of k=" + std::to_string(k));
  }
  KString out;
  out.symbols.reserve(tau.size() / k);
  for (std::size_t i = 0; i < tau.size(); i += k) {
    std::uint32_t a = 0;
    for (std::size_t j = 0; j < k; ++j) a = (a << 1) | tau.bits[i + j];
    out.symbols.push_back(a);
  }
  return out;
}

SplitDepths split_depths(const BitString& sigma, const BitString& tau, const Params& params) {
  if (sigma.size() != tau.size()) {
    throw std::invalid_argument("split_depths: lengths differ (" + std::to_string(sigma.size()) + " vs " +
                                std::to_string(tau.size()) + ")");
  }
  auto mism = std::mismatch(sigma.bits.begin(), sigma.bits.end(), tau.bits.begin());
  const auto m = static_cast<std::size_t>(mism.first - sigma.bits.begin());
  const auto k = static_cast<std::size_t>(params.k());
  return {m, k * (m / k), m / k};
}

std::size_t common_prefix_length(const KString& a, const KString& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a.symbols[i] == b.symbols[i]) ++i;
  return i;
}

namespace {

bool checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return !__builtin_mul_overflow(a, b, &out);
}

bool checked_add(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return !__builtin_add_overflow(a, b, &out);
}

}  // namespace

KString f_enumerate(std::uint64_t index, const Params& params) {
  const std::uint64_t K = params.alphabet_size();
  std::uint64_t count = 1;  // strings of the current length
  std::size_t len = 0;
  while (index >= count) {
    index -= count;
    ++len;
    if (!checked_mul(count, K, count)) {
      // Every remaining index fits below K^len.
      break;
    }
  }
  KString out;
  out.symbols.assign(len, 0);
  for (std::size_t i = len; i-- > 0;) {
    out.symbols[i] = static_cast<std::uint32_t>(index % K);
    index /= K;
  }
  return out;
}

std::uint64_t f_index(const KString& sigma, const Params& params) {
  validate(sigma, params);
  const std::uint64_t K = params.alphabet_size();
  std::uint64_t offset = 0;  // strings shorter than |sigma|
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!checked_add(offset, count, offset) || (i + 1 < sigma.size() && !checked_mul(count, K, count))) {
      throw std::overflow_error("f_index: string too long for a 64-bit index");
    }
  }
  std::uint64_t value = 0;
  for (auto a : sigma.symbols) {
    if (!checked_mul(value, K, value) || !checked_add(value, a, value)) {
      throw std::overflow_error("f_index: string too long for a 64-bit index");
    }
  }
  if (!checked_add(offset, value, value)) throw std::overflow_error("f_index: string too long for a 64-bit index");
  return value;
}

}  // namespace rcs
