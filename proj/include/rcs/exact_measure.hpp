#pragma once

// Closed-form membership probabilities for the product distribution in which
// every K-ary string is present independently with probability 2^-ell.
//
// The empty string is always present, so a string of K-ary length n together
// with all of its prefixes is present with probability 2^(-ell * n).

#include <optional>

#include "rcs/encoding.hpp"
#include "rcs/rational.hpp"

namespace rcs {

/// A probability 2^exponent with an exact rational exponent <= 0.
class Log2Prob {
 public:
  explicit Log2Prob(Rational exponent);

  const Rational& exponent() const { return exponent_; }
  double value() const;
  /// Exact value when the exponent is an integer in [-62, 0].
  std::optional<Rational> exact_value() const;

  friend bool operator==(const Log2Prob&, const Log2Prob&) = default;
  friend auto operator<=>(const Log2Prob& a, const Log2Prob& b) { return a.exponent_ <=> b.exponent_; }

 private:
  Rational exponent_;
};

Log2Prob chain_prob(std::size_t n_hat, const Params& params);

/// Both K-ary strings and all their prefixes present: 2^(ell (m - 2n)),
/// m the common prefix length and n the common length.
Log2Prob pair_chain_prob(const KString& sigma, const KString& tau, const Params& params);

struct BinaryPairProb {
  SplitDepths depths;
  Log2Prob exact;          // 2^(gamma (m' - 2n))
  Log2Prob bound_common;   // 2^(gamma (m - 2n)) >= exact
};

BinaryPairProb pair_chain_prob_binary(const BitString& sigma, const BitString& tau, const Params& params);

}  // namespace rcs
