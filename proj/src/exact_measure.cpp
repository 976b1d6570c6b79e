#include "rcs/exact_measure.hpp"

#include <cmath>
#include <stdexcept>

namespace rcs {

Log2Prob::Log2Prob(Rational exponent) : exponent_(exponent) {
  if (exponent_ > Rational(0)) throw std::invalid_argument("log2 probability exponent must be <= 0");
}

double Log2Prob::value() const { return static_cast<double>(std::exp2(exponent_.to_long_double())); }

std::optional<Rational> Log2Prob::exact_value() const {
  if (!exponent_.is_integer() || exponent_.num() < -62) return std::nullopt;
  return Rational::pow2(static_cast<int>(exponent_.num()));
}

Log2Prob chain_prob(std::size_t n_hat, const Params& params) {
  return Log2Prob(-params.ell() * Rational(static_cast<std::int64_t>(n_hat)));
}

Log2Prob pair_chain_prob(const KString& sigma, const KString& tau, const Params& params) {
  if (sigma.size() != tau.size()) {
    throw std::invalid_argument("pair_chain_prob: lengths differ (" + std::to_string(sigma.size()) + " vs " +
                                std::to_string(tau.size()) + ")");
  }
  validate(sigma, params);
  validate(tau, params);
  const auto m = static_cast<std::int64_t>(common_prefix_length(sigma, tau));
  const auto n = static_cast<std::int64_t>(sigma.size());
  return Log2Prob(params.ell() * Rational(m - 2 * n));
}

BinaryPairProb pair_chain_prob_binary(const BitString& sigma, const BitString& tau, const Params& params) {
  const auto depths = split_depths(sigma, tau, params);
  if (sigma.size() % static_cast<std::size_t>(params.k()) != 0) {
    throw std::invalid_argument("pair_chain_prob_binary: length " + std::to_string(sigma.size()) +
                                " is not a multiple of k=" + std::to_string(params.k()));
  }
  auto exact = pair_chain_prob(iota_inverse(sigma, params), iota_inverse(tau, params), params);
  const auto n = static_cast<std::int64_t>(sigma.size());
  const auto m = static_cast<std::int64_t>(depths.common);
  return {depths, exact, Log2Prob(params.gamma() * Rational(m - 2 * n))};
}

}  // namespace rcs
