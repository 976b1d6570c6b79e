#pragma once

// First and second moments of
//   Y_n = sum over surviving sigma of length n with [sigma] meeting A of mu(sigma) 2^(n gamma)
// and the Paley-Zygmund lower bound P{Y_n > 0} >= E[Y_n]^2 / E[Y_n^2].

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcs/dyadic_measure.hpp"
#include "rcs/encoding.hpp"
#include "rcs/rational.hpp"
#include "rcs/sampler.hpp"

namespace rcs {

/// Clopen target A; a cylinder [sigma] is hit when it meets A.
class HittingTarget {
 public:
  explicit HittingTarget(ClopenSet set) : set_(std::move(set)) {}
  static HittingTarget whole_space() { return HittingTarget(ClopenSet::whole_space()); }

  const ClopenSet& set() const { return set_; }
  bool hits(const BitString& sigma) const { return set_.meets(sigma); }

 private:
  ClopenSet set_;
};

/// A moment with its exact rational value when one is available (integer
/// ell and exact masses).
struct MomentValue {
  double value = 0;
  std::optional<Rational> exact;
};

struct PzBound {
  double value = 0;
  bool clamped = false;
};

struct MomentReport {
  std::size_t n = 0;
  MomentValue first_moment;
  MomentValue second_moment;
  double second_moment_common_bound = 0;  // same double sum with 2^(gamma m) weights
  PzBound pz;
  MomentValue mu_a;
};

/// Precomputed mu(sigma) 2^(n gamma) [sigma meets A] over the 2^n strings of
/// length n, for repeated evaluation of Y_n on sampled trees.
class YStatistic {
 public:
  YStatistic(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n, const Params& params);

  std::size_t n() const { return n_; }
  /// Requires k * tree.depth() == n.
  double operator()(const SampledTree& tree) const;
  /// Y over surviving strings given by their codes at K-ary depth n / k.
  double evaluate(std::span<const std::uint64_t> codes) const;

 private:
  Params params_;
  std::size_t n_;
  std::vector<double> weights_;
};

/// Flags, indexed by bits read MSB first, of the length-n cylinders meeting A.
std::vector<char> hit_flags(const HittingTarget& target, std::size_t n);

/// n must equal k * tree.depth() and not exceed the measure depth.
double y_statistic(const SampledTree& tree, const DyadicMeasure& mu, const HittingTarget& target, std::size_t n);

MomentValue exact_first_moment(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n,
                               const Params& params);

/// Tree recursion over K-ary split depths: O(2^n n).
MomentValue exact_second_moment(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n,
                                const Params& params);

/// sum_{sigma,tau hit} mu(sigma) mu(tau) 2^(gamma m_{sigma,tau}), the looser bound.
double second_moment_common_bound(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n,
                                  const Params& params);

/// first^2 / second clamped to [0, 1]. Throws std::invalid_argument for
/// negative moments or second == 0 < first.
PzBound pz_bound(double first, double second);

MomentReport moment_report(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n, const Params& params);

struct HittingBound {
  double bound = 0;
  double mu_a = 0;
  double energy = 0;
  std::string diagnostic;
};

/// mu(A)^2 / c with c the gamma-energy of mu, gamma = ell / k.
HittingBound hitting_lower_bound(const DyadicMeasure& mu, const HittingTarget& target, const Params& params);

nlohmann::json to_json(const MomentValue& v);
nlohmann::json to_json(const MomentReport& r);
nlohmann::json to_json(const HittingBound& b);

}  // namespace rcs
