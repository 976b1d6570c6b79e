#pragma once

// Depth-truncated samples of the random closed set: the prefix-closed part
// of a random subset S of K^{<omega}, its binary frontier, and the maps
// between a branch x and the chain Y = { sigma in S : iota(sigma) prefix of x }.

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcs/encoding.hpp"

namespace rcs {

/// Surviving K-ary strings of lengths 1..depth. The empty string is always
/// alive and is not stored. Level j holds codes of length-j strings read as
/// base-K numerals, sorted ascending (which is lexicographic order).
class SampledTree {
 public:
  SampledTree(Params params, std::size_t depth, std::uint64_t seed, std::vector<std::vector<std::uint64_t>> levels);

  const Params& params() const { return params_; }
  std::size_t depth() const { return depth_; }
  std::uint64_t seed() const { return seed_; }

  /// Codes of the surviving strings of length `len`; len == 0 yields {0}.
  std::span<const std::uint64_t> level_codes(std::size_t len) const;
  std::vector<KString> level(std::size_t len) const;
  std::size_t level_size(std::size_t len) const { return level_codes(len).size(); }
  bool contains(const KString& sigma) const;

  /// The same sample restricted to lengths <= depth.
  SampledTree truncated(std::size_t depth) const;

  KString decode(std::uint64_t code, std::size_t len) const;
  std::uint64_t encode(const KString& sigma) const;

  /// Throws std::logic_error if a stored string lacks its parent.
  void check_prefix_closed() const;

 private:
  Params params_;
  std::size_t depth_;
  std::uint64_t seed_;
  std::vector<std::vector<std::uint64_t>> levels_;  // levels_[0] == {0}
};

/// Raw membership of sigma in the random set S determined by (params, seed).
/// A string is in the sampled tree iff it and all its nonempty prefixes are.
bool in_sample(const KString& sigma, const Params& params, std::uint64_t seed);

/// Samples lazily level by level. ell == 0 is rejected unless allow_full is
/// set, in which case the complete K-ary tree to `depth` is returned.
SampledTree sample_tree(const Params& params, std::size_t depth, std::uint64_t seed, bool allow_full = false);

/// Probability that some string of length `depth` survives: 1 - e_depth,
/// e_0 = 0, e_{j+1} = (1 - p + p e_j)^K with p = 2^-ell.
double survival_exact(const Params& params, std::size_t depth);

/// Limit of survival_exact as depth grows, by fixed-point iteration.
double survival_limit(const Params& params, double tolerance = 1e-13);

/// iota-images of the deepest level, each of binary length k * depth.
std::vector<BitString> frontier_binary(const SampledTree& tree);

/// Finite truncation of Y: at most one string per K-ary length, all of them
/// prefixes of a common branch.
class SubsetWitness {
 public:
  SubsetWitness(Params params, std::set<KString> strings);

  const Params& params() const { return params_; }
  const std::set<KString>& strings() const { return strings_; }
  std::size_t size() const { return strings_.size(); }
  bool empty() const { return strings_.empty(); }

 private:
  Params params_;
  std::set<KString> strings_;
};

using MembershipOracle = std::function<bool(const KString&)>;

/// Y restricted to the prefixes of x whose length is a multiple of k.
SubsetWitness extract_subset(const BitString& x, const SampledTree& tree);
/// Same against the raw set S given by a membership oracle.
SubsetWitness extract_subset(const BitString& x, const Params& params, const MembershipOracle& in_s);

/// The prefix of x of binary length target_length (a multiple of k) recovered
/// from Y.
BitString reconstruct_prefix(const SubsetWitness& y, std::size_t target_length);

/// f_index applied to each element of Y.
std::set<std::uint64_t> subset_to_integers(const SubsetWitness& y);

nlohmann::json to_json(const SampledTree& tree);
SampledTree tree_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SubsetWitness& y);

}  // namespace rcs
