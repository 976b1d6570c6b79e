#include "rcs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rcs/seeding.hpp"

namespace rcs {
namespace {

constexpr std::size_t kMaxCodeBits = 62;
constexpr std::size_t kMaxNodesPerLevel = std::size_t{1} << 24;

void check_code_width(const Params& params, std::size_t depth) {
  if (static_cast<std::size_t>(params.k()) * depth > kMaxCodeBits) {
    throw std::invalid_argument("k * depth must be <= " + std::to_string(kMaxCodeBits) + " (k=" +
                                std::to_string(params.k()) + ", depth=" + std::to_string(depth) + ")");
  }
}

std::uint64_t root_key(std::uint64_t seed) { return seeding::derive(seed, 0); }

}  // namespace

SampledTree::SampledTree(Params params, std::size_t depth, std::uint64_t seed,
                         std::vector<std::vector<std::uint64_t>> levels)
    : params_(params), depth_(depth), seed_(seed), levels_(std::move(levels)) {
  check_code_width(params_, depth_);
  if (levels_.size() != depth_ + 1 || levels_[0] != std::vector<std::uint64_t>{0}) {
    throw std::invalid_argument("SampledTree: expected root level plus one level per depth");
  }
}

std::span<const std::uint64_t> SampledTree::level_codes(std::size_t len) const {
  if (len > depth_) throw std::out_of_range("level " + std::to_string(len) + " beyond tree depth");
  return levels_[len];
}

std::vector<KString> SampledTree::level(std::size_t len) const {
  std::vector<KString> out;
  for (auto code : level_codes(len)) out.push_back(decode(code, len));
  return out;
}

bool SampledTree::contains(const KString& sigma) const {
  if (sigma.size() > depth_) return false;
  for (auto a : sigma.symbols) {
    if (a >= params_.alphabet_size()) return false;
  }
  const auto& lv = levels_[sigma.size()];
  return std::binary_search(lv.begin(), lv.end(), encode(sigma));
}

SampledTree SampledTree::truncated(std::size_t depth) const {
  if (depth > depth_) throw std::out_of_range("cannot truncate to a larger depth");
  return SampledTree(params_, depth, seed_, {levels_.begin(), levels_.begin() + static_cast<std::ptrdiff_t>(depth) + 1});
}

KString SampledTree::decode(std::uint64_t code, std::size_t len) const {
  const auto k = static_cast<unsigned>(params_.k());
  const std::uint64_t mask = params_.alphabet_size() - 1;
  KString s;
  s.symbols.resize(len);
  for (std::size_t i = len; i-- > 0;) {
    s.symbols[i] = static_cast<std::uint32_t>(code & mask);
    code >>= k;
  }
  return s;
}

std::uint64_t SampledTree::encode(const KString& sigma) const {
  check_code_width(params_, sigma.size());
  std::uint64_t code = 0;
  for (auto a : sigma.symbols) code = (code << params_.k()) | a;
  return code;
}

void SampledTree::check_prefix_closed() const {
  for (std::size_t j = 1; j <= depth_; ++j) {
    const auto& parents = levels_[j - 1];
    const auto& lv = levels_[j];
    if (!std::is_sorted(lv.begin(), lv.end()) || std::adjacent_find(lv.begin(), lv.end()) != lv.end()) {
      throw std::logic_error("level " + std::to_string(j) + " is not strictly sorted");
    }
    for (auto code : lv) {
      if (!std::binary_search(parents.begin(), parents.end(), code >> params_.k())) {
        throw std::logic_error("string " + to_string(decode(code, j)) + " present without its parent");
      }
    }
  }
}

bool in_sample(const KString& sigma, const Params& params, std::uint64_t seed) {
  validate(sigma, params);
  if (sigma.empty()) return true;
  std::uint64_t key = root_key(seed);
  for (auto a : sigma.symbols) key = seeding::derive(key, a);
  return seeding::unit(key) < params.membership_probability();
}

SampledTree sample_tree(const Params& params, std::size_t depth, std::uint64_t seed, bool allow_full) {
  if (params.ell().is_zero() && !allow_full) {
    throw std::invalid_argument("ell = 0 gives the full tree; request it explicitly");
  }
  check_code_width(params, depth);
  const double p = params.membership_probability();
  const std::uint32_t K = params.alphabet_size();
  const unsigned k = static_cast<unsigned>(params.k());

  std::vector<std::vector<std::uint64_t>> levels(depth + 1);
  levels[0] = {0};
  std::vector<std::uint64_t> keys{root_key(seed)};
  for (std::size_t j = 0; j < depth; ++j) {
    std::vector<std::uint64_t> next_codes;
    std::vector<std::uint64_t> next_keys;
    for (std::size_t i = 0; i < levels[j].size(); ++i) {
      const std::uint64_t code = levels[j][i];
      for (std::uint32_t a = 0; a < K; ++a) {
        const std::uint64_t key = seeding::derive(keys[i], a);
        if (seeding::unit(key) < p) {
          next_codes.push_back((code << k) | a);
          next_keys.push_back(key);
        }
      }
      if (next_codes.size() > kMaxNodesPerLevel) {
        throw std::length_error("sampled level " + std::to_string(j + 1) + " exceeds " +
                                std::to_string(kMaxNodesPerLevel) + " nodes");
      }
    }
    levels[j + 1] = std::move(next_codes);
    keys = std::move(next_keys);
  }
  return SampledTree(params, depth, seed, std::move(levels));
}

double survival_exact(const Params& params, std::size_t depth) {
  const double p = params.membership_probability();
  const double K = params.alphabet_size();
  double extinct = 0.0;
  for (std::size_t j = 0; j < depth; ++j) extinct = std::pow(1.0 - p + p * extinct, K);
  return 1.0 - extinct;
}

double survival_limit(const Params& params, double tolerance) {
  const double p = params.membership_probability();
  const double K = params.alphabet_size();
  double extinct = 0.0;
  // Monotone increasing iteration; critical cases converge slowly, hence the cap.
  for (int it = 0; it < 10'000'000; ++it) {
    const double next = std::pow(1.0 - p + p * extinct, K);
    if (std::abs(next - extinct) < tolerance) return 1.0 - next;
    extinct = next;
  }
  return 1.0 - extinct;
}

std::vector<BitString> frontier_binary(const SampledTree& tree) {
  std::vector<BitString> out;
  for (const auto& s : tree.level(tree.depth())) out.push_back(iota_string(s, tree.params()));
  return out;
}

SubsetWitness::SubsetWitness(Params params, std::set<KString> strings)
    : params_(params), strings_(std::move(strings)) {
  const KString* prev = nullptr;
  for (const auto& s : strings_) {
    validate(s, params_);
    // std::set orders prefixes before extensions, so a chain is sorted by length.
    if (prev != nullptr && (prev->size() == s.size() || common_prefix_length(*prev, s) != prev->size())) {
      throw std::invalid_argument("subset witness is not a chain: " + to_string(*prev) + " vs " + to_string(s));
    }
    prev = &s;
  }
}

SubsetWitness extract_subset(const BitString& x, const Params& params, const MembershipOracle& in_s) {
  const auto k = static_cast<std::size_t>(params.k());
  if (x.size() % k != 0) {
    throw std::invalid_argument("branch length " + std::to_string(x.size()) + " is not a multiple of k=" +
                                std::to_string(k));
  }
  const KString full = iota_inverse(x, params);
  std::set<KString> y;
  for (std::size_t j = 1; j <= full.size(); ++j) {
    KString p = full.prefix(j);
    if (in_s(p)) y.insert(std::move(p));
  }
  return SubsetWitness(params, std::move(y));
}

SubsetWitness extract_subset(const BitString& x, const SampledTree& tree) {
  if (x.size() > static_cast<std::size_t>(tree.params().k()) * tree.depth()) {
    throw std::invalid_argument("branch longer than the sampled tree");
  }
  return extract_subset(x, tree.params(), [&tree](const KString& s) { return tree.contains(s); });
}

BitString reconstruct_prefix(const SubsetWitness& y, std::size_t target_length) {
  const auto k = static_cast<std::size_t>(y.params().k());
  if (target_length % k != 0) {
    throw std::invalid_argument("target length " + std::to_string(target_length) + " is not a multiple of k=" +
                                std::to_string(k));
  }
  const std::size_t j = target_length / k;
  if (j == 0) return {};
  for (const auto& s : y.strings()) {
    if (s.size() == j) return iota_string(s, y.params());
  }
  throw std::invalid_argument("subset has no element of K-ary length " + std::to_string(j));
}

std::set<std::uint64_t> subset_to_integers(const SubsetWitness& y) {
  std::set<std::uint64_t> out;
  for (const auto& s : y.strings()) out.insert(f_index(s, y.params()));
  return out;
}

nlohmann::json to_json(const SampledTree& tree) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t j = 1; j <= tree.depth(); ++j) {
    nlohmann::json lv = nlohmann::json::array();
    for (auto code : tree.level_codes(j)) lv.push_back(to_string(tree.decode(code, j)));
    levels.push_back(std::move(lv));
  }
  return {{"k", tree.params().k()},
          {"ell", tree.params().ell().str()},
          {"depth", tree.depth()},
          {"seed", tree.seed()},
          {"levels", std::move(levels)}};
}

SampledTree tree_from_json(const nlohmann::json& j) {
  const Params params(j.at("k").get<int>(), j.at("ell").is_string()
                                                ? Rational::parse(j.at("ell").get<std::string>())
                                                : Rational::parse(j.at("ell").dump()));
  const auto depth = j.at("depth").get<std::size_t>();
  check_code_width(params, depth);
  const auto& jl = j.at("levels");
  if (jl.size() != depth) throw std::invalid_argument("tree JSON: expected " + std::to_string(depth) + " levels");
  std::vector<std::vector<std::uint64_t>> levels{{0}};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::uint64_t> codes;
    for (const auto& s : jl[d]) {
      KString ks = parse_kstring(s.get<std::string>());
      validate(ks, params);
      if (ks.size() != d + 1) throw std::invalid_argument("tree JSON: string '" + to_string(ks) + "' on wrong level");
      std::uint64_t code = 0;
      for (auto a : ks.symbols) code = (code << params.k()) | a;
      codes.push_back(code);
    }
    std::sort(codes.begin(), codes.end());
    levels.push_back(std::move(codes));
  }
  SampledTree tree(params, depth, j.value("seed", std::uint64_t{0}), std::move(levels));
  tree.check_prefix_closed();
  return tree;
}

nlohmann::json to_json(const SubsetWitness& y) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : y.strings()) arr.push_back(to_string(s));
  return arr;
}

}  // namespace rcs
