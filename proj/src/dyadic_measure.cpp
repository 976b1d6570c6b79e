#include "rcs/dyadic_measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace rcs {
namespace {

std::uint64_t index_of(const BitString& s) {
  std::uint64_t idx = 0;
  for (auto b : s.bits) idx = (idx << 1) | b;
  return idx;
}

void check_depth(std::size_t depth) {
  if (depth > DyadicMeasure::kMaxDepth) {
    throw std::invalid_argument("measure depth " + std::to_string(depth) + " exceeds " +
                                std::to_string(DyadicMeasure::kMaxDepth));
  }
}

}  // namespace

DyadicMeasure DyadicMeasure::from_leaves(std::size_t depth, std::vector<Rational> leaves) {
  check_depth(depth);
  if (leaves.size() != (std::size_t{1} << depth)) throw std::invalid_argument("expected 2^depth leaf masses");
  Rational total;
  for (const auto& m : leaves) {
    if (m < Rational(0)) throw std::invalid_argument("negative mass " + m.str());
    total += m;
  }
  if (total != Rational(1)) throw std::invalid_argument("leaf masses sum to " + total.str() + ", expected 1");
  DyadicMeasure mu;
  mu.exact_.emplace(depth + 1);
  (*mu.exact_)[depth] = std::move(leaves);
  mu.derive_internal();
  return mu;
}

DyadicMeasure DyadicMeasure::from_leaves(std::size_t depth, std::vector<double> leaves) {
  check_depth(depth);
  if (leaves.size() != (std::size_t{1} << depth)) throw std::invalid_argument("expected 2^depth leaf masses");
  long double total = 0;
  for (double m : leaves) {
    if (!(m >= 0) || !std::isfinite(m)) throw std::invalid_argument("invalid mass " + std::to_string(m));
    total += m;
  }
  if (std::abs(total - 1.0L) > 1e-9L) {
    throw std::invalid_argument("leaf masses sum to " + std::to_string(static_cast<double>(total)) +
                                ", expected 1");
  }
  DyadicMeasure mu;
  mu.levels_.resize(depth + 1);
  mu.levels_[depth] = std::move(leaves);
  mu.derive_internal();
  return mu;
}

void DyadicMeasure::derive_internal() {
  if (exact_) {
    auto& ex = *exact_;
    for (std::size_t j = ex.size() - 1; j-- > 0;) {
      ex[j].resize(ex[j + 1].size() / 2);
      for (std::size_t i = 0; i < ex[j].size(); ++i) ex[j][i] = ex[j + 1][2 * i] + ex[j + 1][2 * i + 1];
    }
    levels_.assign(ex.size(), {});
    for (std::size_t j = 0; j < ex.size(); ++j) {
      levels_[j].reserve(ex[j].size());
      for (const auto& m : ex[j]) levels_[j].push_back(m.to_double());
    }
    return;
  }
  for (std::size_t j = levels_.size() - 1; j-- > 0;) {
    levels_[j].resize(levels_[j + 1].size() / 2);
    for (std::size_t i = 0; i < levels_[j].size(); ++i) {
      levels_[j][i] = levels_[j + 1][2 * i] + levels_[j + 1][2 * i + 1];
    }
  }
}

double DyadicMeasure::mass(const BitString& sigma) const {
  const std::size_t n = depth();
  if (sigma.size() <= n) return levels_[sigma.size()][index_of(sigma)];
  return std::ldexp(levels_[n][index_of(sigma.prefix(n))], -static_cast<int>(sigma.size() - n));
}

std::optional<Rational> DyadicMeasure::exact_mass(const BitString& sigma) const {
  if (!exact_) return std::nullopt;
  const std::size_t n = depth();
  if (sigma.size() <= n) return (*exact_)[sigma.size()][index_of(sigma)];
  return (*exact_)[n][index_of(sigma.prefix(n))] * Rational::pow2(-static_cast<int>(sigma.size() - n));
}

std::span<const Rational> DyadicMeasure::exact_level(std::size_t j) const {
  if (!exact_) throw std::logic_error("measure has no exact masses");
  return exact_->at(j);
}

double DyadicMeasure::conservation_error() const {
  double worst = std::abs(levels_[0][0] - 1.0);
  for (std::size_t j = 0; j + 1 < levels_.size(); ++j) {
    for (std::size_t i = 0; i < levels_[j].size(); ++i) {
      worst = std::max(worst, std::abs(levels_[j][i] - levels_[j + 1][2 * i] - levels_[j + 1][2 * i + 1]));
    }
  }
  return worst;
}

DyadicMeasure build_uniform(std::size_t depth) {
  check_depth(depth);
  return DyadicMeasure::from_leaves(depth,
                                    std::vector<Rational>(std::size_t{1} << depth, Rational::pow2(-static_cast<int>(depth))));
}

DyadicMeasure build_diluted(std::size_t depth) {
  check_depth(depth);
  const std::size_t free_bits = (depth + 1) / 2;
  const Rational each = Rational::pow2(-static_cast<int>(free_bits));
  std::vector<Rational> leaves(std::size_t{1} << depth);
  for (std::size_t idx = 0; idx < leaves.size(); ++idx) {
    bool on_support = true;
    // Position i of the string is bit (depth - 1 - i) of idx.
    for (std::size_t i = 1; i < depth; i += 2) {
      if ((idx >> (depth - 1 - i)) & 1u) {
        on_support = false;
        break;
      }
    }
    if (on_support) leaves[idx] = each;
  }
  return DyadicMeasure::from_leaves(depth, std::move(leaves));
}

DyadicMeasure measure_from_json(const nlohmann::json& j) {
  const auto depth = j.at("depth").get<std::size_t>();
  check_depth(depth);
  const auto& masses = j.at("masses");
  if (!masses.is_object()) throw std::invalid_argument("measure JSON: 'masses' must be an object");

  bool exact = true;
  for (const auto& [key, value] : masses.items()) {
    if (!value.is_string() || value.get<std::string>().find('.') != std::string::npos ||
        value.get<std::string>().find_first_of("eE") != std::string::npos) {
      exact = false;
    }
  }
  const std::size_t width = std::size_t{1} << depth;
  std::vector<Rational> exact_leaves;
  std::vector<double> leaves(width, 0.0);
  if (exact) exact_leaves.assign(width, Rational(0));
  for (const auto& [key, value] : masses.items()) {
    const BitString s = parse_bitstring(key);
    if (s.size() != depth) {
      throw std::invalid_argument("measure JSON: leaf '" + key + "' has length " + std::to_string(s.size()) +
                                  ", expected " + std::to_string(depth));
    }
    const auto idx = index_of(s);
    if (exact) {
      exact_leaves[idx] = Rational::parse(value.get<std::string>());
    } else if (value.is_number()) {
      leaves[idx] = value.get<double>();
    } else if (value.is_string()) {
      leaves[idx] = Rational::parse(value.get<std::string>()).to_double();
    } else {
      throw std::invalid_argument("measure JSON: mass of '" + key + "' must be a number or string");
    }
  }
  if (exact) return DyadicMeasure::from_leaves(depth, std::move(exact_leaves));
  return DyadicMeasure::from_leaves(depth, std::move(leaves));
}

DyadicMeasure load_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open measure file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed measure file '" + path.string() + "': " + e.what());
  }
  return measure_from_json(j);
}

nlohmann::json measure_to_json(const DyadicMeasure& mu) {
  nlohmann::json masses = nlohmann::json::object();
  const std::size_t n = mu.depth();
  const auto leaves = mu.level(n);
  for (std::size_t idx = 0; idx < leaves.size(); ++idx) {
    if (leaves[idx] == 0.0) continue;
    BitString s = bits_of_index(idx, n);
    if (mu.is_exact()) {
      masses[to_string(s)] = mu.exact_level(n)[idx].str();
    } else {
      masses[to_string(s)] = leaves[idx];
    }
  }
  return {{"depth", n}, {"masses", std::move(masses)}};
}

ClopenSet::ClopenSet(std::vector<BitString> cylinders) {
  std::sort(cylinders.begin(), cylinders.end());
  std::set<BitString> kept;
  const BitString* last = nullptr;
  for (const auto& c : cylinders) {
    // Extensions of a kept cylinder sort directly after it.
    if (last != nullptr && last->is_prefix_of(c)) continue;
    last = &*kept.insert(c).first;
  }
  bool merged = true;
  while (merged) {
    merged = false;
    for (auto it = kept.begin(); it != kept.end(); ++it) {
      if (it->empty() || it->bits.back() != 0) continue;
      BitString sibling = *it;
      sibling.bits.back() = 1;
      auto sib = kept.find(sibling);
      if (sib == kept.end()) continue;
      BitString parent = it->prefix(it->size() - 1);
      kept.erase(sib);
      kept.erase(it);
      kept.insert(std::move(parent));
      merged = true;
      break;
    }
  }
  cylinders_.assign(kept.begin(), kept.end());
}

std::size_t ClopenSet::max_length() const {
  std::size_t m = 0;
  for (const auto& c : cylinders_) m = std::max(m, c.size());
  return m;
}

bool ClopenSet::covers(const BitString& sigma) const {
  BitString p;
  for (std::size_t len = 0; len <= sigma.size(); ++len) {
    if (len > 0) p.bits.push_back(sigma.bits[len - 1]);
    if (std::binary_search(cylinders_.begin(), cylinders_.end(), p)) return true;
  }
  return false;
}

bool ClopenSet::meets(const BitString& sigma) const {
  if (covers(sigma)) return true;
  auto it = std::lower_bound(cylinders_.begin(), cylinders_.end(), sigma);
  return it != cylinders_.end() && sigma.is_prefix_of(*it);
}

double capacity_constant(const DyadicMeasure& mu, double gamma) {
  if (gamma < 0) throw std::invalid_argument("gamma must be >= 0");
  double best = 0;
  for (std::size_t j = 0; j <= mu.depth(); ++j) {
    const double scale = std::exp2(gamma * static_cast<double>(j));
    for (double m : mu.level(j)) best = std::max(best, m * scale);
  }
  return best;
}

EnergyReport energy(const DyadicMeasure& mu, double gamma, std::optional<EnergyCertificate> certificate) {
  if (!(gamma >= 0)) throw std::invalid_argument("gamma must be >= 0");
  EnergyReport r;
  r.gamma = gamma;
  r.depth = mu.depth();
  const std::size_t n = mu.depth();

  long double split = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const auto children = mu.level(m + 1);
    long double level_sum = 0;
    for (std::size_t i = 0; i < children.size(); i += 2) {
      level_sum += 2.0L * children[i] * children[i + 1];
    }
    split += std::exp2(static_cast<long double>(gamma) * m) * level_sum;
  }
  r.split_sum = static_cast<double>(split);

  long double squares = 0;
  for (double m : mu.level(n)) squares += static_cast<long double>(m) * m;
  if (gamma >= 1.0) {
    r.leaf_sum = squares > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    r.leaf_sum = static_cast<double>(std::exp2(static_cast<long double>(gamma) * n) /
                                     (2.0L - std::exp2(static_cast<long double>(gamma))) * squares);
  }
  r.total = r.split_sum + r.leaf_sum;

  if (certificate) {
    if (!(certificate->beta > gamma)) {
      throw std::invalid_argument("certificate exponent beta must exceed gamma");
    }
    r.certificate = certificate;
    r.bound = certificate->c_r / (std::exp2(certificate->beta) - std::exp2(gamma));
  }
  return r;
}

double measure_of_clopen(const DyadicMeasure& mu, const ClopenSet& a) {
  long double total = 0;
  for (const auto& c : a.cylinders()) {
    if (c.size() > mu.depth()) {
      throw std::out_of_range("cylinder " + to_string(c) + " is deeper than the measure (N=" +
                              std::to_string(mu.depth()) + ")");
    }
    total += mu.mass(c);
  }
  return static_cast<double>(total);
}

std::optional<Rational> exact_measure_of_clopen(const DyadicMeasure& mu, const ClopenSet& a) {
  if (!mu.is_exact()) return std::nullopt;
  measure_of_clopen(mu, a);  // depth check
  Rational total;
  for (const auto& c : a.cylinders()) total += *mu.exact_mass(c);
  return total;
}

std::vector<BitString> cylinder_difference(const BitString& sigma, const ClopenSet& covered) {
  if (covered.covers(sigma)) return {};
  if (!covered.meets(sigma)) return {sigma};
  auto left = cylinder_difference(sigma.child(0), covered);
  auto right = cylinder_difference(sigma.child(1), covered);
  left.insert(left.end(), std::make_move_iterator(right.begin()), std::make_move_iterator(right.end()));
  return left;
}

InnerApproximation clopen_inner_approx(std::span<const BitString> cylinders, const DyadicMeasure& mu,
                                       double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
  for (const auto& c : cylinders) {
    if (c.size() > mu.depth()) {
      throw std::out_of_range("cylinder " + to_string(c) + " is deeper than the measure (N=" +
                              std::to_string(mu.depth()) + ")");
    }
  }
  InnerApproximation out;
  std::vector<BitString> seen;
  long double union_mass = 0;
  for (const auto& c : cylinders) {
    long double piece = 0;
    for (const auto& d : cylinder_difference(c, ClopenSet(seen))) piece += mu.mass(d);
    out.piece_masses.push_back(static_cast<double>(piece));
    union_mass += piece;
    seen.push_back(c);
  }
  out.union_mass = static_cast<double>(union_mass);

  constexpr long double kSlack = 1e-12L;
  long double tail = union_mass;
  std::size_t used = 0;
  while (used < out.piece_masses.size() && tail > static_cast<long double>(epsilon) + kSlack) {
    tail -= out.piece_masses[used];
    ++used;
  }
  out.pieces_used = used;
  out.set = ClopenSet(std::vector<BitString>(cylinders.begin(), cylinders.begin() + static_cast<std::ptrdiff_t>(used)));
  out.set_mass = measure_of_clopen(mu, out.set);
  return out;
}

double gamma_weight(std::span<const BitString> strings, double gamma) {
  std::set<BitString> unique(strings.begin(), strings.end());
  long double total = 0;
  for (const auto& w : unique) total += std::exp2(-static_cast<long double>(w.size()) * gamma);
  return static_cast<double>(total);
}

nlohmann::json to_json(const EnergyReport& r) {
  auto number_or_inf = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  nlohmann::json j{{"gamma", r.gamma},
                   {"depth", r.depth},
                   {"split_sum", r.split_sum},
                   {"leaf_sum", number_or_inf(r.leaf_sum)},
                   {"total", number_or_inf(r.total)},
                   {"extension", "uniform below depth"}};
  if (r.certificate) {
    j["certificate"] = {{"c_r", r.certificate->c_r}, {"beta", r.certificate->beta}};
    j["bound"] = *r.bound;
  }
  return j;
}

nlohmann::json to_json(const ClopenSet& a) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : a.cylinders()) arr.push_back(to_string(c));
  return {{"cylinders", std::move(arr)}};
}

ClopenSet clopen_from_json(const nlohmann::json& j) {
  std::vector<BitString> cyl;
  for (const auto& s : j.at("cylinders")) cyl.push_back(parse_bitstring(s.get<std::string>()));
  return ClopenSet(std::move(cyl));
}

}  // namespace rcs
