#pragma once

// Probability measures on Cantor space given to a finite depth N, their
// energies and capacity constants, clopen sets as finite antichains of
// cylinders, and gamma-weights of string sets.
//
// Below depth N a measure is extended by splitting every leaf mass uniformly.

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcs/encoding.hpp"
#include "rcs/rational.hpp"

namespace rcs {

class DyadicMeasure {
 public:
  static constexpr std::size_t kMaxDepth = 22;
  static constexpr double kConservationTolerance = 1e-12;

  /// Builds from the 2^N leaf masses (index = leaf bits read MSB first).
  static DyadicMeasure from_leaves(std::size_t depth, std::vector<Rational> leaves);
  static DyadicMeasure from_leaves(std::size_t depth, std::vector<double> leaves);

  std::size_t depth() const { return levels_.size() - 1; }
  bool is_exact() const { return exact_.has_value(); }

  /// Mass of the cylinder [sigma]; below depth N by uniform extension.
  double mass(const BitString& sigma) const;
  std::optional<Rational> exact_mass(const BitString& sigma) const;

  /// All masses of level j, indexed by the bits read MSB first.
  std::span<const double> level(std::size_t j) const { return levels_.at(j); }
  std::span<const Rational> exact_level(std::size_t j) const;

  /// Max deviation from mass(s) = mass(s0) + mass(s1) over internal nodes.
  double conservation_error() const;

 private:
  DyadicMeasure() = default;
  void derive_internal();

  std::vector<std::vector<double>> levels_;
  std::optional<std::vector<std::vector<Rational>>> exact_;
};

DyadicMeasure build_uniform(std::size_t depth);
/// Supported on sequences with zeros at every odd position, uniform on the
/// even positions.
DyadicMeasure build_diluted(std::size_t depth);

DyadicMeasure measure_from_json(const nlohmann::json& j);
DyadicMeasure load_measure(const std::filesystem::path& path);
nlohmann::json measure_to_json(const DyadicMeasure& mu);

/// Union of cylinders kept as its minimal antichain: no member is a prefix
/// of another and no two siblings are both present.
class ClopenSet {
 public:
  ClopenSet() = default;
  explicit ClopenSet(std::vector<BitString> cylinders);

  static ClopenSet whole_space() { return ClopenSet({BitString{}}); }

  const std::vector<BitString>& cylinders() const { return cylinders_; }
  bool empty() const { return cylinders_.empty(); }
  std::size_t max_length() const;

  /// [sigma] meets the set: sigma is a prefix of, or extends, a cylinder.
  bool meets(const BitString& sigma) const;
  /// [sigma] lies inside the set.
  bool covers(const BitString& sigma) const;

  friend bool operator==(const ClopenSet&, const ClopenSet&) = default;

 private:
  std::vector<BitString> cylinders_;
};

double capacity_constant(const DyadicMeasure& mu, double gamma);

struct EnergyCertificate {
  double c_r;
  double beta;
};

struct EnergyReport {
  double gamma = 0;
  std::size_t depth = 0;
  double split_sum = 0;
  double leaf_sum = 0;  // within-leaf term under uniform extension
  double total = 0;     // split_sum + leaf_sum; +inf when gamma >= 1
  std::optional<EnergyCertificate> certificate;
  std::optional<double> bound;  // c_R / (2^beta - 2^gamma)
};

/// Throws std::invalid_argument if gamma < 0 or a certificate has beta <= gamma.
EnergyReport energy(const DyadicMeasure& mu, double gamma, std::optional<EnergyCertificate> certificate = {});

/// Throws std::out_of_range for cylinders longer than N.
double measure_of_clopen(const DyadicMeasure& mu, const ClopenSet& a);
std::optional<Rational> exact_measure_of_clopen(const DyadicMeasure& mu, const ClopenSet& a);

struct InnerApproximation {
  ClopenSet set;
  std::size_t pieces_used = 0;       // D_0 .. D_{pieces_used - 1}
  std::vector<double> piece_masses;  // mass of every disjoint piece D_i
  double union_mass = 0;
  double set_mass = 0;
};

/// Disjointifies the ordered cylinder list and keeps the shortest initial
/// run of pieces whose remaining tail mass is at most epsilon.
InnerApproximation clopen_inner_approx(std::span<const BitString> cylinders, const DyadicMeasure& mu,
                                       double epsilon);

/// Cylinders making up [sigma] minus the given set.
std::vector<BitString> cylinder_difference(const BitString& sigma, const ClopenSet& covered);

double gamma_weight(std::span<const BitString> strings, double gamma);

nlohmann::json to_json(const EnergyReport& r);
nlohmann::json to_json(const ClopenSet& a);
ClopenSet clopen_from_json(const nlohmann::json& j);

}  // namespace rcs
