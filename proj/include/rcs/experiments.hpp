#pragma once

// Monte Carlo checks of the sampler against the closed forms.
//
// Trials are processed in fixed-size blocks; per-trial seeds are derived from
// (master seed, trial index) and block results are merged in block order, so
// every report is identical for any thread count.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcs/dyadic_measure.hpp"
#include "rcs/encoding.hpp"
#include "rcs/sampler.hpp"
#include "rcs/second_moment.hpp"

namespace rcs {

enum class Verdict { kConsistent, kViolation };

const char* to_string(Verdict v);

struct TrialPlan {
  Params params;
  std::size_t depth = 0;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  std::optional<HittingTarget> target;
  std::shared_ptr<const DyadicMeasure> measure;
  unsigned threads = 1;  // does not affect results
};

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index);

/// Interval for a binomial proportion at z standard errors: the normal
/// approximation, or the Wilson score interval when fewer than 10 successes
/// or failures were seen.
struct ProportionInterval {
  double estimate = 0;
  double standard_error = 0;
  double low = 0;
  double high = 1;
  bool wilson = false;
};

ProportionInterval proportion_interval(std::uint64_t successes, std::uint64_t trials, double z);

struct ExperimentReport {
  std::string name;
  std::size_t depth = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double estimate = 0;
  double standard_error = 0;
  double interval_low = 0;
  double interval_high = 0;
  bool wilson = false;
  double reference = 0;
  std::string reference_kind;  // "exact" (two-sided) or "lower_bound" (one-sided)
  double sigma_level = 0;
  Verdict verdict = Verdict::kConsistent;
  double runtime_seconds = 0;
};

/// Two-sided: consistent iff the reference lies in the interval.
ExperimentReport equality_report(std::string name, std::uint64_t successes, std::uint64_t trials, double exact,
                                 double sigma_level);
/// One-sided: a violation iff the interval's upper end is below the bound.
ExperimentReport bound_report(std::string name, std::uint64_t successes, std::uint64_t trials, double bound,
                              double sigma_level);

/// Mean and variance merged with Chan's pairwise update.
struct RunningMoments {
  std::uint64_t count = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x);
  void merge(const RunningMoments& other);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const;
};

/// Co-membership of the prefix chains of sigma and tau (equal K-ary lengths)
/// against pair_chain_prob, at 4 sigma.
ExperimentReport run_pair_prob_check(const TrialPlan& plan, const KString& sigma, const KString& tau);

/// Nonempty level j for j = 1..plan.depth against survival_exact, at 3 sigma.
std::vector<ExperimentReport> run_survival_curve(const TrialPlan& plan);

/// Frequency that the depth-plan.depth frontier meets the target, against
/// hitting_lower_bound, one-sided at 3 sigma. Requires measure and target.
ExperimentReport run_hitting_check(const TrialPlan& plan);

/// Sample statistics of Y_n, n = k * plan.depth, and of 1{Y_n > 0}.
struct YMonteCarlo {
  RunningMoments y;
  RunningMoments y_squared;
  std::uint64_t positive = 0;
  std::uint64_t trials = 0;
  /// Trees where Y at some K-ary level j+1 was positive but Y at level j was not.
  std::uint64_t monotonicity_failures = 0;
};

/// Evaluates Y at every K-ary level of each sampled tree; level statistics
/// are for the deepest level. Requires measure and target.
YMonteCarlo run_y_monte_carlo(const TrialPlan& plan);

/// Random clopen target: 1 to max_cylinders cylinders of length 1..max_length.
ClopenSet random_clopen(std::uint64_t seed, std::size_t max_length, std::size_t max_cylinders = 4);

struct PipelineReport {
  Params params;
  std::size_t depth = 0;  // K-ary
  EnergyReport energy;
  double capacity_beta = 0.5;
  double capacity_constant = 0;
  HittingBound bound;
  ExperimentReport hitting;
  std::optional<std::uint64_t> hitting_trial;
  std::optional<BitString> branch;
  std::optional<SubsetWitness> subset;
  std::set<std::uint64_t> integers;
  bool round_trip_ok = false;
  std::string diagnostic;
};

/// ell = 1, diluted measure at binary depth k * depth, target = its support.
/// Finds the first trial whose frontier meets the support on a branch of
/// positive mass and runs the extraction on that branch.
PipelineReport run_pipeline_demo(int k, std::size_t depth, std::uint64_t trials, std::uint64_t seed,
                                 unsigned threads = 1);

struct BeamSplitterRecord {
  double eta = 0;
  std::uint64_t photons = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> detected_positions;
  std::vector<std::uint8_t> detected_bits;
  std::vector<std::uint64_t> detected_ones;  // subset of {i : bit_i = 1}
  std::uint64_t true_ones = 0;
  double detected_fraction = 0;
  double detected_ones_fraction = 0;
  ExperimentReport detection_check;  // detected fraction vs eta at 4 sigma
  ExperimentReport ones_check;       // detected ones vs eta / 2 at 4 sigma
};

/// Fair bit per photon with an independent detection flag of probability eta.
BeamSplitterRecord run_beam_splitter(double eta, std::uint64_t photons, std::uint64_t seed);

/// The simulated bit and detection flag of photon i.
std::uint8_t beam_splitter_bit(std::uint64_t seed, std::uint64_t photon);
bool beam_splitter_detected(double eta, std::uint64_t seed, std::uint64_t photon);

nlohmann::json to_json(const ExperimentReport& r, bool include_runtime = true);
nlohmann::json to_json(const PipelineReport& r, bool include_runtime = true);
nlohmann::json to_json(const BeamSplitterRecord& r, std::size_t max_listed, bool include_runtime = true);

}  // namespace rcs
