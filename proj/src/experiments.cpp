#include "rcs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "rcs/exact_measure.hpp"
#include "rcs/seeding.hpp"

namespace rcs {
namespace {

constexpr std::uint64_t kBlockSize = 4096;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs body(index, acc) for every trial. Blocks are claimed dynamically by
// workers but merged in block order, so the result never depends on threads.
template <class Acc, class Body, class Merge>
Acc run_trials(std::uint64_t trials, unsigned threads, const Acc& init, Body body, Merge merge) {
  const std::uint64_t blocks = (trials + kBlockSize - 1) / kBlockSize;
  std::vector<Acc> partial(blocks, init);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      const std::uint64_t end = std::min(trials, (b + 1) * kBlockSize);
      for (std::uint64_t i = b * kBlockSize; i < end; ++i) body(i, partial[b]);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(blocks, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  Acc out = init;
  for (const auto& p : partial) merge(out, p);
  return out;
}

void require_plan(const TrialPlan& plan) {
  if (plan.trials < 1) throw std::invalid_argument("trials must be >= 1");
}

}  // namespace

const char* to_string(Verdict v) { return v == Verdict::kConsistent ? "CONSISTENT" : "VIOLATION"; }

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) {
  return seeding::derive(master_seed ^ 0x5DEECE66Dull, index);
}

ProportionInterval proportion_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("no trials");
  if (successes > trials) throw std::invalid_argument("more successes than trials");
  ProportionInterval ci;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  ci.estimate = p;
  ci.standard_error = std::sqrt(p * (1 - p) / n);
  if (successes < 10 || trials - successes < 10) {
    ci.wilson = true;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
    // The score interval touches 0 or 1 exactly at the extremes; keep it so in floating point.
    ci.low = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    ci.high = successes == trials ? 1.0 : std::min(1.0, centre + half);
  } else {
    ci.low = p - z * ci.standard_error;
    ci.high = p + z * ci.standard_error;
  }
  return ci;
}

namespace {

ExperimentReport make_report(std::string name, std::uint64_t successes, std::uint64_t trials, double reference,
                             double sigma_level, const char* kind) {
  const auto ci = proportion_interval(successes, trials, sigma_level);
  ExperimentReport r;
  r.name = std::move(name);
  r.trials = trials;
  r.successes = successes;
  r.estimate = ci.estimate;
  r.standard_error = ci.standard_error;
  r.interval_low = ci.low;
  r.interval_high = ci.high;
  r.wilson = ci.wilson;
  r.reference = reference;
  r.reference_kind = kind;
  r.sigma_level = sigma_level;
  return r;
}

}  // namespace

ExperimentReport equality_report(std::string name, std::uint64_t successes, std::uint64_t trials, double exact,
                                 double sigma_level) {
  auto r = make_report(std::move(name), successes, trials, exact, sigma_level, "exact");
  r.verdict = (exact >= r.interval_low && exact <= r.interval_high) ? Verdict::kConsistent : Verdict::kViolation;
  return r;
}

ExperimentReport bound_report(std::string name, std::uint64_t successes, std::uint64_t trials, double bound,
                              double sigma_level) {
  auto r = make_report(std::move(name), successes, trials, bound, sigma_level, "lower_bound");
  r.verdict = r.interval_high < bound ? Verdict::kViolation : Verdict::kConsistent;
  return r;
}

void RunningMoments::add(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningMoments::merge(const RunningMoments& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double n1 = static_cast<double>(count);
  const double n2 = static_cast<double>(o.count);
  const double delta = o.mean - mean;
  const double n = n1 + n2;
  mean += delta * n2 / n;
  m2 += o.m2 + delta * delta * n1 * n2 / n;
  count += o.count;
}

double RunningMoments::standard_error() const {
  return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

ExperimentReport run_pair_prob_check(const TrialPlan& plan, const KString& sigma, const KString& tau) {
  require_plan(plan);
  const auto start = Clock::now();
  const Log2Prob exact = pair_chain_prob(sigma, tau, plan.params);  // validates lengths and symbols
  const std::size_t depth = sigma.size();
  const auto hits = run_trials<std::uint64_t>(
      plan.trials, plan.threads, 0,
      [&](std::uint64_t i, std::uint64_t& acc) {
        const auto tree = sample_tree(plan.params, depth, trial_seed(plan.master_seed, i));
        if (tree.contains(sigma) && tree.contains(tau)) ++acc;
      },
      [](std::uint64_t& a, std::uint64_t b) { a += b; });
  auto r = equality_report("pair_prob " + to_string(sigma) + " | " + to_string(tau), hits, plan.trials, exact.value(), 4.0);
  r.depth = depth;
  r.runtime_seconds = seconds_since(start);
  return r;
}

std::vector<ExperimentReport> run_survival_curve(const TrialPlan& plan) {
  require_plan(plan);
  const auto start = Clock::now();
  const std::size_t depth = plan.depth;
  // counts[j]: trials whose level j is nonempty.
  const auto counts = run_trials<std::vector<std::uint64_t>>(
      plan.trials, plan.threads, std::vector<std::uint64_t>(depth + 1, 0),
      [&](std::uint64_t i, std::vector<std::uint64_t>& acc) {
        const auto tree = sample_tree(plan.params, depth, trial_seed(plan.master_seed, i));
        for (std::size_t j = 0; j <= depth && tree.level_size(j) > 0; ++j) ++acc[j];
      },
      [](std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
        for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
      });
  const double elapsed = seconds_since(start);
  std::vector<ExperimentReport> out;
  for (std::size_t j = 1; j <= depth; ++j) {
    auto r = equality_report("survival depth " + std::to_string(j), counts[j], plan.trials,
                             survival_exact(plan.params, j), 3.0);
    r.depth = j;
    r.runtime_seconds = elapsed;
    out.push_back(std::move(r));
  }
  return out;
}

ExperimentReport run_hitting_check(const TrialPlan& plan) {
  require_plan(plan);
  if (!plan.measure || !plan.target) throw std::invalid_argument("hitting check needs a measure and a target");
  const auto start = Clock::now();
  const std::size_t n = static_cast<std::size_t>(plan.params.k()) * plan.depth;
  const auto bound = hitting_lower_bound(*plan.measure, *plan.target, plan.params);
  const auto flags = hit_flags(*plan.target, n);
  const auto hits = run_trials<std::uint64_t>(
      plan.trials, plan.threads, 0,
      [&](std::uint64_t i, std::uint64_t& acc) {
        const auto tree = sample_tree(plan.params, plan.depth, trial_seed(plan.master_seed, i));
        for (auto code : tree.level_codes(plan.depth)) {
          if (flags[code]) {
            ++acc;
            break;
          }
        }
      },
      [](std::uint64_t& a, std::uint64_t b) { a += b; });
  auto r = bound_report("hitting", hits, plan.trials, bound.bound, 3.0);
  r.depth = plan.depth;
  r.runtime_seconds = seconds_since(start);
  return r;
}

YMonteCarlo run_y_monte_carlo(const TrialPlan& plan) {
  require_plan(plan);
  if (!plan.measure || !plan.target) throw std::invalid_argument("Y Monte Carlo needs a measure and a target");
  const auto k = static_cast<std::size_t>(plan.params.k());
  std::vector<YStatistic> per_level;
  for (std::size_t j = 0; j <= plan.depth; ++j) per_level.emplace_back(*plan.measure, *plan.target, k * j, plan.params);

  return run_trials<YMonteCarlo>(
      plan.trials, plan.threads, YMonteCarlo{},
      [&](std::uint64_t i, YMonteCarlo& acc) {
        const auto tree = sample_tree(plan.params, plan.depth, trial_seed(plan.master_seed, i));
        bool failed = false;
        double prev = per_level[0].evaluate(tree.level_codes(0));
        for (std::size_t j = 1; j <= plan.depth; ++j) {
          const double y = per_level[j].evaluate(tree.level_codes(j));
          if (y > 0 && !(prev > 0)) failed = true;
          prev = y;
        }
        acc.y.add(prev);
        acc.y_squared.add(prev * prev);
        if (prev > 0) ++acc.positive;
        if (failed) ++acc.monotonicity_failures;
        ++acc.trials;
      },
      [](YMonteCarlo& a, const YMonteCarlo& b) {
        a.y.merge(b.y);
        a.y_squared.merge(b.y_squared);
        a.positive += b.positive;
        a.trials += b.trials;
        a.monotonicity_failures += b.monotonicity_failures;
      });
}

ClopenSet random_clopen(std::uint64_t seed, std::size_t max_length, std::size_t max_cylinders) {
  if (max_length == 0 || max_cylinders == 0) throw std::invalid_argument("random_clopen: empty shape");
  std::uint64_t key = seeding::derive(seed, 0x636c6f70656eull);
  auto next = [&key] { return key = seeding::splitmix64(key); };
  const std::size_t count = 1 + next() % max_cylinders;
  std::vector<BitString> cyl;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t len = 1 + next() % max_length;
    BitString s;
    for (std::size_t i = 0; i < len; ++i) s.bits.push_back(static_cast<std::uint8_t>(next() >> 63));
    cyl.push_back(std::move(s));
  }
  return ClopenSet(std::move(cyl));
}

PipelineReport run_pipeline_demo(int k, std::size_t depth, std::uint64_t trials, std::uint64_t seed,
                                 unsigned threads) {
  const Params params(k, Rational(1));
  const std::size_t n = static_cast<std::size_t>(k) * depth;
  auto mu = std::make_shared<const DyadicMeasure>(build_diluted(n));

  std::vector<BitString> support;
  const auto leaves = mu->level(n);
  for (std::size_t idx = 0; idx < leaves.size(); ++idx) {
    if (leaves[idx] == 0.0) continue;
    BitString s = bits_of_index(idx, n);
    support.push_back(std::move(s));
  }
  HittingTarget target{ClopenSet(std::move(support))};

  PipelineReport r{.params = params, .depth = depth};
  const double gamma = params.gamma().to_double();
  r.capacity_constant = capacity_constant(*mu, r.capacity_beta);
  if (r.capacity_beta > gamma) {
    r.energy = energy(*mu, gamma, EnergyCertificate{r.capacity_constant, r.capacity_beta});
  } else {
    r.energy = energy(*mu, gamma);
    r.diagnostic = "gamma = 1/k is not below the capacity exponent 1/2; pick a larger k";
  }
  r.bound = hitting_lower_bound(*mu, target, params);

  TrialPlan plan{.params = params, .depth = depth, .trials = trials, .master_seed = seed,
                 .target = target, .measure = mu, .threads = threads};
  r.hitting = run_hitting_check(plan);

  const YStatistic y(*mu, target, n, params);
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto tree = sample_tree(params, depth, trial_seed(seed, i));
    if (!(y(tree) > 0)) continue;
    // Smallest surviving code with positive weight; codes are sorted.
    const auto codes = tree.level_codes(depth);
    for (auto code : codes) {
      if (y.evaluate(std::span<const std::uint64_t>(&code, 1)) > 0) {
        r.hitting_trial = i;
        r.branch = iota_string(tree.decode(code, depth), params);
        break;
      }
    }
    r.subset = extract_subset(*r.branch, tree);
    r.integers = subset_to_integers(*r.subset);
    bool ok = r.subset->size() == depth;
    for (std::size_t j = 1; j <= depth && ok; ++j) {
      ok = reconstruct_prefix(*r.subset, static_cast<std::size_t>(k) * j) == r.branch->prefix(static_cast<std::size_t>(k) * j);
    }
    r.round_trip_ok = ok;
    break;
  }
  if (!r.hitting_trial) {
    if (!r.diagnostic.empty()) r.diagnostic += "; ";
    r.diagnostic += "no trial met the support (survival " + std::to_string(r.hitting.estimate) + ")";
  }
  return r;
}

std::uint8_t beam_splitter_bit(std::uint64_t seed, std::uint64_t photon) {
  return seeding::unit(seeding::derive(seeding::derive(seed, photon), 0)) < 0.5 ? 1 : 0;
}

bool beam_splitter_detected(double eta, std::uint64_t seed, std::uint64_t photon) {
  return seeding::unit(seeding::derive(seeding::derive(seed, photon), 1)) < eta;
}

BeamSplitterRecord run_beam_splitter(double eta, std::uint64_t photons, std::uint64_t seed) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (photons == 0) throw std::invalid_argument("need at least one photon");
  BeamSplitterRecord r;
  r.eta = eta;
  r.photons = photons;
  r.seed = seed;
  for (std::uint64_t i = 0; i < photons; ++i) {
    const auto bit = beam_splitter_bit(seed, i);
    r.true_ones += bit;
    if (!beam_splitter_detected(eta, seed, i)) continue;
    r.detected_positions.push_back(i);
    r.detected_bits.push_back(bit);
    if (bit) r.detected_ones.push_back(i);
  }
  const double n = static_cast<double>(photons);
  r.detected_fraction = static_cast<double>(r.detected_positions.size()) / n;
  r.detected_ones_fraction = static_cast<double>(r.detected_ones.size()) / n;
  r.detection_check = equality_report("detected fraction", r.detected_positions.size(), photons, eta, 4.0);
  r.ones_check = equality_report("detected ones fraction", r.detected_ones.size(), photons, eta / 2, 4.0);
  return r;
}

nlohmann::json to_json(const ExperimentReport& r, bool include_runtime) {
  nlohmann::json j{{"name", r.name},
                   {"depth", r.depth},
                   {"trials", r.trials},
                   {"successes", r.successes},
                   {"estimate", r.estimate},
                   {"standard_error", r.standard_error},
                   {"interval", {r.interval_low, r.interval_high}},
                   {"interval_method", r.wilson ? "wilson" : "normal"},
                   {"reference", r.reference},
                   {"reference_kind", r.reference_kind},
                   {"sigma_level", r.sigma_level},
                   {"verdict", to_string(r.verdict)}};
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j;
}

nlohmann::json to_json(const PipelineReport& r, bool include_runtime) {
  nlohmann::json j{{"k", r.params.k()},
                   {"ell", r.params.ell().str()},
                   {"gamma", r.params.gamma().str()},
                   {"depth", r.depth},
                   {"binary_depth", static_cast<std::size_t>(r.params.k()) * r.depth},
                   {"measure", "diluted"},
                   {"capacity", {{"beta", r.capacity_beta}, {"c_r", r.capacity_constant}}},
                   {"energy", to_json(r.energy)},
                   {"hitting_bound", to_json(r.bound)},
                   {"hitting", to_json(r.hitting, include_runtime)},
                   {"round_trip_ok", r.round_trip_ok}};
  if (r.hitting_trial) {
    nlohmann::json ints = nlohmann::json::array();
    for (auto v : r.integers) ints.push_back(v);
    j["extraction"] = {{"trial", *r.hitting_trial},
                       {"x", to_string(*r.branch)},
                       {"Y", to_json(*r.subset)},
                       {"integers", std::move(ints)}};
  } else {
    j["extraction"] = nullptr;
  }
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

nlohmann::json to_json(const BeamSplitterRecord& r, std::size_t max_listed, bool include_runtime) {
  auto head = [max_listed](const auto& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < v.size() && i < max_listed; ++i) arr.push_back(v[i]);
    return arr;
  };
  return {{"note", "detection is an i.i.d. mask; adversarial detection schedules are not simulated"},
          {"eta", r.eta},
          {"photons", r.photons},
          {"seed", r.seed},
          {"detected", r.detected_positions.size()},
          {"true_ones", r.true_ones},
          {"detected_ones", r.detected_ones.size()},
          {"detected_fraction", r.detected_fraction},
          {"detected_ones_fraction", r.detected_ones_fraction},
          {"listed", std::min<std::size_t>(max_listed, r.detected_positions.size())},
          {"detected_positions", head(r.detected_positions)},
          {"detected_bits", head(r.detected_bits)},
          {"detected_one_positions", head(r.detected_ones)},
          {"checks", {to_json(r.detection_check, include_runtime), to_json(r.ones_check, include_runtime)}}};
}

}  // namespace rcs
