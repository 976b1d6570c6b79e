#include "rcs/second_moment.hpp"

#include <cmath>
#include <stdexcept>

namespace rcs {
namespace {

void check_depth(const DyadicMeasure& mu, std::size_t n, const Params& params) {
  if (n % static_cast<std::size_t>(params.k()) != 0) {
    throw std::invalid_argument("n=" + std::to_string(n) + " is not a multiple of k=" + std::to_string(params.k()));
  }
  if (n > mu.depth()) {
    throw std::invalid_argument("n=" + std::to_string(n) + " exceeds the measure depth N=" +
                                std::to_string(mu.depth()));
  }
}

// Sums of squares of block sums of w over blocks of 2^(n - i) leaves, for the
// given list of levels i.
template <class T>
std::vector<T> block_square_sums(const std::vector<T>& w, std::size_t n, const std::vector<std::size_t>& levels) {
  std::vector<T> out;
  for (std::size_t i : levels) {
    const std::size_t block = std::size_t{1} << (n - i);
    T total{};
    for (std::size_t start = 0; start < w.size(); start += block) {
      T s{};
      for (std::size_t t = start; t < start + block; ++t) s += w[t];
      total += s * s;
    }
    out.push_back(total);
  }
  return out;
}

std::vector<std::size_t> symbol_levels(std::size_t n, const Params& params) {
  std::vector<std::size_t> lv;
  for (std::size_t i = 0; i <= n; i += static_cast<std::size_t>(params.k())) lv.push_back(i);
  return lv;
}

}  // namespace

std::vector<char> hit_flags(const HittingTarget& target, std::size_t n) {
  std::vector<char> flags(std::size_t{1} << n, 0);
  for (const auto& c : target.set().cylinders()) {
    std::uint64_t idx = 0;
    const std::size_t len = std::min(c.size(), n);
    for (std::size_t i = 0; i < len; ++i) idx = (idx << 1) | c.bits[i];
    const std::size_t span = std::size_t{1} << (n - len);
    std::fill(flags.begin() + static_cast<std::ptrdiff_t>(idx * span),
              flags.begin() + static_cast<std::ptrdiff_t>((idx + 1) * span), 1);
  }
  return flags;
}

YStatistic::YStatistic(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n, const Params& params)
    : params_(params), n_(n) {
  check_depth(mu, n, params);
  const auto flags = hit_flags(target, n);
  const auto masses = mu.level(n);
  const double scale = std::exp2(params.gamma().to_double() * static_cast<double>(n));
  weights_.resize(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) weights_[i] = flags[i] ? masses[i] * scale : 0.0;
}

double YStatistic::operator()(const SampledTree& tree) const {
  if (static_cast<std::size_t>(tree.params().k()) * tree.depth() != n_ || tree.params().k() != params_.k()) {
    throw std::invalid_argument("y_statistic: tree binary depth " +
                                std::to_string(static_cast<std::size_t>(tree.params().k()) * tree.depth()) +
                                " does not match n=" + std::to_string(n_));
  }
  return evaluate(tree.level_codes(tree.depth()));
}

double YStatistic::evaluate(std::span<const std::uint64_t> codes) const {
  // The code of a K-ary string is the index of its iota-image.
  double y = 0;
  for (auto code : codes) y += weights_[code];
  return y;
}

double y_statistic(const SampledTree& tree, const DyadicMeasure& mu, const HittingTarget& target, std::size_t n) {
  return YStatistic(mu, target, n, tree.params())(tree);
}

MomentValue exact_first_moment(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n,
                               const Params& params) {
  check_depth(mu, n, params);
  const auto flags = hit_flags(target, n);
  const auto masses = mu.level(n);
  MomentValue out;
  long double total = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) total += masses[i];
  }
  out.value = static_cast<double>(total);
  if (mu.is_exact()) {
    const auto ex = mu.exact_level(n);
    Rational r;
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (flags[i]) r += ex[i];
    }
    out.exact = r;
  }
  return out;
}

// E[Y_n^2] = sum_{sigma,tau} w(sigma) w(tau) 2^(ell mhat). Grouping pairs by
// K-ary common prefix length j and telescoping the weights gives
//   S_0 + sum_{j=1}^{nhat} (2^(ell j) - 2^(ell (j-1))) S_j,
// S_j the sum of squared block masses at K-ary depth j.
MomentValue exact_second_moment(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n,
                                const Params& params) {
  check_depth(mu, n, params);
  const auto flags = hit_flags(target, n);
  const auto masses = mu.level(n);
  const auto levels = symbol_levels(n, params);

  std::vector<long double> w(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) w[i] = flags[i] ? masses[i] : 0.0L;
  const auto sq = block_square_sums(w, n, levels);
  const long double ell = params.ell().to_long_double();
  long double total = sq[0];
  for (std::size_t j = 1; j < sq.size(); ++j) {
    total += (std::exp2(ell * j) - std::exp2(ell * (j - 1))) * sq[j];
  }

  MomentValue out;
  out.value = static_cast<double>(total);
  if (mu.is_exact() && params.ell().is_integer()) {
    try {
      const auto ex = mu.exact_level(n);
      std::vector<Rational> we(flags.size());
      for (std::size_t i = 0; i < flags.size(); ++i) we[i] = flags[i] ? ex[i] : Rational(0);
      const auto sqe = block_square_sums(we, n, levels);
      const auto l = static_cast<int>(params.ell().num());
      Rational r = sqe[0];
      for (std::size_t j = 1; j < sqe.size(); ++j) {
        r += (Rational::pow2(l * static_cast<int>(j)) - Rational::pow2(l * static_cast<int>(j - 1))) * sqe[j];
      }
      out.exact = r;
    } catch (const std::overflow_error&) {
      out.exact.reset();
    }
  }
  return out;
}

double second_moment_common_bound(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n,
                                  const Params& params) {
  check_depth(mu, n, params);
  const auto flags = hit_flags(target, n);
  const auto masses = mu.level(n);
  std::vector<std::size_t> levels(n + 1);
  for (std::size_t i = 0; i <= n; ++i) levels[i] = i;
  std::vector<long double> w(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) w[i] = flags[i] ? masses[i] : 0.0L;
  const auto sq = block_square_sums(w, n, levels);
  const long double gamma = params.gamma().to_long_double();
  long double total = sq[0];
  for (std::size_t i = 1; i <= n; ++i) total += (std::exp2(gamma * i) - std::exp2(gamma * (i - 1))) * sq[i];
  return static_cast<double>(total);
}

PzBound pz_bound(double first, double second) {
  if (first < 0 || second < 0) throw std::invalid_argument("moments must be nonnegative");
  if (second == 0) {
    if (first > 0) throw std::invalid_argument("inconsistent moments: E[X^2] = 0 < E[X]");
    return {0.0, false};
  }
  const double v = first * first / second;
  if (v > 1.0) return {1.0, true};
  return {v, false};
}

MomentReport moment_report(const DyadicMeasure& mu, const HittingTarget& target, std::size_t n, const Params& params) {
  MomentReport r;
  r.n = n;
  r.first_moment = exact_first_moment(mu, target, n, params);
  r.second_moment = exact_second_moment(mu, target, n, params);
  r.second_moment_common_bound = second_moment_common_bound(mu, target, n, params);
  if (r.first_moment.exact && r.second_moment.exact && !r.second_moment.exact->is_zero()) {
    // Exact ratio, evaluated in double only at the end.
    const Rational ratio = *r.first_moment.exact * *r.first_moment.exact / *r.second_moment.exact;
    r.pz = ratio > Rational(1) ? PzBound{1.0, true} : PzBound{ratio.to_double(), false};
  } else {
    r.pz = pz_bound(r.first_moment.value, r.second_moment.value);
  }
  r.mu_a.value = measure_of_clopen(mu, target.set());
  r.mu_a.exact = exact_measure_of_clopen(mu, target.set());
  return r;
}

HittingBound hitting_lower_bound(const DyadicMeasure& mu, const HittingTarget& target, const Params& params) {
  HittingBound b;
  b.mu_a = measure_of_clopen(mu, target.set());
  b.energy = energy(mu, params.gamma().to_double()).total;
  if (std::isinf(b.energy)) {
    b.bound = 0;
    b.diagnostic = "infinite energy: gamma >= 1 under uniform extension";
    return b;
  }
  b.bound = b.mu_a * b.mu_a / b.energy;
  return b;
}

nlohmann::json to_json(const MomentValue& v) {
  nlohmann::json j{{"value", v.value}};
  j["exact"] = v.exact ? nlohmann::json(v.exact->str()) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const MomentReport& r) {
  return {{"n", r.n},
          {"first_moment", to_json(r.first_moment)},
          {"second_moment", to_json(r.second_moment)},
          {"second_moment_common_bound", r.second_moment_common_bound},
          {"pz_bound", r.pz.value},
          {"pz_clamped", r.pz.clamped},
          {"mu_A", to_json(r.mu_a)}};
}

nlohmann::json to_json(const HittingBound& b) {
  nlohmann::json j{{"bound", b.bound}, {"mu_A", b.mu_a}};
  j["energy"] = std::isinf(b.energy) ? nlohmann::json("inf") : nlohmann::json(b.energy);
  if (!b.diagnostic.empty()) j["diagnostic"] = b.diagnostic;
  return j;
}

}  // namespace rcs
