#include "rcs/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rcs/dyadic_measure.hpp"
#include "rcs/encoding.hpp"
#include "rcs/exact_measure.hpp"
#include "rcs/experiments.hpp"
#include "rcs/sampler.hpp"
#include "rcs/second_moment.hpp"

namespace rcs::cli {
namespace {

using nlohmann::json;

constexpr const char* kFooter = R"(Reports are JSON with a top-level "schema": 1 field, the subcommand, every
flag as given ("args"), a timestamp and the "result".

CSV output (--format csv):
  survival, pairprob, hitprob, pipeline, beamsplitter, moments with --trials:
    name,depth,trials,successes,estimate,standard_error,interval_low,
    interval_high,reference,reference_kind,sigma_level,verdict
  sample: level,string
  every other subcommand: key,value (JSON pointer into the result)

Exit codes: 0 success, 1 usage or input error, 2 a check reported VIOLATION.)";

struct Config {
  int k = 2;
  std::string ell = "1";
  std::size_t depth = 8;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string gamma = "1/2";
  std::string beta;
  std::string c_r;
  std::string measure = "uniform";
  std::optional<std::size_t> measure_depth;
  std::string target;
  std::string target_file;
  std::string sigma;
  std::string tau;
  std::string x;
  std::string tree_file;
  std::string subset;
  std::size_t length = 0;
  std::size_t n = 0;
  std::string strings;
  double eta = 0.5;
  std::uint64_t photons = 1000;
  std::size_t max_listed = 64;
  bool full = false;
  std::string format = "json";
  std::string output;
  bool no_timestamp = false;
};

struct Outcome {
  json result;
  bool violation = false;
};

Params params_of(const Config& c) { return Params(c.k, Rational::parse(c.ell)); }

double rational_arg(const std::string& text, const char* name) {
  try {
    return Rational::parse(text).to_double();
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("--") + name + ": " + e.what());
  }
}

DyadicMeasure measure_of(const Config& c, std::size_t default_depth) {
  const std::size_t depth = c.measure_depth.value_or(default_depth);
  if (c.measure == "uniform") return build_uniform(depth);
  if (c.measure == "diluted") return build_diluted(depth);
  return load_measure(c.measure);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

HittingTarget target_of(const Config& c) {
  if (!c.target_file.empty()) {
    std::ifstream in(c.target_file);
    if (!in) throw std::invalid_argument("cannot open target file '" + c.target_file + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("malformed target file: " + std::string(e.what()));
    }
    return HittingTarget(clopen_from_json(j));
  }
  if (c.target.empty() || c.target == "all") return HittingTarget::whole_space();
  std::vector<BitString> cyl;
  for (const auto& s : split(c.target, ',')) cyl.push_back(parse_bitstring(s));
  return HittingTarget(ClopenSet(std::move(cyl)));
}

json reports_json(const std::vector<ExperimentReport>& rs, bool runtime) {
  json arr = json::array();
  for (const auto& r : rs) arr.push_back(to_json(r, runtime));
  return arr;
}

bool any_violation(const std::vector<ExperimentReport>& rs) {
  return std::any_of(rs.begin(), rs.end(), [](const auto& r) { return r.verdict == Verdict::kViolation; });
}

Outcome cmd_sample(const Config& c) {
  const auto tree = sample_tree(params_of(c), c.depth, c.seed, c.full);
  return {{{"tree", to_json(tree)}}};
}

Outcome cmd_survival(const Config& c) {
  const TrialPlan plan{.params = params_of(c), .depth = c.depth, .trials = c.trials, .master_seed = c.seed,
                       .threads = c.threads};
  const auto rs = run_survival_curve(plan);
  json exact = json::array();
  for (std::size_t j = 0; j <= c.depth; ++j) exact.push_back(survival_exact(plan.params, j));
  return {{{"exact", exact}, {"limit", survival_limit(plan.params)}, {"reports", reports_json(rs, !c.no_timestamp)}},
          any_violation(rs)};
}

Outcome cmd_pairprob(const Config& c) {
  const auto params = params_of(c);
  const auto sigma = parse_kstring(c.sigma);
  const auto tau = parse_kstring(c.tau);
  const auto exact = pair_chain_prob(sigma, tau, params);
  const TrialPlan plan{.params = params, .trials = c.trials, .master_seed = c.seed, .threads = c.threads};
  const auto r = run_pair_prob_check(plan, sigma, tau);
  return {{{"n_hat", sigma.size()},
           {"m_hat", common_prefix_length(sigma, tau)},
           {"exact", {{"exponent", exact.exponent().str()}, {"value", exact.value()}}},
           {"reports", reports_json({r}, !c.no_timestamp)}},
          r.verdict == Verdict::kViolation};
}

Outcome cmd_energy(const Config& c) {
  const auto mu = measure_of(c, 12);
  const double gamma = rational_arg(c.gamma, "gamma");
  std::optional<EnergyCertificate> cert;
  if (!c.beta.empty()) {
    const double beta = rational_arg(c.beta, "beta");
    const double c_r = c.c_r.empty() ? capacity_constant(mu, beta) : rational_arg(c.c_r, "c-r");
    cert = EnergyCertificate{c_r, beta};
  } else if (!c.c_r.empty()) {
    throw std::invalid_argument("--c-r needs --beta");
  }
  return {{{"energy", to_json(energy(mu, gamma, cert))}}};
}

Outcome cmd_capacity(const Config& c) {
  const auto mu = measure_of(c, 12);
  const double gamma = rational_arg(c.gamma, "gamma");
  return {{{"depth", mu.depth()}, {"gamma", gamma}, {"c_r", capacity_constant(mu, gamma)}}};
}

Outcome cmd_weight(const Config& c) {
  const double gamma = rational_arg(c.gamma, "gamma");
  std::vector<BitString> strings;
  if (!c.strings.empty()) {
    for (const auto& s : split(c.strings, ',')) strings.push_back(parse_bitstring(s));
  } else {
    // Support leaves of the measure.
    const auto mu = measure_of(c, 8);
    const std::size_t n = mu.depth();
    const auto leaves = mu.level(n);
    for (std::size_t idx = 0; idx < leaves.size(); ++idx) {
      if (leaves[idx] == 0.0) continue;
      BitString s = bits_of_index(idx, n);
      strings.push_back(std::move(s));
    }
  }
  return {{{"count", strings.size()}, {"gamma", gamma}, {"weight", gamma_weight(strings, gamma)}}};
}

Outcome cmd_hitprob(const Config& c) {
  const auto params = params_of(c);
  const auto target = target_of(c);
  const std::size_t n = static_cast<std::size_t>(params.k()) * c.depth;
  auto mu = std::make_shared<const DyadicMeasure>(measure_of(c, std::max(n, target.set().max_length())));
  const TrialPlan plan{.params = params, .depth = c.depth, .trials = c.trials, .master_seed = c.seed,
                       .target = target, .measure = mu, .threads = c.threads};
  const auto bound = hitting_lower_bound(*mu, target, params);
  const auto r = run_hitting_check(plan);
  return {{{"target", to_json(target.set())},
           {"bound", to_json(bound)},
           {"reports", reports_json({r}, !c.no_timestamp)}},
          r.verdict == Verdict::kViolation};
}

Outcome cmd_moments(const Config& c, bool trials_given) {
  const auto params = params_of(c);
  const auto target = target_of(c);
  const std::size_t n = c.n != 0 ? c.n : static_cast<std::size_t>(params.k()) * c.depth;
  auto mu = std::make_shared<const DyadicMeasure>(measure_of(c, std::max(n, target.set().max_length())));
  const auto report = moment_report(*mu, target, n, params);
  Outcome out{{{"target", to_json(target.set())}, {"moments", to_json(report)}}};
  if (trials_given) {
    if (n % static_cast<std::size_t>(params.k()) != 0) throw std::invalid_argument("--n must be a multiple of k");
    const TrialPlan plan{.params = params, .depth = n / static_cast<std::size_t>(params.k()), .trials = c.trials,
                         .master_seed = c.seed, .target = target, .measure = mu, .threads = c.threads};
    const auto mc = run_y_monte_carlo(plan);
    const auto positive = bound_report("P{Y_n > 0} vs PZ bound", mc.positive, mc.trials, report.pz.value, 3.0);
    out.result["monte_carlo"] = {{"trials", mc.trials},
                                 {"mean_y", mc.y.mean},
                                 {"mean_y_se", mc.y.standard_error()},
                                 {"mean_y_squared", mc.y_squared.mean},
                                 {"mean_y_squared_se", mc.y_squared.standard_error()},
                                 {"monotonicity_failures", mc.monotonicity_failures}};
    out.result["reports"] = reports_json({positive}, !c.no_timestamp);
    out.violation = positive.verdict == Verdict::kViolation || mc.monotonicity_failures > 0;
  }
  return out;
}

Outcome cmd_pipeline(const Config& c) {
  const auto r = run_pipeline_demo(c.k, c.depth, c.trials, c.seed, c.threads);
  auto j = to_json(r, !c.no_timestamp);
  j["reports"] = reports_json({r.hitting}, !c.no_timestamp);
  return {j, r.hitting.verdict == Verdict::kViolation || (r.hitting_trial && !r.round_trip_ok)};
}

Outcome cmd_beamsplitter(const Config& c) {
  const auto r = run_beam_splitter(c.eta, c.photons, c.seed);
  auto j = to_json(r, c.max_listed, !c.no_timestamp);
  j["reports"] = reports_json({r.detection_check, r.ones_check}, !c.no_timestamp);
  return {j, r.detection_check.verdict == Verdict::kViolation || r.ones_check.verdict == Verdict::kViolation};
}

Outcome cmd_extract(const Config& c) {
  const auto x = parse_bitstring(c.x);
  SampledTree tree = [&] {
    if (c.tree_file.empty()) {
      return sample_tree(params_of(c), c.depth, c.seed);
    }
    std::ifstream in(c.tree_file);
    if (!in) throw std::invalid_argument("cannot open tree file '" + c.tree_file + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("malformed tree file: " + std::string(e.what()));
    }
    return tree_from_json(j);
  }();
  const auto y = extract_subset(x, tree);
  json ints = json::array();
  for (auto v : subset_to_integers(y)) ints.push_back(v);
  const std::size_t blocks = x.size() / static_cast<std::size_t>(tree.params().k());
  return {{{"x", to_string(x)},
           {"Y", to_json(y)},
           {"integers", ints},
           {"complete", y.size() == blocks}}};
}

Outcome cmd_reconstruct(const Config& c) {
  std::set<KString> strings;
  for (const auto& s : split(c.subset, ';')) {
    if (!s.empty()) strings.insert(parse_kstring(s));
  }
  // ell is irrelevant to the decoding.
  const SubsetWitness y(Params(c.k, Rational(1)), std::move(strings));
  return {{{"Y", to_json(y)}, {"length", c.length}, {"x", to_string(reconstruct_prefix(y, c.length))}}};
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string csv_field(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  }
  return s;
}

void write_csv(const std::string& command, const json& result, std::ostream& os) {
  if (result.contains("reports")) {
    os << "name,depth,trials,successes,estimate,standard_error,interval_low,interval_high,reference,"
          "reference_kind,sigma_level,verdict\n";
    for (const auto& r : result["reports"]) {
      os << csv_field(r["name"]) << ',' << r["depth"] << ',' << r["trials"] << ',' << r["successes"] << ','
         << r["estimate"] << ',' << r["standard_error"] << ',' << r["interval"][0] << ',' << r["interval"][1] << ','
         << r["reference"] << ',' << csv_field(r["reference_kind"]) << ',' << r["sigma_level"] << ','
         << csv_field(r["verdict"]) << '\n';
    }
    return;
  }
  if (command == "sample") {
    os << "level,string\n";
    const auto& levels = result["tree"]["levels"];
    for (std::size_t j = 0; j < levels.size(); ++j) {
      for (const auto& s : levels[j]) os << j + 1 << ',' << csv_field(s) << '\n';
    }
    return;
  }
  os << "key,value\n";
  const json flat = result.flatten();
  for (const auto& [key, value] : flat.items()) os << csv_field(key) << ',' << csv_field(value) << '\n';
}

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--output", c.output, "Write the report to this file instead of stdout");
  sub->add_flag("--no-timestamp", c.no_timestamp, "Omit timestamp and runtime fields");
}

void add_params(CLI::App* sub, Config& c) {
  sub->add_option("--k", c.k, "Symbol width in bits (K = 2^k)");
  sub->add_option("--ell", c.ell, "Membership exponent, rational 'p/q' or decimal");
}

void add_trials(CLI::App* sub, Config& c) {
  sub->add_option("--trials", c.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--threads", c.threads, "Worker threads (does not change results)")->check(CLI::PositiveNumber);
}

void add_measure(CLI::App* sub, Config& c) {
  sub->add_option("--measure", c.measure, "'uniform', 'diluted' or a measure JSON file");
  sub->add_option("--measure-depth", c.measure_depth, "Depth N of a built-in measure");
}

void add_target(CLI::App* sub, Config& c) {
  sub->add_option("--target", c.target, "Comma-separated cylinders, or 'all' (default)");
  sub->add_option("--target-file", c.target_file, "JSON file {\"cylinders\": [...]}");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Random closed sets of Cantor space: sampling, energies and hitting bounds", "rcs"};
  app.footer(kFooter);
  app.require_subcommand(1, 1);

  auto* sample = app.add_subcommand("sample", "Sample a depth-truncated random tree");
  add_params(sample, c);
  sample->add_option("--depth", c.depth, "K-ary depth");
  sample->add_option("--seed", c.seed, "Seed");
  sample->add_flag("--full", c.full, "Allow ell = 0 (complete tree)");

  auto* survival = app.add_subcommand("survival", "Survival curve: Monte Carlo vs exact recursion");
  add_params(survival, c);
  survival->add_option("--depth", c.depth, "K-ary depth");
  add_trials(survival, c);

  auto* pairprob = app.add_subcommand("pairprob", "Co-membership of two prefix chains");
  add_params(pairprob, c);
  pairprob->add_option("--sigma", c.sigma, "K-ary string, e.g. 3,2,1")->required();
  pairprob->add_option("--tau", c.tau, "K-ary string of the same length")->required();
  add_trials(pairprob, c);

  auto* energy_cmd = app.add_subcommand("energy", "Gamma-energy of a measure");
  add_measure(energy_cmd, c);
  energy_cmd->add_option("--gamma", c.gamma, "Energy exponent");
  energy_cmd->add_option("--beta", c.beta, "Capacity exponent for the bound");
  energy_cmd->add_option("--c-r", c.c_r, "Capacity constant (default: least constant for --beta)");

  auto* capacity = app.add_subcommand("capacity", "Least c with mu(s) <= c 2^(-gamma |s|)");
  add_measure(capacity, c);
  capacity->add_option("--gamma", c.gamma, "Exponent");

  auto* weight = app.add_subcommand("weight", "Gamma-weight of a set of strings");
  weight->add_option("--strings", c.strings, "Comma-separated bit strings (default: measure support)");
  add_measure(weight, c);
  weight->add_option("--gamma", c.gamma, "Exponent");

  auto* hitprob = app.add_subcommand("hitprob", "Hitting frequency vs mu(A)^2 / energy");
  add_params(hitprob, c);
  hitprob->add_option("--depth", c.depth, "K-ary depth");
  add_trials(hitprob, c);
  add_measure(hitprob, c);
  add_target(hitprob, c);

  auto* moments = app.add_subcommand("moments", "Exact moments of Y_n and the Paley-Zygmund bound");
  add_params(moments, c);
  moments->add_option("--n", c.n, "Binary depth n (default k * depth)");
  moments->add_option("--depth", c.depth, "K-ary depth");
  add_trials(moments, c);
  add_measure(moments, c);
  add_target(moments, c);

  auto* pipeline = app.add_subcommand("pipeline", "Diluted measure, hitting check and one extraction");
  pipeline->add_option("--k", c.k, "Symbol width (ell = 1)");
  pipeline->add_option("--depth", c.depth, "K-ary depth");
  add_trials(pipeline, c);

  auto* beam = app.add_subcommand("beamsplitter", "Lossy detection of fair random bits");
  beam->add_option("--eta", c.eta, "Detection probability in (0, 1]");
  beam->add_option("--photons", c.photons, "Number of photons")->check(CLI::PositiveNumber);
  beam->add_option("--seed", c.seed, "Seed");
  beam->add_option("--max-listed", c.max_listed, "Positions listed in the report");

  auto* extract = app.add_subcommand("extract", "Y = { s in S : iota(s) prefix of x }");
  add_params(extract, c);
  extract->add_option("--x", c.x, "Branch as 0/1 text")->required();
  extract->add_option("--depth", c.depth, "K-ary depth of the sampled tree");
  extract->add_option("--seed", c.seed, "Seed of the sampled tree");
  extract->add_option("--tree-file", c.tree_file, "Tree JSON as written by 'sample'");

  auto* reconstruct = app.add_subcommand("reconstruct", "Recover the prefix of x from Y");
  reconstruct->add_option("--k", c.k, "Symbol width");
  reconstruct->add_option("--subset", c.subset, "K-ary strings separated by ';', e.g. '3;3,2'")->required();
  reconstruct->add_option("--length", c.length, "Binary length (multiple of k)")->required();

  for (auto* sub : app.get_subcommands({})) add_common(sub, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as CallForHelp from the subcommand.
    if (e.get_exit_code() == 0) {
      for (auto* sub : app.get_subcommands()) out << sub->help();
      if (app.get_subcommands().empty()) out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  Outcome outcome;
  try {
    if (command == "sample") outcome = cmd_sample(c);
    else if (command == "survival") outcome = cmd_survival(c);
    else if (command == "pairprob") outcome = cmd_pairprob(c);
    else if (command == "energy") outcome = cmd_energy(c);
    else if (command == "capacity") outcome = cmd_capacity(c);
    else if (command == "weight") outcome = cmd_weight(c);
    else if (command == "hitprob") outcome = cmd_hitprob(c);
    else if (command == "moments") outcome = cmd_moments(c, sub->count("--trials") > 0);
    else if (command == "pipeline") outcome = cmd_pipeline(c);
    else if (command == "beamsplitter") outcome = cmd_beamsplitter(c);
    else if (command == "extract") outcome = cmd_extract(c);
    else if (command == "reconstruct") outcome = cmd_reconstruct(c);
  } catch (const std::exception& e) {
    err << "error: " << command << ": " << e.what() << "\n";
    return kExitUsage;
  }

  json args = json::object();
  for (const auto* opt : sub->get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--help") continue;
    const auto& results = opt->results();
    std::string joined;
    for (std::size_t i = 0; i < results.size(); ++i) joined += (i ? " " : "") + results[i];
    args[opt->get_name()] = joined;
  }
  json report{{"schema", 1}, {"command", command}, {"args", args}};
  if (!c.no_timestamp) report["timestamp"] = timestamp();
  report["result"] = outcome.result;
  report["status"] = outcome.violation ? "VIOLATION" : "OK";

  std::ofstream file;
  if (!c.output.empty()) {
    file.open(c.output);
    if (!file) {
      err << "error: cannot write '" << c.output << "'\n";
      return kExitUsage;
    }
  }
  std::ostream& os = c.output.empty() ? out : file;
  if (c.format == "csv") {
    write_csv(command, outcome.result, os);
  } else {
    os << report.dump(2) << "\n";
  }
  return outcome.violation ? kExitViolation : kExitOk;
}

}  // namespace rcs::cli
