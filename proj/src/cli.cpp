#include "aht/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "aht/bounds.hpp"
#include "aht/divergence.hpp"
#include "aht/engine.hpp"
#include "aht/errors.hpp"
#include "aht/model.hpp"
#include "aht/report_io.hpp"
#include "aht/strategies.hpp"

namespace aht {

namespace {

using nlohmann::json;

struct Options {
  std::string model_path;
  std::string select = "chernoff";
  std::string infer = "fbar";
  int horizon = 0;
  std::vector<int> horizons;
  std::uint64_t episodes = 10'000;
  std::uint64_t seed = 0;
  std::optional<double> delta;
  std::string epsilon_rule = "half-inverse";
  double tol = 1e-6;
  std::uint64_t budget = kDefaultEnumerationBudget;
  unsigned threads = 0;
  bool exact = false;
  bool sample_prior = false;
  std::string out_path;
  std::string format = "json";
};

struct Context {
  std::shared_ptr<const Model> model;
  std::vector<SaddlePoint> saddles;
  EpsilonSchedule epsilon = EpsilonSchedule::half_inverse();
  double delta = 0.0;
};

// Missing or unusable command-line argument detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

Context load_context(const Options& o) {
  if (o.model_path.empty()) throw UsageError("--model is required");
  Context c;
  c.model = std::make_shared<const Model>(load_model_file(o.model_path));
  c.saddles = solve_all_saddles(*c.model, SaddleOptions{o.tol});
  c.epsilon = EpsilonSchedule::parse(o.epsilon_rule);
  c.delta = o.delta.value_or(default_delta(c.saddles));
  // fbar:delta=D overrides --delta, so bounds and metadata use the same slack
  const auto f = parse_inference(o.infer, *c.model, c.saddles, c.epsilon, c.delta);
  if (f.kind() == InferenceStrategy::Kind::ThresholdFBar) c.delta = f.delta();
  return c;
}

json metadata(const Options& o, const Context& c) {
  return {{"model", o.model_path},
          {"epsilon_rule", c.epsilon.describe()},
          {"delta", c.delta},
          {"tol", o.tol},
          {"seed", o.seed},
          {"select", o.select},
          {"infer", o.infer}};
}

std::string csv_metadata(const json& meta) {
  std::ostringstream os;
  for (const auto& [k, v] : meta.items())
    os << "# " << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  return os.str();
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig make_config(const Options& o, const Context& c, int horizon, RunMode mode) {
  RunConfig cfg(c.model, parse_selection(o.select, *c.model, c.saddles),
                parse_inference(o.infer, *c.model, c.saddles, c.epsilon, c.delta), horizon);
  cfg.mode = mode;
  cfg.episodes = o.episodes;
  cfg.seed = o.seed;
  cfg.node_budget = o.budget;
  cfg.threads = resolve_threads(o.threads);
  cfg.conditioning = o.sample_prior ? Conditioning::SamplePrior : Conditioning::PerHypothesis;
  cfg.validate();
  return cfg;
}

std::vector<int> horizon_list(const Options& o, bool require_list) {
  if (!o.horizons.empty()) return o.horizons;
  if (require_list) throw UsageError("--horizons a,b,c is required");
  if (o.horizon < 1) throw UsageError("--horizon N (N >= 1) is required");
  return {o.horizon};
}

std::string cmd_validate(const Options& o) {
  if (o.model_path.empty()) throw UsageError("--model is required");
  const Model m = load_model_file(o.model_path);
  double min_kl = std::numeric_limits<double>::infinity();
  for (Hypothesis i = 0; i < m.num_hypotheses(); ++i)
    for (double v : kl_matrix(m, i).entries) min_kl = std::min(min_kl, v);
  json j = {{"valid", true},
            {"hypotheses", m.hypotheses()},
            {"experiments", m.experiments()},
            {"observations", m.observations()},
            {"prior", m.prior()},
            {"lambda_bound", lambda_bound(m)},
            {"min_kl", min_kl},
            {"checks",
             {"full_support", "row_normalization", "distinguishability", "sizes", "prior"}}};
  return j.dump(2) + "\n";
}

std::string cmd_divergence(const Options& o) {
  const Context c = load_context(o);
  json arr = json::array();
  for (const auto& s : c.saddles) arr.push_back(to_json(s, *c.model));
  json j = {{"saddles", arr}, {"dstar_min", min_d_star(c.saddles)}, {"metadata", metadata(o, c)}};
  return j.dump(2) + "\n";
}

std::string emit_runs(const Options& o, const Context& c, const std::vector<RunReport>& reports) {
  if (o.format == "csv") {
    std::string s = csv_metadata(metadata(o, c)) + csv_header(*c.model) + "\n";
    for (const auto& r : reports) s += csv_row(r) + "\n";
    return s;
  }
  json j = {{"metadata", metadata(o, c)}};
  if (reports.size() == 1) {
    j["report"] = to_json(reports.front());
  } else {
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
  }
  return j.dump(2) + "\n";
}

std::string cmd_run(const Options& o, RunMode mode) {
  const Context c = load_context(o);
  std::vector<RunReport> reports;
  for (int n : horizon_list(o, false)) reports.push_back(run(make_config(o, c, n, mode)));
  return emit_runs(o, c, reports);
}

json bounds_json(const BoundReport& b) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"N", b.horizon},
          {"delta", b.delta},
          {"epsilon", b.epsilon},
          {"d_star", b.d_star},
          {"dstar_min", b.d_star_min},
          {"upper_bound", b.upper_bound},
          {"lower_bound", opt(b.lower_bound)},
          {"gamma", opt(b.gamma)},
          {"gamma_stderr", opt(b.gamma_stderr)},
          {"achieved_exponent", opt(b.achieved_exponent)},
          {"exponent_stderr", opt(b.exponent_stderr)},
          {"p2_rate", b.p2_rate},
          {"feasible", b.feasible},
          {"reliable", b.reliable}};
}

std::string cmd_bounds(const Options& o, bool sweep) {
  const Context c = load_context(o);
  const RunMode mode = o.exact ? RunMode::Exact : RunMode::MonteCarlo;
  std::vector<RunReport> reports;
  for (int n : horizon_list(o, sweep)) reports.push_back(run(make_config(o, c, n, mode)));
  const auto rows = exponents(*c.model, c.saddles, reports, c.delta, c.epsilon);

  if (o.format == "csv") {
    std::string s = csv_metadata(metadata(o, c)) + bounds_csv_header() + "\n";
    for (const auto& b : rows) s += bounds_csv_row(b) + "\n";
    return s;
  }
  json j = {{"metadata", metadata(o, c)}, {"bounds", json::array()}};
  for (const auto& b : rows) j["bounds"].push_back(bounds_json(b));
  if (sweep) {
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
  }
  return j.dump(2) + "\n";
}

void write_output(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw IoError("cannot open output file: " + o.out_path);
  f << text;
  if (!f) throw IoError("failed writing output file: " + o.out_path);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed-horizon active hypothesis testing with an inconclusive option", "aht"};
  app.require_subcommand(1);
  Options o;

  app.add_option("--model", o.model_path, "Model file (JSON)");
  app.add_option("--select", o.select, "Selection: chernoff | openloop:i=K | uniform | ejs | ecr:k=D");
  app.add_option("--infer", o.infer, "Inference: fbar[:delta=D] | p2:i=K | map | threshold:i=K,theta=T | abstain");
  auto* h1 = app.add_option("--horizon", o.horizon, "Horizon N");
  auto* hn = app.add_option("--horizons", o.horizons, "Comma-separated horizons")->delimiter(',');
  h1->excludes(hn);
  app.add_option("--episodes", o.episodes, "Monte Carlo episodes (per hypothesis)");
  app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--delta", o.delta, "f_bar slack delta (default min D*/4)");
  app.add_option("--epsilon-rule", o.epsilon_rule, "half-inverse | fixed:V");
  app.add_option("--tol", o.tol, "Saddle duality-gap tolerance");
  app.add_option("--budget", o.budget, "Enumeration path budget");
  app.add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  app.add_flag("--exact", o.exact, "bounds/sweep: use exact enumeration");
  app.add_flag("--sample-prior", o.sample_prior, "Draw H from the prior instead of conditioning");
  app.add_option("--out", o.out_path, "Output file (default stdout)");
  app.add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  auto* validate = app.add_subcommand("validate", "Check model invariants");
  auto* divergence = app.add_subcommand("divergence", "Saddle points D*(i), alpha*, beta*");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run report");
  auto* enumerate = app.add_subcommand("enumerate", "Exact run report by path enumeration");
  auto* bounds = app.add_subcommand("bounds", "Bound evaluations (CSV or JSON)");
  auto* sweep = app.add_subcommand("sweep", "Exponent table over --horizons");
  for (auto* s : {validate, divergence, simulate, enumerate, bounds, sweep}) s->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "aht: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    std::string text;
    if (validate->parsed()) text = cmd_validate(o);
    else if (divergence->parsed()) text = cmd_divergence(o);
    else if (simulate->parsed()) text = cmd_run(o, RunMode::MonteCarlo);
    else if (enumerate->parsed()) text = cmd_run(o, RunMode::Exact);
    else if (bounds->parsed()) text = cmd_bounds(o, false);
    else if (sweep->parsed()) text = cmd_bounds(o, true);
    write_output(o, text, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "aht: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "aht: " << e.what() << "\n";
    return kExitModel;
  } catch (const SolverError& e) {
    err << "aht: " << e.what() << " (best gap " << e.best_gap() << ")\n";
    return kExitSolver;
  } catch (const ConfigError& e) {
    err << "aht: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const BudgetError& e) {
    err << "aht: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "aht: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    err << "aht: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "aht: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "aht: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace aht
