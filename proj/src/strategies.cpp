#include "aht/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "aht/errors.hpp"
#include "aht/format.hpp"

namespace aht {

namespace {

std::vector<double> point_mass(std::size_t n, std::size_t at) {
  std::vector<double> d(n, 0.0);
  d[at] = 1.0;
  return d;
}

// Lowest index among maxima.
std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

std::vector<double> all_bllr(const Belief& b) {
  std::vector<double> c(b.size());
  for (Hypothesis h = 0; h < b.size(); ++h) c[h] = bllr(b, h);
  return c;
}

// Posterior after (u, y) and log P(y | belief, u).
double bayes_step(const Model& model, const Belief& belief, Experiment u, Observation y,
                  Belief& out) {
  out.log_rho.resize(belief.size());
  for (Hypothesis h = 0; h < belief.size(); ++h)
    out.log_rho[h] = belief.log_rho[h] + model.log_p(h, u, y);
  const double z = log_sum_exp(out.log_rho);
  for (double& v : out.log_rho) v -= z;
  return z;
}

double expected_increment(const Model& model, const Belief& belief,
                          const std::vector<double>& c_now, Experiment u) {
  double total = 0.0;
  Belief next;
  for (Observation y = 0; y < model.num_observations(); ++y) {
    bayes_step(model, belief, u, y, next);
    const auto c_next = all_bllr(next);
    for (Hypothesis h = 0; h < belief.size(); ++h)
      total += std::exp(belief.log_rho[h]) * model.p(h, u, y) * (c_next[h] - c_now[h]);
  }
  return total;
}

double best_q(const Model& model, const Belief& belief, int depth);

double q_value(const Model& model, const Belief& belief, const std::vector<double>& c_now,
               Experiment u, int depth) {
  double q = expected_increment(model, belief, c_now, u);
  if (depth <= 1) return q;
  Belief next;
  for (Observation y = 0; y < model.num_observations(); ++y) {
    const double log_py = bayes_step(model, belief, u, y, next);
    q += std::exp(log_py) * best_q(model, next, depth - 1);
  }
  return q;
}

double best_q(const Model& model, const Belief& belief, int depth) {
  const auto c_now = all_bllr(belief);
  double best = -std::numeric_limits<double>::infinity();
  for (Experiment u = 0; u < model.num_experiments(); ++u)
    best = std::max(best, q_value(model, belief, c_now, u, depth));
  return best;
}

void check_belief(const Model& model, const Belief& belief) {
  if (belief.size() != model.num_hypotheses())
    throw std::invalid_argument("belief size does not match model");
}

}  // namespace

std::vector<double> select_chernoff(const Model& model, const std::vector<SaddlePoint>& saddles,
                                    const Belief& belief) {
  check_belief(model, belief);
  if (saddles.size() != model.num_hypotheses())
    throw ConfigError("chernoff selection needs one saddle point per hypothesis");
  return saddles[belief.map_estimate()].alpha_star;
}

std::vector<double> select_openloop(Hypothesis i, const std::vector<SaddlePoint>& saddles) {
  if (i >= saddles.size()) throw std::out_of_range("openloop: hypothesis out of range");
  return saddles[i].alpha_star;
}

double ejs_divergence(const Model& model, const Belief& belief, Experiment u) {
  check_belief(model, belief);
  if (u >= model.num_experiments()) throw std::out_of_range("ejs: experiment out of range");
  return expected_increment(model, belief, all_bllr(belief), u);
}

std::vector<double> select_ejs_greedy(const Model& model, const Belief& belief) {
  check_belief(model, belief);
  const auto c_now = all_bllr(belief);
  std::vector<double> score(model.num_experiments());
  for (Experiment u = 0; u < score.size(); ++u)
    score[u] = expected_increment(model, belief, c_now, u);
  return point_mass(score.size(), argmax(score));
}

std::vector<double> ecr_action_values(const Model& model, const Belief& belief, int depth,
                                      int remaining, std::uint64_t node_budget) {
  check_belief(model, belief);
  if (depth < 1) throw ConfigError("ecr lookahead depth must be >= 1");
  if (remaining < 1) throw ConfigError("ecr lookahead: no remaining step to plan");
  const int d = std::min(depth, remaining);
  const double branching =
      static_cast<double>(model.num_experiments()) * static_cast<double>(model.num_observations());
  double nodes = 0.0, level = 1.0;
  for (int k = 0; k < d; ++k) {
    level *= branching;
    nodes += level;
  }
  if (nodes > static_cast<double>(node_budget))
    throw BudgetError("ecr lookahead: tree of depth " + std::to_string(d) +
                      " exceeds node budget");
  const auto c_now = all_bllr(belief);
  std::vector<double> q(model.num_experiments());
  for (Experiment u = 0; u < q.size(); ++u) q[u] = q_value(model, belief, c_now, u, d);
  return q;
}

std::vector<double> select_ecr_lookahead(const Model& model, const Belief& belief, int depth,
                                         int remaining, std::uint64_t node_budget) {
  const auto q = ecr_action_values(model, belief, depth, remaining, node_budget);
  return point_mass(q.size(), argmax(q));
}

SelectionStrategy SelectionStrategy::chernoff(std::vector<SaddlePoint> saddles) {
  SelectionStrategy s(Kind::Chernoff, "chernoff");
  s.saddles_ = std::move(saddles);
  return s;
}

SelectionStrategy SelectionStrategy::openloop(Hypothesis i,
                                              const std::vector<SaddlePoint>& saddles) {
  SelectionStrategy s(Kind::OpenLoop, "openloop:i=" + std::to_string(i + 1));
  s.fixed_ = select_openloop(i, saddles);
  return s;
}

SelectionStrategy SelectionStrategy::uniform(std::size_t num_experiments) {
  if (num_experiments == 0) throw ConfigError("uniform selection over zero experiments");
  SelectionStrategy s(Kind::Uniform, "uniform");
  s.fixed_.assign(num_experiments, 1.0 / static_cast<double>(num_experiments));
  return s;
}

SelectionStrategy SelectionStrategy::ejs() { return SelectionStrategy(Kind::EjsGreedy, "ejs"); }

SelectionStrategy SelectionStrategy::ecr(int depth, std::uint64_t node_budget) {
  if (depth < 1) throw ConfigError("ecr lookahead depth must be >= 1");
  SelectionStrategy s(Kind::EcrLookahead, "ecr:k=" + std::to_string(depth));
  s.depth_ = depth;
  s.budget_ = node_budget;
  return s;
}

SelectionStrategy SelectionStrategy::custom(std::string name, Rule rule) {
  SelectionStrategy s(Kind::Custom, std::move(name));
  s.rule_ = std::move(rule);
  return s;
}

void SelectionStrategy::distribution(const Model& model, const Belief& belief, int step,
                                     int horizon, std::span<double> out) const {
  switch (kind_) {
    case Kind::Chernoff: {
      const auto& a = saddles_.at(belief.map_estimate()).alpha_star;
      std::copy(a.begin(), a.end(), out.begin());
      return;
    }
    case Kind::OpenLoop:
    case Kind::Uniform:
      std::copy(fixed_.begin(), fixed_.end(), out.begin());
      return;
    case Kind::EjsGreedy: {
      const auto d = select_ejs_greedy(model, belief);
      std::copy(d.begin(), d.end(), out.begin());
      return;
    }
    case Kind::EcrLookahead: {
      const auto d = select_ecr_lookahead(model, belief, depth_, horizon - step, budget_);
      std::copy(d.begin(), d.end(), out.begin());
      return;
    }
    case Kind::Custom:
      rule_(belief, step, horizon, out);
      return;
  }
}

std::vector<double> SelectionStrategy::distribution(const Model& model, const Belief& belief,
                                                    int step, int horizon) const {
  std::vector<double> out(model.num_experiments(), 0.0);
  distribution(model, belief, step, horizon, out);
  return out;
}

// --- inference -----------------------------------------------------------

namespace {

constexpr double kThresholdRelTol = 1e-12;

void check_delta(const std::vector<SaddlePoint>& saddles, double delta) {
  if (!(delta > 0.0) || !(delta < min_d_star(saddles)))
    throw ConfigError("delta must satisfy 0 < delta < min_i D*(i)");
}

}  // namespace

Decision infer_threshold_f_bar(const Model& model, const std::vector<SaddlePoint>& saddles,
                               const Belief& prior, const Belief& final_belief, int horizon,
                               double delta) {
  check_delta(saddles, delta);
  if (saddles.size() != model.num_hypotheses())
    throw ConfigError("f_bar needs one saddle point per hypothesis");
  Decision best;
  double best_margin = 0.0;
  for (Hypothesis i = 0; i < model.num_hypotheses(); ++i) {
    const double inc = bllr(final_belief, i) - bllr(prior, i);
    const double threshold = horizon * (saddles[i].d_star - delta);
    const double margin = inc - threshold;
    // Lattice models put increments exactly on the threshold; accept those
    // ties regardless of which way the log-domain arithmetic rounded.
    const double slack = kThresholdRelTol * std::max(1.0, std::abs(threshold));
    if (margin >= -slack && (!best || margin > best_margin)) {
      best = i;
      best_margin = margin;
    }
  }
  return best;
}

double p2_threshold(double d_star, double bound_b, std::size_t num_hypotheses, int horizon,
                    double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw ConfigError("p2 threshold: epsilon must lie in (0, 1)");
  const double n = horizon;
  return n * d_star -
         2.0 * bound_b * std::sqrt(n * std::log(static_cast<double>(num_hypotheses) / epsilon));
}

Decision infer_p2_threshold(const Model& model, const SaddlePoint& saddle_i, double bound_b,
                            std::size_t num_hypotheses, const Belief& prior,
                            const Belief& final_belief, int horizon, double epsilon) {
  (void)model;
  const Hypothesis i = saddle_i.hypothesis;
  const double inc = bllr(final_belief, i) - bllr(prior, i);
  if (inc >= p2_threshold(saddle_i.d_star, bound_b, num_hypotheses, horizon, epsilon)) return i;
  return std::nullopt;
}

Hypothesis infer_map_forced(const Belief& final_belief) { return final_belief.map_estimate(); }

InferenceStrategy InferenceStrategy::f_bar(const std::vector<SaddlePoint>& saddles, double delta) {
  check_delta(saddles, delta);
  InferenceStrategy s(Kind::ThresholdFBar, "fbar:delta=" + format_real(delta));
  s.saddles_ = saddles;
  s.delta_ = delta;
  return s;
}

InferenceStrategy InferenceStrategy::p2(Hypothesis i, const SaddlePoint& saddle_i, double bound_b,
                                        std::size_t num_hypotheses, EpsilonSchedule epsilon) {
  if (saddle_i.hypothesis != i) throw ConfigError("p2: saddle point belongs to another hypothesis");
  InferenceStrategy s(Kind::P2Threshold, "p2:i=" + std::to_string(i + 1));
  s.saddles_ = {saddle_i};
  s.target_ = i;
  s.bound_b_ = bound_b;
  s.num_hypotheses_ = num_hypotheses;
  s.epsilon_ = epsilon;
  return s;
}

InferenceStrategy InferenceStrategy::map_forced() { return InferenceStrategy(Kind::MapForced, "map"); }

InferenceStrategy InferenceStrategy::threshold(Hypothesis i, double theta) {
  InferenceStrategy s(Kind::Threshold,
                      "threshold:i=" + std::to_string(i + 1) + ",theta=" + format_real(theta));
  s.target_ = i;
  s.theta_ = theta;
  return s;
}

InferenceStrategy InferenceStrategy::abstain() { return InferenceStrategy(Kind::Abstain, "abstain"); }

Decision InferenceStrategy::decide(const Model& model, const Belief& prior,
                                   const Belief& final_belief, int horizon) const {
  switch (kind_) {
    case Kind::ThresholdFBar:
      return infer_threshold_f_bar(model, saddles_, prior, final_belief, horizon, delta_);
    case Kind::P2Threshold:
      return infer_p2_threshold(model, saddles_.front(), bound_b_, num_hypotheses_, prior,
                                final_belief, horizon, epsilon_.value(horizon));
    case Kind::MapForced:
      return infer_map_forced(final_belief);
    case Kind::Threshold:
      if (bllr(final_belief, target_) - bllr(prior, target_) >= theta_) return target_;
      return std::nullopt;
    case Kind::Abstain:
      return std::nullopt;
  }
  return std::nullopt;
}

double default_delta(const std::vector<SaddlePoint>& saddles) {
  return min_d_star(saddles) / 4.0;
}

// --- spec strings ----------------------------------------------------------

namespace {

struct ParsedSpec {
  std::string head;
  std::map<std::string, std::string> params;
};

ParsedSpec split_spec(std::string_view spec) {
  ParsedSpec out;
  const auto colon = spec.find(':');
  out.head = std::string(spec.substr(0, colon));
  if (colon == std::string_view::npos) return out;
  std::string_view rest = spec.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ConfigError("malformed strategy parameter '" + std::string(item) + "'");
    out.params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

double to_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("bad value for " + what + ": " + s);
  return v;
}

long to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("bad value for " + what + ": " + s);
  return v;
}

Hypothesis to_hypothesis(const ParsedSpec& p, const Model& model) {
  const auto it = p.params.find("i");
  if (it == p.params.end()) throw ConfigError(p.head + " requires i=<hypothesis>");
  const long i = to_int(it->second, "i");
  if (i < 1 || static_cast<std::size_t>(i) > model.num_hypotheses())
    throw ConfigError("hypothesis index out of range: " + it->second);
  return static_cast<Hypothesis>(i - 1);
}

void expect_only(const ParsedSpec& p, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : p.params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown parameter '" + key + "' for " + p.head);
  }
}

}  // namespace

SelectionStrategy parse_selection(std::string_view spec, const Model& model,
                                  const std::vector<SaddlePoint>& saddles) {
  const auto p = split_spec(spec);
  if (p.head == "chernoff") {
    expect_only(p, {});
    return SelectionStrategy::chernoff(saddles);
  }
  if (p.head == "openloop") {
    expect_only(p, {"i"});
    return SelectionStrategy::openloop(to_hypothesis(p, model), saddles);
  }
  if (p.head == "uniform") {
    expect_only(p, {});
    return SelectionStrategy::uniform(model.num_experiments());
  }
  if (p.head == "ejs") {
    expect_only(p, {});
    return SelectionStrategy::ejs();
  }
  if (p.head == "ecr") {
    expect_only(p, {"k"});
    const auto it = p.params.find("k");
    const long k = it == p.params.end() ? 1 : to_int(it->second, "k");
    if (k < 1) throw ConfigError("ecr depth must be >= 1");
    return SelectionStrategy::ecr(static_cast<int>(k));
  }
  throw ConfigError("unknown selection strategy: " + std::string(spec));
}

InferenceStrategy parse_inference(std::string_view spec, const Model& model,
                                  const std::vector<SaddlePoint>& saddles,
                                  const EpsilonSchedule& epsilon, double delta) {
  const auto p = split_spec(spec);
  if (p.head == "fbar") {
    expect_only(p, {"delta"});
    const auto it = p.params.find("delta");
    const double d = it == p.params.end() ? delta : to_real(it->second, "delta");
    return InferenceStrategy::f_bar(saddles, d);
  }
  if (p.head == "p2") {
    expect_only(p, {"i"});
    const Hypothesis i = to_hypothesis(p, model);
    return InferenceStrategy::p2(i, saddles.at(i), lambda_bound(model), model.num_hypotheses(),
                                 epsilon);
  }
  if (p.head == "map") {
    expect_only(p, {});
    return InferenceStrategy::map_forced();
  }
  if (p.head == "threshold") {
    expect_only(p, {"i", "theta"});
    const auto it = p.params.find("theta");
    if (it == p.params.end()) throw ConfigError("threshold requires theta=<nats>");
    return InferenceStrategy::threshold(to_hypothesis(p, model), to_real(it->second, "theta"));
  }
  if (p.head == "abstain") {
    expect_only(p, {});
    return InferenceStrategy::abstain();
  }
  throw ConfigError("unknown inference strategy: " + std::string(spec));
}

}  // namespace aht
