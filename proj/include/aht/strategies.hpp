#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aht/belief.hpp"
#include "aht/divergence.hpp"
#include "aht/model.hpp"

namespace aht {

// Hypothesis index, or nullopt for the inconclusive declaration.
using Decision = std::optional<Hypothesis>;

inline constexpr std::uint64_t kDefaultLookaheadBudget = 1'000'000;

// --- experiment selection ------------------------------------------------

// alpha^{i*} of the current MAP hypothesis (lowest index on ties).
std::vector<double> select_chernoff(const Model& model, const std::vector<SaddlePoint>& saddles,
                                    const Belief& belief);

std::vector<double> select_openloop(Hypothesis i, const std::vector<SaddlePoint>& saddles);

// Expected one-step growth of C_H under belief, H ~ belief.
double ejs_divergence(const Model& model, const Belief& belief, Experiment u);

std::vector<double> select_ejs_greedy(const Model& model, const Belief& belief);

// Value of every first action under depth-min(k, remaining) expectimax on the
// expected C_H increment. Depth 1 reproduces ejs_divergence exactly.
std::vector<double> ecr_action_values(const Model& model, const Belief& belief, int depth,
                                      int remaining,
                                      std::uint64_t node_budget = kDefaultLookaheadBudget);

std::vector<double> select_ecr_lookahead(const Model& model, const Belief& belief, int depth,
                                         int remaining,
                                         std::uint64_t node_budget = kDefaultLookaheadBudget);

// Deterministic map (belief, step, horizon) -> distribution over experiments.
// `step` is the zero-based index of the experiment about to be chosen.
class SelectionStrategy {
 public:
  enum class Kind { Chernoff, OpenLoop, Uniform, EjsGreedy, EcrLookahead, Custom };
  using Rule = std::function<void(const Belief& belief, int step, int horizon,
                                  std::span<double> out)>;

  static SelectionStrategy chernoff(std::vector<SaddlePoint> saddles);
  static SelectionStrategy openloop(Hypothesis i, const std::vector<SaddlePoint>& saddles);
  static SelectionStrategy uniform(std::size_t num_experiments);
  static SelectionStrategy ejs();
  static SelectionStrategy ecr(int depth, std::uint64_t node_budget = kDefaultLookaheadBudget);
  static SelectionStrategy custom(std::string name, Rule rule);

  void distribution(const Model& model, const Belief& belief, int step, int horizon,
                    std::span<double> out) const;
  std::vector<double> distribution(const Model& model, const Belief& belief, int step,
                                   int horizon) const;

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  SelectionStrategy(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  std::vector<SaddlePoint> saddles_;
  std::vector<double> fixed_;
  int depth_ = 1;
  std::uint64_t budget_ = kDefaultLookaheadBudget;
  Rule rule_;
};

// --- inference -----------------------------------------------------------

Decision infer_threshold_f_bar(const Model& model, const std::vector<SaddlePoint>& saddles,
                               const Belief& prior, const Belief& final_belief, int horizon,
                               double delta);

Decision infer_p2_threshold(const Model& model, const SaddlePoint& saddle_i, double bound_b,
                            std::size_t num_hypotheses, const Belief& prior,
                            const Belief& final_belief, int horizon, double epsilon);

// N D*(i) - 2 B sqrt(N log(M / eps)); may be negative for small N.
double p2_threshold(double d_star, double bound_b, std::size_t num_hypotheses, int horizon,
                    double epsilon);

Hypothesis infer_map_forced(const Belief& final_belief);

class InferenceStrategy {
 public:
  enum class Kind { ThresholdFBar, P2Threshold, MapForced, Threshold, Abstain };

  static InferenceStrategy f_bar(const std::vector<SaddlePoint>& saddles, double delta);
  static InferenceStrategy p2(Hypothesis i, const SaddlePoint& saddle_i, double bound_b,
                              std::size_t num_hypotheses, EpsilonSchedule epsilon);
  static InferenceStrategy map_forced();
  // Decide i iff C_i(rho_{N+1}) - C_i(rho_1) >= theta, else abstain.
  static InferenceStrategy threshold(Hypothesis i, double theta);
  static InferenceStrategy abstain();

  Decision decide(const Model& model, const Belief& prior, const Belief& final_belief,
                  int horizon) const;

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double delta() const noexcept { return delta_; }
  double theta() const noexcept { return theta_; }
  Hypothesis target() const noexcept { return target_; }

 private:
  InferenceStrategy(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  std::vector<SaddlePoint> saddles_;
  double delta_ = 0.0;
  double theta_ = 0.0;
  double bound_b_ = 0.0;
  std::size_t num_hypotheses_ = 0;
  Hypothesis target_ = 0;
  EpsilonSchedule epsilon_ = EpsilonSchedule::half_inverse();
};

// min_i D*(i) / 4
double default_delta(const std::vector<SaddlePoint>& saddles);

// CLI spec strings. Hypothesis references (i=...) are one-based.
//   selection: chernoff | openloop:i=2 | uniform | ejs | ecr:k=2
//   inference: fbar[:delta=0.3] | p2:i=1 | map | threshold:i=1,theta=2 | abstain
SelectionStrategy parse_selection(std::string_view spec, const Model& model,
                                  const std::vector<SaddlePoint>& saddles);
InferenceStrategy parse_inference(std::string_view spec, const Model& model,
                                  const std::vector<SaddlePoint>& saddles,
                                  const EpsilonSchedule& epsilon, double delta);

}  // namespace aht
