#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aht/belief.hpp"
#include "aht/model.hpp"
#include "aht/strategies.hpp"

namespace aht {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

enum class RunMode { MonteCarlo, Exact };

// How the true hypothesis is chosen for Monte Carlo episodes.
enum class Conditioning {
  PerHypothesis,  // `episodes` runs with H = i, for every i
  SamplePrior,    // `episodes` runs in total, H ~ rho_1
};

struct RunConfig {
  RunConfig(std::shared_ptr<const Model> model, SelectionStrategy selection,
            InferenceStrategy inference, int horizon)
      : model(std::move(model)),
        selection(std::move(selection)),
        inference(std::move(inference)),
        horizon(horizon) {}

  std::shared_ptr<const Model> model;
  SelectionStrategy selection;
  InferenceStrategy inference;
  int horizon;
  RunMode mode = RunMode::MonteCarlo;
  std::uint64_t episodes = 1;
  std::uint64_t seed = 0;
  Conditioning conditioning = Conditioning::PerHypothesis;
  std::uint64_t node_budget = kDefaultEnumerationBudget;
  unsigned threads = 1;

  // Throws ConfigError on N < 1, zero episodes, or an enumeration tree
  // larger than node_budget.
  void validate() const;
};

struct EpisodeResult {
  Trajectory trajectory;
  Decision decision;
  Belief final_belief;
};

// splitmix64-based derivation; independent of scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

EpisodeResult run_episode(const RunConfig& config, Hypothesis true_h, std::uint64_t episode_seed);

// Conditional error probabilities, confidence rates and their standard
// errors. Undefined (zero-denominator) quantities are nullopt.
struct RunReport {
  RunMode mode = RunMode::MonteCarlo;
  int horizon = 0;
  std::string selection;
  std::string inference;
  std::vector<double> prior;

  std::vector<std::optional<double>> psi;
  std::vector<std::optional<double>> phi;
  std::optional<double> gamma;
  std::vector<std::optional<double>> jng;

  struct StandardErrors {
    std::vector<std::optional<double>> psi;
    std::vector<std::optional<double>> phi;
    std::optional<double> gamma;
    std::vector<std::optional<double>> jng;
  } standard_error;

  std::uint64_t episodes = 0;       // mc: per hypothesis, or total under SamplePrior
  std::uint64_t paths = 0;          // exact: leaves with positive weight
  std::uint64_t misclassified = 0;  // mc: wrong, conclusive decisions
  std::uint64_t seed = 0;
  std::vector<double> path_mass;    // exact: total path probability under each H
};

RunReport monte_carlo(const RunConfig& config);

// One leaf of the (u, y) tree under a fixed selection strategy.
struct PathVisit {
  const Trajectory& trajectory;
  // P(path | H = h) for every h, strategy randomization included.
  std::span<const double> probability;
  const Belief& final_belief;
};

// Depth-first traversal of every positive-probability path of length N.
// Returns the number of leaves visited.
std::uint64_t enumerate_paths(const Model& model, const SelectionStrategy& selection, int horizon,
                              std::uint64_t node_budget,
                              const std::function<void(const PathVisit&)>& visit);

RunReport enumerate_exact(const RunConfig& config);

// Dispatches on config.mode.
RunReport run(const RunConfig& config);

// (1/N) E_i[C_i(rho_{N+1}) - C_i(rho_1)] per hypothesis.
std::vector<std::optional<double>> estimate_jng(const RunConfig& config);

}  // namespace aht
