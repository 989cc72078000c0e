#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "aht/model.hpp"

namespace aht {

// log(sum(exp(x))) with max-shift; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

// Posterior over hypotheses, stored as log-probabilities (nats).
struct Belief {
  std::vector<double> log_rho;

  static Belief uniform(std::size_t m);
  static Belief from_probabilities(std::span<const double> rho);
  static Belief prior_of(const Model& model) { return from_probabilities(model.prior()); }

  std::size_t size() const noexcept { return log_rho.size(); }
  double prob(Hypothesis h) const;
  std::vector<double> probabilities() const;
  // Lowest index on ties.
  Hypothesis map_estimate() const noexcept;
};

struct Step {
  Experiment u = 0;
  Observation y = 0;
  friend bool operator==(const Step&, const Step&) = default;
};

using Trajectory = std::vector<Step>;

void validate_trajectory(const Model& model, const Trajectory& traj);

// Debug dump: one "n<TAB>u<TAB>y" line per step, zero-based.
void write_trajectory(std::ostream& os, const Trajectory& traj);

// C_i(rho) = log rho(i) - log(1 - rho(i)), the complement taken as a
// log-sum-exp over j != i.
double bllr(const Belief& belief, Hypothesis i);

Belief update_belief(const Model& model, const Belief& belief, Experiment u, Observation y);
// Same update written into `belief`.
void update_belief_in_place(const Model& model, Belief& belief, Experiment u, Observation y);

Belief posterior_from_trajectory(const Model& model, const Belief& prior, const Trajectory& traj);

// C_i(rho_{N+1}) - C_i(rho_1) through the log-sum-exp identity over
// accumulated log-likelihood ratios, without forming the posterior.
double confidence_increment(const Model& model, const Belief& prior, const Trajectory& traj,
                            Hypothesis i);

}  // namespace aht
