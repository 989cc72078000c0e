#include "aht/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aht {

double log_sum_exp(std::span<const double> x) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double v : x) s += std::exp(v - hi);
  return hi + std::log(s);
}

Belief Belief::uniform(std::size_t m) {
  if (m == 0) throw std::invalid_argument("belief over zero hypotheses");
  return Belief{std::vector<double>(m, -std::log(static_cast<double>(m)))};
}

Belief Belief::from_probabilities(std::span<const double> rho) {
  if (rho.empty()) throw std::invalid_argument("belief over zero hypotheses");
  double total = 0.0;
  for (double v : rho) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("belief entries must be finite and nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("belief has no mass");
  Belief b;
  b.log_rho.reserve(rho.size());
  const double log_total = std::log(total);
  for (double v : rho) b.log_rho.push_back(std::log(v) - log_total);
  return b;
}

double Belief::prob(Hypothesis h) const { return std::exp(log_rho.at(h)); }

std::vector<double> Belief::probabilities() const {
  std::vector<double> out(log_rho.size());
  std::transform(log_rho.begin(), log_rho.end(), out.begin(),
                 [](double v) { return std::exp(v); });
  return out;
}

Hypothesis Belief::map_estimate() const noexcept {
  return static_cast<Hypothesis>(std::max_element(log_rho.begin(), log_rho.end()) -
                                 log_rho.begin());
}

void validate_trajectory(const Model& model, const Trajectory& traj) {
  for (std::size_t n = 0; n < traj.size(); ++n) {
    if (traj[n].u >= model.num_experiments() || traj[n].y >= model.num_observations())
      throw std::out_of_range("trajectory step " + std::to_string(n) + " out of range");
  }
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  for (std::size_t n = 0; n < traj.size(); ++n)
    os << n << '\t' << traj[n].u << '\t' << traj[n].y << '\n';
}

double bllr(const Belief& belief, Hypothesis i) {
  const std::size_t m = belief.size();
  if (i >= m) throw std::out_of_range("bllr: hypothesis out of range");
  std::vector<double> rest;
  rest.reserve(m - 1);
  for (std::size_t j = 0; j < m; ++j)
    if (j != i) rest.push_back(belief.log_rho[j]);
  const double log_complement = log_sum_exp(rest);
  const double log_own = belief.log_rho[i];
  if (!std::isfinite(log_own) || !std::isfinite(log_complement))
    throw std::domain_error("bllr: degenerate belief (rho(i) is 0 or 1)");
  return log_own - log_complement;
}

void update_belief_in_place(const Model& model, Belief& belief, Experiment u, Observation y) {
  const std::size_t m = belief.size();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < m; ++h) {
    belief.log_rho[h] += model.log_p(h, u, y);
    hi = std::max(hi, belief.log_rho[h]);
  }
  double s = 0.0;
  for (std::size_t h = 0; h < m; ++h) s += std::exp(belief.log_rho[h] - hi);
  const double z = hi + std::log(s);
  for (std::size_t h = 0; h < m; ++h) belief.log_rho[h] -= z;
}

Belief update_belief(const Model& model, const Belief& belief, Experiment u, Observation y) {
  if (belief.size() != model.num_hypotheses())
    throw std::invalid_argument("update_belief: belief size does not match model");
  if (u >= model.num_experiments() || y >= model.num_observations())
    throw std::out_of_range("update_belief: index out of range");
  Belief next = belief;
  update_belief_in_place(model, next, u, y);
  return next;
}

Belief posterior_from_trajectory(const Model& model, const Belief& prior, const Trajectory& traj) {
  validate_trajectory(model, traj);
  Belief b = prior;
  for (const Step& s : traj) update_belief_in_place(model, b, s.u, s.y);
  return b;
}

double confidence_increment(const Model& model, const Belief& prior, const Trajectory& traj,
                            Hypothesis i) {
  validate_trajectory(model, traj);
  const std::size_t m = model.num_hypotheses();
  if (i >= m) throw std::out_of_range("confidence_increment: hypothesis out of range");

  std::vector<double> rivals;
  for (std::size_t j = 0; j < m; ++j)
    if (j != i) rivals.push_back(prior.log_rho[j]);
  const double log_rest = log_sum_exp(rivals);

  // log rho~_1(j) + sum_n lambda_i^j(u_n, y_n)
  std::vector<double> terms;
  terms.reserve(m - 1);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == i) continue;
    double acc = prior.log_rho[j] - log_rest;
    for (const Step& s : traj) acc += model.log_p(j, s.u, s.y) - model.log_p(i, s.u, s.y);
    terms.push_back(acc);
  }
  return -log_sum_exp(terms);
}

}  // namespace aht
