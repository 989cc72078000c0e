#pragma once

#include <cstddef>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aht {

using Hypothesis = std::size_t;
using Experiment = std::size_t;
using Observation = std::size_t;

class ModelError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation };

  ModelError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Finite hypothesis-testing model: hypotheses x experiments x observations
// with a full-support channel p[h][u][y] and a strictly positive prior.
// Immutable after construction; every constructor path validates.
class Model {
 public:
  static constexpr double kRowSumTolerance = 1e-9;

  // channel is flattened in [h][u][y] order.
  Model(std::vector<std::string> hypotheses, std::vector<std::string> experiments,
        std::vector<std::string> observations, std::vector<double> channel,
        std::vector<double> prior);

  std::size_t num_hypotheses() const noexcept { return hypotheses_.size(); }
  std::size_t num_experiments() const noexcept { return experiments_.size(); }
  std::size_t num_observations() const noexcept { return observations_.size(); }

  const std::vector<std::string>& hypotheses() const noexcept { return hypotheses_; }
  const std::vector<std::string>& experiments() const noexcept { return experiments_; }
  const std::vector<std::string>& observations() const noexcept { return observations_; }
  const std::vector<double>& prior() const noexcept { return prior_; }

  double p(Hypothesis h, Experiment u, Observation y) const noexcept {
    return channel_[index(h, u, y)];
  }
  double log_p(Hypothesis h, Experiment u, Observation y) const noexcept {
    return log_channel_[index(h, u, y)];
  }
  // Distribution p_h^u over observations.
  std::span<const double> row(Hypothesis h, Experiment u) const noexcept {
    return {channel_.data() + index(h, u, 0), observations_.size()};
  }

  // B = max |log p_i^u(y) / p_j^u(y)| over i != j, u, y.
  double lambda_bound() const noexcept { return lambda_bound_; }

 private:
  std::size_t index(Hypothesis h, Experiment u, Observation y) const noexcept {
    return (h * experiments_.size() + u) * observations_.size() + y;
  }
  void validate() const;

  std::vector<std::string> hypotheses_;
  std::vector<std::string> experiments_;
  std::vector<std::string> observations_;
  std::vector<double> channel_;
  std::vector<double> log_channel_;
  std::vector<double> prior_;
  double lambda_bound_ = 0.0;
};

Model load_model(std::istream& source);
Model load_model_file(const std::string& path);
Model parse_model(std::string_view json_text);

// lambda_j^i(u, y) = log p_i^u(y) - log p_j^u(y), in nats.
double log_likelihood_ratio(const Model& model, Hypothesis i, Hypothesis j, Experiment u,
                            Observation y);

double lambda_bound(const Model& model);

// B inflated so that the strict |lambda| < B of the analysis holds.
inline double strict_lambda_bound(const Model& model) {
  return lambda_bound(model) * (1.0 + 1e-12);
}

// Type-i error budget eps_N as a function of the horizon.
class EpsilonSchedule {
 public:
  enum class Rule { HalfInverse, Fixed };

  // eps_N = 1 / (2N)
  static EpsilonSchedule half_inverse() { return EpsilonSchedule(Rule::HalfInverse, 0.0); }
  static EpsilonSchedule fixed(double value);
  // Accepts "half-inverse" or "fixed:V".
  static EpsilonSchedule parse(std::string_view text);

  double value(int horizon) const;
  // 0 < eps_N <= 1/(2N).
  bool admissible(int horizon) const;

  Rule rule() const noexcept { return rule_; }
  std::string describe() const;

 private:
  EpsilonSchedule(Rule rule, double v) : rule_(rule), fixed_(v) {}
  Rule rule_;
  double fixed_;
};

}  // namespace aht
