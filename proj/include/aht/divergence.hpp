#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "aht/model.hpp"

namespace aht {

// D(p || q) in nats. Both arguments must be strictly positive.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Payoff matrix of the experiment-vs-rival game for one hypothesis i:
// at(u, k) = D(p_i^u || p_{rivals[k]}^u).
struct KLMatrix {
  Hypothesis hypothesis = 0;
  std::size_t num_experiments = 0;
  std::vector<Hypothesis> rivals;  // H \ {i}, ascending
  std::vector<double> entries;     // row-major [u][k]

  double at(Experiment u, std::size_t k) const { return entries[u * rivals.size() + k]; }
  std::size_t num_rivals() const noexcept { return rivals.size(); }
};

KLMatrix kl_matrix(const Model& model, Hypothesis i);

// Value of max_alpha min_j alpha^T K e_j together with certified optimizers.
struct SaddlePoint {
  Hypothesis hypothesis = 0;
  double d_star = 0.0;
  std::vector<double> alpha_star;  // over experiments
  std::vector<double> beta_star;   // over KLMatrix::rivals, same order
  std::vector<Hypothesis> rivals;
  double lower = 0.0;  // min_j (alpha*^T K)_j
  double upper = 0.0;  // max_u (K beta*)_u
  double gap = 0.0;    // upper - lower

  // beta* weight on hypothesis j (0 for j == hypothesis).
  double beta_of(Hypothesis j) const;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_gap)
      : std::runtime_error(what), best_gap_(best_gap) {}
  double best_gap() const noexcept { return best_gap_; }

 private:
  double best_gap_;
};

struct SaddleOptions {
  double tol = 1e-6;
  std::size_t max_iterations = 1'000'000;
};

SaddlePoint solve_saddle(const KLMatrix& kl, const SaddleOptions& options = {});

// Saddle points for every hypothesis, indexed by hypothesis.
std::vector<SaddlePoint> solve_all_saddles(const Model& model, const SaddleOptions& options = {});

double min_d_star(const std::vector<SaddlePoint>& saddles);

}  // namespace aht
