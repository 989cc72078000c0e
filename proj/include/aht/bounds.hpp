#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aht/divergence.hpp"
#include "aht/engine.hpp"
#include "aht/model.hpp"

namespace aht {

// sum_i (1 - rho_1(i)) exp(-N (D*(i) - delta))
double theorem2_upper(const Model& model, const std::vector<SaddlePoint>& saddles, int horizon,
                      double delta);

// sum_i (1 - rho_1(i)) exp(-N J(i) - N 2B eps/(1 - eps) + log(1 - eps)),
// B taken as the strict bound.
double remark1_lower(const Model& model, std::span<const double> jng, int horizon,
                     double epsilon);

// D*(i) - 2B sqrt(log(M / eps) / N)
double p2_achievable_rate(double d_star, double bound_b, std::size_t num_hypotheses, int horizon,
                          double epsilon);

// Right-hand side J + 2B eps/(1 - eps) - log(1 - eps)/N of the bound on
// -(1/N) log phi_N(i) for strategies with psi_N(i) <= eps.
double chernoff_stein_rate_bound(double jng, double bound_b, int horizon, double epsilon);

// D*(i) - sum_j beta*(j) log rho~_1(j) / N, an upper bound on J_N^g(i) for every g.
double confidence_rate_bound(const Model& model, const SaddlePoint& saddle, int horizon);

// Misclassification counts needed before an estimated exponent is trusted.
inline constexpr std::uint64_t kReliableCount = 10;

struct BoundReport {
  int horizon = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::vector<double> d_star;
  double d_star_min = 0.0;
  double upper_bound = 0.0;                 // theorem2_upper
  std::optional<double> lower_bound;        // remark1_lower, needs every J
  std::optional<double> gamma;
  std::optional<double> gamma_stderr;
  std::optional<double> achieved_exponent;  // -(1/N) log gamma
  std::optional<double> exponent_stderr;    // delta method
  std::vector<double> p2_rate;
  bool feasible = false;  // every psi_N(i) <= eps_N
  bool reliable = false;  // exact, or >= kReliableCount misclassifications
};

BoundReport evaluate_bounds(const Model& model, const std::vector<SaddlePoint>& saddles,
                            const RunReport& report, double delta, double epsilon);

// One BoundReport per run report, in the given order (typically increasing N).
std::vector<BoundReport> exponents(const Model& model, const std::vector<SaddlePoint>& saddles,
                                   const std::vector<RunReport>& reports, double delta,
                                   const EpsilonSchedule& epsilon);

// N,gamma,gamma_stderr,achieved_exponent,dstar_min,upper_bound,lower_bound,feasible
std::string bounds_csv_header();
std::string bounds_csv_row(const BoundReport& b);

}  // namespace aht
