#include "aht/bounds.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "aht/belief.hpp"
#include "aht/format.hpp"

namespace aht {

double theorem2_upper(const Model& model, const std::vector<SaddlePoint>& saddles, int horizon,
                      double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("theorem2_upper: delta must be > 0");
  double v = 0.0;
  for (Hypothesis i = 0; i < model.num_hypotheses(); ++i)
    v += (1.0 - model.prior()[i]) * std::exp(-horizon * (saddles.at(i).d_star - delta));
  return v;
}

double remark1_lower(const Model& model, std::span<const double> jng, int horizon,
                     double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("remark1_lower: epsilon must lie in (0, 1)");
  if (jng.size() != model.num_hypotheses())
    throw std::invalid_argument("remark1_lower: one J value per hypothesis required");
  const double b = strict_lambda_bound(model);
  const double n = horizon;
  double v = 0.0;
  for (Hypothesis i = 0; i < model.num_hypotheses(); ++i)
    v += (1.0 - model.prior()[i]) *
         std::exp(-n * jng[i] - n * 2.0 * b * epsilon / (1.0 - epsilon) + std::log1p(-epsilon));
  return v;
}

double p2_achievable_rate(double d_star, double bound_b, std::size_t num_hypotheses, int horizon,
                          double epsilon) {
  return d_star -
         2.0 * bound_b * std::sqrt(std::log(static_cast<double>(num_hypotheses) / epsilon) / horizon);
}

double chernoff_stein_rate_bound(double jng, double bound_b, int horizon, double epsilon) {
  return jng + 2.0 * bound_b * epsilon / (1.0 - epsilon) - std::log1p(-epsilon) / horizon;
}

double confidence_rate_bound(const Model& model, const SaddlePoint& saddle, int horizon) {
  const Hypothesis i = saddle.hypothesis;
  const double rest = 1.0 - model.prior()[i];
  double s = 0.0;
  for (std::size_t k = 0; k < saddle.rivals.size(); ++k)
    s += saddle.beta_star[k] * std::log(model.prior()[saddle.rivals[k]] / rest);
  return saddle.d_star - s / horizon;
}

BoundReport evaluate_bounds(const Model& model, const std::vector<SaddlePoint>& saddles,
                            const RunReport& report, double delta, double epsilon) {
  BoundReport b;
  const int n = report.horizon;
  b.horizon = n;
  b.delta = delta;
  b.epsilon = epsilon;
  for (const auto& s : saddles) b.d_star.push_back(s.d_star);
  b.d_star_min = min_d_star(saddles);
  b.upper_bound = theorem2_upper(model, saddles, n, delta);
  for (const auto& s : saddles)
    b.p2_rate.push_back(
        p2_achievable_rate(s.d_star, lambda_bound(model), model.num_hypotheses(), n, epsilon));

  std::vector<double> j;
  for (const auto& v : report.jng)
    if (v) j.push_back(*v);
  if (j.size() == model.num_hypotheses()) b.lower_bound = remark1_lower(model, j, n, epsilon);

  b.feasible = !report.psi.empty();
  for (const auto& p : report.psi) b.feasible = b.feasible && p && *p <= epsilon;

  b.gamma = report.gamma;
  b.gamma_stderr = report.standard_error.gamma;
  if (report.gamma && *report.gamma > 0.0) {
    b.achieved_exponent = -std::log(*report.gamma) / n;
    if (report.standard_error.gamma)
      b.exponent_stderr = *report.standard_error.gamma / (*report.gamma * n);
  }
  b.reliable = report.mode == RunMode::Exact ? report.gamma.has_value()
                                             : report.misclassified >= kReliableCount;
  return b;
}

std::vector<BoundReport> exponents(const Model& model, const std::vector<SaddlePoint>& saddles,
                                   const std::vector<RunReport>& reports, double delta,
                                   const EpsilonSchedule& epsilon) {
  std::vector<BoundReport> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports)
    rows.push_back(evaluate_bounds(model, saddles, r, delta, epsilon.value(r.horizon)));
  return rows;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  return format_real(*v);
}

}  // namespace

std::string bounds_csv_header() {
  return "N,gamma,gamma_stderr,achieved_exponent,dstar_min,upper_bound,lower_bound,feasible";
}

std::string bounds_csv_row(const BoundReport& b) {
  std::ostringstream os;
  os << b.horizon << ',' << cell(b.gamma) << ',' << cell(b.gamma_stderr) << ','
     << cell(b.achieved_exponent) << ',' << cell(b.d_star_min) << ',' << cell(b.upper_bound)
     << ',' << cell(b.lower_bound) << ',' << (b.feasible ? 1 : 0);
  return os.str();
}

}  // namespace aht
