#include "aht/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aht {

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
  double d = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (!(p[y] > 0.0) || !(q[y] > 0.0))
      throw std::invalid_argument("kl_divergence: entries must be strictly positive");
    d += p[y] * std::log(p[y] / q[y]);
  }
  return d;
}

KLMatrix kl_matrix(const Model& model, Hypothesis i) {
  if (i >= model.num_hypotheses()) throw std::out_of_range("kl_matrix: hypothesis out of range");
  KLMatrix k;
  k.hypothesis = i;
  k.num_experiments = model.num_experiments();
  for (Hypothesis j = 0; j < model.num_hypotheses(); ++j)
    if (j != i) k.rivals.push_back(j);
  k.entries.reserve(k.num_experiments * k.rivals.size());
  for (Experiment u = 0; u < k.num_experiments; ++u)
    for (Hypothesis j : k.rivals) k.entries.push_back(kl_divergence(model.row(i, u), model.row(j, u)));
  return k;
}

double SaddlePoint::beta_of(Hypothesis j) const {
  for (std::size_t k = 0; k < rivals.size(); ++k)
    if (rivals[k] == j) return beta_star[k];
  return 0.0;
}

namespace {

void certify(const KLMatrix& kl, SaddlePoint& sp) {
  const std::size_t nu = kl.num_experiments;
  const std::size_t nr = kl.num_rivals();
  sp.lower = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nr; ++k) {
    double v = 0.0;
    for (std::size_t u = 0; u < nu; ++u) v += sp.alpha_star[u] * kl.at(u, k);
    sp.lower = std::min(sp.lower, v);
  }
  sp.upper = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < nu; ++u) {
    double v = 0.0;
    for (std::size_t k = 0; k < nr; ++k) v += sp.beta_star[k] * kl.at(u, k);
    sp.upper = std::max(sp.upper, v);
  }
  sp.gap = std::max(0.0, sp.upper - sp.lower);
  sp.d_star = 0.5 * (sp.lower + sp.upper);
}

// Clips roundoff negatives and rescales onto the simplex.
std::vector<double> to_simplex(std::vector<double> w) {
  double s = 0.0;
  for (double& v : w) {
    v = std::max(v, 0.0);
    s += v;
  }
  for (double& v : w) v /= s;
  return w;
}

// Bounded-payoff game via the textbook LP reduction: with K > 0,
//   max 1'y  s.t.  K y <= 1, y >= 0
// has value 1/D*; y/1'y is the rival mix and the constraint duals,
// normalized, are the experiment mix. Dense tableau, Bland's rule.
SaddlePoint simplex_saddle(const KLMatrix& kl, const SaddleOptions& opt) {
  const std::size_t rows = kl.num_experiments;
  const std::size_t nr = kl.num_rivals();
  const std::size_t cols = nr + rows;  // structural + slack
  const std::size_t width = cols + 1;  // + rhs
  std::vector<double> t(rows * width, 0.0);
  std::vector<double> obj(width, 0.0);
  std::vector<std::size_t> basis(rows);

  double scale = 0.0;
  for (double v : kl.entries) scale = std::max(scale, v);
  const double eps = 1e-13 * std::max(1.0, scale);

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < nr; ++k) t[r * width + k] = kl.at(r, k);
    t[r * width + nr + r] = 1.0;
    t[r * width + cols] = 1.0;
    basis[r] = nr + r;
  }
  for (std::size_t k = 0; k < nr; ++k) obj[k] = -1.0;

  std::size_t iter = 0;
  for (;; ++iter) {
    if (iter >= opt.max_iterations)
      throw SolverError("saddle solver: iteration budget exhausted",
                        std::numeric_limits<double>::infinity());
    std::size_t enter = cols;
    for (std::size_t c = 0; c < cols; ++c)
      if (obj[c] < -eps) {
        enter = c;
        break;
      }
    if (enter == cols) break;

    std::size_t leave = rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = t[r * width + enter];
      if (a <= eps) continue;
      const double ratio = t[r * width + cols] / a;
      if (ratio < best - eps || (std::abs(ratio - best) <= eps && leave < rows &&
                                 basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    // Bounded LP: K > 0 and b = 1 keep every column blocked.
    if (leave == rows) throw SolverError("saddle solver: unbounded tableau", 0.0);

    const double piv = t[leave * width + enter];
    for (std::size_t c = 0; c < width; ++c) t[leave * width + c] /= piv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double f = t[r * width + enter];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) t[r * width + c] -= f * t[leave * width + c];
    }
    const double f = obj[enter];
    for (std::size_t c = 0; c < width; ++c) obj[c] -= f * t[leave * width + c];
    basis[leave] = enter;
  }

  std::vector<double> y(nr, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    if (basis[r] < nr) y[basis[r]] = t[r * width + cols];
  std::vector<double> x(rows);
  for (std::size_t r = 0; r < rows; ++r) x[r] = obj[nr + r];

  SaddlePoint sp;
  sp.alpha_star = to_simplex(std::move(x));
  sp.beta_star = to_simplex(std::move(y));
  return sp;
}

}  // namespace

SaddlePoint solve_saddle(const KLMatrix& kl, const SaddleOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_saddle: tol must be > 0");
  const std::size_t nu = kl.num_experiments;
  const std::size_t nr = kl.num_rivals();
  if (nu == 0 || nr == 0) throw std::invalid_argument("solve_saddle: empty game");
  for (double v : kl.entries)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("solve_saddle: payoffs must be positive and finite");

  SaddlePoint sp;
  if (nr == 1) {
    std::size_t best = 0;
    for (std::size_t u = 1; u < nu; ++u)
      if (kl.at(u, 0) > kl.at(best, 0)) best = u;
    sp.alpha_star.assign(nu, 0.0);
    sp.alpha_star[best] = 1.0;
    sp.beta_star = {1.0};
  } else if (nu == 1) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < nr; ++k)
      if (kl.at(0, k) < kl.at(0, best)) best = k;
    sp.alpha_star = {1.0};
    sp.beta_star.assign(nr, 0.0);
    sp.beta_star[best] = 1.0;
  } else {
    sp = simplex_saddle(kl, options);
  }
  sp.hypothesis = kl.hypothesis;
  sp.rivals = kl.rivals;
  certify(kl, sp);
  if (sp.gap > options.tol)
    throw SolverError("saddle solver: duality gap " + std::to_string(sp.gap) +
                          " exceeds tolerance",
                      sp.gap);
  return sp;
}

std::vector<SaddlePoint> solve_all_saddles(const Model& model, const SaddleOptions& options) {
  std::vector<SaddlePoint> out;
  out.reserve(model.num_hypotheses());
  for (Hypothesis i = 0; i < model.num_hypotheses(); ++i)
    out.push_back(solve_saddle(kl_matrix(model, i), options));
  return out;
}

double min_d_star(const std::vector<SaddlePoint>& saddles) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : saddles) m = std::min(m, s.d_star);
  return m;
}

}  // namespace aht
