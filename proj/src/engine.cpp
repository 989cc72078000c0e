#include "aht/engine.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "aht/errors.hpp"

namespace aht {

namespace {

constexpr std::uint64_t kChunk = 4096;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse-CDF draw; falls back to the last positive entry on roundoff.
std::size_t sample_index(std::span<const double> dist, std::mt19937_64& rng) {
  const double r = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (dist[k] <= 0.0) continue;
    acc += dist[k];
    last = k;
    if (r < acc) return k;
  }
  return last;
}

double enumeration_size(const Model& model, int horizon) {
  return std::pow(static_cast<double>(model.num_experiments() * model.num_observations()),
                  horizon);
}

struct Scratch {
  Belief belief;
  std::vector<double> dist;
};

// One episode; records the trajectory only when `traj` is non-null.
Decision simulate(const RunConfig& cfg, const Belief& prior, Hypothesis true_h,
                  std::mt19937_64& rng, Scratch& s, Trajectory* traj) {
  const Model& model = *cfg.model;
  s.belief = prior;
  s.dist.assign(model.num_experiments(), 0.0);
  for (int n = 0; n < cfg.horizon; ++n) {
    cfg.selection.distribution(model, s.belief, n, cfg.horizon, s.dist);
    const Experiment u = sample_index(s.dist, rng);
    const Observation y = sample_index(model.row(true_h, u), rng);
    update_belief_in_place(model, s.belief, u, y);
    if (traj) traj->push_back({u, y});
  }
  return cfg.inference.decide(model, prior, s.belief, cfg.horizon);
}

// Per-chunk tallies; merged in chunk order so totals do not depend on the
// number of worker threads.
struct Tally {
  std::vector<std::uint64_t> n;        // episodes per true hypothesis
  std::vector<std::uint64_t> decided;  // [true][decision], decision M = inconclusive
  std::vector<double> inc_sum;         // sum of own-hypothesis increments
  std::vector<double> inc_sq;

  explicit Tally(std::size_t m)
      : n(m, 0), decided(m * (m + 1), 0), inc_sum(m, 0.0), inc_sq(m, 0.0) {}

  void merge(const Tally& o) {
    for (std::size_t k = 0; k < n.size(); ++k) {
      n[k] += o.n[k];
      inc_sum[k] += o.inc_sum[k];
      inc_sq[k] += o.inc_sq[k];
    }
    for (std::size_t k = 0; k < decided.size(); ++k) decided[k] += o.decided[k];
  }
};

template <class Fn>
void parallel_for(std::size_t tasks, unsigned threads, Fn&& fn) {
  if (threads <= 1 || tasks <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < tasks; t = next++) fn(t);
    });
}

std::optional<double> binomial_se(double p, double n) {
  if (!(n > 0.0)) return std::nullopt;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

// Fills psi / phi / gamma from the decision distribution under each H.
// q[j][d] = P(decision d | H = j), rows of length M + 1; `n` holds the
// per-hypothesis sample size for standard errors (0 for exact reports).
void assemble_errors(RunReport& r, const std::vector<std::vector<double>>& q,
                     const std::vector<double>& n, bool exact) {
  const std::size_t m = r.prior.size();
  r.psi.assign(m, std::nullopt);
  r.phi.assign(m, std::nullopt);
  r.standard_error.psi.assign(m, std::nullopt);
  r.standard_error.phi.assign(m, std::nullopt);
  bool gamma_defined = true;
  double gamma = 0.0, gamma_var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (exact || n[i] > 0) {
      double miss = 0.0;
      for (std::size_t d = 0; d <= m; ++d)
        if (d != i) miss += q[i][d];
      r.psi[i] = miss;
      r.standard_error.psi[i] = exact ? std::optional<double>(0.0) : binomial_se(*r.psi[i], n[i]);
    }
    double phi = 0.0, var = 0.0;
    bool defined = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      if (!exact && n[j] == 0) {
        defined = false;
        break;
      }
      const double w = r.prior[j] / (1.0 - r.prior[i]);
      phi += w * q[j][i];
      if (!exact) var += w * w * q[j][i] * (1.0 - q[j][i]) / n[j];
    }
    if (defined) {
      r.phi[i] = phi;
      r.standard_error.phi[i] = exact ? 0.0 : std::sqrt(var);
      gamma += phi * (1.0 - r.prior[i]);
    } else {
      gamma_defined = false;
    }
  }
  if (!gamma_defined) return;
  if (!exact) {
    // Misclassification under H = j is one event across decisions.
    for (std::size_t j = 0; j < m; ++j) {
      double wrong = 0.0;
      for (std::size_t d = 0; d < m; ++d)
        if (d != j) wrong += q[j][d];
      gamma_var += r.prior[j] * r.prior[j] * wrong * (1.0 - wrong) / n[j];
    }
  }
  r.gamma = gamma;
  r.standard_error.gamma = exact ? 0.0 : std::sqrt(gamma_var);
}

RunReport base_report(const RunConfig& cfg) {
  RunReport r;
  r.mode = cfg.mode;
  r.horizon = cfg.horizon;
  r.selection = cfg.selection.name();
  r.inference = cfg.inference.name();
  r.prior = cfg.model->prior();
  r.seed = cfg.seed;
  return r;
}

}  // namespace

void RunConfig::validate() const {
  if (!model) throw ConfigError("run config has no model");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (mode == RunMode::MonteCarlo && episodes < 1) throw ConfigError("episodes must be >= 1");
  if (mode == RunMode::Exact && enumeration_size(*model, horizon) > static_cast<double>(node_budget))
    throw BudgetError("enumeration of " + std::to_string(horizon) +
                      "-step paths exceeds node budget " + std::to_string(node_budget));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

EpisodeResult run_episode(const RunConfig& config, Hypothesis true_h, std::uint64_t episode_seed) {
  if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (true_h >= config.model->num_hypotheses())
    throw std::out_of_range("run_episode: hypothesis out of range");
  std::mt19937_64 rng(episode_seed);
  const Belief prior = Belief::prior_of(*config.model);
  Scratch s;
  EpisodeResult out;
  out.trajectory.reserve(static_cast<std::size_t>(config.horizon));
  out.decision = simulate(config, prior, true_h, rng, s, &out.trajectory);
  out.final_belief = std::move(s.belief);
  return out;
}

RunReport monte_carlo(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.mode = RunMode::MonteCarlo;
  cfg.validate();
  const Model& model = *cfg.model;
  const std::size_t m = model.num_hypotheses();
  const Belief prior = Belief::prior_of(model);
  std::vector<double> prior_c(m);
  for (Hypothesis h = 0; h < m; ++h) prior_c[h] = bllr(prior, h);

  const std::uint64_t chunks_per_stream = (cfg.episodes + kChunk - 1) / kChunk;
  const bool per_h = cfg.conditioning == Conditioning::PerHypothesis;
  const std::size_t streams = per_h ? m : 1;
  const std::size_t tasks = streams * chunks_per_stream;
  std::vector<Tally> tallies(tasks, Tally(m));

  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t stream = task / chunks_per_stream;
    const std::uint64_t first = (task % chunks_per_stream) * kChunk;
    const std::uint64_t last = std::min(cfg.episodes, first + kChunk);
    Tally& t = tallies[task];
    Scratch s;
    for (std::uint64_t e = first; e < last; ++e) {
      std::mt19937_64 rng(derive_seed(cfg.seed, per_h ? stream : m, e));
      Hypothesis h = stream;
      if (!per_h) h = sample_index(model.prior(), rng);
      const Decision d = simulate(cfg, prior, h, rng, s, nullptr);
      ++t.n[h];
      ++t.decided[h * (m + 1) + (d ? *d : m)];
      const double inc = (bllr(s.belief, h) - prior_c[h]) / cfg.horizon;
      t.inc_sum[h] += inc;
      t.inc_sq[h] += inc * inc;
    }
  });

  Tally total(m);
  for (const Tally& t : tallies) total.merge(t);

  RunReport r = base_report(cfg);
  r.episodes = cfg.episodes;
  std::vector<std::vector<double>> q(m, std::vector<double>(m + 1, 0.0));
  std::vector<double> n(m);
  for (std::size_t j = 0; j < m; ++j) {
    n[j] = static_cast<double>(total.n[j]);
    for (std::size_t d = 0; d <= m; ++d) {
      const auto c = total.decided[j * (m + 1) + d];
      if (total.n[j] > 0) q[j][d] = static_cast<double>(c) / n[j];
      if (d < m && d != j) r.misclassified += c;
    }
  }

  if (per_h) {
    assemble_errors(r, q, n, false);
  } else {
    // Empirical conditioning on {H != i} pools the other hypotheses' episodes.
    r.psi.assign(m, std::nullopt);
    r.phi.assign(m, std::nullopt);
    r.standard_error.psi.assign(m, std::nullopt);
    r.standard_error.phi.assign(m, std::nullopt);
    bool all_phi = true;
    double gamma = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (total.n[i] > 0) {
        double miss = 0.0;
        for (std::size_t d = 0; d <= m; ++d)
          if (d != i) miss += q[i][d];
        r.psi[i] = miss;
        r.standard_error.psi[i] = binomial_se(*r.psi[i], n[i]);
      }
      double others = 0.0, hits = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != i) {
          others += n[j];
          hits += static_cast<double>(total.decided[j * (m + 1) + i]);
        }
      if (others > 0) {
        r.phi[i] = hits / others;
        r.standard_error.phi[i] = binomial_se(*r.phi[i], others);
        gamma += *r.phi[i] * (1.0 - r.prior[i]);
      } else {
        all_phi = false;
      }
    }
    if (all_phi) {
      r.gamma = gamma;
      double var = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        var += std::pow((1.0 - r.prior[i]) * r.standard_error.phi[i].value_or(0.0), 2);
      r.standard_error.gamma = std::sqrt(var);
    }
  }

  r.jng.assign(m, std::nullopt);
  r.standard_error.jng.assign(m, std::nullopt);
  for (std::size_t h = 0; h < m; ++h) {
    if (total.n[h] == 0) continue;
    const double mean = total.inc_sum[h] / n[h];
    const double var = std::max(0.0, total.inc_sq[h] / n[h] - mean * mean);
    r.jng[h] = mean;
    r.standard_error.jng[h] = std::sqrt(var / n[h]);
  }
  return r;
}

std::uint64_t enumerate_paths(const Model& model, const SelectionStrategy& selection, int horizon,
                              std::uint64_t node_budget,
                              const std::function<void(const PathVisit&)>& visit) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (enumeration_size(model, horizon) > static_cast<double>(node_budget))
    throw BudgetError("enumeration of " + std::to_string(horizon) +
                      "-step paths exceeds node budget " + std::to_string(node_budget));
  const std::size_t m = model.num_hypotheses();
  const std::size_t nu = model.num_experiments();
  const std::size_t ny = model.num_observations();
  const auto depth = static_cast<std::size_t>(horizon);

  std::vector<Belief> beliefs(depth + 1);
  beliefs[0] = Belief::prior_of(model);
  std::vector<std::vector<double>> weights(depth + 1, std::vector<double>(m, 1.0));
  std::vector<std::vector<double>> dists(depth, std::vector<double>(nu, 0.0));
  Trajectory traj(depth);
  std::uint64_t leaves = 0;

  std::function<void(std::size_t)> descend = [&](std::size_t n) {
    if (n == depth) {
      ++leaves;
      visit(PathVisit{traj, weights[n], beliefs[n]});
      return;
    }
    selection.distribution(model, beliefs[n], static_cast<int>(n), horizon, dists[n]);
    for (Experiment u = 0; u < nu; ++u) {
      const double a = dists[n][u];
      if (!(a > 0.0)) continue;
      for (Observation y = 0; y < ny; ++y) {
        for (std::size_t h = 0; h < m; ++h) weights[n + 1][h] = weights[n][h] * a * model.p(h, u, y);
        beliefs[n + 1] = beliefs[n];
        update_belief_in_place(model, beliefs[n + 1], u, y);
        traj[n] = {u, y};
        descend(n + 1);
      }
    }
  };
  descend(0);
  return leaves;
}

RunReport enumerate_exact(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.mode = RunMode::Exact;
  cfg.validate();
  const Model& model = *cfg.model;
  const std::size_t m = model.num_hypotheses();
  const Belief prior = Belief::prior_of(model);
  std::vector<double> prior_c(m);
  for (Hypothesis h = 0; h < m; ++h) prior_c[h] = bllr(prior, h);

  std::vector<std::vector<double>> q(m, std::vector<double>(m + 1, 0.0));
  std::vector<double> mass(m, 0.0), jsum(m, 0.0);
  const auto leaves =
      enumerate_paths(model, cfg.selection, cfg.horizon, cfg.node_budget, [&](const PathVisit& v) {
        const Decision d = cfg.inference.decide(model, prior, v.final_belief, cfg.horizon);
        for (std::size_t h = 0; h < m; ++h) {
          const double p = v.probability[h];
          mass[h] += p;
          q[h][d ? *d : m] += p;
          jsum[h] += p * (bllr(v.final_belief, h) - prior_c[h]);
        }
      });

  for (std::size_t h = 0; h < m; ++h)
    if (std::abs(mass[h] - 1.0) > 1e-9)
      throw std::logic_error("enumeration lost probability mass under hypothesis " +
                             std::to_string(h));

  RunReport r = base_report(cfg);
  r.paths = leaves;
  r.path_mass = mass;
  assemble_errors(r, q, std::vector<double>(m, 0.0), true);
  r.jng.resize(m);
  r.standard_error.jng.assign(m, 0.0);
  for (std::size_t h = 0; h < m; ++h) r.jng[h] = jsum[h] / cfg.horizon;
  return r;
}

RunReport run(const RunConfig& config) {
  return config.mode == RunMode::Exact ? enumerate_exact(config) : monte_carlo(config);
}

std::vector<std::optional<double>> estimate_jng(const RunConfig& config) { return run(config).jng; }

}  // namespace aht
