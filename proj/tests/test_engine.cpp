#include <doctest.h>

#include <cmath>
#include <random>

#include "aht/bounds.hpp"
#include "aht/engine.hpp"
#include "aht/errors.hpp"
#include "test_support.hpp"

using namespace aht;
using aht::testing::bsc2;
using aht::testing::share;
using aht::testing::tri3;

namespace {

RunConfig exact_config(std::shared_ptr<const Model> m, SelectionStrategy g, InferenceStrategy f,
                       int n) {
  RunConfig c(std::move(m), std::move(g), std::move(f), n);
  c.mode = RunMode::Exact;
  return c;
}

RunConfig mc_config(std::shared_ptr<const Model> m, SelectionStrategy g, InferenceStrategy f, int n,
                    std::uint64_t episodes, std::uint64_t seed) {
  RunConfig c(std::move(m), std::move(g), std::move(f), n);
  c.episodes = episodes;
  c.seed = seed;
  return c;
}

// |estimate - exact| <= 3 sigma, sigma taken from the exact value when the
// estimate's own plug-in error collapses to zero.
bool within_3_sigma(double estimate, double exact, double reported_se, double n) {
  const double se = std::max(reported_se, std::sqrt(exact * (1.0 - exact) / n));
  return std::abs(estimate - exact) <= 3.0 * se + 1e-12;
}

}  // namespace

TEST_CASE("run config validation") {
  const auto m = share(bsc2());
  const auto saddles = solve_all_saddles(*m);
  RunConfig c(m, SelectionStrategy::chernoff(saddles), InferenceStrategy::map_forced(), 0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(run_episode(c, 0, 1), ConfigError);
  c.horizon = 3;
  c.episodes = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.episodes = 1;
  CHECK_NOTHROW(c.validate());

  const auto t = share(tri3());
  // (2 * 2)^12 > 1e7
  auto e = exact_config(t, SelectionStrategy::uniform(2), InferenceStrategy::map_forced(), 12);
  CHECK_THROWS_AS(e.validate(), BudgetError);
  CHECK_THROWS_AS(enumerate_exact(e), BudgetError);
  e.horizon = 11;
  CHECK_NOTHROW(e.validate());
}

TEST_CASE("run_episode is deterministic and pinned") {
  const auto m = share(bsc2());
  const auto saddles = solve_all_saddles(*m);
  RunConfig c(m, SelectionStrategy::openloop(0, saddles), InferenceStrategy::map_forced(), 12);
  const auto a = run_episode(c, 1, 20241016);
  const auto b = run_episode(c, 1, 20241016);
  CHECK(a.trajectory.size() == 12);
  CHECK(a.decision == b.decision);
  CHECK(a.final_belief.log_rho == b.final_belief.log_rho);
  std::string ys;
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    CHECK(a.trajectory[k].u == b.trajectory[k].u);
    CHECK(a.trajectory[k].y == b.trajectory[k].y);
    ys += static_cast<char>('0' + a.trajectory[k].y);
  }
  CHECK(ys == "111111101111");
  CHECK(a.decision == Decision{1});
  CHECK(derive_seed(0, 0, 0) == 2558736989570252433ULL);
  CHECK(derive_seed(1, 2, 3) == 15020427595393229491ULL);
}

TEST_CASE("Monte Carlo degenerate and single-step cases") {
  const auto m = share(bsc2());
  const auto saddles = solve_all_saddles(*m);
  SUBCASE("always abstain") {
    const auto r = monte_carlo(
        mc_config(m, SelectionStrategy::chernoff(saddles), InferenceStrategy::abstain(), 3, 500, 1));
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(*r.psi[i] == 1.0);
      CHECK(*r.phi[i] == 0.0);
    }
    CHECK(*r.gamma == 0.0);
    CHECK(r.misclassified == 0);
  }
  SUBCASE("MAP at N=1 errs with probability 0.1") {
    const auto r = monte_carlo(mc_config(m, SelectionStrategy::chernoff(saddles),
                                         InferenceStrategy::map_forced(), 1, 100000, 7));
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(*r.psi[i] - 0.1) <= 3 * *r.standard_error.psi[i]);
      CHECK(std::abs(*r.phi[i] - 0.1) <= 3 * *r.standard_error.phi[i]);
    }
    CHECK(std::abs(*r.gamma - 0.1) <= 3 * *r.standard_error.gamma);
    CHECK(std::abs(*r.gamma - (*r.phi[0] * 0.5 + *r.phi[1] * 0.5)) <= 1e-12);
  }
  SUBCASE("sampling H from the prior") {
    auto c = mc_config(m, SelectionStrategy::chernoff(saddles), InferenceStrategy::map_forced(), 1,
                       100000, 9);
    c.conditioning = Conditioning::SamplePrior;
    const auto r = monte_carlo(c);
    CHECK(r.episodes == 100000);
    CHECK(std::abs(*r.psi[0] - 0.1) <= 3 * *r.standard_error.psi[0]);
    CHECK(std::abs(*r.gamma - 0.1) <= 3 * *r.standard_error.gamma);
  }
}

TEST_CASE("Monte Carlo is independent of the thread count") {
  const auto m = share(tri3());
  const auto saddles = solve_all_saddles(*m);
  auto c = mc_config(m, SelectionStrategy::chernoff(saddles),
                     InferenceStrategy::f_bar(saddles, default_delta(saddles)), 6, 10000, 3);
  const auto one = monte_carlo(c);
  c.threads = 3;
  const auto three = monte_carlo(c);
  CHECK(one.psi == three.psi);
  CHECK(one.phi == three.phi);
  CHECK(one.gamma == three.gamma);
  CHECK(one.jng == three.jng);
  CHECK(one.standard_error.jng == three.standard_error.jng);
  c.seed = 4;
  CHECK(monte_carlo(c).jng != one.jng);
}

TEST_CASE("exact enumeration examples") {
  const auto m = share(bsc2());
  const auto saddles = solve_all_saddles(*m);
  SUBCASE("f_bar, N=3, delta=0.4") {
    const auto r = enumerate_exact(exact_config(m, SelectionStrategy::chernoff(saddles),
                                                InferenceStrategy::f_bar(saddles, 0.4), 3));
    CHECK(r.paths == 8);
    CHECK(*r.phi[0] == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(*r.psi[0] == doctest::Approx(0.271).epsilon(1e-12));
    CHECK(*r.phi[1] == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(*r.standard_error.psi[0] == 0.0);
    CHECK(*r.gamma == doctest::Approx(0.001).epsilon(1e-12));
  }
  SUBCASE("vacuous p2 threshold always decides") {
    const auto r = enumerate_exact(exact_config(
        m, SelectionStrategy::openloop(0, saddles),
        InferenceStrategy::p2(0, saddles[0], lambda_bound(*m), 2, EpsilonSchedule::half_inverse()),
        1));
    CHECK(*r.phi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*r.psi[0] == doctest::Approx(0.0));
  }
  SUBCASE("confidence rate at N=1") {
    const auto c = exact_config(m, SelectionStrategy::openloop(0, saddles),
                                InferenceStrategy::map_forced(), 1);
    const auto j = estimate_jng(c);
    CHECK(*j[0] == doctest::Approx(0.8 * std::log(9.0)).epsilon(1e-12));
    CHECK(*j[1] == doctest::Approx(0.8 * std::log(9.0)).epsilon(1e-12));
  }
  SUBCASE("path mass is conserved") {
    const auto t = share(tri3());
    std::mt19937_64 rng(1);
    for (int n = 1; n <= 6; ++n) {
      const auto r = enumerate_exact(exact_config(
          t, aht::testing::random_strategy(rng, *t, "r"), InferenceStrategy::map_forced(), n));
      for (double v : r.path_mass) CHECK(std::abs(v - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("Monte Carlo agrees with enumeration at N=4") {
  for (const auto& model : {share(bsc2()), share(tri3())}) {
    const auto saddles = solve_all_saddles(*model);
    const std::uint64_t e = 20000;
    for (const auto& f : {InferenceStrategy::map_forced(),
                          InferenceStrategy::threshold(0, 1.0),
                          InferenceStrategy::f_bar(saddles, default_delta(saddles))}) {
      auto c = mc_config(model, SelectionStrategy::chernoff(saddles), f, 4, e, 11);
      const auto est = monte_carlo(c);
      c.mode = RunMode::Exact;
      const auto ex = enumerate_exact(c);
      const std::size_t m = model->num_hypotheses();
      for (std::size_t i = 0; i < m; ++i) {
        CHECK(within_3_sigma(*est.psi[i], *ex.psi[i], *est.standard_error.psi[i], e));
        CHECK(within_3_sigma(*est.phi[i], *ex.phi[i], *est.standard_error.phi[i], e * (m - 1)));
        CHECK(std::abs(*est.jng[i] - *ex.jng[i]) <= 3 * *est.standard_error.jng[i] + 1e-12);
      }
      CHECK(within_3_sigma(*est.gamma, *ex.gamma, *est.standard_error.gamma, e));
    }
  }
}

TEST_CASE("enumeration identities on random strategies and models") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = share(aht::testing::random_model(rng, 2 + trial % 3, 1 + trial % 2, 2));
    const auto saddles = solve_all_saddles(*m);
    const auto g = aht::testing::random_strategy(rng, *m, "r" + std::to_string(trial));
    const std::size_t nh = m->num_hypotheses();
    const double b = lambda_bound(*m);
    for (int n = 1; n <= 5; ++n) {
      // confidence rate bound
      const auto ex = enumerate_exact(exact_config(m, g, InferenceStrategy::map_forced(), n));
      for (Hypothesis i = 0; i < nh; ++i)
        CHECK(*ex.jng[i] <= confidence_rate_bound(*m, saddles[i], n) + 1e-9);

      // threshold rule error bound and the Chernoff-Stein direction
      for (double theta : {0.5, 1.0, 2.0})
        for (Hypothesis i = 0; i < nh; ++i) {
          const auto r = enumerate_exact(exact_config(m, g, InferenceStrategy::threshold(i, theta), n));
          CHECK(*r.phi[i] <= std::exp(-theta));
          const double eps = *r.psi[i];
          if (eps < 1.0 && *r.phi[i] > 0.0)
            CHECK(-std::log(*r.phi[i]) / n <= chernoff_stein_rate_bound(*r.jng[i], b, n, eps) + 1e-9);
        }

      // E_i[sum lambda_j^i] = E_i[sum D(p_i || p_j)]
      std::vector<double> lhs(nh * nh, 0.0), rhs(nh * nh, 0.0);
      enumerate_paths(*m, g, n, kDefaultEnumerationBudget, [&](const PathVisit& v) {
        for (Hypothesis i = 0; i < nh; ++i)
          for (Hypothesis j = 0; j < nh; ++j) {
            if (i == j) continue;
            double l = 0.0, d = 0.0;
            for (const auto& s : v.trajectory) {
              l += log_likelihood_ratio(*m, i, j, s.u, s.y);
              d += kl_divergence(m->row(i, s.u), m->row(j, s.u));
            }
            lhs[i * nh + j] += v.probability[i] * l;
            rhs[i * nh + j] += v.probability[i] * d;
          }
      });
      for (std::size_t k = 0; k < lhs.size(); ++k) CHECK(std::abs(lhs[k] - rhs[k]) <= 1e-9);
    }
  }
}
