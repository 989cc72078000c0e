#include <doctest.h>

#include <cmath>
#include <random>

#include "aht/divergence.hpp"
#include "test_support.hpp"

using namespace aht;
using aht::testing::bsc2;
using aht::testing::tri3;

namespace {

KLMatrix make_game(std::size_t nu, std::vector<double> entries) {
  KLMatrix k;
  k.num_experiments = nu;
  const std::size_t nr = entries.size() / nu;
  for (std::size_t j = 0; j < nr; ++j) k.rivals.push_back(j + 1);
  k.entries = std::move(entries);
  return k;
}

// max over the 2-simplex of alpha at step h, min over columns.
double grid_value_3(const KLMatrix& k, double h) {
  double best = -1.0;
  const int n = static_cast<int>(std::lround(1.0 / h));
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b) {
      const double w[3] = {a * h, b * h, 1.0 - (a + b) * h};
      double worst = 1e300;
      for (std::size_t j = 0; j < k.num_rivals(); ++j) {
        double v = 0.0;
        for (std::size_t u = 0; u < 3; ++u) v += w[u] * k.at(u, j);
        worst = std::min(worst, v);
      }
      best = std::max(best, worst);
    }
  return best;
}

void check_certificate(const KLMatrix& k, const SaddlePoint& s, double tol) {
  double asum = 0.0, bsum = 0.0;
  for (double v : s.alpha_star) {
    CHECK(v >= 0.0);
    asum += v;
  }
  for (double v : s.beta_star) {
    CHECK(v >= 0.0);
    bsum += v;
  }
  CHECK(std::abs(asum - 1.0) <= 1e-12);
  CHECK(std::abs(bsum - 1.0) <= 1e-12);
  double lower = 1e300, upper = -1e300;
  for (std::size_t j = 0; j < k.num_rivals(); ++j) {
    double v = 0.0;
    for (std::size_t u = 0; u < k.num_experiments; ++u) v += s.alpha_star[u] * k.at(u, j);
    lower = std::min(lower, v);
  }
  for (std::size_t u = 0; u < k.num_experiments; ++u) {
    double v = 0.0;
    for (std::size_t j = 0; j < k.num_rivals(); ++j) v += s.beta_star[j] * k.at(u, j);
    upper = std::max(upper, v);
  }
  CHECK(lower <= s.d_star + 1e-15);
  CHECK(s.d_star <= upper + 1e-15);
  CHECK(s.d_star - lower <= tol);
  CHECK(upper - s.d_star <= tol);
  CHECK(s.gap <= tol);
}

}  // namespace

TEST_CASE("kl_divergence") {
  CHECK(kl_divergence(std::vector{0.5, 0.5}, std::vector{0.5, 0.5}) == 0.0);
  CHECK(kl_divergence(std::vector{0.9, 0.1}, std::vector{0.1, 0.9}) ==
        doctest::Approx(0.8 * std::log(9.0)).epsilon(1e-12));
  CHECK(kl_divergence(std::vector{0.9, 0.1}, std::vector{0.1, 0.9}) ==
        doctest::Approx(1.7577779).epsilon(1e-6));
  // 0.8 ln(8/7) + 0.2 ln(2/3)
  CHECK(kl_divergence(std::vector{0.8, 0.2}, std::vector{0.7, 0.3}) ==
        doctest::Approx(0.025732092477985).epsilon(1e-12));
  CHECK_THROWS_AS(kl_divergence(std::vector{1.0, 0.0}, std::vector{0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(kl_divergence(std::vector{0.5, 0.5}, std::vector{1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("kl_matrix") {
  const KLMatrix b = kl_matrix(bsc2(), 0);
  REQUIRE(b.entries.size() == 1);
  CHECK(b.at(0, 0) == doctest::Approx(1.7577779).epsilon(1e-6));

  const KLMatrix t = kl_matrix(tri3(), 0);
  CHECK(t.rivals == std::vector<Hypothesis>{1, 2});
  const double big = 0.6 * std::log(4.0);
  const double small = 0.8 * std::log(8.0 / 7.0) + 0.2 * std::log(2.0 / 3.0);
  CHECK(t.at(0, 0) == doctest::Approx(big).epsilon(1e-12));
  CHECK(t.at(0, 1) == doctest::Approx(small).epsilon(1e-12));
  CHECK(t.at(1, 0) == doctest::Approx(small).epsilon(1e-12));
  CHECK(t.at(1, 1) == doctest::Approx(big).epsilon(1e-12));

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = aht::testing::random_model(rng, 3, 2, 3);
    for (Hypothesis i = 0; i < 3; ++i)
      for (double v : kl_matrix(m, i).entries) {
        CHECK(v > 0.0);
        CHECK(v <= lambda_bound(m));
      }
  }
}

TEST_CASE("solve_saddle degenerate cases") {
  SUBCASE("single rival: best experiment, lowest index on ties") {
    const KLMatrix k = make_game(3, {0.2, 0.5, 0.5});
    const SaddlePoint s = solve_saddle(k);
    CHECK(s.d_star == 0.5);
    CHECK(s.alpha_star == std::vector{0.0, 1.0, 0.0});
    CHECK(s.beta_star == std::vector{1.0});
    CHECK(s.gap == 0.0);
  }
  SUBCASE("BSC2") {
    const SaddlePoint s = solve_saddle(kl_matrix(bsc2(), 0));
    CHECK(std::abs(s.d_star - 0.8 * std::log(9.0)) <= 1e-12);
    CHECK(s.alpha_star == std::vector{1.0});
  }
  SUBCASE("single experiment, several rivals: weakest rival") {
    const KLMatrix k = make_game(1, {0.7, 0.3, 0.3, 0.9});
    const SaddlePoint s = solve_saddle(k);
    CHECK(s.d_star == 0.3);
    CHECK(s.alpha_star == std::vector{1.0});
    CHECK(s.beta_star == std::vector{0.0, 1.0, 0.0, 0.0});
  }
  CHECK_THROWS_AS(solve_saddle(make_game(1, {0.3}), {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_saddle(make_game(2, {0.3, 0.0, 0.1, 0.2})), std::invalid_argument);
}

TEST_CASE("solve_saddle on TRI3 matches the grid-search oracle") {
  const KLMatrix k = kl_matrix(tri3(), 0);
  double alpha_grid = 0.0;
  const double grid = aht::testing::oracle_grid_saddle_2(k, 1e-5, &alpha_grid);
  const SaddlePoint s = solve_saddle(k);
  CHECK(std::abs(s.d_star - grid) <= 1e-6);
  CHECK(s.d_star == doctest::Approx(0.42875435457496).epsilon(1e-12));
  CHECK(s.alpha_star[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.beta_star[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(alpha_grid == doctest::Approx(0.5).epsilon(1e-4));
  check_certificate(k, s, 1e-6);
}

TEST_CASE("solve_saddle properties on random games") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pay(0.01, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nu = 1 + trial % 6;
    const std::size_t nr = 1 + (trial / 6) % 5;
    std::vector<double> e(nu * nr);
    for (double& v : e) v = pay(rng);
    const KLMatrix k = make_game(nu, e);
    const SaddlePoint s = solve_saddle(k);
    check_certificate(k, s, 1e-6);

    // positive homogeneity
    const double c = 0.1 + trial * 0.05;
    auto scaled = e;
    for (double& v : scaled) v *= c;
    CHECK(std::abs(solve_saddle(make_game(nu, scaled)).d_star - c * s.d_star) <= 1e-6);
  }
}

TEST_CASE("solve_saddle cross-validates against a 2-simplex grid on 3x3 games") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pay(0.05, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> e(9);
    for (double& v : e) v = pay(rng);
    const KLMatrix k = make_game(3, e);
    CHECK(std::abs(solve_saddle(k).d_star - grid_value_3(k, 1e-3)) <= 5e-3);
  }
}

TEST_CASE("D* lies in (0, B] for valid models") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Model m = aht::testing::random_model(rng, 2 + trial % 5, 1 + trial % 4, 2 + trial % 3);
    for (const auto& s : solve_all_saddles(m)) {
      CHECK(s.d_star > 0.0);
      CHECK(s.d_star <= lambda_bound(m));
    }
  }
}
