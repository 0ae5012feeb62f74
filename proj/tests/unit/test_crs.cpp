#include <cmath>

#include "doctest.h"
#include "twostage/crs.hpp"

using namespace twostage;

namespace {

const double c = kEdgeScale;

// Pr[i selected] recomputed from the rule list, independent of
// CrsScheme::marginals.
std::vector<double> replay_marginals(const CrsScheme& s, const ActiveSetDistribution& dist) {
  std::vector<double> out(s.n, 0.0);
  for (const auto& [active, pa] : dist.atoms()) {
    for (std::size_t r = 0; r < s.rules.size(); ++r) {
      for (auto i : s.rules[r].order) {
        if (!((active >> i) & 1u) || ((s.rules[r].abstain >> i) & 1u)) continue;
        out[i] += pa * s.weights[r] * s.thinning[i];
        break;
      }
    }
  }
  return out;
}

std::vector<double> random_y(Rng& rng, std::size_t n) {
  std::vector<double> y(n);
  double total = 0.0;
  for (auto& v : y) total += (v = rng.uniform());
  const double budget = rng.uniform(0.2, 1.0);
  for (auto& v : y) v *= budget / total;
  return y;
}

}  // namespace

TEST_SUITE("crs") {
  TEST_CASE("single element is pure thinning") {
    const auto dist = ActiveSetDistribution::independent({1.0});
    const auto s = build_star_crs({1.0}, dist);
    CHECK(s.marginals(dist)[0] == doctest::Approx(c).epsilon(1e-12));
    CHECK(s.thinning[0] == doctest::Approx(c).epsilon(1e-12));
  }

  TEST_CASE("symmetric examples") {
    const auto d2 = ActiveSetDistribution::independent({1.0 - c / 2.0, 1.0 - c / 2.0});
    const auto s2 = build_star_crs({0.5, 0.5}, d2);
    for (double m : s2.marginals(d2)) CHECK(std::fabs(m - c / 2.0) <= 1e-9);
    CHECK(s2.is_monotone());

    const double q = 1.0 - 2.0 * c / 3.0;
    const auto d3 = ActiveSetDistribution::independent({q, q, q});
    const auto s3 = build_star_crs({1.0 / 3, 1.0 / 3, 1.0 / 3}, d3);
    for (double m : s3.marginals(d3)) CHECK(std::fabs(m - c / 3.0) <= 1e-9);
    CHECK(s3.is_monotone());
  }

  TEST_CASE("precondition failure names a witness") {
    const auto dist = ActiveSetDistribution::independent({0.1, 0.9});
    try {
      build_star_crs({0.5, 0.5}, dist);
      FAIL("expected CrsInfeasible");
    } catch (const CrsInfeasible& e) {
      CHECK(e.witness != 0);
      CHECK(dist.probability_any(e.witness) < c * ((e.witness & 1u ? 0.5 : 0.0) + (e.witness & 2u ? 0.5 : 0.0)));
    }
  }

  TEST_CASE("property: random feasible schemes are exact and monotone") {
    Rng rng(515);
    int built = 0;
    for (int t = 0; t < 120 && built < 40; ++t) {
      const std::size_t n = 1 + rng.below(6);
      const auto y = random_y(rng, n);
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = std::min(1.0, y[i] + rng.uniform(0.0, 1.0));
      const auto dist = ActiveSetDistribution::independent(p);
      CrsScheme s;
      try {
        s = build_star_crs(y, dist);
      } catch (const CrsInfeasible&) {
        continue;
      }
      ++built;
      double weight_sum = 0.0;
      for (double w : s.weights) weight_sum += w;
      CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-9));
      const auto replay = replay_marginals(s, dist);
      const auto lib = s.marginals(dist);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::fabs(replay[i] - c * y[i]) <= 1e-9);
        CHECK(std::fabs(lib[i] - replay[i]) <= 1e-12);
      }
      if (n <= 5) CHECK(s.is_monotone());
    }
    CHECK(built >= 20);
  }

  TEST_CASE("column generation beyond eight elements") {
    const std::size_t n = 10;
    const std::vector<double> y(n, 0.1);
    const auto dist = ActiveSetDistribution::independent(std::vector<double>(n, 0.5));
    const auto s = build_star_crs(y, dist);
    for (double m : replay_marginals(s, dist)) CHECK(std::fabs(m - c * 0.1) <= 1e-9);
  }

  TEST_CASE("property: the star feasibility inequality") {
    Rng rng(8);
    for (int t = 0; t < 2000; ++t) {
      const std::size_t k = 1 + rng.below(8);
      const auto y = random_y(rng, k);
      double sum = 0.0, prod = 1.0;
      for (double v : y) {
        sum += v;
        prod *= 1.0 - v;
      }
      CHECK(c * sum + std::pow(c, static_cast<double>(k)) * prod <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("h values") {
    CHECK(star_bound_h(1) == doctest::Approx(c).epsilon(1e-15));
    CHECK(std::fabs(star_bound_h(2) - 1.0) <= 1e-12);
    CHECK(std::fabs(star_bound_h(3) - 0.996) <= 1e-3);
    for (std::size_t m = 3; m < 200; ++m) CHECK(star_bound_h(m + 1) <= star_bound_h(m));
    for (std::size_t m = 1; m <= 200; ++m) CHECK(star_bound_h(m) <= 1.0 + 1e-12);
  }

  TEST_CASE("sampling a scheme") {
    const auto d2 = ActiveSetDistribution::independent({1.0 - c / 2.0, 1.0 - c / 2.0});
    const auto s = build_star_crs({0.5, 0.5}, d2);
    CHECK_FALSE(crs_select(s, 0, 1));

    CrsScheme trivial{1, {PriorityRule{{0}, 0}}, {1.0}, {1.0}};
    CHECK(crs_select(trivial, 1, 1) == std::optional<std::size_t>(0));

    const std::size_t trials = 100000;
    std::vector<double> hits(2, 0.0);
    Rng rng(61);
    for (std::size_t t = 0; t < trials; ++t) {
      Mask active = 0;
      for (std::size_t i = 0; i < 2; ++i) active |= rng.bernoulli(1.0 - c / 2.0) ? (1u << i) : 0u;
      if (const auto pick = crs_select(s, active, rng)) {
        REQUIRE(((active >> *pick) & 1u));
        hits[*pick] += 1.0;
      }
    }
    for (double h : hits) CHECK(std::fabs(h / trials - c / 2.0) <= 4.0 / std::sqrt(double(trials)));
  }

  TEST_CASE("lambda-bounded schemes") {
    const std::vector<Mask> one_uniform{0b00, 0b01, 0b10};
    const ActiveSetDistribution both(2, {{0b11, 1.0}});
    CHECK(check_lambda_crs(one_uniform, both, {0.0, 0.0}).exists);
    const auto no = check_lambda_crs(one_uniform, both, {0.6, 0.6});
    CHECK_FALSE(no.exists);
    REQUIRE(no.counterexample.size() == 2);
    CHECK(no.counterexample[0] == doctest::Approx(1.0));
    CHECK(no.counterexample[1] == doctest::Approx(1.0));
    CHECK(no.violation > 0.0);

    CHECK_THROWS_AS(check_lambda_crs({0b11}, both, {0.1, 0.1}), std::invalid_argument);

    // Star: one left centre, three right leaves.
    WeightedBipartiteGraph star;
    star.num_left = 1;
    star.num_right = 3;
    for (std::size_t v = 0; v < 3; ++v) star.add_edge(0, v);
    const auto family = transversal_family(star);
    CHECK(family.size() == 4);
    const std::vector<double> x{0.2, 0.3, 0.5};
    const auto dist = ActiveSetDistribution::independent(x);
    std::vector<double> lambda(3);
    for (std::size_t i = 0; i < 3; ++i) lambda[i] = x[i] * (1.0 + x[i]) / 2.0;
    const auto yes = check_lambda_crs(family, dist, lambda);
    REQUIRE(yes.exists);
    REQUIRE(yes.scheme);
    // Replay the selection probabilities over every active set.
    std::vector<double> incl(3, 0.0);
    for (std::size_t a = 0; a < yes.scheme->active_sets.size(); ++a) {
      double pa = 0.0;
      for (const auto& [mask, p] : dist.atoms()) {
        if (mask == yes.scheme->active_sets[a]) pa += p;
      }
      for (const auto& [set, prob] : yes.scheme->choices[a]) {
        CHECK((set & ~yes.scheme->active_sets[a]) == 0u);
        for (std::size_t i = 0; i < 3; ++i) {
          if ((set >> i) & 1u) incl[i] += pa * prob;
        }
      }
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(incl[i] >= lambda[i] - 1e-9);
  }
}
