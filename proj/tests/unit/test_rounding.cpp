#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "twostage/lp.hpp"
#include "twostage/rounding.hpp"

using namespace twostage;

namespace {

std::size_t integral_count(const std::vector<double>& v) {
  std::size_t n = 0;
  for (double x : v) n += (x == 0.0 || x == 1.0);
  return n;
}

// Random fractional matching on a random graph, scaled to be feasible.
std::pair<WeightedBipartiteGraph, std::vector<double>> random_case(Rng& rng, std::size_t side, std::size_t edges) {
  auto g = oracle::random_graph(rng, side, edges);
  std::vector<double> x(g.edges.size());
  std::vector<double> load_l(g.num_left), load_r(g.num_right);
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = rng.uniform();
    load_l[g.edges[k].left] += x[k];
    load_r[g.edges[k].right] += x[k];
  }
  double scale = 1.0;
  for (double l : load_l) scale = std::max(scale, l);
  for (double l : load_r) scale = std::max(scale, l);
  for (auto& v : x) v /= scale;
  return {g, x};
}

void check_marginals(const WeightedBipartiteGraph& g, const std::vector<double>& x, std::size_t trials,
                     std::uint64_t seed) {
  std::vector<double> hits(x.size(), 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto r = dependent_round(g, x, derive_seed(seed, t));
    REQUIRE(is_matching(g, r.matching));
    for (auto k : r.matching.edges) hits[k] += 1.0;
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double sd = std::sqrt(x[k] * (1.0 - x[k]) / static_cast<double>(trials));
    CHECK(std::fabs(hits[k] / trials - x[k]) <= 4.0 * sd + 1e-12);
  }
}

}  // namespace

TEST_SUITE("rounding") {
  TEST_CASE("integral input is returned unchanged") {
    const auto inst = make_eight_cycle();
    const auto g = first_stage_graph(inst);
    const auto r = dependent_round(g, {1.0, 0.0, 0.0, 1.0}, 9, true);
    CHECK(r.matching.edges == std::vector<std::size_t>{0, 3});
    REQUIRE(r.transcript);
    CHECK(r.transcript->steps.empty());
  }

  TEST_CASE("two-edge path picks exactly one edge, each half the time") {
    WeightedBipartiteGraph g;
    g.num_left = 2;
    g.num_right = 1;
    g.add_edge(0, 0);
    g.add_edge(1, 0);
    int first = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
      const auto r = dependent_round(g, {0.5, 0.5}, derive_seed(3, t), true);
      REQUIRE(r.matching.size() == 1);
      first += r.matching.contains(0);
      REQUIRE(r.transcript->steps.size() == 1);
      CHECK(r.transcript->steps[0].alpha == 0.5);
      CHECK(r.transcript->steps[0].beta == 0.5);
    }
    CHECK(std::fabs(first / double(trials) - 0.5) <= 4.0 * std::sqrt(0.25 / trials));
  }

  TEST_CASE("eight-cycle first stage") {
    const auto inst = make_eight_cycle();
    const auto g = first_stage_graph(inst);
    const std::vector<double> half(4, 0.5);
    std::vector<double> avail(4, 0.0);
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
      const auto m = dependent_round(g, half, derive_seed(8, t)).matching;
      REQUIRE(m.size() == 2);  // both online nodes always matched
      const auto a = availabilities_after(inst, m);
      REQUIRE(a.count() == 2);
      for (std::size_t i = 0; i < 4; ++i) avail[i] += a[i];
    }
    for (double v : avail) CHECK(std::fabs(v / trials - 0.5) <= 4.0 * std::sqrt(0.25 / trials));
  }

  TEST_CASE("availabilities after extreme matchings") {
    const auto inst = make_eight_cycle();
    CHECK(availabilities_after(inst, Matching{}).count() == 4);
    auto four = inst;
    four.first_stage_ids = {"a1", "a2", "a3", "a4"};
    four.first_stage_edges = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK(availabilities_after(four, Matching{{0, 1, 2, 3}}).count() == 0);
  }

  TEST_CASE("transcript steps follow the alpha/beta rule") {
    Rng rng(404);
    for (int t = 0; t < 80; ++t) {
      auto [g, x] = random_case(rng, 5, 12);
      const auto r = dependent_round(g, x, derive_seed(404, t), true);
      REQUIRE(r.transcript);
      std::vector<double> before = x;
      for (auto& v : before) {
        if (v < 1e-12) v = 0.0;
        if (v > 1.0 - 1e-12) v = 1.0;
      }
      for (const auto& step : r.transcript->steps) {
        double alpha = 1.0, beta = 1.0;
        for (auto k : step.m1) {
          alpha = std::min(alpha, 1.0 - before[k]);
          beta = std::min(beta, before[k]);
        }
        for (auto k : step.m2) {
          alpha = std::min(alpha, before[k]);
          beta = std::min(beta, 1.0 - before[k]);
        }
        CHECK(step.alpha == doctest::Approx(alpha).epsilon(1e-12));
        CHECK(step.beta == doctest::Approx(beta).epsilon(1e-12));
        CHECK(step.m1.size() + step.m2.size() == step.edges.size());
        const double delta = step.took_alpha ? step.alpha : -step.beta;
        for (auto k : step.m1) CHECK(step.after[k] == doctest::Approx(before[k] + delta).epsilon(1e-9));
        for (auto k : step.m2) CHECK(step.after[k] == doctest::Approx(before[k] - delta).epsilon(1e-9));
        CHECK(integral_count(step.after) > integral_count(before));
        CHECK_FALSE(validate_fractional_matching(g, step.after));
        before = step.after;
      }
      CHECK(integral_count(before) == before.size());
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(r.matching.contains(k) == (before[k] == 1.0));
      CHECK(transcript_to_json(g, *r.transcript).find("steps") != std::string::npos);
    }
  }

  TEST_CASE("property: marginals preserved") {
    Rng rng(99);
    for (int t = 0; t < 6; ++t) {
      auto [g, x] = random_case(rng, 4, 10);
      check_marginals(g, x, 20000, derive_seed(99, t));
    }
  }

  TEST_CASE("scaled rounding has marginals c * x") {
    const auto inst = make_edge_gap_family(3);
    const auto sol = solve_lp_on(inst);
    std::vector<double> cx(sol.x.size());
    for (std::size_t k = 0; k < cx.size(); ++k) cx[k] = kEdgeScale * sol.x[k];
    check_marginals(first_stage_graph(inst), cx, 20000, 12);
  }

  TEST_CASE("same seed, same result") {
    Rng rng(1);
    auto [g, x] = random_case(rng, 5, 12);
    CHECK(dependent_round(g, x, 55).matching == dependent_round(g, x, 55).matching);
  }

  TEST_CASE("infeasible input is rejected") {
    WeightedBipartiteGraph g;
    g.num_left = 1;
    g.num_right = 2;
    g.add_edge(0, 0);
    g.add_edge(0, 1);
    CHECK_THROWS_AS(dependent_round(g, {0.7, 0.7}, 1), std::invalid_argument);
    CHECK_THROWS_AS(dependent_round(g, {0.5}, 1), std::invalid_argument);
  }
}
