#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "twostage/lp.hpp"
#include "twostage/verify.hpp"

using namespace twostage;

namespace {

// E[nu] over independent node availabilities on both sides, by direct
// enumeration with the brute-force matcher.
double enumerate_lhs(const WeightedBipartiteGraph& g, const std::vector<double>& p) {
  const std::size_t nv = g.num_left + g.num_right;
  double total = 0.0;
  for (std::uint32_t m = 0; m < (1u << nv); ++m) {
    double pr = 1.0;
    for (std::size_t v = 0; v < nv; ++v) pr *= ((m >> v) & 1u) ? p[v] : 1.0 - p[v];
    if (pr == 0.0) continue;
    WeightedBipartiteGraph sub;
    sub.num_left = g.num_left;
    sub.num_right = g.num_right;
    for (const auto& e : g.edges) {
      if (((m >> e.left) & 1u) && ((m >> (g.num_left + e.right)) & 1u)) sub.add_edge(e.left, e.right, 1.0);
    }
    total += pr * oracle::brute_matching(sub);
  }
  return total;
}

WeightedBipartiteGraph single_edge() {
  WeightedBipartiteGraph g;
  g.num_left = g.num_right = 1;
  g.add_edge(0, 0);
  return g;
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("single edge is tight") {
    const auto r = check_vertex_bound_independent(single_edge(), {0.5}, {0.5, 0.5});
    CHECK(r.lhs == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.rhs == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.pass);
    CHECK(r.evidence == Evidence::Exact);
  }

  TEST_CASE("deterministic availabilities") {
    const auto inst = make_eight_cycle();
    const auto g = first_stage_graph(inst);
    const std::vector<double> x(4, 0.5);
    const auto r = check_vertex_bound_independent(g, x, std::vector<double>(6, 1.0));
    CHECK(r.lhs == 2.0);
    CHECK(r.rhs == doctest::Approx(2.0));
    CHECK(r.pass);
  }

  TEST_CASE("precondition names the node") {
    try {
      check_vertex_bound_independent(single_edge(), {0.8}, {0.5, 1.0});
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find(single_edge().left_label(0)) != std::string::npos);
    }
  }

  TEST_CASE("weighted single node") {
    WeightedBipartiteGraph g;
    g.num_left = 1;
    g.num_right = 1;
    g.add_edge(0, 0);
    const auto r = check_vertex_weighted_bound(g, {0.5}, {0.5}, {5.0});
    CHECK(r.rhs == doctest::Approx(1.875));
    CHECK(r.lhs == doctest::Approx(2.5));
    CHECK(r.pass);
  }

  TEST_CASE("property: exhaustive lhs agrees with an independent enumeration") {
    Rng rng(1234);
    for (int t = 0; t < 40; ++t) {
      const auto c = random_tree_case(rng, 8);
      const auto r = check_vertex_bound_independent(c.graph, c.x, c.p);
      CHECK(r.lhs == doctest::Approx(enumerate_lhs(c.graph, c.p)).epsilon(1e-12));
      CHECK(r.pass);
    }
  }

  TEST_CASE("exhaustive lhs is consistent with Monte Carlo") {
    Rng rng(77);
    const auto c = random_tree_case(rng, 10);
    const auto r = check_vertex_bound_independent(c.graph, c.x, c.p);
    const std::size_t nv = c.graph.num_left + c.graph.num_right;
    std::vector<double> samples;
    Rng draw(5);
    for (int t = 0; t < 20000; ++t) {
      WeightedBipartiteGraph sub;
      sub.num_left = c.graph.num_left;
      sub.num_right = c.graph.num_right;
      std::vector<bool> up(nv);
      for (std::size_t v = 0; v < nv; ++v) up[v] = draw.bernoulli(c.p[v]);
      for (const auto& e : c.graph.edges) {
        if (up[e.left] && up[c.graph.num_left + e.right]) sub.add_edge(e.left, e.right, 1.0);
      }
      samples.push_back(max_weight_matching(sub).value);
    }
    const auto s = summarize(samples);
    CHECK(std::fabs(s.mean - r.lhs) <= 4.0 * s.stddev / std::sqrt(double(samples.size())) + 1e-12);
  }

  TEST_CASE("batteries pass") {
    for (const auto& r : vertex_bound_battery(3, 200)) CHECK_MESSAGE(r.pass, r.csv_row());
    for (const auto& r : vertex_weighted_battery(3, 200)) CHECK_MESSAGE(r.pass, r.csv_row());
  }

  TEST_CASE("edge-weighted bound") {
    const auto inst = make_edge_gap_family(2);
    const auto lp = solve_lp_on(inst);
    const auto sampler = first_stage_availability_sampler(inst, lp.x, kEdgeScale);
    const auto g2 = scenario_graph(inst, 0);
    const auto r = check_edge_weighted_bound(g2, lp.y[0], sampler, 20000, 4, kEdgeScale, "edge-gap-2/s0");
    CHECK(r.evidence == Evidence::Statistical);
    CHECK(r.pass);

    const AvailabilitySampler all_up = [&](Rng&) { return AvailabilityVector::all(g2.num_right, true); };
    const auto d = check_edge_weighted_bound(g2, lp.y[0], all_up, 100, 1);
    CHECK(d.lhs == doctest::Approx(max_weight_matching(g2).value));
    CHECK(d.pass);

    const AvailabilitySampler all_down = [&](Rng&) { return AvailabilityVector::all(g2.num_right, false); };
    CHECK_THROWS_AS(check_edge_weighted_bound(g2, lp.y[0], all_down, 1000, 1), InputError);
  }

  TEST_CASE("negative dependence testers") {
    const std::size_t n = 4;
    const AvailabilitySampler independent = [](Rng& rng) {
      AvailabilityVector a = AvailabilityVector::all(4, false);
      for (std::size_t i = 0; i < 4; ++i) a.set(i, rng.bernoulli(0.5));
      return a;
    };
    const auto ind = test_negative_dependence(independent, n, 50000, 1);
    CHECK(ind.pass());
    CHECK(std::fabs(ind.max_covariance()) <= ind.margin);

    const AvailabilitySampler exactly_one = [](Rng& rng) {
      AvailabilityVector a = AvailabilityVector::all(4, false);
      a.set(rng.below(4), true);
      return a;
    };
    const auto one = test_negative_dependence(exactly_one, n, 50000, 2);
    CHECK(one.pass());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        CHECK(one.covariance[i][j] < 0.0);
        CHECK(std::fabs(one.covariance[i][j] + 1.0 / 16.0) <= one.margin);
      }
    }

    const auto inst = make_eight_cycle();
    const auto cyc = test_negative_dependence(first_stage_availability_sampler(inst, solve_lp_on(inst).x, 1.0), 4,
                                              50000, 3);
    CHECK(cyc.pass());
    CHECK(cyc.ncd.size() >= 11);
  }

  TEST_CASE("ratio estimates") {
    const auto inst = make_single_offline_node();
    const Policy constant = [](std::uint64_t) { return 1.0; };
    const auto r = estimate_ratio(inst, constant, 100, 1);
    CHECK(r.summary.stddev == 0.0);
    CHECK(r.summary.ci_lower == r.summary.mean);
    CHECK(r.ratio_lp == 1.0);
    CHECK_THROWS_AS(estimate_ratio(inst, constant, 99, 1), InputError);

    const auto cycle = make_eight_cycle();
    const auto est = estimate_ratio(cycle, round_augment_policy(cycle, solve_lp_on(cycle).x, 1.0), 1000, 2);
    CHECK(est.ratio_lp >= 0.875 - 1e-12);
    REQUIRE(est.ratio_opt);
    CHECK(*est.ratio_opt <= 1.0 + 1e-12);
  }

  TEST_CASE("coupled policies keep their order") {
    const auto inst = make_edge_gap_family(2);
    const auto base = round_augment_policy(inst, solve_lp_on(inst).x, kEdgeScale);
    const Policy worse = [base](std::uint64_t s) { return std::max(0.0, base(s) - 0.5); };
    const auto a = run_monte_carlo(base, 2000, 6);
    const auto b = run_monte_carlo(worse, 2000, 6);
    CHECK(a.mean >= b.mean);
  }

  TEST_CASE("parallel evaluation is bit-identical") {
    const auto inst = make_edge_gap_family(3);
    const auto policy = round_augment_policy(inst, solve_lp_on(inst).x, kEdgeScale);
    const auto serial = run_monte_carlo(policy, 3000, 42, 1);
    const auto threaded = run_monte_carlo(policy, 3000, 42, 3);
    CHECK(serial.mean == threaded.mean);
    CHECK(serial.stddev == threaded.stddev);
  }

  TEST_CASE("report serialisation") {
    const auto r = check_vertex_bound_independent(single_edge(), {0.5}, {0.5, 0.5}, "edge");
    CHECK(BoundReport::csv_header().find("verdict") != std::string::npos);
    CHECK(r.csv_row().find("pass") != std::string::npos);
    CHECK(r.to_json().find("\"evidence\"") != std::string::npos);
  }
}
