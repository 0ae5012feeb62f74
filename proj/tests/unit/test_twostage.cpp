#include <cmath>
#include <memory>

#include "doctest.h"
#include "oracles.hpp"
#include "twostage/rounding.hpp"
#include "twostage/twostage.hpp"
#include "twostage/verify.hpp"

using namespace twostage;

namespace {

TwoStageInstance random_small(std::uint64_t seed, WeightMode mode) {
  RandomInstanceSpec spec;
  spec.seed = seed;
  spec.num_offline = 3 + seed % 3;
  spec.num_first_stage = 2;
  spec.num_second_stage = 2;
  spec.edge_density = 0.5;
  spec.weight_mode = mode;
  spec.num_scenarios = 1 + seed % 3;
  return make_random_instance(spec);
}

// Optimum online value by a direct sweep over the number of matched
// first-stage nodes.
double edge_gap_sweep(std::size_t n) {
  const double big = (1.0 + std::sqrt(2.0)) * static_cast<double>(n);
  const double pairs = static_cast<double>(2 * n) * static_cast<double>(2 * n - 1) / 2.0;
  double best = 0.0;
  for (std::size_t m = 0; m <= n; ++m) {
    const double both_gone = static_cast<double>(m) * static_cast<double>(m - (m > 0)) / 2.0;
    best = std::max(best, static_cast<double>(m) + (1.0 - both_gone / pairs) * big);
  }
  return best;
}

// Expected value of the policy averaged over `trials` seeds.
double policy_mean(const Policy& p, std::size_t trials, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) total += p(derive_seed(seed, t));
  return total / static_cast<double>(trials);
}

}  // namespace

TEST_SUITE("twostage") {
  TEST_CASE("zero scale leaves the first stage empty") {
    const auto inst = make_eight_cycle();
    const auto sol = solve_lp_on(inst);
    for (std::size_t s = 0; s < 2; ++s) {
      const auto run = round_augment(inst, sol, 0.0, 5, s);
      CHECK(run.first_stage.empty());
      CHECK(run.second_value == max_weight_matching(scenario_graph(inst, s)).value);
    }
    CHECK_THROWS_AS(round_augment(inst, sol, 0.5, 5, 2), InputError);
    CHECK_THROWS_AS(round_augment(inst, sol, 1.5, 5, 0), InputError);
  }

  TEST_CASE("eight-cycle runs take values 3 or 4") {
    const auto inst = make_eight_cycle();
    FractionalSolution half;
    half.x.assign(4, 0.5);
    half.y.assign(2, std::vector<double>(4, 0.5));
    double total = 0.0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      const auto run = round_augment(inst, half, 1.0, derive_seed(1, t), t % 2);
      CHECK_NOTHROW(check_run(inst, run));
      CHECK((run.value == 3.0 || run.value == 4.0));
      total += run.value;
    }
    CHECK(total / trials >= 3.5 - 4.0 * 0.5 / std::sqrt(double(trials)));
    // Exact expectation over scenarios: each seed gives 4 in one scenario and
    // 3 in the other.
    const auto policy = round_augment_policy(inst, half.x, 1.0);
    CHECK(policy_mean(policy, 200, 3) == doctest::Approx(3.5));
  }

  TEST_CASE("property: every run is node-disjoint") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto inst = random_small(seed, static_cast<WeightMode>(seed % 3));
      const auto sol = solve_lp_on(inst);
      const auto off = solve_lp_off(inst);
      for (std::size_t t = 0; t < 50; ++t) {
        const auto s = t % inst.num_scenarios();
        CHECK_NOTHROW(check_run(inst, round_augment(inst, sol, default_scale(inst.weight_mode), t, s)));
        CHECK_NOTHROW(check_run(inst, offline_round(inst, off, t, s)));
      }
    }
  }

  TEST_CASE("oracle on the eight-cycle") {
    const auto r = brute_force_opt_online(make_eight_cycle());
    REQUIRE(r.exact_value);
    CHECK(*r.exact_value == Rational(7, 2));
    CHECK(r.first_stage.size() == 2);
  }

  TEST_CASE("oracle without a second stage is a max matching") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto inst = random_small(seed, WeightMode::EdgeWeighted);
      for (auto& s : inst.scenarios) s.edges.clear();
      CHECK(brute_force_opt_online(inst).value ==
            doctest::Approx(oracle::brute_matching(first_stage_graph(inst))).epsilon(1e-12));
    }
  }

  TEST_CASE("edge-gap oracle matches the sweep") {
    for (std::size_t n = 1; n <= 4; ++n) {
      const double sweep = edge_gap_sweep(n);
      CHECK(brute_force_opt_online(make_edge_gap_family(n)).value == doctest::Approx(sweep).epsilon(1e-12));
      CHECK(edge_gap_opt_online_closed_form(n) == doctest::Approx(sweep).epsilon(1e-12));
    }
    CHECK_THROWS_AS(brute_force_opt_online(make_edge_gap_family(11)), CapExceeded);
  }

  TEST_CASE("property: policy <= oracle <= relaxation") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const auto inst = random_small(seed, static_cast<WeightMode>(seed % 3));
      const auto lp = solve_lp_on(inst);
      const auto opt = brute_force_opt_online(inst);
      CHECK(opt.value <= lp.objective + 1e-9);
      if (inst.is_rational()) CHECK(*opt.exact_value <= *lp.exact_objective);
      const auto policy = round_augment_policy(inst, lp.x, default_scale(inst.weight_mode));
      for (std::size_t t = 0; t < 50; ++t) CHECK(policy(derive_seed(seed, t)) <= opt.value + 1e-9);
    }
  }

  TEST_CASE("second-stage table agrees with direct evaluation") {
    const auto inst = random_small(7, WeightMode::EdgeWeighted);
    const SecondStageValue value(inst);
    for (std::uint32_t m = 0; m < (1u << inst.num_offline()); ++m) {
      AvailabilityVector a = AvailabilityVector::all(inst.num_offline(), false);
      for (std::size_t i = 0; i < inst.num_offline(); ++i) a.set(i, (m >> i) & 1u);
      double direct = 0.0;
      for (std::size_t s = 0; s < inst.num_scenarios(); ++s) {
        direct += inst.scenarios[s].probability.value * nu(scenario_graph(inst, s), a);
      }
      CHECK(value(a) == doctest::Approx(direct).epsilon(1e-12));
    }
  }

  TEST_CASE("offline rounding") {
    auto inst = make_single_offline_node();
    OfflineFractionalSolution integral;
    integral.x = {1.0};
    integral.y = {{0.0}};
    const auto run = offline_round(inst, integral, 3, 0);
    CHECK(run.first_stage.size() == 1);
    CHECK(run.second_stage.empty());

    OfflineFractionalSolution half;
    half.x = {0.5};
    half.y = {{0.5}};
    const std::size_t trials = 40000;
    const auto stats = offline_round_rates(inst, half, trials, 17);
    CHECK(std::fabs(stats.matched_rate[0] - 0.75) <= 4.0 * std::sqrt(0.75 * 0.25 / trials));
    CHECK(stats.target[0] == doctest::Approx(1.0));

    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto r = random_small(seed, WeightMode::Unweighted);
      const auto sol = solve_lp_off(r);
      const auto st = offline_round_rates(r, sol, 10000, seed);
      for (std::size_t i = 0; i < r.num_offline(); ++i) {
        CHECK(st.matched_rate[i] >= 0.75 * st.target[i] - 4.0 / std::sqrt(10000.0));
      }
    }
  }

  TEST_CASE("sample sizes") {
    CHECK(sample_size_vertex(10, 0.1, 0.05) == 3511);
    const auto k = sample_size_vertex(10, 0.1, 0.05);
    const auto k2 = sample_size_vertex(10, 0.05, 0.05);
    CHECK(k2 <= 4 * k);
    CHECK(k2 + 3 >= 4 * k);
    CHECK(sample_size_edge(10, 0.1, 0.05, 2.0, 2.0) == 3511);
    CHECK(sample_size_edge(10, 0.1, 0.05, 2.0, 1.0) > 3511 * 3);
    CHECK_THROWS_AS(sample_size_vertex(10, 0.0, 0.05), InputError);
    CHECK_THROWS_AS(sample_size_edge(10, 0.1, 0.05, 1.0, 2.0), InputError);
  }

  TEST_CASE("empirical distributions") {
    const auto e = EmpiricalDistribution::from_samples({1, 0, 1, 1});
    CHECK(e.scenario_ids == std::vector<std::size_t>{0, 1});
    CHECK(e.multiplicities == std::vector<std::size_t>{1, 3});
    CHECK(e.k == 4);
    const auto applied = e.apply(make_eight_cycle());
    REQUIRE(applied.num_scenarios() == 2);
    CHECK(*applied.scenarios[1].probability.exact == Rational(3, 4));
    CHECK_THROWS_AS(EmpiricalDistribution::from_samples({}), InputError);
  }

  TEST_CASE("sample-based policy") {
    const auto inst = make_eight_cycle();
    CHECK_THROWS_AS(sample_based_round_augment(inst, scenario_sampler(inst), 0, 1.0, 1), InputError);

    // Feeding the exact support reproduces the full-information policy.
    auto counter = std::make_shared<std::size_t>(0);
    ScenarioSampler alternate = [counter](Rng&) { return (*counter)++ % 2; };
    const auto trained = sample_based_round_augment(inst, alternate, 2, 1.0, 9);
    CHECK(trained.lp.x == solve_lp_on(inst).x);
    const auto full = round_augment_policy(inst, solve_lp_on(inst).x, 1.0);
    const auto learned = trained.evaluate_on(inst);
    for (std::uint64_t s = 0; s < 50; ++s) CHECK(learned(s) == full(s));

    const auto single = make_single_offline_node();
    const auto one = sample_based_round_augment(single, scenario_sampler(single), 3, 1.0, 4);
    CHECK(one.lp.objective == solve_lp_on(single).objective);
  }
}
