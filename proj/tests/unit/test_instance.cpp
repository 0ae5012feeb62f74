#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "doctest.h"
#include "twostage/instance.hpp"

using namespace twostage;

namespace {

std::string message_of(const std::string& text) {
  try {
    read_instance_json(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

const char* kTwoNodes = R"({
  "format_version": 1,
  "weight_mode": "unweighted",
  "offline_nodes": [{"id": "i1"}, {"id": "i2"}],
  "first_stage": {"nodes": ["a"], "edges": [{"from": "a", "to": "i1"}]},
  "scenarios": [
    {"probability": 0.5, "nodes": ["b"], "edges": [{"from": "b", "to": "i2"}]},
    {"probability": %P%, "nodes": ["b"], "edges": [{"from": "%FROM%", "to": "i1"}]}
  ]
})";

std::string fill(std::string text, const std::string& p, const std::string& from) {
  text.replace(text.find("%P%"), 3, p);
  text.replace(text.find("%FROM%"), 6, from);
  return text;
}

}  // namespace

TEST_SUITE("instance") {
  TEST_CASE("eight-cycle shape") {
    const auto inst = make_eight_cycle();
    CHECK(inst.num_offline() == 4);
    CHECK(inst.num_first_stage() == 2);
    REQUIRE(inst.num_scenarios() == 2);
    for (const auto& s : inst.scenarios) {
      REQUIRE(s.probability.exact);
      CHECK(*s.probability.exact == Rational(1, 2));
      CHECK(s.edges.size() == 4);
    }
    // Each offline node has degree one per stage, so every scenario closes a
    // single cycle through all eight nodes.
    for (std::size_t t = 0; t < 2; ++t) {
      std::vector<int> deg(4, 0);
      for (const auto& e : inst.first_stage_edges) ++deg[e.offline];
      for (const auto& e : inst.scenarios[t].edges) ++deg[e.offline];
      for (int d : deg) CHECK(d == 2);
    }
  }

  TEST_CASE("edge-gap family structure") {
    CHECK_THROWS_AS(make_edge_gap_family(0), InputError);
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto inst = make_edge_gap_family(n);
      CHECK(inst.num_offline() == 2 * n);
      CHECK(inst.num_first_stage() == n);
      CHECK(inst.num_scenarios() == n * (2 * n - 1));
      std::vector<int> first_deg(2 * n, 0);
      for (const auto& e : inst.first_stage_edges) {
        ++first_deg[e.offline];
        CHECK(inst.effective_weight(e) == 1.0);
      }
      for (int d : first_deg) CHECK(d == 1);
      std::set<std::pair<std::size_t, std::size_t>> pairs;
      for (const auto& s : inst.scenarios) {
        REQUIRE(s.edges.size() == 2);
        CHECK(s.node_ids.size() == 1);
        for (const auto& e : s.edges) {
          CHECK(inst.effective_weight(e) == doctest::Approx((1.0 + std::sqrt(2.0)) * n).epsilon(1e-15));
        }
        auto a = s.edges[0].offline, b = s.edges[1].offline;
        CHECK(a != b);
        pairs.insert({std::min(a, b), std::max(a, b)});
        CHECK(s.probability.value == doctest::Approx(1.0 / inst.num_scenarios()).epsilon(1e-15));
      }
      CHECK(pairs.size() == inst.num_scenarios());
    }
  }

  TEST_CASE("random instances are deterministic and valid") {
    RandomInstanceSpec spec;
    spec.seed = 1;
    spec.num_offline = 4;
    spec.num_first_stage = 2;
    spec.edge_density = 0.5;
    spec.num_scenarios = 3;
    CHECK(make_random_instance(spec) == make_random_instance(spec));
    auto other = spec;
    other.seed = 2;
    CHECK_FALSE(make_random_instance(spec) == make_random_instance(other));

    spec.edge_density = 1.0;
    const auto full = make_random_instance(spec);
    CHECK(full.first_stage_edges.size() == spec.num_offline * spec.num_first_stage);
    for (const auto& s : full.scenarios) CHECK(s.edges.size() == spec.num_offline * s.node_ids.size());

    auto bad = spec;
    bad.edge_density = 0.0;
    CHECK_THROWS_AS(make_random_instance(bad), InputError);
    bad = spec;
    bad.num_scenarios = 0;
    CHECK_THROWS_AS(make_random_instance(bad), InputError);
  }

  TEST_CASE("property: generated instances satisfy the invariants") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      Rng rng(derive_seed(seed, 11));
      RandomInstanceSpec spec;
      spec.seed = seed;
      spec.num_offline = 1 + rng.below(6);
      spec.num_first_stage = 1 + rng.below(4);
      spec.num_second_stage = 1 + rng.below(4);
      spec.edge_density = 0.1 + 0.9 * rng.uniform();
      spec.weight_mode = static_cast<WeightMode>(rng.below(3));
      spec.num_scenarios = 1 + rng.below(4);
      const auto inst = make_random_instance(spec);
      CHECK_NOTHROW(inst.validate());
      double total = 0.0;
      for (const auto& s : inst.scenarios) total += s.probability.value;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      for (const auto& e : inst.first_stage_edges) {
        const double w = inst.effective_weight(e);
        CHECK(w >= 0.0);
        CHECK(w <= 1.0);
        if (inst.weight_mode == WeightMode::Unweighted) CHECK(w == 1.0);
      }
    }
  }

  TEST_CASE("json round trip") {
    for (const auto& inst : {make_eight_cycle(), make_edge_gap_family(2), make_single_offline_node()}) {
      CHECK(read_instance_json(write_instance_json(inst)) == inst);
    }
    RandomInstanceSpec spec;
    spec.weight_mode = WeightMode::VertexWeighted;
    const auto weighted = make_random_instance(spec);
    const auto path = std::filesystem::temp_directory_path() / "twostage_roundtrip.json";
    write_instance(weighted, path);
    CHECK(read_instance(path) == weighted);
    std::filesystem::remove(path);
  }

  TEST_CASE("invariant violations are named") {
    CHECK(message_of(fill(kTwoNodes, "0.5", "b")).empty());
    const auto sum = message_of(fill(kTwoNodes, "0.4", "b"));
    CHECK(sum.find("scenarios") != std::string::npos);
    CHECK(sum.find("0.9") != std::string::npos);
    const auto undeclared = message_of(fill(kTwoNodes, "0.5", "zz"));
    CHECK(undeclared.find("scenarios[1].edges[0]") != std::string::npos);
    CHECK(undeclared.find("zz") != std::string::npos);
    CHECK(message_of("{ not json").find("line 1") != std::string::npos);
    CHECK_THROWS_AS(read_instance("/nonexistent/instance.json"), InputError);
  }

  TEST_CASE("exact fractions in the file format") {
    std::string text = fill(kTwoNodes, "0.5", "b");
    const auto inst = read_instance_json(text);
    REQUIRE(inst.scenarios[0].probability.exact);
    CHECK(*inst.scenarios[0].probability.exact == Rational(1, 2));
    CHECK(inst.is_rational());
    CHECK_FALSE(make_edge_gap_family(2).is_rational());
  }

  TEST_CASE("availability vectors") {
    const auto inst = make_eight_cycle();
    const auto a = AvailabilityVector::from_map(inst, {{"i1", 1}, {"i2", 0}, {"i3", 1}, {"i4", 0}});
    CHECK(a.count() == 2);
    CHECK(a.to_map(inst).at("i2") == 0);
    CHECK_THROWS_AS(AvailabilityVector::from_map(inst, {{"i1", 1}}), InputError);
    CHECK_THROWS_AS(AvailabilityVector::from_map(inst, {{"i1", 1}, {"i2", 0}, {"i3", 1}, {"i9", 0}}), InputError);
  }
}
