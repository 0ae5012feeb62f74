#include "twostage/twostage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "twostage/rounding.hpp"

namespace twostage {

namespace {

constexpr std::size_t kTabulateOffline = 12;
constexpr std::size_t kTabulateBudget = std::size_t{1} << 22;

std::uint64_t mask_of(const AvailabilityVector& a) {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]) m |= std::uint64_t{1} << i;
  }
  return m;
}

AvailabilityVector from_mask(std::uint64_t m, std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (m >> i) & 1u;
  return AvailabilityVector(std::move(v));
}

std::vector<double> scaled(const std::vector<double>& x, double c) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = c * x[k];
  return out;
}

void check_scale(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw InputError("scale c must lie in [0, 1]");
}

void check_scenario(const TwoStageInstance& inst, std::size_t scenario) {
  if (scenario >= inst.num_scenarios()) {
    throw InputError("unknown scenario " + std::to_string(scenario) + " (instance has " +
                     std::to_string(inst.num_scenarios()) + ")");
  }
}

}  // namespace

double default_scale(WeightMode mode) { return mode == WeightMode::EdgeWeighted ? kEdgeScale : 1.0; }

void check_run(const TwoStageInstance& inst, const TwoStageRun& run) {
  const auto g1 = first_stage_graph(inst);
  const auto g2 = scenario_graph(inst, run.scenario);
  if (!is_matching(g1, run.first_stage)) throw std::logic_error("first-stage edges do not form a matching");
  if (!is_matching(g2, run.second_stage)) throw std::logic_error("second-stage edges do not form a matching");
  const auto avail = availabilities_after(inst, run.first_stage);
  for (auto k : run.second_stage.edges) {
    if (!avail[g2.edges[k].right]) {
      throw std::logic_error("second stage uses offline node '" + inst.offline_ids[g2.edges[k].right] +
                             "' matched in the first stage");
    }
  }
}

SecondStageValue::SecondStageValue(const TwoStageInstance& instance) {
  for (std::size_t t = 0; t < instance.num_scenarios(); ++t) {
    graphs_.push_back(scenario_graph(instance, t));
    probabilities_.push_back(instance.scenarios[t].probability.value);
  }
  const std::size_t n = instance.num_offline();
  if (n <= kTabulateOffline && (std::size_t{1} << n) * std::max<std::size_t>(1, graphs_.size()) <= kTabulateBudget) {
    table_.assign(std::size_t{1} << n, 0.0);
    for (std::uint64_t m = 0; m < table_.size(); ++m) {
      const auto a = from_mask(m, n);
      double total = 0.0;
      for (std::size_t t = 0; t < graphs_.size(); ++t) {
        total += probabilities_[t] * nu(graphs_[t], a);
      }
      table_[m] = total;
    }
  }
}

double SecondStageValue::operator()(const AvailabilityVector& available) const {
  if (!table_.empty()) return table_[mask_of(available)];
  double total = 0.0;
  for (std::size_t t = 0; t < graphs_.size(); ++t) {
    total += probabilities_[t] * nu(graphs_[t], available);
  }
  return total;
}

TwoStageRun round_augment(const TwoStageInstance& inst, const FractionalSolution& solution, double c,
                          std::uint64_t seed, std::size_t scenario) {
  check_scale(c);
  check_scenario(inst, scenario);
  if (auto err = lp_on_violation(inst, solution)) throw InfeasibleSolution(*err);
  const auto g1 = first_stage_graph(inst);
  Rng rng(seed);
  TwoStageRun run;
  run.seed = seed;
  run.scenario = scenario;
  run.first_stage = dependent_round(g1, scaled(solution.x, c), rng).matching;
  run.first_value = matching_value(g1, run.first_stage);
  const auto avail = availabilities_after(inst, run.first_stage);
  const auto g2 = scenario_graph(inst, scenario);
  const auto second = max_weight_matching(induced_on_right(g2, avail));
  // Induced graphs keep a filtered edge list; map back to scenario indices.
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < g2.edges.size(); ++k) {
    if (avail[g2.edges[k].right]) kept.push_back(k);
  }
  for (auto k : second.matching.edges) run.second_stage.edges.push_back(kept[k]);
  run.second_value = second.value;
  run.value = run.first_value + run.second_value;
  check_run(inst, run);
  return run;
}

Policy round_augment_policy(const TwoStageInstance& instance, const std::vector<double>& x, double c) {
  check_scale(c);
  auto inst = std::make_shared<const TwoStageInstance>(instance);
  auto graph = std::make_shared<const WeightedBipartiteGraph>(first_stage_graph(*inst));
  if (auto err = validate_fractional_matching(*graph, x)) throw InfeasibleSolution(*err);
  auto second = std::make_shared<const SecondStageValue>(*inst);
  auto cx = std::make_shared<const std::vector<double>>(scaled(x, c));
  return [inst, graph, second, cx](std::uint64_t seed) {
    Rng rng(seed);
    const auto m1 = dependent_round(*graph, *cx, rng).matching;
    return matching_value(*graph, m1) + (*second)(availabilities_after(*inst, m1));
  };
}

OracleResult brute_force_opt_online(const TwoStageInstance& inst) {
  inst.validate();
  if (inst.first_stage_edges.size() > kOracleEdgeCap) {
    throw CapExceeded("oracle cap exceeded: first stage has " + std::to_string(inst.first_stage_edges.size()) +
                      " edges (limit " + std::to_string(kOracleEdgeCap) + ")");
  }
  if (inst.num_offline() > 64) throw CapExceeded("oracle cap exceeded: more than 64 offline nodes");
  const bool exact = inst.is_rational();
  const auto g1 = first_stage_graph(inst);
  std::vector<WeightedBipartiteGraph> g2;
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) g2.push_back(scenario_graph(inst, t));

  struct Value {
    double d = 0.0;
    Rational q;
  };
  std::unordered_map<std::uint64_t, Value> cache;
  auto second_stage = [&](std::uint64_t mask) -> const Value& {
    auto it = cache.find(mask);
    if (it != cache.end()) return it->second;
    const auto avail = from_mask(mask, inst.num_offline());
    Value v;
    for (std::size_t t = 0; t < g2.size(); ++t) {
      if (exact) {
        v.q += *inst.scenarios[t].probability.exact * nu_exact(g2[t], avail);
      } else {
        v.d += inst.scenarios[t].probability.value * nu(g2[t], avail);
      }
    }
    if (exact) v.d = to_double(v.q);
    return cache.emplace(mask, v).first->second;
  };

  OracleResult best;
  bool have_best = false;
  Rational best_exact;
  std::vector<bool> left_used(g1.num_left, false), right_used(g1.num_right, false);
  std::vector<std::size_t> chosen;
  const std::uint64_t all_mask =
      inst.num_offline() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << inst.num_offline()) - 1;

  std::function<void(std::size_t, std::uint64_t, double, Rational)> dfs = [&](std::size_t k, std::uint64_t mask,
                                                                              double first, Rational first_q) {
    if (k == g1.edges.size()) {
      ++best.matchings_enumerated;
      const auto& second = second_stage(mask);
      bool better;
      Rational total_q;
      double total = first + second.d;
      if (exact) {
        total_q = first_q + second.q;
        better = !have_best || total_q > best_exact;
      } else {
        better = !have_best || total > best.value + 1e-12;
      }
      if (better) {
        have_best = true;
        best.value = exact ? to_double(total_q) : total;
        best_exact = total_q;
        best.first_stage.edges = chosen;
      }
      return;
    }
    dfs(k + 1, mask, first, first_q);
    const auto& e = g1.edges[k];
    if (left_used[e.left] || right_used[e.right]) return;
    left_used[e.left] = right_used[e.right] = true;
    chosen.push_back(k);
    const auto& w = g1.weight_of(k);
    dfs(k + 1, mask & ~(std::uint64_t{1} << e.right), first + w.value,
        exact ? Rational(first_q + *w.exact) : first_q);
    chosen.pop_back();
    left_used[e.left] = right_used[e.right] = false;
  };
  dfs(0, all_mask, 0.0, Rational(0));
  if (exact) best.exact_value = best_exact;
  return best;
}

TwoStageRun offline_round(const TwoStageInstance& inst, const OfflineFractionalSolution& solution,
                          std::uint64_t seed, std::size_t scenario) {
  check_scenario(inst, scenario);
  if (auto err = lp_off_violation(inst, solution)) throw InfeasibleSolution(*err);
  const auto g1 = first_stage_graph(inst);
  const auto g2 = scenario_graph(inst, scenario);
  Rng rng(seed);
  TwoStageRun run;
  run.seed = seed;
  run.scenario = scenario;
  run.first_stage = dependent_round(g1, solution.x, rng).matching;
  const auto raw = dependent_round(g2, solution.y[scenario], rng).matching;
  const auto avail = availabilities_after(inst, run.first_stage);
  for (auto k : raw.edges) {
    if (avail[g2.edges[k].right]) run.second_stage.edges.push_back(k);
  }
  run.first_value = matching_value(g1, run.first_stage);
  run.second_value = matching_value(g2, run.second_stage);
  run.value = run.first_value + run.second_value;
  check_run(inst, run);
  return run;
}

OfflineRoundStats offline_round_rates(const TwoStageInstance& inst, const OfflineFractionalSolution& solution,
                                      std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw InputError("offline rounding needs at least one trial");
  if (auto err = lp_off_violation(inst, solution)) throw InfeasibleSolution(*err);
  const std::size_t n = inst.num_offline();
  const auto g1 = first_stage_graph(inst);
  std::vector<WeightedBipartiteGraph> g2;
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) g2.push_back(scenario_graph(inst, t));

  OfflineRoundStats stats;
  stats.trials = trials;
  stats.matched_rate.assign(n, 0.0);
  stats.target.assign(n, 0.0);
  for (std::size_t k = 0; k < solution.x.size(); ++k) stats.target[inst.first_stage_edges[k].offline] += solution.x[k];
  for (std::size_t t = 0; t < g2.size(); ++t) {
    const double p = inst.scenarios[t].probability.value;
    for (std::size_t k = 0; k < solution.y[t].size(); ++k) {
      stats.target[inst.scenarios[t].edges[k].offline] += p * solution.y[t][k];
    }
  }

  double value_sum = 0.0;
  std::vector<double> hit(n);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, trial));
    const auto m1 = dependent_round(g1, solution.x, rng).matching;
    const auto avail = availabilities_after(inst, m1);
    double value = matching_value(g1, m1);
    for (std::size_t i = 0; i < n; ++i) hit[i] = avail[i] ? 0.0 : 1.0;
    for (std::size_t t = 0; t < g2.size(); ++t) {
      const double p = inst.scenarios[t].probability.value;
      const auto m2 = dependent_round(g2[t], solution.y[t], rng).matching;
      for (auto k : m2.edges) {
        const std::size_t i = g2[t].edges[k].right;
        if (!avail[i]) continue;
        hit[i] += p;
        value += p * g2[t].weight_of(k).value;
      }
    }
    for (std::size_t i = 0; i < n; ++i) stats.matched_rate[i] += hit[i];
    value_sum += value;
  }
  for (auto& r : stats.matched_rate) r /= static_cast<double>(trials);
  stats.mean_value = value_sum / static_cast<double>(trials);
  return stats;
}

namespace {

void check_eps_delta(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
}

}  // namespace

std::size_t sample_size_vertex(std::size_t num_offline, double epsilon, double delta) {
  check_eps_delta(epsilon, delta);
  const double bound = 2.0 / (epsilon * epsilon) *
                       (2.0 * std::log(2.0) * static_cast<double>(num_offline) + std::log(2.0 / delta));
  return static_cast<std::size_t>(std::ceil(bound));
}

std::size_t sample_size_edge(std::size_t num_edges, double epsilon, double delta, double max_weight,
                             double min_weight) {
  check_eps_delta(epsilon, delta);
  if (!(min_weight > 0.0 && max_weight >= min_weight)) throw InputError("weights must satisfy W >= mu > 0");
  const double ratio = max_weight / min_weight;
  const double bound = 2.0 * ratio * ratio / (epsilon * epsilon) *
                       (2.0 * std::log(2.0) * static_cast<double>(num_edges) + std::log(2.0 / delta));
  return static_cast<std::size_t>(std::ceil(bound));
}

EmpiricalDistribution EmpiricalDistribution::from_samples(const std::vector<std::size_t>& samples) {
  if (samples.empty()) throw InputError("empirical distribution needs at least one sample");
  std::map<std::size_t, std::size_t> counts;
  for (auto s : samples) ++counts[s];
  EmpiricalDistribution d;
  for (const auto& [id, m] : counts) {
    d.scenario_ids.push_back(id);
    d.multiplicities.push_back(m);
  }
  d.k = samples.size();
  return d;
}

TwoStageInstance EmpiricalDistribution::apply(const TwoStageInstance& instance) const {
  TwoStageInstance out = instance;
  out.scenarios.clear();
  for (std::size_t j = 0; j < scenario_ids.size(); ++j) {
    check_scenario(instance, scenario_ids[j]);
    Scenario s = instance.scenarios[scenario_ids[j]];
    s.probability = Quantity::from_fraction(static_cast<std::int64_t>(multiplicities[j]), static_cast<std::int64_t>(k));
    out.scenarios.push_back(std::move(s));
  }
  out.validate();
  return out;
}

ScenarioSampler scenario_sampler(const TwoStageInstance& instance) {
  std::vector<double> cumulative;
  double total = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t t = 0; t < instance.num_scenarios(); ++t) {
    total += instance.scenarios[t].probability.value;
    cumulative.push_back(total);
    if (instance.scenarios[t].probability.value > 0.0) last_positive = t;
  }
  return [cumulative, total, last_positive](Rng& rng) {
    const double u = rng.uniform() * total;
    for (std::size_t t = 0; t < cumulative.size(); ++t) {
      if (u < cumulative[t]) return t;
    }
    return last_positive;
  };
}

Policy SampledPolicy::evaluate_on(const TwoStageInstance& instance) const {
  return round_augment_policy(instance, lp.x, c);
}

SampledPolicy sample_based_round_augment(const TwoStageInstance& instance, const ScenarioSampler& sampler,
                                         std::size_t k, double c, std::uint64_t seed) {
  if (k == 0) throw InputError("sample-based Round-Augment needs k >= 1 samples");
  check_scale(c);
  Rng rng(derive_seed(seed, 0x5a3b1e));
  std::vector<std::size_t> samples(k);
  for (auto& s : samples) s = sampler(rng);
  SampledPolicy policy;
  policy.empirical = EmpiricalDistribution::from_samples(samples);
  policy.lp = solve_lp_on(policy.empirical.apply(instance));
  policy.c = c;
  return policy;
}

double edge_gap_opt_online_closed_form(std::size_t n) {
  if (n == 0) throw InputError("edge gap family requires n >= 1");
  const double nd = static_cast<double>(n);
  const double heavy = (1.0 + std::numbers::sqrt2) * nd;
  const double pairs = 2.0 * nd * (2.0 * nd - 1.0);
  double best = 0.0;
  for (std::size_t m = 0; m <= n; ++m) {
    const double md = static_cast<double>(m);
    best = std::max(best, md + (1.0 - md * (md - 1.0) / pairs) * heavy);
  }
  return best;
}

}  // namespace twostage
