#include "twostage/instance.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace twostage {

std::string to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::Unweighted: return "unweighted";
    case WeightMode::VertexWeighted: return "vertex_weighted";
    case WeightMode::EdgeWeighted: return "edge_weighted";
  }
  return "unknown";
}

WeightMode parse_weight_mode(const std::string& text) {
  if (text == "unweighted") return WeightMode::Unweighted;
  if (text == "vertex_weighted" || text == "vertex") return WeightMode::VertexWeighted;
  if (text == "edge_weighted" || text == "edge") return WeightMode::EdgeWeighted;
  throw InputError("unknown weight mode '" + text +
                   "' (expected unweighted, vertex_weighted or edge_weighted)");
}

double TwoStageInstance::effective_weight(const StageEdge& e) const {
  switch (weight_mode) {
    case WeightMode::Unweighted: return 1.0;
    case WeightMode::VertexWeighted: return offline_weights.at(e.offline).value;
    case WeightMode::EdgeWeighted: return e.weight.value;
  }
  return 1.0;
}

Quantity TwoStageInstance::effective_quantity(const StageEdge& e) const {
  switch (weight_mode) {
    case WeightMode::Unweighted: return Quantity::from_fraction(1, 1);
    case WeightMode::VertexWeighted: return offline_weights.at(e.offline);
    case WeightMode::EdgeWeighted: return e.weight;
  }
  return Quantity::from_fraction(1, 1);
}

bool TwoStageInstance::is_rational() const {
  for (const auto& s : scenarios) {
    if (!s.probability.is_exact()) return false;
  }
  if (weight_mode == WeightMode::VertexWeighted) {
    for (const auto& w : offline_weights) {
      if (!w.is_exact()) return false;
    }
  } else if (weight_mode == WeightMode::EdgeWeighted) {
    for (const auto& e : first_stage_edges) {
      if (!e.weight.is_exact()) return false;
    }
    for (const auto& s : scenarios) {
      for (const auto& e : s.edges) {
        if (!e.weight.is_exact()) return false;
      }
    }
  }
  return true;
}

namespace {

void check_unique_ids(const std::vector<std::string>& ids, const std::string& where) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw InputError(where + ": empty node id");
    if (!seen.insert(id).second) throw InputError(where + ": duplicate node id '" + id + "'");
  }
}

void check_weight(const Quantity& w, const std::string& where, bool must_be_one) {
  if (!std::isfinite(w.value) || w.value < 0) {
    std::ostringstream os;
    os << where << ": weight " << w.value << " must be a non-negative finite number";
    throw InputError(os.str());
  }
  if (must_be_one && w.value != 1.0) {
    std::ostringstream os;
    os << where << ": weight " << w.value << " is not allowed under this weight_mode";
    throw InputError(os.str());
  }
}

void check_edges(const std::vector<StageEdge>& edges, std::size_t num_online,
                 std::size_t num_offline, const std::string& where, bool weights_fixed) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const std::string here = where + ".edges[" + std::to_string(k) + "]";
    if (e.online >= num_online) throw InputError(here + ": online endpoint out of range");
    if (e.offline >= num_offline) throw InputError(here + ": offline endpoint out of range");
    if (!seen.insert({e.online, e.offline}).second) {
      throw InputError(here + ": duplicate edge");
    }
    check_weight(e.weight, here, weights_fixed);
  }
}

}  // namespace

void TwoStageInstance::validate() const {
  check_unique_ids(offline_ids, "offline_nodes");
  if (offline_weights.size() != offline_ids.size()) {
    throw InputError("offline_nodes: weight vector size does not match node count");
  }
  const bool vertex_fixed = weight_mode != WeightMode::VertexWeighted;
  const bool edge_fixed = weight_mode != WeightMode::EdgeWeighted;
  for (std::size_t i = 0; i < offline_weights.size(); ++i) {
    check_weight(offline_weights[i], "offline_nodes[" + std::to_string(i) + "]", vertex_fixed);
  }
  check_unique_ids(first_stage_ids, "first_stage.nodes");
  check_edges(first_stage_edges, first_stage_ids.size(), offline_ids.size(), "first_stage",
              edge_fixed);
  if (scenarios.empty()) throw InputError("scenarios: at least one scenario is required");
  double total = 0.0;
  for (std::size_t t = 0; t < scenarios.size(); ++t) {
    const auto& s = scenarios[t];
    const std::string where = "scenarios[" + std::to_string(t) + "]";
    const double p = s.probability.value;
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      std::ostringstream os;
      os << where << ": probability " << p << " outside [0,1]";
      throw InputError(os.str());
    }
    total += p;
    check_unique_ids(s.node_ids, where + ".nodes");
    check_edges(s.edges, s.node_ids.size(), offline_ids.size(), where, edge_fixed);
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(12);
    os << "scenarios: probabilities sum to " << total << ", expected 1 (tolerance 1e-9)";
    throw InputError(os.str());
  }
}

AvailabilityVector AvailabilityVector::from_map(const TwoStageInstance& instance,
                                                const std::map<std::string, int>& by_id) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < instance.offline_ids.size(); ++i) index[instance.offline_ids[i]] = i;
  std::vector<std::uint8_t> values(instance.num_offline(), 0);
  std::vector<bool> seen(instance.num_offline(), false);
  for (const auto& [id, v] : by_id) {
    auto it = index.find(id);
    if (it == index.end()) throw InputError("availability: unknown offline node '" + id + "'");
    if (v != 0 && v != 1) throw InputError("availability: value for '" + id + "' must be 0 or 1");
    values[it->second] = static_cast<std::uint8_t>(v);
    seen[it->second] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw InputError("availability: missing offline node '" + instance.offline_ids[i] + "'");
    }
  }
  return AvailabilityVector(std::move(values));
}

std::map<std::string, int> AvailabilityVector::to_map(const TwoStageInstance& instance) const {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < available_.size(); ++i) out[instance.offline_ids.at(i)] = available_[i];
  return out;
}

std::size_t AvailabilityVector::count() const {
  std::size_t n = 0;
  for (auto v : available_) n += v;
  return n;
}

// Generators ----------------------------------------------------------------

namespace {

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) ids.push_back(prefix + std::to_string(k));
  return ids;
}

}  // namespace

TwoStageInstance make_eight_cycle() {
  TwoStageInstance inst;
  inst.weight_mode = WeightMode::Unweighted;
  inst.offline_ids = numbered("i", 4);
  inst.offline_weights.assign(4, Quantity::from_fraction(1, 1));
  inst.first_stage_ids = {"a1", "a2"};
  // a1 ~ {i1, i2}, a2 ~ {i3, i4}
  inst.first_stage_edges = {{0, 0}, {0, 1}, {1, 2}, {1, 3}};

  // a1-i2-b1-i3-a2-i4-b2-i1-a1
  Scenario s1;
  s1.probability = Quantity::from_fraction(1, 2);
  s1.node_ids = {"b1", "b2"};
  s1.edges = {{0, 1}, {0, 2}, {1, 3}, {1, 0}};
  // a1-i1-b1-i3-a2-i4-b2-i2-a1
  Scenario s2;
  s2.probability = Quantity::from_fraction(1, 2);
  s2.node_ids = {"b1", "b2"};
  s2.edges = {{0, 0}, {0, 2}, {1, 1}, {1, 3}};
  inst.scenarios = {s1, s2};
  inst.validate();
  return inst;
}

TwoStageInstance make_edge_gap_family(std::size_t n) {
  if (n == 0) throw InputError("edge gap family requires n >= 1");
  TwoStageInstance inst;
  inst.weight_mode = WeightMode::EdgeWeighted;
  inst.offline_ids = numbered("i", 2 * n);
  inst.offline_weights.assign(2 * n, Quantity::from_fraction(1, 1));
  inst.first_stage_ids = numbered("a", n);
  for (std::size_t a = 0; a < n; ++a) {
    inst.first_stage_edges.push_back({a, 2 * a, Quantity::from_fraction(1, 1)});
    inst.first_stage_edges.push_back({a, 2 * a + 1, Quantity::from_fraction(1, 1)});
  }
  const auto heavy = Quantity::from_double((1.0 + std::numbers::sqrt2) * static_cast<double>(n));
  const auto pairs = static_cast<std::int64_t>(n * (2 * n - 1));
  for (std::size_t p = 0; p < 2 * n; ++p) {
    for (std::size_t q = p + 1; q < 2 * n; ++q) {
      Scenario s;
      s.probability = Quantity::from_fraction(1, pairs);
      s.node_ids = {"b1"};
      s.edges = {{0, p, heavy}, {0, q, heavy}};
      inst.scenarios.push_back(std::move(s));
    }
  }
  inst.validate();
  return inst;
}

TwoStageInstance make_single_offline_node() {
  TwoStageInstance inst;
  inst.offline_ids = {"i1"};
  inst.offline_weights = {Quantity::from_fraction(1, 1)};
  inst.first_stage_ids = {"a1"};
  inst.first_stage_edges = {{0, 0}};
  Scenario s;
  s.probability = Quantity::from_fraction(1, 1);
  s.node_ids = {"b1"};
  s.edges = {{0, 0}};
  inst.scenarios = {s};
  inst.validate();
  return inst;
}

TwoStageInstance make_random_instance(const RandomInstanceSpec& spec) {
  if (spec.num_offline == 0 || spec.num_first_stage == 0 || spec.num_second_stage == 0) {
    throw InputError("random instance: node counts must be positive");
  }
  if (!(spec.edge_density > 0.0 && spec.edge_density <= 1.0)) {
    throw InputError("random instance: edge density must lie in (0, 1]");
  }
  if (spec.num_scenarios == 0) throw InputError("random instance: need at least one scenario");

  Rng rng(derive_seed(spec.seed, 0x1a57a9ce));
  TwoStageInstance inst;
  inst.weight_mode = spec.weight_mode;
  inst.offline_ids = numbered("i", spec.num_offline);
  inst.first_stage_ids = numbered("a", spec.num_first_stage);
  for (std::size_t i = 0; i < spec.num_offline; ++i) {
    inst.offline_weights.push_back(spec.weight_mode == WeightMode::VertexWeighted
                                       ? Quantity::from_double(rng.uniform())
                                       : Quantity::from_fraction(1, 1));
  }
  auto draw_edges = [&](std::size_t num_online) {
    std::vector<StageEdge> edges;
    for (std::size_t b = 0; b < num_online; ++b) {
      for (std::size_t i = 0; i < spec.num_offline; ++i) {
        if (spec.edge_density < 1.0 && !rng.bernoulli(spec.edge_density)) continue;
        StageEdge e{b, i, Quantity::from_fraction(1, 1)};
        if (spec.weight_mode == WeightMode::EdgeWeighted) e.weight = Quantity::from_double(rng.uniform());
        edges.push_back(e);
      }
    }
    return edges;
  };
  inst.first_stage_edges = draw_edges(spec.num_first_stage);
  for (std::size_t t = 0; t < spec.num_scenarios; ++t) {
    Scenario s;
    s.probability = Quantity::from_fraction(1, static_cast<std::int64_t>(spec.num_scenarios));
    s.node_ids = numbered("b", spec.num_second_stage);
    s.edges = draw_edges(spec.num_second_stage);
    inst.scenarios.push_back(std::move(s));
  }
  inst.validate();
  return inst;
}

}  // namespace twostage
