#include "twostage/matching.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace twostage {

void WeightedBipartiteGraph::add_edge(std::size_t left, std::size_t right, double weight) {
  edges.push_back(GraphEdge{left, right, Quantity::from_double(weight)});
}

const Quantity& WeightedBipartiteGraph::weight_of(std::size_t edge) const {
  const auto& e = edges.at(edge);
  return right_weights ? right_weights->at(e.right) : e.weight;
}

std::string WeightedBipartiteGraph::left_label(std::size_t u) const {
  return u < left_ids.size() ? left_ids[u] : "L" + std::to_string(u);
}

std::string WeightedBipartiteGraph::right_label(std::size_t v) const {
  return v < right_ids.size() ? right_ids[v] : "R" + std::to_string(v);
}

void WeightedBipartiteGraph::validate() const {
  if (right_weights && right_weights->size() != num_right) {
    throw std::invalid_argument("graph: right weight vector size does not match right node count");
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.left >= num_left || e.right >= num_right) {
      throw std::invalid_argument("graph: edge " + std::to_string(k) + " has an endpoint out of range");
    }
    if (!(weight_of(k).value >= 0.0)) {
      throw std::invalid_argument("graph: edge " + std::to_string(k) + " has a negative weight");
    }
  }
}

bool Matching::contains(std::size_t edge) const {
  return std::binary_search(edges.begin(), edges.end(), edge);
}

namespace {

template <class T>
T weight_value(const Quantity& q);

template <>
double weight_value<double>(const Quantity& q) {
  return q.value;
}

template <>
Rational weight_value<Rational>(const Quantity& q) {
  if (!q.exact) throw std::invalid_argument("exact matching requires rational weights");
  return *q.exact;
}

template <class T>
bool less_than(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, double>) {
    return a < b - 1e-12;
  } else {
    return a < b;
  }
}

// Minimum-cost assignment on an n x n matrix with potentials (1-indexed
// internally). Returns row_of[col] for each column.
template <class T>
std::vector<std::size_t> hungarian(const std::vector<std::vector<T>>& cost) {
  const std::size_t n = cost.size();
  std::vector<T> u(n + 1, T(0)), v(n + 1, T(0));
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<T> minv(n + 1, T(0));
    std::vector<bool> has_min(n + 1, false), used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      T delta(0);
      bool has_delta = false;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        T cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (!has_min[j] || less_than(cur, minv[j])) {
          minv[j] = cur;
          has_min[j] = true;
          way[j] = j0;
        }
        if (!has_delta || less_than(minv[j], delta)) {
          delta = minv[j];
          has_delta = true;
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_of(n);
  for (std::size_t j = 1; j <= n; ++j) row_of[j - 1] = p[j] - 1;
  return row_of;
}

template <class T>
MatchingResult solve_matching(const WeightedBipartiteGraph& graph) {
  graph.validate();
  MatchingResult result;
  const std::size_t n = std::max(graph.num_left, graph.num_right);
  if (n == 0 || graph.edges.empty()) {
    if constexpr (std::is_same_v<T, Rational>) result.exact_value = Rational(0);
    return result;
  }
  // Best edge per (left, right) pair; parallel edges keep the heaviest.
  const std::size_t none = graph.edges.size();
  std::vector<std::vector<std::size_t>> best(n, std::vector<std::size_t>(n, none));
  std::vector<std::vector<T>> cost(n, std::vector<T>(n, T(0)));
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const auto& e = graph.edges[k];
    const T w = weight_value<T>(graph.weight_of(k));
    std::size_t& slot = best[e.left][e.right];
    if (slot == none || less_than(T(-cost[e.left][e.right]), w)) {
      slot = k;
      cost[e.left][e.right] = T(-w);
    }
  }
  const auto row_of = hungarian(cost);
  T total(0);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t row = row_of[col];
    const std::size_t k = best[row][col];
    if (k == none) continue;
    const T w = T(-cost[row][col]);
    if (!(T(0) < w)) continue;
    result.matching.edges.push_back(k);
    total += w;
  }
  std::sort(result.matching.edges.begin(), result.matching.edges.end());
  if constexpr (std::is_same_v<T, double>) {
    result.value = total;
  } else {
    result.value = to_double(total);
    result.exact_value = total;
  }
  return result;
}

void check_availability(const WeightedBipartiteGraph& graph, const AvailabilityVector& available) {
  if (available.size() != graph.num_right) {
    throw std::invalid_argument("availability has " + std::to_string(available.size()) +
                                " entries, graph has " + std::to_string(graph.num_right) + " right nodes");
  }
}

}  // namespace

MatchingResult max_weight_matching(const WeightedBipartiteGraph& graph) {
  return solve_matching<double>(graph);
}

MatchingResult max_weight_matching_exact(const WeightedBipartiteGraph& graph) {
  return solve_matching<Rational>(graph);
}

WeightedBipartiteGraph induced_on_right(const WeightedBipartiteGraph& graph, const AvailabilityVector& available) {
  check_availability(graph, available);
  WeightedBipartiteGraph sub;
  sub.num_left = graph.num_left;
  sub.num_right = graph.num_right;
  sub.right_weights = graph.right_weights;
  sub.left_ids = graph.left_ids;
  sub.right_ids = graph.right_ids;
  for (const auto& e : graph.edges) {
    if (available[e.right]) sub.edges.push_back(e);
  }
  return sub;
}

double nu(const WeightedBipartiteGraph& graph, const AvailabilityVector& available) {
  return max_weight_matching(induced_on_right(graph, available)).value;
}

Rational nu_exact(const WeightedBipartiteGraph& graph, const AvailabilityVector& available) {
  return *max_weight_matching_exact(induced_on_right(graph, available)).exact_value;
}

std::optional<std::string> validate_fractional_matching(const WeightedBipartiteGraph& graph,
                                                        const std::vector<double>& x) {
  if (x.size() != graph.edges.size()) {
    return "fractional vector has " + std::to_string(x.size()) + " entries, graph has " +
           std::to_string(graph.edges.size()) + " edges";
  }
  std::vector<double> left(graph.num_left, 0.0), right(graph.num_right, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto& e = graph.edges[k];
    if (!std::isfinite(x[k]) || x[k] < 0.0) {
      std::ostringstream os;
      os << "edge " << k << " (" << graph.left_label(e.left) << ", " << graph.right_label(e.right)
         << ") has value " << x[k] << " < 0";
      return os.str();
    }
    if (e.left >= graph.num_left || e.right >= graph.num_right) {
      return "edge " + std::to_string(k) + " is not in the graph";
    }
    left[e.left] += x[k];
    right[e.right] += x[k];
  }
  for (std::size_t u = 0; u < left.size(); ++u) {
    if (left[u] > 1.0 + 1e-9) {
      std::ostringstream os;
      os << "node " << graph.left_label(u) << " has fractional degree " << left[u] << " > 1";
      return os.str();
    }
  }
  for (std::size_t v = 0; v < right.size(); ++v) {
    if (right[v] > 1.0 + 1e-9) {
      std::ostringstream os;
      os << "node " << graph.right_label(v) << " has fractional degree " << right[v] << " > 1";
      return os.str();
    }
  }
  return std::nullopt;
}

bool is_matching(const WeightedBipartiteGraph& graph, const Matching& matching) {
  std::vector<bool> left(graph.num_left, false), right(graph.num_right, false);
  for (auto k : matching.edges) {
    if (k >= graph.edges.size()) return false;
    const auto& e = graph.edges[k];
    if (left[e.left] || right[e.right]) return false;
    left[e.left] = right[e.right] = true;
  }
  return true;
}

double matching_value(const WeightedBipartiteGraph& graph, const Matching& matching) {
  double total = 0.0;
  for (auto k : matching.edges) total += graph.weight_of(k).value;
  return total;
}

namespace {

WeightedBipartiteGraph stage_graph(const TwoStageInstance& inst, const std::vector<std::string>& online_ids,
                                   const std::vector<StageEdge>& edges) {
  WeightedBipartiteGraph g;
  g.num_left = online_ids.size();
  g.num_right = inst.num_offline();
  g.left_ids = online_ids;
  g.right_ids = inst.offline_ids;
  for (const auto& e : edges) g.edges.push_back(GraphEdge{e.online, e.offline, inst.effective_quantity(e)});
  return g;
}

}  // namespace

WeightedBipartiteGraph first_stage_graph(const TwoStageInstance& instance) {
  return stage_graph(instance, instance.first_stage_ids, instance.first_stage_edges);
}

WeightedBipartiteGraph scenario_graph(const TwoStageInstance& instance, std::size_t scenario) {
  if (scenario >= instance.num_scenarios()) {
    throw InputError("unknown scenario " + std::to_string(scenario));
  }
  const auto& s = instance.scenarios[scenario];
  return stage_graph(instance, s.node_ids, s.edges);
}

}  // namespace twostage
