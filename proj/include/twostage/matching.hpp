#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "twostage/instance.hpp"
#include "twostage/numeric.hpp"

namespace twostage {

struct GraphEdge {
  std::size_t left = 0;
  std::size_t right = 0;
  Quantity weight = Quantity::from_fraction(1, 1);
};

/// Bipartite graph with non-negative edge weights. When `right_weights` is
/// set, matching right node v gains right_weights[v] and edge weights are
/// ignored.
struct WeightedBipartiteGraph {
  std::size_t num_left = 0;
  std::size_t num_right = 0;
  std::vector<GraphEdge> edges;
  std::optional<std::vector<Quantity>> right_weights;
  std::vector<std::string> left_ids;   // optional labels for diagnostics
  std::vector<std::string> right_ids;

  void add_edge(std::size_t left, std::size_t right, double weight = 1.0);

  const Quantity& weight_of(std::size_t edge) const;
  std::string left_label(std::size_t u) const;
  std::string right_label(std::size_t v) const;

  /// Throws std::invalid_argument on out-of-range endpoints or negative weights.
  void validate() const;
};

/// Indices into WeightedBipartiteGraph::edges, sorted ascending.
struct Matching {
  std::vector<std::size_t> edges;

  bool empty() const { return edges.empty(); }
  std::size_t size() const { return edges.size(); }
  bool contains(std::size_t edge) const;

  friend bool operator==(const Matching&, const Matching&) = default;
};

struct MatchingResult {
  Matching matching;
  double value = 0.0;
  std::optional<Rational> exact_value;
};

/// Hungarian method with potentials on the padded square weight matrix.
/// Zero-weight pairs are never reported as matched.
MatchingResult max_weight_matching(const WeightedBipartiteGraph& graph);

/// Same, in rational arithmetic; every weight must carry an exact value.
MatchingResult max_weight_matching_exact(const WeightedBipartiteGraph& graph);

/// Max-weight matching value of the subgraph induced by the available right
/// nodes. `available` must have one entry per right node.
double nu(const WeightedBipartiteGraph& graph, const AvailabilityVector& available);
Rational nu_exact(const WeightedBipartiteGraph& graph, const AvailabilityVector& available);

/// Subgraph keeping only edges whose right endpoint is available; node sets
/// are unchanged so edge indices of the result refer to the new edge list.
WeightedBipartiteGraph induced_on_right(const WeightedBipartiteGraph& graph,
                                        const AvailabilityVector& available);

/// Checks 0 <= x_e and the degree bounds sum_{e at v} x_e <= 1 + 1e-9.
/// Returns a description of the first violation.
std::optional<std::string> validate_fractional_matching(const WeightedBipartiteGraph& graph,
                                                        const std::vector<double>& x);

/// True when the edge set is vertex-disjoint and every index is in range.
bool is_matching(const WeightedBipartiteGraph& graph, const Matching& matching);

double matching_value(const WeightedBipartiteGraph& graph, const Matching& matching);

/// Stage graphs of an instance: left = online nodes, right = offline nodes,
/// edge weights = effective weights under the instance's weight mode.
WeightedBipartiteGraph first_stage_graph(const TwoStageInstance& instance);
WeightedBipartiteGraph scenario_graph(const TwoStageInstance& instance, std::size_t scenario);

}  // namespace twostage
