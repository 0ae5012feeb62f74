#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "twostage/instance.hpp"
#include "twostage/matching.hpp"
#include "twostage/numeric.hpp"

namespace oracle {

/// Maximum weight over every edge subset that is a matching.
inline double brute_matching(const twostage::WeightedBipartiteGraph& g,
                             const std::vector<bool>* right_available = nullptr) {
  const std::size_t m = g.edges.size();
  double best = 0.0;
  for (std::uint32_t s = 0; s < (1u << m); ++s) {
    std::vector<bool> left(g.num_left), right(g.num_right);
    double value = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < m && ok; ++k) {
      if (!((s >> k) & 1u)) continue;
      const auto& e = g.edges[k];
      if (left[e.left] || right[e.right]) ok = false;
      if (right_available && !(*right_available)[e.right]) ok = false;
      left[e.left] = right[e.right] = true;
      value += g.weight_of(k).value;
    }
    if (ok) best = std::max(best, value);
  }
  return best;
}

/// Random graph with small integer weights so sums are exact in double.
inline twostage::WeightedBipartiteGraph random_graph(twostage::Rng& rng, std::size_t max_side,
                                                     std::size_t max_edges, bool integer_weights = true) {
  twostage::WeightedBipartiteGraph g;
  g.num_left = 1 + rng.below(max_side);
  g.num_right = 1 + rng.below(max_side);
  for (std::size_t u = 0; u < g.num_left; ++u) {
    for (std::size_t v = 0; v < g.num_right; ++v) {
      if (g.edges.size() < max_edges && rng.bernoulli(0.5)) {
        g.add_edge(u, v, integer_weights ? static_cast<double>(rng.below(6)) : rng.uniform());
      }
    }
  }
  return g;
}

/// Plain sum of effective weights times values, written independently of
/// the library's objective code.
inline double objective(const twostage::TwoStageInstance& inst, const std::vector<double>& x,
                        const std::vector<std::vector<double>>& y) {
  auto weight = [&](const twostage::StageEdge& e) {
    switch (inst.weight_mode) {
      case twostage::WeightMode::Unweighted: return 1.0;
      case twostage::WeightMode::VertexWeighted: return inst.offline_weights[e.offline].value;
      case twostage::WeightMode::EdgeWeighted: return e.weight.value;
    }
    return 0.0;
  };
  double total = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) total += weight(inst.first_stage_edges[k]) * x[k];
  for (std::size_t t = 0; t < y.size(); ++t) {
    for (std::size_t k = 0; k < y[t].size(); ++k) {
      total += inst.scenarios[t].probability.value * weight(inst.scenarios[t].edges[k]) * y[t][k];
    }
  }
  return total;
}

}  // namespace oracle
