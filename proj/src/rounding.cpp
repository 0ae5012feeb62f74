#include "twostage/rounding.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace twostage {

namespace {

constexpr double kSnap = 1e-12;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

bool is_fractional(double v) { return v > kSnap && v < 1.0 - kSnap; }

double snap(double v) {
  if (v <= kSnap) return 0.0;
  if (v >= 1.0 - kSnap) return 1.0;
  return v;
}

struct Walk {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> edges;
  bool cycle = false;
};

class FractionalGraph {
 public:
  FractionalGraph(const WeightedBipartiteGraph& g, const std::vector<double>& vals)
      : graph_(g), incident_(g.num_left + g.num_right) {
    for (std::size_t k = 0; k < vals.size(); ++k) {
      if (!is_fractional(vals[k])) continue;
      incident_[left_node(k)].push_back(k);
      incident_[right_node(k)].push_back(k);
    }
  }

  std::size_t first_active_node() const {
    for (std::size_t v = 0; v < incident_.size(); ++v) {
      if (!incident_[v].empty()) return v;
    }
    return kNone;
  }

  // Follows lowest-indexed unused fractional edges until a node repeats
  // (cycle) or the walk gets stuck (path end).
  Walk walk_from(std::size_t start) const {
    Walk w;
    std::vector<std::size_t> pos(incident_.size(), kNone);
    pos[start] = 0;
    w.nodes.push_back(start);
    std::size_t cur = start, prev_edge = kNone;
    for (;;) {
      std::size_t next_edge = kNone;
      for (auto k : incident_[cur]) {
        if (k != prev_edge) {
          next_edge = k;
          break;
        }
      }
      if (next_edge == kNone) return w;
      const std::size_t next = other(next_edge, cur);
      w.edges.push_back(next_edge);
      if (pos[next] != kNone) {
        Walk c;
        c.cycle = true;
        c.nodes.assign(w.nodes.begin() + static_cast<std::ptrdiff_t>(pos[next]), w.nodes.end());
        c.edges.assign(w.edges.begin() + static_cast<std::ptrdiff_t>(pos[next]), w.edges.end());
        return c;
      }
      pos[next] = w.nodes.size();
      w.nodes.push_back(next);
      prev_edge = next_edge;
      cur = next;
    }
  }

 private:
  std::size_t left_node(std::size_t k) const { return graph_.edges[k].left; }
  std::size_t right_node(std::size_t k) const { return graph_.num_left + graph_.edges[k].right; }
  std::size_t other(std::size_t k, std::size_t v) const {
    return left_node(k) == v ? right_node(k) : left_node(k);
  }

  const WeightedBipartiteGraph& graph_;
  std::vector<std::vector<std::size_t>> incident_;
};

}  // namespace

RoundingResult dependent_round(const WeightedBipartiteGraph& graph, const std::vector<double>& x, Rng& rng,
                               bool record_transcript) {
  if (auto err = validate_fractional_matching(graph, x)) {
    throw std::invalid_argument("dependent_round: " + *err);
  }
  std::vector<double> vals(x.size());
  std::transform(x.begin(), x.end(), vals.begin(), snap);
  RoundingResult result;
  if (record_transcript) result.transcript.emplace();

  for (;;) {
    const FractionalGraph fg(graph, vals);
    const std::size_t start = fg.first_active_node();
    if (start == kNone) break;
    Walk w = fg.walk_from(start);
    if (!w.cycle) w = fg.walk_from(w.nodes.back());

    std::vector<std::size_t> m1, m2;
    for (std::size_t p = 0; p < w.edges.size(); ++p) (p % 2 == 0 ? m1 : m2).push_back(w.edges[p]);
    double alpha = std::numeric_limits<double>::infinity();
    double beta = alpha;
    std::size_t alpha_arg = kNone, beta_arg = kNone;
    for (auto k : m1) {
      if (1.0 - vals[k] < alpha) alpha = 1.0 - vals[k], alpha_arg = k;
      if (vals[k] < beta) beta = vals[k], beta_arg = k;
    }
    for (auto k : m2) {
      if (vals[k] < alpha) alpha = vals[k], alpha_arg = k;
      if (1.0 - vals[k] < beta) beta = 1.0 - vals[k], beta_arg = k;
    }
    const bool take_alpha = rng.uniform() * (alpha + beta) < beta;
    const double delta = take_alpha ? alpha : -beta;
    for (auto k : m1) vals[k] = snap(vals[k] + delta);
    for (auto k : m2) vals[k] = snap(vals[k] - delta);
    // Guarantee progress regardless of rounding error.
    const std::size_t tight = take_alpha ? alpha_arg : beta_arg;
    vals[tight] = vals[tight] < 0.5 ? 0.0 : 1.0;

    if (record_transcript) {
      RoundingStep step;
      step.cycle = w.cycle;
      step.edges = w.edges;
      step.m1 = std::move(m1);
      step.m2 = std::move(m2);
      step.alpha = alpha;
      step.beta = beta;
      step.took_alpha = take_alpha;
      step.after = vals;
      result.transcript->steps.push_back(std::move(step));
    }
  }
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (vals[k] == 1.0) result.matching.edges.push_back(k);
  }
  return result;
}

RoundingResult dependent_round(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                               std::uint64_t seed, bool record_transcript) {
  Rng rng(seed);
  return dependent_round(graph, x, rng, record_transcript);
}

std::string transcript_to_json(const WeightedBipartiteGraph& graph, const RoundingTranscript& transcript) {
  using nlohmann::json;
  auto label = [&](std::size_t k) {
    const auto& e = graph.edges[k];
    return json::array({graph.left_label(e.left), graph.right_label(e.right)});
  };
  auto labels = [&](const std::vector<std::size_t>& ks) {
    json arr = json::array();
    for (auto k : ks) arr.push_back(label(k));
    return arr;
  };
  json steps = json::array();
  for (const auto& s : transcript.steps) {
    steps.push_back({{"kind", s.cycle ? "cycle" : "path"},
                     {"edges", labels(s.edges)},
                     {"m1", labels(s.m1)},
                     {"m2", labels(s.m2)},
                     {"alpha", s.alpha},
                     {"beta", s.beta},
                     {"branch", s.took_alpha ? "alpha" : "beta"},
                     {"after", s.after}});
  }
  return json{{"steps", steps}}.dump(2) + "\n";
}

AvailabilityVector availabilities_after(const TwoStageInstance& instance, const Matching& matching) {
  auto avail = AvailabilityVector::all(instance.num_offline(), true);
  for (auto k : matching.edges) avail.set(instance.first_stage_edges.at(k).offline, false);
  return avail;
}

}  // namespace twostage
