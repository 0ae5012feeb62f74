#include "twostage/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "twostage/lp.hpp"
#include "twostage/rounding.hpp"

namespace twostage {

namespace {

constexpr std::size_t kMaxEnumerated = 16;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

WeightedBipartiteGraph unit_weight_copy(const WeightedBipartiteGraph& graph) {
  WeightedBipartiteGraph g = graph;
  g.right_weights.reset();
  for (auto& e : g.edges) e.weight = Quantity::from_fraction(1, 1);
  return g;
}

std::vector<double> right_degrees(const WeightedBipartiteGraph& graph, const std::vector<double>& x) {
  std::vector<double> d(graph.num_right, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) d[graph.edges[k].right] += x[k];
  return d;
}

void require_fractional(const WeightedBipartiteGraph& graph, const std::vector<double>& x) {
  if (auto err = validate_fractional_matching(graph, x)) throw InputError("x is not a fractional matching: " + *err);
}

// Sums prob(mask) * value(mask) ascending and descending and insists that
// the two agree.
double cross_checked_sum(const std::vector<double>& prob, const std::vector<double>& value) {
  double up = 0.0, down = 0.0;
  for (std::size_t m = 0; m < prob.size(); ++m) up += prob[m] * value[m];
  for (std::size_t m = prob.size(); m-- > 0;) down += prob[m] * value[m];
  if (std::fabs(up - down) > 1e-12 * std::max(1.0, std::fabs(up))) {
    throw std::logic_error("enumeration orders disagree: " + num(up) + " vs " + num(down));
  }
  return up;
}

std::vector<double> product_probabilities(const std::vector<double>& p) {
  std::vector<double> prob(std::size_t{1} << p.size());
  for (std::size_t m = 0; m < prob.size(); ++m) {
    double q = 1.0;
    for (std::size_t v = 0; v < p.size(); ++v) q *= ((m >> v) & 1u) ? p[v] : 1.0 - p[v];
    prob[m] = q;
  }
  return prob;
}

}  // namespace

std::string to_string(Evidence evidence) { return evidence == Evidence::Exact ? "exact" : "statistical"; }

std::string BoundReport::csv_header() { return "instance,bound,evidence,lhs,lhs_ci_lower,rhs,margin,verdict"; }

std::string BoundReport::csv_row() const {
  return instance + "," + bound + "," + to_string(evidence) + "," + num(lhs) + "," +
         (lhs_ci_lower ? num(*lhs_ci_lower) : std::string()) + "," + num(rhs) + "," + num(margin()) + "," +
         (pass ? "pass" : "fail");
}

std::string BoundReport::to_json() const {
  nlohmann::json j{{"instance", instance}, {"bound", bound},   {"evidence", to_string(evidence)},
                   {"lhs", lhs},           {"rhs", rhs},       {"margin", margin()},
                   {"tolerance", tolerance}, {"verdict", pass ? "pass" : "fail"}};
  if (lhs_ci_lower) j["lhs_ci_lower"] = *lhs_ci_lower;
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

MonteCarloSummary summarize(const std::vector<double>& values) {
  MonteCarloSummary s;
  s.trials = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  s.ci_lower = s.mean - kZ99 * s.stddev / std::sqrt(static_cast<double>(values.size()));
  return s;
}

MonteCarloSummary run_monte_carlo(const Policy& policy, std::size_t trials, std::uint64_t seed,
                                  std::size_t parallel) {
  std::vector<double> values(trials);
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallel, trials));
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) values[t] = policy(derive_seed(seed, t));
  } else {
    std::vector<std::thread> pool;
    const std::size_t block = (trials + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * block, hi = std::min(trials, lo + block);
      pool.emplace_back([&, lo, hi] {
        for (std::size_t t = lo; t < hi; ++t) values[t] = policy(derive_seed(seed, t));
      });
    }
    for (auto& th : pool) th.join();
  }
  return summarize(values);
}

BoundReport check_vertex_bound_independent(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                                           const std::vector<double>& p, const std::string& label) {
  graph.validate();
  require_fractional(graph, x);
  const std::size_t nl = graph.num_left, nv = graph.num_left + graph.num_right;
  if (nv > kMaxEnumerated) throw CapExceeded("vertex bound: |V| = " + std::to_string(nv) + " exceeds 16");
  if (p.size() != nv) throw InputError("vertex bound: need one probability per node (left then right)");
  std::vector<double> xv(nv, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    xv[graph.edges[k].left] += x[k];
    xv[nl + graph.edges[k].right] += x[k];
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (!(p[v] >= 0.0 && p[v] <= 1.0) || p[v] < xv[v] - 1e-12) {
      const std::string name = v < nl ? graph.left_label(v) : graph.right_label(v - nl);
      throw InputError("vertex bound: Pr[A] = " + num(p[v]) + " below x_v = " + num(xv[v]) + " at node " + name);
    }
  }

  const auto unit = unit_weight_copy(graph);
  const auto prob = product_probabilities(p);
  std::vector<double> value(prob.size());
  for (std::size_t m = 0; m < prob.size(); ++m) {
    WeightedBipartiteGraph sub = unit;
    sub.edges.clear();
    for (const auto& e : unit.edges) {
      if (((m >> e.left) & 1u) && ((m >> (nl + e.right)) & 1u)) sub.edges.push_back(e);
    }
    value[m] = max_weight_matching(sub).value;
  }

  BoundReport r;
  r.instance = label;
  r.bound = "vertex_independent";
  r.evidence = Evidence::Exact;
  r.lhs = cross_checked_sum(prob, value);
  double sum_x = 0.0;
  for (double v : x) sum_x += v;
  double loss = 0.0;
  for (std::size_t v = 0; v < nv; ++v) loss += xv[v] * (1.0 - p[v]);
  r.rhs = sum_x - 0.5 * loss;
  r.pass = r.lhs >= r.rhs - r.tolerance;
  return r;
}

BoundReport check_vertex_weighted_bound(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                                        const std::vector<double>& p_right, const std::vector<double>& w_right,
                                        const std::string& label) {
  graph.validate();
  require_fractional(graph, x);
  const std::size_t nr = graph.num_right;
  if (nr > kMaxEnumerated) throw CapExceeded("vertex-weighted bound: |R| = " + std::to_string(nr) + " exceeds 16");
  if (p_right.size() != nr || w_right.size() != nr) {
    throw InputError("vertex-weighted bound: need one probability and one weight per right node");
  }
  const auto xv = right_degrees(graph, x);
  for (std::size_t v = 0; v < nr; ++v) {
    if (!(p_right[v] >= 0.0 && p_right[v] <= 1.0) || p_right[v] < xv[v] - 1e-12) {
      throw InputError("vertex-weighted bound: Pr[A] = " + num(p_right[v]) + " below x_v = " + num(xv[v]) +
                       " at node " + graph.right_label(v));
    }
    if (!(w_right[v] >= 0.0)) throw InputError("vertex-weighted bound: negative weight at " + graph.right_label(v));
  }
  WeightedBipartiteGraph weighted = graph;
  weighted.right_weights.emplace();
  for (double w : w_right) weighted.right_weights->push_back(Quantity::from_double(w));

  const auto prob = product_probabilities(p_right);
  std::vector<double> value(prob.size());
  for (std::size_t m = 0; m < prob.size(); ++m) {
    std::vector<std::uint8_t> a(nr);
    for (std::size_t v = 0; v < nr; ++v) a[v] = (m >> v) & 1u;
    value[m] = nu(weighted, AvailabilityVector(std::move(a)));
  }

  BoundReport r;
  r.instance = label;
  r.bound = "vertex_weighted";
  r.evidence = Evidence::Exact;
  r.lhs = cross_checked_sum(prob, value);
  double rhs = 0.0;
  for (std::size_t v = 0; v < nr; ++v) rhs += w_right[v] * xv[v] * (1.0 + p_right[v]);
  r.rhs = 0.5 * rhs;
  r.pass = r.lhs >= r.rhs - r.tolerance;
  return r;
}

AvailabilitySampler first_stage_availability_sampler(const TwoStageInstance& instance, const std::vector<double>& x,
                                                     double c) {
  auto inst = std::make_shared<const TwoStageInstance>(instance);
  auto graph = std::make_shared<const WeightedBipartiteGraph>(first_stage_graph(*inst));
  std::vector<double> cx(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) cx[k] = c * x[k];
  require_fractional(*graph, cx);
  return [inst, graph, cx](Rng& rng) { return availabilities_after(*inst, dependent_round(*graph, cx, rng).matching); };
}

BoundReport check_edge_weighted_bound(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                                      const AvailabilitySampler& sampler, std::size_t trials, std::uint64_t seed,
                                      double c, const std::string& label) {
  graph.validate();
  require_fractional(graph, x);
  if (trials < 2) throw InputError("edge-weighted bound needs at least two trials");
  if (graph.num_right > 64) throw CapExceeded("edge-weighted bound: more than 64 right nodes");
  const auto xv = right_degrees(graph, x);
  std::vector<double> active(graph.num_right, 0.0);
  std::unordered_map<std::uint64_t, double> cache;
  std::vector<double> values(trials);
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto a = sampler(rng);
    if (a.size() != graph.num_right) throw InputError("edge-weighted bound: sampler returned the wrong length");
    std::uint64_t m = 0;
    for (std::size_t v = 0; v < a.size(); ++v) {
      if (a[v]) {
        m |= std::uint64_t{1} << v;
        active[v] += 1.0;
      }
    }
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, nu(graph, a)).first;
    values[t] = it->second;
  }
  const double slack = 4.0 / std::sqrt(static_cast<double>(trials));
  for (std::size_t v = 0; v < graph.num_right; ++v) {
    const double rate = active[v] / static_cast<double>(trials);
    const double need = 1.0 - c * (1.0 - xv[v]);
    if (rate < need - slack) {
      throw InputError("edge-weighted bound: Pr[A] ~ " + num(rate) + " below 1 - c(1 - x_v) = " + num(need) +
                       " at node " + graph.right_label(v));
    }
  }
  const auto s = summarize(values);
  BoundReport r;
  r.instance = label;
  r.bound = "edge_weighted";
  r.evidence = Evidence::Statistical;
  r.lhs = s.mean;
  r.lhs_ci_lower = s.ci_lower;
  double rhs = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) rhs += graph.weight_of(k).value * x[k];
  r.rhs = c * rhs;
  r.pass = s.ci_lower >= r.rhs - r.tolerance;
  r.note = "assumes negatively associated availabilities";
  return r;
}

double DependenceReport::max_covariance() const {
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, covariance[i][j]);
  }
  return best;
}

DependenceReport test_negative_dependence(const AvailabilitySampler& sampler, std::size_t n, std::size_t trials,
                                          std::uint64_t seed) {
  if (trials == 0) throw InputError("negative dependence test needs at least one trial");
  if (n > 64) throw CapExceeded("negative dependence test limited to 64 variables");
  DependenceReport rep;
  rep.n = n;
  rep.trials = trials;
  rep.margin = 4.0 / std::sqrt(static_cast<double>(trials));
  std::vector<double> ones(n, 0.0);
  std::vector<std::vector<double>> both(n, std::vector<double>(n, 0.0));
  const bool subsets = n <= 6;
  std::vector<double> all_on(subsets ? std::size_t{1} << n : 0, 0.0), all_off(all_on.size(), 0.0);
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto a = sampler(rng);
    if (a.size() != n) throw InputError("negative dependence test: sampler returned the wrong length");
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!a[i]) continue;
      ones[i] += 1.0;
      if (subsets) m |= 1u << i;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (a[j]) both[i][j] += 1.0;
      }
    }
    if (subsets) {
      const std::uint32_t full = (1u << n) - 1;
      // Every S contained in the on-set (resp. off-set) has its product equal to 1.
      for (std::uint32_t s = m;; s = (s - 1) & m) {
        all_on[s] += 1.0;
        if (s == 0) break;
      }
      const std::uint32_t off = full & ~m;
      for (std::uint32_t s = off;; s = (s - 1) & off) {
        all_off[s] += 1.0;
        if (s == 0) break;
      }
    }
  }
  const double nt = static_cast<double>(trials);
  rep.means.resize(n);
  for (std::size_t i = 0; i < n; ++i) rep.means[i] = ones[i] / nt;
  rep.covariance.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    rep.covariance[i][i] = rep.means[i] * (1.0 - rep.means[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double cov = both[i][j] / nt - rep.means[i] * rep.means[j];
      rep.covariance[i][j] = rep.covariance[j][i] = cov;
      if (cov > rep.margin) rep.pairwise_pass = false;
    }
  }
  if (subsets) {
    for (std::uint32_t s = 1; s < all_on.size(); ++s) {
      if (std::popcount(s) < 2) continue;
      NcdCheck c;
      c.subset = s;
      c.joint = all_on[s] / nt;
      c.joint_complement = all_off[s] / nt;
      c.product = 1.0;
      c.product_complement = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if ((s >> i) & 1u) {
          c.product *= rep.means[i];
          c.product_complement *= 1.0 - rep.means[i];
        }
      }
      c.pass = c.joint <= c.product + rep.margin && c.joint_complement <= c.product_complement + rep.margin;
      if (!c.pass) rep.ncd_pass = false;
      rep.ncd.push_back(c);
    }
  }
  return rep;
}

RatioEstimate estimate_ratio(const TwoStageInstance& instance, const Policy& policy, std::size_t trials,
                             std::uint64_t seed, std::size_t parallel, bool with_oracle) {
  if (trials < 100) throw InputError("estimate_ratio requires at least 100 trials");
  RatioEstimate est;
  est.summary = run_monte_carlo(policy, trials, seed, parallel);
  est.lp_on = solve_lp_on(instance).objective;
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 1.0; };
  est.ratio_lp = ratio(est.summary.mean, est.lp_on);
  est.ratio_lp_ci_lower = ratio(est.summary.ci_lower, est.lp_on);
  if (with_oracle && instance.first_stage_edges.size() <= kOracleEdgeCap) {
    est.opt_on = brute_force_opt_online(instance).value;
    est.ratio_opt = ratio(est.summary.mean, *est.opt_on);
  }
  return est;
}

namespace {

// Scales independent uniform draws so that every node's load is at most 1.
std::vector<double> random_fractional_matching(const WeightedBipartiteGraph& g, Rng& rng) {
  std::vector<double> u(g.edges.size());
  std::vector<double> left(g.num_left, 0.0), right(g.num_right, 0.0);
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = rng.uniform();
    left[g.edges[k].left] += u[k];
    right[g.edges[k].right] += u[k];
  }
  std::vector<double> x(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    x[k] = u[k] / std::max({1.0, left[g.edges[k].left], right[g.edges[k].right]});
  }
  return x;
}

}  // namespace

TreeCase random_tree_case(Rng& rng, std::size_t max_nodes) {
  const std::size_t n = 2 + rng.below(std::max<std::size_t>(1, max_nodes - 1));
  std::vector<std::size_t> parent(n, 0), depth(n, 0);
  for (std::size_t v = 1; v < n; ++v) {
    parent[v] = rng.below(v);
    depth[v] = depth[parent[v]] + 1;
  }
  std::vector<std::size_t> index(n);
  TreeCase tc;
  for (std::size_t v = 0; v < n; ++v) index[v] = depth[v] % 2 == 0 ? tc.graph.num_left++ : tc.graph.num_right++;
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t a = depth[v] % 2 == 0 ? v : parent[v];
    const std::size_t b = depth[v] % 2 == 0 ? parent[v] : v;
    tc.graph.add_edge(index[a], index[b]);
  }
  tc.x = random_fractional_matching(tc.graph, rng);
  std::vector<double> xv(tc.graph.num_left + tc.graph.num_right, 0.0);
  for (std::size_t k = 0; k < tc.x.size(); ++k) {
    xv[tc.graph.edges[k].left] += tc.x[k];
    xv[tc.graph.num_left + tc.graph.edges[k].right] += tc.x[k];
  }
  for (double d : xv) tc.p.push_back(std::min(1.0, d + (1.0 - d) * rng.uniform()));
  return tc;
}

WeightedCase random_weighted_case(Rng& rng, std::size_t max_left, std::size_t max_right) {
  WeightedCase wc;
  wc.graph.num_left = 1 + rng.below(max_left);
  wc.graph.num_right = 1 + rng.below(max_right);
  for (std::size_t u = 0; u < wc.graph.num_left; ++u) {
    for (std::size_t v = 0; v < wc.graph.num_right; ++v) {
      if (rng.bernoulli(0.5)) wc.graph.add_edge(u, v);
    }
  }
  wc.x = random_fractional_matching(wc.graph, rng);
  const auto xv = right_degrees(wc.graph, wc.x);
  for (double d : xv) {
    wc.p_right.push_back(std::min(1.0, d + (1.0 - d) * rng.uniform()));
    wc.w_right.push_back(rng.uniform());
  }
  return wc;
}

std::vector<BoundReport> vertex_bound_battery(std::uint64_t seed, std::size_t count) {
  std::vector<BoundReport> out;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, k));
    const auto tc = random_tree_case(rng);
    out.push_back(check_vertex_bound_independent(tc.graph, tc.x, tc.p, "tree" + std::to_string(k)));
  }
  return out;
}

std::vector<BoundReport> vertex_weighted_battery(std::uint64_t seed, std::size_t count) {
  std::vector<BoundReport> out;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, 0x7e1a00 + k));
    const auto wc = random_weighted_case(rng);
    out.push_back(check_vertex_weighted_bound(wc.graph, wc.x, wc.p_right, wc.w_right, "bipartite" + std::to_string(k)));
  }
  return out;
}

}  // namespace twostage
