#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twostage/instance.hpp"
#include "twostage/matching.hpp"
#include "twostage/twostage.hpp"

namespace twostage {

enum class Evidence { Exact, Statistical };

std::string to_string(Evidence evidence);

/// Outcome of checking LHS >= RHS - tolerance. For statistical evidence the
/// comparison uses the one-sided 99% lower confidence bound of the LHS.
struct BoundReport {
  std::string instance;
  std::string bound;
  Evidence evidence = Evidence::Exact;
  double lhs = 0.0;
  std::optional<double> lhs_ci_lower;
  double rhs = 0.0;
  double tolerance = 1e-9;
  bool pass = false;
  std::string note;

  double margin() const { return (lhs_ci_lower ? *lhs_ci_lower : lhs) - rhs; }

  static std::string csv_header();
  std::string csv_row() const;
  std::string to_json() const;
};

/// One-sided 99% normal quantile.
inline constexpr double kZ99 = 2.326;

struct MonteCarloSummary {
  std::size_t trials = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double ci_lower = 0.0;  // mean - z * sd / sqrt(N)
};

/// Evaluates policy(derive_seed(seed, t)) for t < trials, optionally on
/// `parallel` threads; aggregation is in trial order.
MonteCarloSummary run_monte_carlo(const Policy& policy, std::size_t trials, std::uint64_t seed,
                                  std::size_t parallel = 1);

MonteCarloSummary summarize(const std::vector<double>& values);

/// Lower bound on E[nu(G_A)] for independent node availabilities on both
/// sides. `p` lists Pr[A_v] for left nodes then right nodes; edge weights
/// are ignored. Requires |V| <= 16 and p_v >= x_v.
BoundReport check_vertex_bound_independent(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                                           const std::vector<double>& p, const std::string& label = "graph");

/// Vertex-weighted bound with random right nodes only:
/// E[nu(G_A, w)] >= 1/2 sum_v w_v x_v (1 + p_v). Requires |R| <= 16.
BoundReport check_vertex_weighted_bound(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                                        const std::vector<double>& p_right, const std::vector<double>& w_right,
                                        const std::string& label = "graph");

using AvailabilitySampler = std::function<AvailabilityVector(Rng&)>;

/// Availabilities of the offline nodes after dependent rounding of c*x in
/// the first stage of `instance`.
AvailabilitySampler first_stage_availability_sampler(const TwoStageInstance& instance,
                                                     const std::vector<double>& x, double c);

/// Edge-weighted bound E[nu(G_A, w)] >= c sum_e w_e x_e, estimated over
/// `trials` joint availability draws. Throws InputError when an empirical
/// marginal falls below 1 - c(1 - x_v) by more than 4/sqrt(N).
BoundReport check_edge_weighted_bound(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                                      const AvailabilitySampler& sampler, std::size_t trials, std::uint64_t seed,
                                      double c = kEdgeScale, const std::string& label = "graph");

struct NcdCheck {
  std::uint32_t subset = 0;
  double joint = 0.0;            // E[prod_{i in S} A_i]
  double product = 0.0;          // prod_{i in S} E[A_i]
  double joint_complement = 0.0; // E[prod_{i in S} (1 - A_i)]
  double product_complement = 0.0;
  bool pass = false;
};

struct DependenceReport {
  std::size_t n = 0;
  std::size_t trials = 0;
  double margin = 0.0;  // 4 / sqrt(N)
  std::vector<double> means;
  std::vector<std::vector<double>> covariance;
  bool pairwise_pass = true;
  std::vector<NcdCheck> ncd;
  bool ncd_pass = true;

  bool pass() const { return pairwise_pass && ncd_pass; }
  double max_covariance() const;
};

/// Empirical pairwise covariances and negative-cylinder inequalities over
/// all subsets (n <= 6 for the subset part).
DependenceReport test_negative_dependence(const AvailabilitySampler& sampler, std::size_t n, std::size_t trials,
                                          std::uint64_t seed);

struct RatioEstimate {
  MonteCarloSummary summary;
  double lp_on = 0.0;
  double ratio_lp = 0.0;
  double ratio_lp_ci_lower = 0.0;
  std::optional<double> opt_on;
  std::optional<double> ratio_opt;
};

/// Mean policy value with a one-sided 99% CI, and its ratio against the
/// online relaxation and (when the oracle cap allows) the optimum online.
/// Requires trials >= 100.
RatioEstimate estimate_ratio(const TwoStageInstance& instance, const Policy& policy, std::size_t trials,
                             std::uint64_t seed, std::size_t parallel = 1, bool with_oracle = true);

/// Random bipartite tree with |V| <= max_nodes, a random fractional
/// matching x and node probabilities p_v drawn uniformly from [x_v, 1].
struct TreeCase {
  WeightedBipartiteGraph graph;
  std::vector<double> x;
  std::vector<double> p;  // left then right
};
TreeCase random_tree_case(Rng& rng, std::size_t max_nodes = 10);

/// Random bipartite graph with |R| <= max_right, fractional matching x,
/// right-node probabilities in [x_v, 1] and weights in [0, 1].
struct WeightedCase {
  WeightedBipartiteGraph graph;
  std::vector<double> x;
  std::vector<double> p_right;
  std::vector<double> w_right;
};
WeightedCase random_weighted_case(Rng& rng, std::size_t max_left = 5, std::size_t max_right = 8);

std::vector<BoundReport> vertex_bound_battery(std::uint64_t seed, std::size_t count);
std::vector<BoundReport> vertex_weighted_battery(std::uint64_t seed, std::size_t count);

}  // namespace twostage
