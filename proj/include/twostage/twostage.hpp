#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "twostage/instance.hpp"
#include "twostage/lp.hpp"
#include "twostage/matching.hpp"
#include "twostage/numeric.hpp"

namespace twostage {

/// Raised when an exhaustive routine would exceed its enumeration cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 1 for unweighted and vertex-weighted instances, 2*sqrt(2) - 2 otherwise.
double default_scale(WeightMode mode);

/// One realised run: first-stage matching (indices into first_stage_edges),
/// second-stage matching (indices into the realised scenario's edges).
struct TwoStageRun {
  Matching first_stage;
  Matching second_stage;
  std::size_t scenario = 0;
  double first_value = 0.0;
  double second_value = 0.0;
  double value = 0.0;
  std::uint64_t seed = 0;
};

/// Throws std::logic_error when the two stages share an offline node or the
/// second stage uses a node matched in the first.
void check_run(const TwoStageInstance& instance, const TwoStageRun& run);

/// Expected max-weight second-stage value over all scenarios, as a function
/// of the availability pattern. Tabulated up front for small |I|.
class SecondStageValue {
 public:
  explicit SecondStageValue(const TwoStageInstance& instance);
  double operator()(const AvailabilityVector& available) const;

 private:
  std::vector<double> probabilities_;
  std::vector<WeightedBipartiteGraph> graphs_;
  std::vector<double> table_;  // indexed by availability mask when tabulated
};

/// Round c*x by dependent rounding, then take a max-weight matching of the
/// realised scenario on the remaining offline nodes.
TwoStageRun round_augment(const TwoStageInstance& instance, const FractionalSolution& solution, double c,
                          std::uint64_t seed, std::size_t scenario);

/// Expected value over scenarios of one rounding draw, given a seed.
using Policy = std::function<double(std::uint64_t seed)>;

/// Round-Augment as a policy; only the first-stage vector x is used.
Policy round_augment_policy(const TwoStageInstance& instance, const std::vector<double>& x, double c);

struct OracleResult {
  double value = 0.0;
  std::optional<Rational> exact_value;
  Matching first_stage;
  std::size_t matchings_enumerated = 0;
};

inline constexpr std::size_t kOracleEdgeCap = 20;

/// Best expected value over all integral first-stage matchings followed by
/// max-weight second-stage augmentation. Exact when the instance is rational.
OracleResult brute_force_opt_online(const TwoStageInstance& instance);

/// Offline rounding: independent dependent roundings of x and
/// of y^t; second-stage edges at offline nodes taken in stage one are dropped.
TwoStageRun offline_round(const TwoStageInstance& instance, const OfflineFractionalSolution& solution,
                          std::uint64_t seed, std::size_t scenario);

struct OfflineRoundStats {
  std::size_t trials = 0;
  std::vector<double> matched_rate;  // per offline node, scenario expectation exact
  std::vector<double> target;        // x_i + E[y_i]
  double mean_value = 0.0;
};

OfflineRoundStats offline_round_rates(const TwoStageInstance& instance, const OfflineFractionalSolution& solution,
                                      std::size_t trials, std::uint64_t seed);

std::size_t sample_size_vertex(std::size_t num_offline, double epsilon, double delta);
std::size_t sample_size_edge(std::size_t num_edges, double epsilon, double delta, double max_weight,
                             double min_weight);

/// Uniform distribution over k sampled scenario ids.
struct EmpiricalDistribution {
  std::vector<std::size_t> scenario_ids;    // distinct ids, ascending
  std::vector<std::size_t> multiplicities;  // positive, aligned with ids
  std::size_t k = 0;

  static EmpiricalDistribution from_samples(const std::vector<std::size_t>& samples);

  /// Copy of `instance` whose scenarios are the sampled ones with
  /// probabilities multiplicity / k.
  TwoStageInstance apply(const TwoStageInstance& instance) const;
};

using ScenarioSampler = std::function<std::size_t(Rng&)>;

/// I.i.d. draws from the instance's scenario distribution.
ScenarioSampler scenario_sampler(const TwoStageInstance& instance);

struct SampledPolicy {
  EmpiricalDistribution empirical;
  FractionalSolution lp;  // solution of the relaxation over the empirical instance
  double c = 1.0;

  /// Round-Augment trained on the empirical distribution, evaluated against
  /// the true scenario distribution of `instance`.
  Policy evaluate_on(const TwoStageInstance& instance) const;
};

SampledPolicy sample_based_round_augment(const TwoStageInstance& instance, const ScenarioSampler& sampler,
                                         std::size_t k, double c, std::uint64_t seed);

/// Closed form of the optimum online value of make_edge_gap_family(n):
/// max over m in 0..n of m + (1 - m(m-1)/(2n(2n-1))) (1 + sqrt 2) n.
double edge_gap_opt_online_closed_form(std::size_t n);

}  // namespace twostage
