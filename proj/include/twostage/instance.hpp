#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "twostage/numeric.hpp"

namespace twostage {

enum class WeightMode { Unweighted, VertexWeighted, EdgeWeighted };

std::string to_string(WeightMode mode);
WeightMode parse_weight_mode(const std::string& text);

/// Raised for malformed input files and for instances that break an invariant.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edge between an online node (first- or second-stage, by dense index) and
/// an offline node.
struct StageEdge {
  std::size_t online = 0;
  std::size_t offline = 0;
  Quantity weight = Quantity::from_fraction(1, 1);

  friend bool operator==(const StageEdge&, const StageEdge&) = default;
};

struct Scenario {
  Quantity probability;
  std::vector<std::string> node_ids;
  std::vector<StageEdge> edges;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Offline nodes I, the deterministic first-stage graph on B_1 x I, and an
/// explicit finite distribution over second-stage graphs.
struct TwoStageInstance {
  WeightMode weight_mode = WeightMode::Unweighted;
  std::vector<std::string> offline_ids;
  std::vector<Quantity> offline_weights;
  std::vector<std::string> first_stage_ids;
  std::vector<StageEdge> first_stage_edges;
  std::vector<Scenario> scenarios;

  std::size_t num_offline() const { return offline_ids.size(); }
  std::size_t num_first_stage() const { return first_stage_ids.size(); }
  std::size_t num_scenarios() const { return scenarios.size(); }

  /// Objective coefficient of an edge under the weight mode: 1, w_i or w_e.
  double effective_weight(const StageEdge& e) const;
  Quantity effective_quantity(const StageEdge& e) const;

  /// True when every probability and every effective weight is a short
  /// rational, so the exact LP backend applies.
  bool is_rational() const;

  /// Throws InputError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const TwoStageInstance&, const TwoStageInstance&) = default;
};

/// Indicator per offline node of being unmatched after stage one.
class AvailabilityVector {
 public:
  AvailabilityVector() = default;
  explicit AvailabilityVector(std::vector<std::uint8_t> available)
      : available_(std::move(available)) {}

  static AvailabilityVector all(std::size_t n, bool value) {
    return AvailabilityVector(std::vector<std::uint8_t>(n, value ? 1 : 0));
  }

  /// Builds from an id-keyed map; keys must be exactly the offline node set.
  static AvailabilityVector from_map(const TwoStageInstance& instance,
                                     const std::map<std::string, int>& by_id);
  std::map<std::string, int> to_map(const TwoStageInstance& instance) const;

  std::size_t size() const { return available_.size(); }
  bool operator[](std::size_t i) const { return available_[i] != 0; }
  void set(std::size_t i, bool value) { available_[i] = value ? 1 : 0; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& raw() const { return available_; }

  friend bool operator==(const AvailabilityVector&, const AvailabilityVector&) = default;

 private:
  std::vector<std::uint8_t> available_;
};

// Generators --------------------------------------------------------------

/// Four unit-weight offline nodes, two first-stage nodes of degree two, and
/// two equiprobable scenarios each closing an 8-cycle. LPon = 4, OPT_on = 7/2.
TwoStageInstance make_eight_cycle();

/// Edge-weighted gap family: 2n offline nodes paired under n first-stage
/// nodes (weight 1) and one scenario per offline pair with a single
/// second-stage node of weight (1 + sqrt 2) n on both edges.
TwoStageInstance make_edge_gap_family(std::size_t n);

/// One offline node, one first-stage node and one certain scenario with one
/// second-stage node, all edges of unit weight.
TwoStageInstance make_single_offline_node();

struct RandomInstanceSpec {
  std::uint64_t seed = 1;
  std::size_t num_offline = 4;
  std::size_t num_first_stage = 2;
  std::size_t num_second_stage = 2;
  double edge_density = 0.5;
  WeightMode weight_mode = WeightMode::Unweighted;
  std::size_t num_scenarios = 2;
};

/// Deterministic function of the spec: edges appear independently with the
/// given density, scenario probabilities are uniform, weights uniform on [0,1].
TwoStageInstance make_random_instance(const RandomInstanceSpec& spec);

// Interchange format -------------------------------------------------------

inline constexpr int kInstanceFormatVersion = 1;

std::string write_instance_json(const TwoStageInstance& instance);
TwoStageInstance read_instance_json(const std::string& text);

void write_instance(const TwoStageInstance& instance, const std::filesystem::path& path);
TwoStageInstance read_instance(const std::filesystem::path& path);

}  // namespace twostage
