#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twostage/instance.hpp"
#include "twostage/matching.hpp"
#include "twostage/numeric.hpp"

namespace twostage {

struct RoundingStep {
  bool cycle = false;
  std::vector<std::size_t> edges;  // walk order
  std::vector<std::size_t> m1;     // odd positions of the walk
  std::vector<std::size_t> m2;     // even positions
  double alpha = 0.0;
  double beta = 0.0;
  bool took_alpha = false;  // M1 raised by alpha, M2 lowered by alpha
  std::vector<double> after;
};

struct RoundingTranscript {
  std::vector<RoundingStep> steps;
};

struct RoundingResult {
  Matching matching;
  std::optional<RoundingTranscript> transcript;
};

/// GKPS dependent rounding of the fractional matching x on `graph`: every
/// edge ends in the matching with probability x_e. Throws
/// std::invalid_argument when x is not a fractional matching.
RoundingResult dependent_round(const WeightedBipartiteGraph& graph, const std::vector<double>& x, Rng& rng,
                               bool record_transcript = false);
RoundingResult dependent_round(const WeightedBipartiteGraph& graph, const std::vector<double>& x,
                               std::uint64_t seed, bool record_transcript = false);

std::string transcript_to_json(const WeightedBipartiteGraph& graph, const RoundingTranscript& transcript);

/// A_i = 1 iff offline node i is unmatched by `matching` (a matching of
/// first_stage_graph(instance)).
AvailabilityVector availabilities_after(const TwoStageInstance& instance, const Matching& matching);

}  // namespace twostage
