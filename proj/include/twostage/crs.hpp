#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "twostage/matching.hpp"
#include "twostage/numeric.hpp"

namespace twostage {

using Mask = std::uint32_t;

/// Explicit joint distribution of a random active set A over [n]; subsets
/// are bit masks.
class ActiveSetDistribution {
 public:
  ActiveSetDistribution(std::size_t n, std::vector<std::pair<Mask, double>> atoms);

  /// Product distribution with Pr[i in A] = p[i].
  static ActiveSetDistribution independent(const std::vector<double>& p);

  std::size_t size() const { return n_; }
  const std::vector<std::pair<Mask, double>>& atoms() const { return atoms_; }

  double probability_any(Mask set) const;  // Pr[A & set != 0]
  double marginal(std::size_t i) const;

 private:
  std::size_t n_;
  std::vector<std::pair<Mask, double>> atoms_;
};

/// Deterministic rule: select the first active element of `order` that is
/// not in `abstain`.
struct PriorityRule {
  std::vector<std::size_t> order;
  Mask abstain = 0;

  std::optional<std::size_t> select(Mask active) const;
};

/// Mixture over priority rules followed by per-element thinning.
struct CrsScheme {
  std::size_t n = 0;
  std::vector<PriorityRule> rules;
  std::vector<double> weights;
  std::vector<double> thinning;

  /// Pr[i selected | A = active], marginalised over the mixture and thinning.
  double selection_probability(std::size_t i, Mask active) const;
  std::vector<double> marginals(const ActiveSetDistribution& dist) const;

  /// Exhaustive check over all i in A subset-of B; requires n <= 12.
  bool is_monotone(double tolerance = 1e-12) const;

  std::string to_json() const;
};

/// Raised when the star-CRS feasibility condition fails; carries the
/// violating subset.
class CrsInfeasible : public std::runtime_error {
 public:
  CrsInfeasible(const std::string& what, Mask witness) : std::runtime_error(what), witness(witness) {}
  Mask witness;
};

/// Monotone scheme with Pr[i selected] = c * y_i for every i. Throws
/// CrsInfeasible when some K has Pr[A meets K] < c * y(K).
CrsScheme build_star_crs(const std::vector<double>& y, const ActiveSetDistribution& dist,
                         double c = kEdgeScale);

/// Selection probabilities p_{S|A} over maximal feasible S subset-of A.
struct SetSelectionScheme {
  std::vector<Mask> active_sets;
  std::vector<std::vector<std::pair<Mask, double>>> choices;

  /// Pr[i in S] under `dist` (whose atoms must match active_sets).
  std::vector<double> inclusion(const ActiveSetDistribution& dist) const;
};

struct LambdaCrsResult {
  bool exists = false;
  /// Weights w >= 0 (max entry 1) with sum w_i lambda_i > E[max_{S in F, S in A} w(S)].
  std::vector<double> counterexample;
  double violation = 0.0;
  std::optional<SetSelectionScheme> scheme;
};

/// Decides whether a lambda-bounded CRS exists for a downward-closed family.
/// Throws std::invalid_argument when the family is not downward closed or
/// n > 12.
LambdaCrsResult check_lambda_crs(const std::vector<Mask>& family, const ActiveSetDistribution& dist,
                                 const std::vector<double>& lambda);

/// Independent sets of the transversal matroid on the right nodes of `graph`:
/// subsets that can be perfectly matched into the left side.
std::vector<Mask> transversal_family(const WeightedBipartiteGraph& graph);

/// h(m) = c + c^m (1 - 1/m)^m.
double star_bound_h(std::size_t m, double c = kEdgeScale);

/// Samples a rule, applies it to `active`, then thins.
std::optional<std::size_t> crs_select(const CrsScheme& scheme, Mask active, Rng& rng);
std::optional<std::size_t> crs_select(const CrsScheme& scheme, Mask active, std::uint64_t seed);

}  // namespace twostage
