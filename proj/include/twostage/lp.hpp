#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twostage/instance.hpp"
#include "twostage/numeric.hpp"
#include "twostage/simplex.hpp"

namespace twostage {

enum class LpBackend { Auto, Exact, Float };

std::string to_string(LpBackend backend);

/// Edge values of a two-stage relaxation. `x` is indexed like
/// `instance.first_stage_edges`, `y[t]` like `instance.scenarios[t].edges`.
struct EdgeValues {
  std::vector<double> x;
  std::vector<std::vector<double>> y;
  double objective = 0.0;
  std::optional<Rational> exact_objective;
  LpBackend backend = LpBackend::Float;

  bool is_exact() const { return backend == LpBackend::Exact; }
};

/// Feasible point of the online relaxation (per-scenario capacity coupling).
struct FractionalSolution : EdgeValues {};

/// Feasible point of the offline relaxation (capacity coupled in expectation).
struct OfflineFractionalSolution : EdgeValues {};

class InfeasibleSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Variable layout shared by both relaxations: first-stage edges first, then
/// the edges of each scenario in order.
struct LpLayout {
  std::size_t first_stage = 0;
  std::vector<std::size_t> scenario_offset;
  std::size_t num_vars = 0;

  explicit LpLayout(const TwoStageInstance& instance);
};

template <class T>
LinearProgram<T> build_lp_on(const TwoStageInstance& instance);

template <class T>
LinearProgram<T> build_lp_off(const TwoStageInstance& instance);

FractionalSolution solve_lp_on(const TwoStageInstance& instance, LpBackend backend = LpBackend::Auto);
OfflineFractionalSolution solve_lp_off(const TwoStageInstance& instance,
                                       LpBackend backend = LpBackend::Auto);

/// First violated constraint of the online relaxation, or nullopt.
std::optional<std::string> lp_on_violation(const TwoStageInstance& instance, const EdgeValues& values);
std::optional<std::string> lp_off_violation(const TwoStageInstance& instance, const EdgeValues& values);

/// Weighted objective sum_e w_e x_e + sum_t p_t sum_e w_e y^t_e. Throws
/// InfeasibleSolution naming the violated constraint.
double lp_objective(const TwoStageInstance& instance, const FractionalSolution& solution);
double lp_objective(const TwoStageInstance& instance, const OfflineFractionalSolution& solution);

std::string solution_to_json(const TwoStageInstance& instance, const EdgeValues& values,
                             const std::string& kind);

/// Reads a solution written by solution_to_json (or by hand). Edges absent
/// from the file take value 0. The objective is recomputed.
FractionalSolution read_lp_on_solution(const TwoStageInstance& instance, const std::string& text);
OfflineFractionalSolution read_lp_off_solution(const TwoStageInstance& instance,
                                               const std::string& text);

}  // namespace twostage
