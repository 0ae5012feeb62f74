#include "twostage/lp.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace twostage {

namespace {

constexpr double kFeasTol = 1e-9;

template <class T>
T weight_as(const TwoStageInstance& inst, const StageEdge& e);

template <>
double weight_as<double>(const TwoStageInstance& inst, const StageEdge& e) {
  return inst.effective_weight(e);
}

template <>
Rational weight_as<Rational>(const TwoStageInstance& inst, const StageEdge& e) {
  const auto q = inst.effective_quantity(e);
  if (!q.exact) throw InputError("exact LP backend requires rational weights");
  return *q.exact;
}

template <class T>
T probability_as(const Scenario& s);

template <>
double probability_as<double>(const Scenario& s) {
  return s.probability.value;
}

template <>
Rational probability_as<Rational>(const Scenario& s) {
  if (!s.probability.exact) throw InputError("exact LP backend requires rational probabilities");
  return *s.probability.exact;
}

template <class T>
using Coeffs = std::vector<std::pair<std::size_t, T>>;

template <class T>
void add_if_nonempty(LinearProgram<T>& lp, Coeffs<T> coeffs) {
  if (!coeffs.empty()) lp.add_row(std::move(coeffs), Sense::LessEqual, T(1));
}

// Shared objective and online-capacity rows.
template <class T>
void add_objective_and_online_rows(const TwoStageInstance& inst, const LpLayout& layout,
                                   LinearProgram<T>& lp) {
  for (const auto& e : inst.first_stage_edges) lp.add_variable(weight_as<T>(inst, e));
  for (const auto& s : inst.scenarios) {
    const T p = probability_as<T>(s);
    for (const auto& e : s.edges) lp.add_variable(T(p * weight_as<T>(inst, e)));
  }
  std::vector<Coeffs<T>> per_a(inst.num_first_stage());
  for (std::size_t k = 0; k < inst.first_stage_edges.size(); ++k) {
    per_a[inst.first_stage_edges[k].online].push_back({k, T(1)});
  }
  for (auto& c : per_a) add_if_nonempty(lp, std::move(c));
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) {
    const auto& s = inst.scenarios[t];
    std::vector<Coeffs<T>> per_b(s.node_ids.size());
    for (std::size_t k = 0; k < s.edges.size(); ++k) {
      per_b[s.edges[k].online].push_back({layout.scenario_offset[t] + k, T(1)});
    }
    for (auto& c : per_b) add_if_nonempty(lp, std::move(c));
  }
}

template <class T>
void fill_solution(const TwoStageInstance& inst, const LpLayout& layout, const LpResult<T>& result,
                   EdgeValues& out) {
  auto value = [&](std::size_t v) {
    if constexpr (std::is_same_v<T, double>) {
      double d = result.x[v];
      if (std::fabs(d) < 1e-12) d = 0.0;
      if (std::fabs(d - 1.0) < 1e-12) d = 1.0;
      return d;
    } else {
      return to_double(result.x[v]);
    }
  };
  out.x.resize(inst.first_stage_edges.size());
  for (std::size_t k = 0; k < out.x.size(); ++k) out.x[k] = value(k);
  out.y.resize(inst.num_scenarios());
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) {
    out.y[t].resize(inst.scenarios[t].edges.size());
    for (std::size_t k = 0; k < out.y[t].size(); ++k) out.y[t][k] = value(layout.scenario_offset[t] + k);
  }
  if constexpr (std::is_same_v<T, double>) {
    out.objective = result.objective;
    out.exact_objective.reset();
    out.backend = LpBackend::Float;
  } else {
    out.objective = to_double(result.objective);
    out.exact_objective = result.objective;
    out.backend = LpBackend::Exact;
  }
}

LpBackend resolve_backend(const TwoStageInstance& inst, LpBackend requested) {
  if (requested == LpBackend::Auto) return inst.is_rational() ? LpBackend::Exact : LpBackend::Float;
  if (requested == LpBackend::Exact && !inst.is_rational()) {
    throw InputError("exact LP backend requested but instance data is not rational");
  }
  return requested;
}

template <class Solution, class T>
Solution solve_with(const TwoStageInstance& inst, LinearProgram<T> (*build)(const TwoStageInstance&)) {
  const LpLayout layout(inst);
  const auto lp = build(inst);
  const auto result = solve_simplex(lp);
  if (result.status != LpStatus::Optimal) {
    throw std::logic_error("relaxation is always feasible and bounded; simplex reported otherwise");
  }
  Solution out;
  fill_solution(inst, layout, result, out);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::optional<std::string> check_shape_and_range(const TwoStageInstance& inst, const EdgeValues& v) {
  if (v.x.size() != inst.first_stage_edges.size()) return "first-stage vector has wrong length";
  if (v.y.size() != inst.num_scenarios()) return "scenario vector has wrong length";
  auto in_range = [](double d) { return std::isfinite(d) && d >= -kFeasTol && d <= 1.0 + kFeasTol; };
  for (std::size_t k = 0; k < v.x.size(); ++k) {
    if (!in_range(v.x[k])) {
      const auto& e = inst.first_stage_edges[k];
      return "x(" + inst.first_stage_ids[e.online] + ", " + inst.offline_ids[e.offline] + ") = " + fmt(v.x[k]) +
             " outside [0,1]";
    }
  }
  for (std::size_t t = 0; t < v.y.size(); ++t) {
    const auto& s = inst.scenarios[t];
    if (v.y[t].size() != s.edges.size()) return "scenario " + std::to_string(t) + " vector has wrong length";
    for (std::size_t k = 0; k < v.y[t].size(); ++k) {
      if (!in_range(v.y[t][k])) {
        const auto& e = s.edges[k];
        return "y[" + std::to_string(t) + "](" + s.node_ids[e.online] + ", " + inst.offline_ids[e.offline] +
               ") = " + fmt(v.y[t][k]) + " outside [0,1]";
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_online_capacity(const TwoStageInstance& inst, const EdgeValues& v) {
  std::vector<double> load(inst.num_first_stage(), 0.0);
  for (std::size_t k = 0; k < v.x.size(); ++k) load[inst.first_stage_edges[k].online] += v.x[k];
  for (std::size_t a = 0; a < load.size(); ++a) {
    if (load[a] > 1.0 + kFeasTol) {
      return "first-stage node '" + inst.first_stage_ids[a] + "' has load " + fmt(load[a]) + " > 1";
    }
  }
  for (std::size_t t = 0; t < v.y.size(); ++t) {
    const auto& s = inst.scenarios[t];
    std::vector<double> l2(s.node_ids.size(), 0.0);
    for (std::size_t k = 0; k < v.y[t].size(); ++k) l2[s.edges[k].online] += v.y[t][k];
    for (std::size_t b = 0; b < l2.size(); ++b) {
      if (l2[b] > 1.0 + kFeasTol) {
        return "second-stage node '" + s.node_ids[b] + "' in scenario " + std::to_string(t) + " has load " +
               fmt(l2[b]) + " > 1";
      }
    }
  }
  return std::nullopt;
}

std::vector<double> first_stage_offline_load(const TwoStageInstance& inst, const EdgeValues& v) {
  std::vector<double> xi(inst.num_offline(), 0.0);
  for (std::size_t k = 0; k < v.x.size(); ++k) xi[inst.first_stage_edges[k].offline] += v.x[k];
  return xi;
}

std::vector<double> scenario_offline_load(const TwoStageInstance& inst, const EdgeValues& v, std::size_t t) {
  std::vector<double> yi(inst.num_offline(), 0.0);
  const auto& s = inst.scenarios[t];
  for (std::size_t k = 0; k < v.y[t].size(); ++k) yi[s.edges[k].offline] += v.y[t][k];
  return yi;
}

double weighted_sum(const TwoStageInstance& inst, const EdgeValues& v) {
  double total = 0.0;
  for (std::size_t k = 0; k < v.x.size(); ++k) total += inst.effective_weight(inst.first_stage_edges[k]) * v.x[k];
  for (std::size_t t = 0; t < v.y.size(); ++t) {
    const auto& s = inst.scenarios[t];
    double stage = 0.0;
    for (std::size_t k = 0; k < v.y[t].size(); ++k) stage += inst.effective_weight(s.edges[k]) * v.y[t][k];
    total += s.probability.value * stage;
  }
  return total;
}

template <class Solution>
Solution read_solution(const TwoStageInstance& inst, const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("solution: JSON parse error: ") + e.what());
  }
  Solution out;
  out.x.assign(inst.first_stage_edges.size(), 0.0);
  out.y.resize(inst.num_scenarios());
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) out.y[t].assign(inst.scenarios[t].edges.size(), 0.0);

  auto fill = [&](const json& arr, const std::string& path, const std::vector<std::string>& online_ids,
                  const std::vector<StageEdge>& edges, std::vector<double>& dst) {
    if (!arr.is_array()) throw InputError(path + ": expected an array");
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      index[{online_ids[edges[k].online], inst.offline_ids[edges[k].offline]}] = k;
    }
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string here = path + "[" + std::to_string(k) + "]";
      const auto& item = arr[k];
      if (!item.is_object() || !item.contains("from") || !item.contains("to") || !item.contains("value") ||
          !item["from"].is_string() || !item["to"].is_string() || !item["value"].is_number()) {
        throw InputError(here + ": expected {from, to, value}");
      }
      const auto key = std::make_pair(item["from"].get<std::string>(), item["to"].get<std::string>());
      auto it = index.find(key);
      if (it == index.end()) {
        throw InputError(here + ": edge " + key.first + " -> " + key.second + " is not in the instance");
      }
      dst[it->second] = item["value"].get<double>();
    }
  };

  if (!doc.is_object()) throw InputError("solution: expected an object");
  if (doc.contains("first_stage")) fill(doc["first_stage"], "first_stage", inst.first_stage_ids, inst.first_stage_edges, out.x);
  if (doc.contains("scenarios")) {
    const auto& sc = doc["scenarios"];
    if (!sc.is_array() || sc.size() != inst.num_scenarios()) {
      throw InputError("scenarios: expected one entry per instance scenario");
    }
    for (std::size_t t = 0; t < sc.size(); ++t) {
      fill(sc[t], "scenarios[" + std::to_string(t) + "]", inst.scenarios[t].node_ids, inst.scenarios[t].edges,
           out.y[t]);
    }
  }
  out.backend = LpBackend::Float;
  out.objective = lp_objective(inst, out);
  return out;
}

}  // namespace

std::string to_string(LpBackend backend) {
  switch (backend) {
    case LpBackend::Auto: return "auto";
    case LpBackend::Exact: return "exact";
    case LpBackend::Float: return "float";
  }
  return "unknown";
}

LpLayout::LpLayout(const TwoStageInstance& instance) {
  first_stage = instance.first_stage_edges.size();
  std::size_t next = first_stage;
  for (const auto& s : instance.scenarios) {
    scenario_offset.push_back(next);
    next += s.edges.size();
  }
  num_vars = next;
}

template <class T>
LinearProgram<T> build_lp_on(const TwoStageInstance& inst) {
  const LpLayout layout(inst);
  LinearProgram<T> lp;
  add_objective_and_online_rows(inst, layout, lp);
  std::vector<Coeffs<T>> x_at(inst.num_offline());
  for (std::size_t k = 0; k < inst.first_stage_edges.size(); ++k) {
    x_at[inst.first_stage_edges[k].offline].push_back({k, T(1)});
  }
  // Coupling rows only where y_i^t has support; x_i <= 1 stands alone when
  // some scenario leaves i untouched.
  std::vector<bool> uncoupled(inst.num_offline(), false);
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) {
    std::vector<Coeffs<T>> y_at(inst.num_offline());
    const auto& s = inst.scenarios[t];
    for (std::size_t k = 0; k < s.edges.size(); ++k) {
      y_at[s.edges[k].offline].push_back({layout.scenario_offset[t] + k, T(1)});
    }
    for (std::size_t i = 0; i < inst.num_offline(); ++i) {
      if (y_at[i].empty()) {
        uncoupled[i] = true;
        continue;
      }
      Coeffs<T> row = x_at[i];
      row.insert(row.end(), y_at[i].begin(), y_at[i].end());
      add_if_nonempty(lp, std::move(row));
    }
  }
  for (std::size_t i = 0; i < inst.num_offline(); ++i) {
    if (uncoupled[i] && x_at[i].size() > 1) add_if_nonempty(lp, Coeffs<T>(x_at[i]));
  }
  return lp;
}

template <class T>
LinearProgram<T> build_lp_off(const TwoStageInstance& inst) {
  const LpLayout layout(inst);
  LinearProgram<T> lp;
  add_objective_and_online_rows(inst, layout, lp);
  std::vector<Coeffs<T>> expectation(inst.num_offline());
  for (std::size_t k = 0; k < inst.first_stage_edges.size(); ++k) {
    expectation[inst.first_stage_edges[k].offline].push_back({k, T(1)});
  }
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) {
    const auto& s = inst.scenarios[t];
    const T p = probability_as<T>(s);
    std::vector<Coeffs<T>> per_i(inst.num_offline());
    for (std::size_t k = 0; k < s.edges.size(); ++k) {
      const std::size_t var = layout.scenario_offset[t] + k;
      per_i[s.edges[k].offline].push_back({var, T(1)});
      if (!SimplexTolerance<T>::zero(p)) expectation[s.edges[k].offline].push_back({var, p});
    }
    for (auto& r : per_i) add_if_nonempty(lp, std::move(r));
  }
  for (auto& r : expectation) add_if_nonempty(lp, std::move(r));
  return lp;
}

template LinearProgram<double> build_lp_on<double>(const TwoStageInstance&);
template LinearProgram<Rational> build_lp_on<Rational>(const TwoStageInstance&);
template LinearProgram<double> build_lp_off<double>(const TwoStageInstance&);
template LinearProgram<Rational> build_lp_off<Rational>(const TwoStageInstance&);

FractionalSolution solve_lp_on(const TwoStageInstance& instance, LpBackend backend) {
  instance.validate();
  if (resolve_backend(instance, backend) == LpBackend::Exact) {
    return solve_with<FractionalSolution, Rational>(instance, &build_lp_on<Rational>);
  }
  return solve_with<FractionalSolution, double>(instance, &build_lp_on<double>);
}

OfflineFractionalSolution solve_lp_off(const TwoStageInstance& instance, LpBackend backend) {
  instance.validate();
  if (resolve_backend(instance, backend) == LpBackend::Exact) {
    return solve_with<OfflineFractionalSolution, Rational>(instance, &build_lp_off<Rational>);
  }
  return solve_with<OfflineFractionalSolution, double>(instance, &build_lp_off<double>);
}

std::optional<std::string> lp_on_violation(const TwoStageInstance& inst, const EdgeValues& v) {
  if (auto err = check_shape_and_range(inst, v)) return err;
  if (auto err = check_online_capacity(inst, v)) return err;
  const auto xi = first_stage_offline_load(inst, v);
  for (std::size_t t = 0; t < v.y.size(); ++t) {
    const auto yi = scenario_offline_load(inst, v, t);
    for (std::size_t i = 0; i < xi.size(); ++i) {
      if (xi[i] + yi[i] > 1.0 + kFeasTol) {
        return "x_i + y_i <= 1 violated at offline node '" + inst.offline_ids[i] + "' in scenario " +
               std::to_string(t) + ": " + fmt(xi[i] + yi[i]);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> lp_off_violation(const TwoStageInstance& inst, const EdgeValues& v) {
  if (auto err = check_shape_and_range(inst, v)) return err;
  if (auto err = check_online_capacity(inst, v)) return err;
  auto total = first_stage_offline_load(inst, v);
  for (std::size_t t = 0; t < v.y.size(); ++t) {
    const auto yi = scenario_offline_load(inst, v, t);
    for (std::size_t i = 0; i < yi.size(); ++i) {
      if (yi[i] > 1.0 + kFeasTol) {
        return "offline node '" + inst.offline_ids[i] + "' has load " + fmt(yi[i]) + " > 1 in scenario " +
               std::to_string(t);
      }
      total[i] += inst.scenarios[t].probability.value * yi[i];
    }
  }
  for (std::size_t i = 0; i < total.size(); ++i) {
    if (total[i] > 1.0 + kFeasTol) {
      return "x_i + E[y_i] <= 1 violated at offline node '" + inst.offline_ids[i] + "': " + fmt(total[i]);
    }
  }
  return std::nullopt;
}

double lp_objective(const TwoStageInstance& instance, const FractionalSolution& solution) {
  if (auto err = lp_on_violation(instance, solution)) throw InfeasibleSolution(*err);
  return weighted_sum(instance, solution);
}

double lp_objective(const TwoStageInstance& instance, const OfflineFractionalSolution& solution) {
  if (auto err = lp_off_violation(instance, solution)) throw InfeasibleSolution(*err);
  return weighted_sum(instance, solution);
}

std::string solution_to_json(const TwoStageInstance& inst, const EdgeValues& v, const std::string& kind) {
  using nlohmann::json;
  json doc;
  doc["kind"] = kind;
  doc["backend"] = to_string(v.backend);
  doc["objective"] = v.objective;
  if (v.exact_objective) doc["objective_exact"] = to_string(*v.exact_objective);
  auto edges = [&](const std::vector<std::string>& online, const std::vector<StageEdge>& es,
                   const std::vector<double>& vals) {
    json arr = json::array();
    for (std::size_t k = 0; k < es.size(); ++k) {
      arr.push_back({{"from", online[es[k].online]}, {"to", inst.offline_ids[es[k].offline]}, {"value", vals[k]}});
    }
    return arr;
  };
  doc["first_stage"] = edges(inst.first_stage_ids, inst.first_stage_edges, v.x);
  json sc = json::array();
  for (std::size_t t = 0; t < inst.num_scenarios(); ++t) {
    sc.push_back(edges(inst.scenarios[t].node_ids, inst.scenarios[t].edges, v.y[t]));
  }
  doc["scenarios"] = std::move(sc);
  return doc.dump(2) + "\n";
}

FractionalSolution read_lp_on_solution(const TwoStageInstance& instance, const std::string& text) {
  return read_solution<FractionalSolution>(instance, text);
}

OfflineFractionalSolution read_lp_off_solution(const TwoStageInstance& instance, const std::string& text) {
  return read_solution<OfflineFractionalSolution>(instance, text);
}

}  // namespace twostage
