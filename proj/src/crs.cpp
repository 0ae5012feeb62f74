#include "twostage/crs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "twostage/simplex.hpp"

namespace twostage {

namespace {

constexpr std::size_t kMaxGround = 16;

bool has(Mask set, std::size_t i) { return (set >> i) & 1u; }

std::string mask_to_string(Mask m, std::size_t n) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!has(m, i)) continue;
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

// Pr[rule selects i] for every i, before thinning.
std::vector<double> rule_profile(const PriorityRule& rule, const ActiveSetDistribution& dist) {
  std::vector<double> q(dist.size(), 0.0);
  for (const auto& [set, p] : dist.atoms()) {
    if (auto i = rule.select(set)) q[*i] += p;
  }
  return q;
}

struct MixtureLp {
  LinearProgram<double> lp;
  std::vector<std::size_t> target_rows;  // elements with y_i > 0
};

MixtureLp mixture_lp(const std::vector<double>& y, const std::vector<std::vector<double>>& profiles) {
  MixtureLp m;
  const std::size_t k = profiles.size();
  for (std::size_t r = 0; r < k; ++r) m.lp.add_variable(0.0);
  const std::size_t t = m.lp.add_variable(1.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.0) continue;
    std::vector<std::pair<std::size_t, double>> row{{t, y[i]}};
    for (std::size_t r = 0; r < k; ++r) {
      if (profiles[r][i] != 0.0) row.push_back({r, -profiles[r][i]});
    }
    m.lp.add_row(std::move(row), Sense::LessEqual, 0.0);
    m.target_rows.push_back(i);
  }
  std::vector<std::pair<std::size_t, double>> total;
  for (std::size_t r = 0; r < k; ++r) total.push_back({r, 1.0});
  m.lp.add_row(std::move(total), Sense::Equal, 1.0);
  return m;
}

PriorityRule rule_from_order(std::vector<std::size_t> order) { return PriorityRule{std::move(order), 0}; }

}  // namespace

ActiveSetDistribution::ActiveSetDistribution(std::size_t n, std::vector<std::pair<Mask, double>> atoms)
    : n_(n), atoms_(std::move(atoms)) {
  if (n_ > kMaxGround) throw std::invalid_argument("active-set distribution: ground set larger than 16");
  double total = 0.0;
  for (const auto& [set, p] : atoms_) {
    if (n_ < 32 && (set >> n_) != 0) {
      throw std::invalid_argument("active-set distribution: subset " + std::to_string(set) + " outside [n]");
    }
    if (!(p >= 0.0)) throw std::invalid_argument("active-set distribution: negative probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "active-set distribution: probabilities sum to " << total;
    throw std::invalid_argument(os.str());
  }
}

ActiveSetDistribution ActiveSetDistribution::independent(const std::vector<double>& p) {
  const std::size_t n = p.size();
  if (n > kMaxGround) throw std::invalid_argument("active-set distribution: ground set larger than 16");
  std::vector<std::pair<Mask, double>> atoms;
  for (Mask set = 0; set < (Mask{1} << n); ++set) {
    double prob = 1.0;
    for (std::size_t i = 0; i < n; ++i) prob *= has(set, i) ? p[i] : 1.0 - p[i];
    if (prob > 0.0) atoms.push_back({set, prob});
  }
  return ActiveSetDistribution(n, std::move(atoms));
}

double ActiveSetDistribution::probability_any(Mask set) const {
  double total = 0.0;
  for (const auto& [a, p] : atoms_) {
    if (a & set) total += p;
  }
  return total;
}

double ActiveSetDistribution::marginal(std::size_t i) const { return probability_any(Mask{1} << i); }

std::optional<std::size_t> PriorityRule::select(Mask active) const {
  for (auto i : order) {
    if (has(active, i) && !has(abstain, i)) return i;
  }
  return std::nullopt;
}

double CrsScheme::selection_probability(std::size_t i, Mask active) const {
  double p = 0.0;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    auto s = rules[r].select(active);
    if (s && *s == i) p += weights[r];
  }
  return p * thinning.at(i);
}

std::vector<double> CrsScheme::marginals(const ActiveSetDistribution& dist) const {
  std::vector<double> out(n, 0.0);
  for (const auto& [set, p] : dist.atoms()) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (auto s = rules[r].select(set)) out[*s] += p * weights[r];
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] *= thinning[i];
  return out;
}

bool CrsScheme::is_monotone(double tolerance) const {
  if (n > 12) throw std::invalid_argument("monotonicity check limited to n <= 12");
  const Mask full = (Mask{1} << n) - 1;
  for (Mask b = 0; b <= full; ++b) {
    // Every a subset-of b, enumerated via the submask trick.
    for (Mask a = b;; a = (a - 1) & b) {
      for (std::size_t i = 0; i < n; ++i) {
        if (has(a, i) && selection_probability(i, a) < selection_probability(i, b) - tolerance) return false;
      }
      if (a == 0) break;
    }
  }
  return true;
}

std::string CrsScheme::to_json() const {
  using nlohmann::json;
  json rs = json::array();
  for (std::size_t r = 0; r < rules.size(); ++r) {
    json abstain = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      if (has(rules[r].abstain, i)) abstain.push_back(i);
    }
    rs.push_back({{"order", rules[r].order}, {"abstain", abstain}, {"weight", weights[r]}});
  }
  return json{{"n", n}, {"rules", rs}, {"thinning", thinning}}.dump(2) + "\n";
}

CrsScheme build_star_crs(const std::vector<double>& y, const ActiveSetDistribution& dist, double c) {
  const std::size_t n = y.size();
  if (n != dist.size()) throw std::invalid_argument("star CRS: y and active set have different sizes");
  if (n == 0) throw std::invalid_argument("star CRS: empty ground set");
  double sum = 0.0;
  for (double v : y) {
    if (!(v >= 0.0)) throw std::invalid_argument("star CRS: y must be non-negative");
    sum += v;
  }
  if (sum > 1.0 + 1e-9) throw std::invalid_argument("star CRS: y sums to more than 1");

  const Mask full = (Mask{1} << n) - 1;
  for (Mask k = 1; k <= full; ++k) {
    double yk = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (has(k, i)) yk += y[i];
    }
    const double reach = dist.probability_any(k);
    if (reach < c * yk - 1e-12) {
      std::ostringstream os;
      os.precision(12);
      os << "star CRS infeasible: Pr[A meets " << mask_to_string(k, n) << "] = " << reach << " < c * y(K) = "
         << c * yk;
      throw CrsInfeasible(os.str(), k);
    }
  }

  std::vector<PriorityRule> rules;
  std::vector<std::vector<double>> profiles;
  LpResult<double> result;
  MixtureLp m;
  if (n <= 8) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    do {
      rules.push_back(rule_from_order(order));
      profiles.push_back(rule_profile(rules.back(), dist));
    } while (std::next_permutation(order.begin(), order.end()));
    m = mixture_lp(y, profiles);
    result = solve_simplex(m.lp);
  } else {
    // Column generation: the pricing problem is solved by ordering
    // elements by their dual price.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] > y[b]; });
    rules.push_back(rule_from_order(order));
    profiles.push_back(rule_profile(rules.back(), dist));
    for (int iter = 0; iter < 5000; ++iter) {
      m = mixture_lp(y, profiles);
      result = solve_simplex(m.lp);
      if (result.status != LpStatus::Optimal) break;
      std::vector<double> z(n, 0.0);
      for (std::size_t r = 0; r < m.target_rows.size(); ++r) z[m.target_rows[r]] = result.duals[r];
      const double v = result.duals.back();
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return z[a] > z[b]; });
      auto rule = rule_from_order(order);
      auto q = rule_profile(rule, dist);
      double price = 0.0;
      for (std::size_t i = 0; i < n; ++i) price += z[i] * q[i];
      if (price <= v + 1e-10) break;
      rules.push_back(std::move(rule));
      profiles.push_back(std::move(q));
    }
  }
  if (result.status != LpStatus::Optimal) throw std::logic_error("star CRS: mixture LP did not solve");

  CrsScheme scheme;
  scheme.n = n;
  std::vector<double> pre(n, 0.0);
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const double w = result.x[r];
    if (w <= 1e-15) continue;
    scheme.rules.push_back(rules[r]);
    scheme.weights.push_back(w);
    for (std::size_t i = 0; i < n; ++i) pre[i] += w * profiles[r][i];
  }
  const double total = std::accumulate(scheme.weights.begin(), scheme.weights.end(), 0.0);
  for (auto& w : scheme.weights) w /= total;
  for (auto& p : pre) p /= total;
  scheme.thinning.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] <= 0.0) continue;
    if (pre[i] < c * y[i] - 1e-9) throw std::logic_error("star CRS: priority mixture fell short of c * y");
    scheme.thinning[i] = std::min(1.0, c * y[i] / pre[i]);
  }
  return scheme;
}

std::vector<double> SetSelectionScheme::inclusion(const ActiveSetDistribution& dist) const {
  std::vector<double> out(dist.size(), 0.0);
  for (const auto& [set, p] : dist.atoms()) {
    auto it = std::find(active_sets.begin(), active_sets.end(), set);
    if (it == active_sets.end()) throw std::invalid_argument("selection scheme: active set not covered");
    for (const auto& [chosen, q] : choices[static_cast<std::size_t>(it - active_sets.begin())]) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (has(chosen, i)) out[i] += p * q;
      }
    }
  }
  return out;
}

LambdaCrsResult check_lambda_crs(const std::vector<Mask>& family, const ActiveSetDistribution& dist,
                                 const std::vector<double>& lambda) {
  const std::size_t n = dist.size();
  if (n > 12) throw std::invalid_argument("lambda CRS check limited to n <= 12");
  if (lambda.size() != n) throw std::invalid_argument("lambda CRS: lambda has the wrong length");
  const Mask full = (Mask{1} << n) - 1;
  std::vector<bool> feasible(std::size_t{1} << n, false);
  for (Mask s : family) {
    if (s > full) throw std::invalid_argument("lambda CRS: family member outside [n]");
    feasible[s] = true;
  }
  if (family.empty()) throw std::invalid_argument("lambda CRS: family is empty");
  for (Mask s : family) {
    for (std::size_t i = 0; i < n; ++i) {
      if (has(s, i) && !feasible[s & ~(Mask{1} << i)]) {
        throw std::invalid_argument("lambda CRS: family is not downward closed (" + mask_to_string(s, n) +
                                    " is present, " + mask_to_string(s & ~(Mask{1} << i), n) + " is not)");
      }
    }
  }

  std::vector<std::pair<Mask, double>> atoms;
  for (const auto& a : dist.atoms()) {
    if (a.second > 0.0) atoms.push_back(a);
  }
  std::vector<std::vector<Mask>> maximal(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const Mask a = atoms[k].first;
    for (Mask s = a;; s = (s - 1) & a) {
      if (feasible[s]) {
        bool is_max = true;
        for (std::size_t j = 0; j < n && is_max; ++j) {
          if (has(a, j) && !has(s, j) && feasible[s | (Mask{1} << j)]) is_max = false;
        }
        if (is_max) maximal[k].push_back(s);
      }
      if (s == 0) break;
    }
  }

  LambdaCrsResult out;
  {
    LinearProgram<double> dual;
    for (std::size_t i = 0; i < n; ++i) dual.add_variable(lambda[i]);
    std::vector<std::size_t> beta(atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k) beta[k] = dual.add_variable(-atoms[k].second);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      for (Mask s : maximal[k]) {
        std::vector<std::pair<std::size_t, double>> row{{beta[k], -1.0}};
        for (std::size_t i = 0; i < n; ++i) {
          if (has(s, i)) row.push_back({i, 1.0});
        }
        dual.add_row(std::move(row), Sense::LessEqual, 0.0);
      }
    }
    std::vector<std::pair<std::size_t, double>> norm;
    for (std::size_t i = 0; i < n; ++i) norm.push_back({i, 1.0});
    dual.add_row(std::move(norm), Sense::LessEqual, 1.0);
    const auto res = solve_simplex(dual);
    if (res.status != LpStatus::Optimal) throw std::logic_error("lambda CRS: dual LP did not solve");
    if (res.objective > 1e-9) {
      out.exists = false;
      out.violation = res.objective;
      const double top = *std::max_element(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
      out.counterexample.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
      for (auto& w : out.counterexample) w /= top;
      return out;
    }
  }

  out.exists = true;
  LinearProgram<double> primal;
  std::vector<std::vector<std::size_t>> var(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t s = 0; s < maximal[k].size(); ++s) {
      var[k].push_back(primal.add_variable(0.0));
      row.push_back({var[k].back(), 1.0});
    }
    primal.add_row(std::move(row), Sense::Equal, 1.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (lambda[i] <= 1e-10) continue;
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      for (std::size_t s = 0; s < maximal[k].size(); ++s) {
        if (has(maximal[k][s], i)) row.push_back({var[k][s], atoms[k].second});
      }
    }
    primal.add_row(std::move(row), Sense::GreaterEqual, lambda[i] - 1e-10);
  }
  const auto res = solve_simplex(primal);
  if (res.status == LpStatus::Optimal) {
    SetSelectionScheme scheme;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      scheme.active_sets.push_back(atoms[k].first);
      std::vector<std::pair<Mask, double>> ch;
      for (std::size_t s = 0; s < maximal[k].size(); ++s) {
        const double p = std::max(0.0, res.x[var[k][s]]);
        if (p > 0.0) ch.push_back({maximal[k][s], p});
      }
      scheme.choices.push_back(std::move(ch));
    }
    out.scheme = std::move(scheme);
  }
  return out;
}

namespace {

bool augment(std::size_t v, const std::vector<std::vector<std::size_t>>& adj, std::vector<std::size_t>& match_left,
             std::vector<bool>& seen) {
  for (auto u : adj[v]) {
    if (seen[u]) continue;
    seen[u] = true;
    if (match_left[u] == SIZE_MAX || augment(match_left[u], adj, match_left, seen)) {
      match_left[u] = v;
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<Mask> transversal_family(const WeightedBipartiteGraph& graph) {
  if (graph.num_right > kMaxGround) throw std::invalid_argument("transversal family limited to 16 right nodes");
  std::vector<std::vector<std::size_t>> adj(graph.num_right);
  for (const auto& e : graph.edges) adj[e.right].push_back(e.left);
  std::vector<Mask> family;
  for (Mask s = 0; s < (Mask{1} << graph.num_right); ++s) {
    std::vector<std::size_t> match_left(graph.num_left, SIZE_MAX);
    bool ok = true;
    for (std::size_t v = 0; v < graph.num_right && ok; ++v) {
      if (!has(s, v)) continue;
      std::vector<bool> seen(graph.num_left, false);
      ok = augment(v, adj, match_left, seen);
    }
    if (ok) family.push_back(s);
  }
  return family;
}

double star_bound_h(std::size_t m, double c) {
  if (m == 0) throw std::invalid_argument("star_bound_h requires m >= 1");
  const double md = static_cast<double>(m);
  return c + std::pow(c, md) * std::pow(1.0 - 1.0 / md, md);
}

std::optional<std::size_t> crs_select(const CrsScheme& scheme, Mask active, Rng& rng) {
  if (active == 0 || scheme.rules.empty()) return std::nullopt;
  double u = rng.uniform();
  std::size_t r = 0;
  while (r + 1 < scheme.rules.size() && u >= scheme.weights[r]) {
    u -= scheme.weights[r];
    ++r;
  }
  auto chosen = scheme.rules[r].select(active);
  if (!chosen) return std::nullopt;
  if (!rng.bernoulli(scheme.thinning[*chosen])) return std::nullopt;
  return chosen;
}

std::optional<std::size_t> crs_select(const CrsScheme& scheme, Mask active, std::uint64_t seed) {
  Rng rng(seed);
  return crs_select(scheme, active, rng);
}

}  // namespace twostage
