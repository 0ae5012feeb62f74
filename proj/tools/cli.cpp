#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "twostage/crs.hpp"
#include "twostage/instance.hpp"
#include "twostage/lp.hpp"
#include "twostage/matching.hpp"
#include "twostage/rounding.hpp"
#include "twostage/twostage.hpp"
#include "twostage/verify.hpp"

namespace twostage::cli {

namespace {

using nlohmann::json;

class VerificationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

/// Rows of scalar cells rendered as versioned CSV or as a JSON array.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<json> row) {
    if (row.size() != columns_.size()) throw std::logic_error("table row has the wrong width");
    rows_.push_back(std::move(row));
  }
  void comment(const std::string& line) { comments_.push_back(line); }

  void write_csv(std::ostream& os) const {
    os << "# twostage-csv v1\n";
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << "\n";
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell(row[c]);
      os << "\n";
    }
    for (const auto& line : comments_) os << "# " << line << "\n";
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& row : rows_) {
      json obj = json::object();
      for (std::size_t c = 0; c < row.size(); ++c) obj[columns_[c]] = row[c];
      arr.push_back(std::move(obj));
    }
    return arr;
  }

 private:
  static std::string cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    return fmt(v.get<double>());
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<json>> rows_;
  std::vector<std::string> comments_;
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Config {
  std::string instance_path;
  std::string generate;
  std::string mode;
  std::optional<double> c;
  std::size_t trials = 0;  // 0 selects the command default
  std::uint64_t seed = 1;
  std::string out_path;
  std::string format = "csv";
  std::size_t parallel = 1;
  bool trace = false;
  bool require_oracle = false;
  std::string solution_path;
  bool offline = false;
  std::string backend = "auto";
  std::size_t k = 100;
  std::size_t repetitions = 1;
  std::size_t n_min = 1;
  std::size_t n_max = 4;
  std::size_t count = 200;
  std::vector<double> y;
  std::vector<double> p;
  std::vector<double> lambda;
  std::size_t rank = 1;
};

std::map<std::string, std::string> parse_params(const std::string& text, const std::string& spec) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("--generate " + spec + ": expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  std::istringstream is(text);
  T v{};
  if (!(is >> v) || !is.eof()) throw InputError(what + ": cannot parse '" + text + "'");
  return v;
}

TwoStageInstance generate_instance(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const auto params = colon == std::string::npos ? std::map<std::string, std::string>{}
                                                 : parse_params(spec.substr(colon + 1), spec);
  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) throw InputError("--generate " + spec + ": unknown parameter '" + key + "'");
    }
  };
  if (family == "eight-cycle") {
    check_keys({});
    return make_eight_cycle();
  }
  if (family == "single-node") {
    check_keys({});
    return make_single_offline_node();
  }
  if (family == "edge-gap") {
    check_keys({"n"});
    const auto n = parse_number<long long>(get("n", "1"), "edge-gap n");
    if (n < 1) throw InputError("edge-gap: n must be at least 1");
    return make_edge_gap_family(static_cast<std::size_t>(n));
  }
  if (family == "random") {
    check_keys({"seed", "offline", "first", "second", "density", "mode", "scenarios"});
    RandomInstanceSpec rs;
    rs.seed = parse_number<std::uint64_t>(get("seed", "1"), "random seed");
    rs.num_offline = parse_number<std::size_t>(get("offline", "4"), "random offline");
    rs.num_first_stage = parse_number<std::size_t>(get("first", "2"), "random first");
    rs.num_second_stage = parse_number<std::size_t>(get("second", "2"), "random second");
    rs.edge_density = parse_number<double>(get("density", "0.5"), "random density");
    rs.weight_mode = parse_weight_mode(get("mode", "unweighted"));
    rs.num_scenarios = parse_number<std::size_t>(get("scenarios", "2"), "random scenarios");
    return make_random_instance(rs);
  }
  throw InputError("--generate: unknown family '" + family + "' (expected eight-cycle, edge-gap, single-node, random)");
}

// Switching modes resets the weights the new mode ignores to 1.
void apply_mode(TwoStageInstance& inst, const std::string& mode) {
  if (mode.empty()) return;
  inst.weight_mode = parse_weight_mode(mode);
  const auto one = Quantity::from_fraction(1, 1);
  if (inst.weight_mode != WeightMode::VertexWeighted) {
    for (auto& w : inst.offline_weights) w = one;
  }
  if (inst.weight_mode != WeightMode::EdgeWeighted) {
    for (auto& e : inst.first_stage_edges) e.weight = one;
    for (auto& s : inst.scenarios) {
      for (auto& e : s.edges) e.weight = one;
    }
  }
  inst.validate();
}

struct LoadedInstance {
  TwoStageInstance instance;
  std::string name;
};

LoadedInstance load_instance(const Config& cfg, bool allow_default_eight_cycle = false) {
  LoadedInstance li;
  if (!cfg.instance_path.empty() && !cfg.generate.empty()) {
    throw InputError("give exactly one of --instance and --generate");
  }
  if (!cfg.instance_path.empty()) {
    li.instance = read_instance(cfg.instance_path);
    li.name = cfg.instance_path;
  } else if (!cfg.generate.empty()) {
    li.instance = generate_instance(cfg.generate);
    li.name = cfg.generate;
  } else if (allow_default_eight_cycle) {
    li.instance = make_eight_cycle();
    li.name = "eight-cycle";
  } else {
    throw InputError("an instance source is required (--instance PATH or --generate SPEC)");
  }
  apply_mode(li.instance, cfg.mode);
  return li;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double scale_for(const Config& cfg, const TwoStageInstance& inst) {
  const double c = cfg.c ? *cfg.c : default_scale(inst.weight_mode);
  if (!(c >= 0.0 && c <= 1.0)) throw InputError("--c must lie in [0, 1]");
  return c;
}

std::size_t trials_or(const Config& cfg, std::size_t fallback) { return cfg.trials ? cfg.trials : fallback; }

LpBackend parse_backend(const std::string& text) {
  if (text == "auto") return LpBackend::Auto;
  if (text == "exact") return LpBackend::Exact;
  if (text == "float") return LpBackend::Float;
  throw InputError("unknown backend '" + text + "' (expected auto, exact or float)");
}

std::string exact_or_float(const std::optional<Rational>& q, double v) { return q ? to_string(*q) : fmt(v); }

void emit(const Config& cfg, const Table& table, std::ostream& out) {
  std::ostringstream buffer;
  if (cfg.format == "json") {
    buffer << table.to_json().dump(2) << "\n";
  } else {
    table.write_csv(buffer);
  }
  if (cfg.out_path.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(cfg.out_path);
    if (!file) throw InputError("cannot open '" + cfg.out_path + "' for writing");
    file << buffer.str();
  }
}

void emit_text(const Config& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << text;
  } else {
    std::ofstream file(cfg.out_path);
    if (!file) throw InputError("cannot open '" + cfg.out_path + "' for writing");
    file << text;
  }
}

// Commands ------------------------------------------------------------------

int cmd_solve(const Config& cfg, std::ostream& out) {
  const auto li = load_instance(cfg);
  const auto backend = parse_backend(cfg.backend);
  const auto on = solve_lp_on(li.instance, backend);
  std::optional<OfflineFractionalSolution> off;
  if (cfg.offline) off = solve_lp_off(li.instance, backend);
  if (cfg.format == "json") {
    json doc{{"instance", li.name}, {"lp_on", json::parse(solution_to_json(li.instance, on, "lp_on"))}};
    if (off) doc["lp_off"] = json::parse(solution_to_json(li.instance, *off, "lp_off"));
    emit_text(cfg, doc.dump(2) + "\n", out);
    return kExitOk;
  }
  Table t({"instance", "relaxation", "backend", "objective", "objective_exact"});
  t.add({li.name, "lp_on", to_string(on.backend), on.objective, exact_or_float(on.exact_objective, on.objective)});
  if (off) {
    t.add({li.name, "lp_off", to_string(off->backend), off->objective,
           exact_or_float(off->exact_objective, off->objective)});
  }
  emit(cfg, t, out);
  return kExitOk;
}

Table run_table() {
  return Table({"instance", "algorithm", "mode", "c", "trials", "seed", "k", "repetition", "mean", "ci_lower",
                "lp_on", "opt_on", "ratio_lp", "ratio_opt"});
}

std::optional<double> oracle_value(const Config& cfg, const TwoStageInstance& inst) {
  if (inst.first_stage_edges.size() > kOracleEdgeCap) {
    if (cfg.require_oracle) return brute_force_opt_online(inst).value;  // throws CapExceeded
    return std::nullopt;
  }
  return brute_force_opt_online(inst).value;
}

int cmd_run_round_augment(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto li = load_instance(cfg);
  const double c = scale_for(cfg, li.instance);
  const auto lp = cfg.solution_path.empty() ? solve_lp_on(li.instance)
                                            : read_lp_on_solution(li.instance, read_file(cfg.solution_path));
  const auto opt_on = oracle_value(cfg, li.instance);
  const auto policy = round_augment_policy(li.instance, lp.x, c);
  const std::size_t trials = trials_or(cfg, 10000);
  if (trials < 100) throw InputError("--trials must be at least 100 for ratio estimates");
  const auto summary = run_monte_carlo(policy, trials, cfg.seed, cfg.parallel);
  if (cfg.trace) {
    std::vector<double> cx(lp.x.size());
    for (std::size_t k = 0; k < cx.size(); ++k) cx[k] = c * lp.x[k];
    const auto g1 = first_stage_graph(li.instance);
    const auto r = dependent_round(g1, cx, derive_seed(cfg.seed, 0), true);
    err << transcript_to_json(g1, *r.transcript);
  }
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 1.0; };
  Table t = run_table();
  t.add({li.name, "round-augment", to_string(li.instance.weight_mode), c, trials, cfg.seed, nullptr, nullptr,
         summary.mean, summary.ci_lower, lp.objective, opt(opt_on), ratio(summary.mean, lp.objective),
         opt_on ? json(ratio(summary.mean, *opt_on)) : json(nullptr)});
  emit(cfg, t, out);
  return kExitOk;
}

int cmd_run_offline(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto li = load_instance(cfg);
  const auto sol = cfg.solution_path.empty() ? solve_lp_off(li.instance)
                                             : read_lp_off_solution(li.instance, read_file(cfg.solution_path));
  const std::size_t trials = trials_or(cfg, 10000);
  const auto stats = offline_round_rates(li.instance, sol, trials, cfg.seed);
  if (cfg.trace) {
    const auto g1 = first_stage_graph(li.instance);
    const auto r = dependent_round(g1, sol.x, derive_seed(cfg.seed, 0), true);
    err << transcript_to_json(g1, *r.transcript);
  }
  const double slack = 4.0 / std::sqrt(static_cast<double>(trials));
  Table t({"instance", "algorithm", "trials", "seed", "node", "x_plus_expected_y", "matched_rate", "bound",
           "verdict"});
  for (std::size_t i = 0; i < li.instance.num_offline(); ++i) {
    const double bound = 0.75 * stats.target[i] - slack;
    t.add({li.name, "offline-round", trials, cfg.seed, li.instance.offline_ids[i], stats.target[i],
           stats.matched_rate[i], bound, stats.matched_rate[i] >= bound ? "pass" : "fail"});
  }
  t.comment("mean value " + fmt(stats.mean_value) + ", LPoff " + fmt(sol.objective));
  emit(cfg, t, out);
  return kExitOk;
}

int cmd_run_sample(const Config& cfg, std::ostream& out) {
  const auto li = load_instance(cfg);
  const double c = scale_for(cfg, li.instance);
  if (cfg.repetitions == 0) throw InputError("--repetitions must be at least 1");
  const std::size_t trials = trials_or(cfg, 2000);
  if (trials < 100) throw InputError("--trials must be at least 100 for ratio estimates");
  const double lp_on = solve_lp_on(li.instance).objective;
  const auto opt_on = oracle_value(cfg, li.instance);
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 1.0; };
  Table t = run_table();
  double mean_sum = 0.0;
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    const auto trained = sample_based_round_augment(li.instance, scenario_sampler(li.instance), cfg.k, c,
                                                    derive_seed(cfg.seed, 2 * r));
    const auto s = run_monte_carlo(trained.evaluate_on(li.instance), trials, derive_seed(cfg.seed, 2 * r + 1),
                                   cfg.parallel);
    mean_sum += s.mean;
    t.add({li.name, "sample", to_string(li.instance.weight_mode), c, trials, cfg.seed, cfg.k, r, s.mean,
           s.ci_lower, lp_on, opt(opt_on), ratio(s.mean, lp_on), opt_on ? json(ratio(s.mean, *opt_on)) : json(nullptr)});
  }
  const double mean = mean_sum / static_cast<double>(cfg.repetitions);
  t.add({li.name, "sample", to_string(li.instance.weight_mode), c, trials, cfg.seed, cfg.k, "mean", mean, nullptr,
         lp_on, opt(opt_on), ratio(mean, lp_on), opt_on ? json(ratio(mean, *opt_on)) : json(nullptr)});
  emit(cfg, t, out);
  return kExitOk;
}

int cmd_gap(const std::string& family, const Config& cfg, std::ostream& out, std::ostream& err) {
  Table t({"family", "n", "lp_on", "opt_on", "closed_form_opt_on", "ratio", "backend", "closed_form_match"});
  if (family == "eight-cycle") {
    const auto inst = make_eight_cycle();
    const auto lp = solve_lp_on(inst, LpBackend::Exact);
    const auto oracle = brute_force_opt_online(inst);
    const Rational ratio = *oracle.exact_value / *lp.exact_objective;
    t.add({"eight-cycle", nullptr, to_string(*lp.exact_objective), to_string(*oracle.exact_value), nullptr,
           to_string(ratio), "exact", nullptr});
    emit(cfg, t, out);
    return kExitOk;
  }
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) throw InputError("edge-gap: need 1 <= --n-min <= --n-max");
  bool ok = true;
  double previous = 2.0;
  for (std::size_t n = cfg.n_min; n <= cfg.n_max; ++n) {
    const auto inst = make_edge_gap_family(n);
    const auto oracle = brute_force_opt_online(inst);
    const auto lp = solve_lp_on(inst);
    const double closed = edge_gap_opt_online_closed_form(n);
    const bool match = std::fabs(oracle.value - closed) <= 1e-9 * std::max(1.0, closed);
    const double ratio = oracle.value / lp.objective;
    if (!match) {
      ok = false;
      err << "edge-gap n=" << n << ": oracle " << fmt(oracle.value) << " differs from closed form " << fmt(closed)
          << "\n";
    }
    if (ratio > previous + 1e-12) {
      ok = false;
      err << "edge-gap n=" << n << ": ratio increased from " << fmt(previous) << " to " << fmt(ratio) << "\n";
    }
    previous = ratio;
    t.add({"edge-gap", n, lp.objective, oracle.value, closed, ratio, to_string(lp.backend), match});
  }
  t.comment("limit n->infinity: 2*sqrt(2)-2 = " + fmt(kEdgeScale));
  emit(cfg, t, out);
  return ok ? kExitOk : kExitVerificationFailed;
}

std::string subset_label(std::uint32_t s, const TwoStageInstance& inst) {
  std::string out;
  for (std::size_t i = 0; i < inst.num_offline(); ++i) {
    if ((s >> i) & 1u) out += (out.empty() ? "" : " ") + inst.offline_ids[i];
  }
  return "{" + out + "}";
}

Table verify_table() {
  return Table({"battery", "instance", "check", "evidence", "value", "relation", "bound", "verdict"});
}

bool verify_bounds(const Config& cfg, Table& t) {
  bool ok = true;
  for (const auto* battery : {"vertex_independent", "vertex_weighted"}) {
    const auto reports = std::string(battery) == "vertex_independent" ? vertex_bound_battery(cfg.seed, cfg.count)
                                                                      : vertex_weighted_battery(cfg.seed, cfg.count);
    for (const auto& r : reports) {
      ok = ok && r.pass;
      t.add({"bounds", r.instance, r.bound, to_string(r.evidence), r.lhs_ci_lower ? *r.lhs_ci_lower : r.lhs, ">=",
             r.rhs, r.pass ? "pass" : "fail"});
    }
  }
  return ok;
}

bool verify_na(const Config& cfg, Table& t) {
  const auto li = load_instance(cfg, true);
  const double c = scale_for(cfg, li.instance);
  const auto lp = solve_lp_on(li.instance);
  const auto sampler = first_stage_availability_sampler(li.instance, lp.x, c);
  const auto rep = test_negative_dependence(sampler, li.instance.num_offline(), trials_or(cfg, 100000), cfg.seed);
  const auto& ids = li.instance.offline_ids;
  for (std::size_t i = 0; i < rep.n; ++i) {
    for (std::size_t j = i + 1; j < rep.n; ++j) {
      const double cov = rep.covariance[i][j];
      t.add({"na", li.name, "cov(" + ids[i] + "," + ids[j] + ")", "statistical", cov, "<=", rep.margin,
             cov <= rep.margin ? "pass" : "fail"});
    }
  }
  for (const auto& n : rep.ncd) {
    const auto label = subset_label(n.subset, li.instance);
    t.add({"na", li.name, "ncd_upper" + label, "statistical", n.joint, "<=", n.product + rep.margin,
           n.joint <= n.product + rep.margin ? "pass" : "fail"});
    t.add({"na", li.name, "ncd_lower" + label, "statistical", n.joint_complement, "<=",
           n.product_complement + rep.margin, n.joint_complement <= n.product_complement + rep.margin ? "pass" : "fail"});
  }
  return rep.pass();
}

bool verify_crs(Table& t) {
  bool ok = true;
  const double h2 = star_bound_h(2);
  const bool h2_ok = std::fabs(h2 - 1.0) <= 1e-12;
  ok = ok && h2_ok;
  t.add({"crs", "h", "h(2)=1", "exact", h2, "==", 1.0, h2_ok ? "pass" : "fail"});
  for (std::size_t m = 1; m <= 200; ++m) {
    const double h = star_bound_h(m);
    const bool le_one = h <= 1.0 + 1e-12;
    ok = ok && le_one;
    t.add({"crs", "h", "h(" + std::to_string(m) + ")<=1", "exact", h, "<=", 1.0, le_one ? "pass" : "fail"});
    if (m >= 3 && m < 200) {
      const double next = star_bound_h(m + 1);
      const bool dec = next <= h;
      ok = ok && dec;
      t.add({"crs", "h", "h(" + std::to_string(m + 1) + ")<=h(" + std::to_string(m) + ")", "exact", next, "<=", h,
             dec ? "pass" : "fail"});
    }
  }
  return ok;
}

int cmd_verify(const std::string& battery, const Config& cfg, std::ostream& out, std::ostream& err) {
  Table t = verify_table();
  bool ok = true;
  if (battery == "bounds" || battery == "all") ok = verify_bounds(cfg, t) && ok;
  if (battery == "na" || battery == "all") ok = verify_na(cfg, t) && ok;
  if (battery == "crs" || battery == "all") ok = verify_crs(t) && ok;
  emit(cfg, t, out);
  if (!ok) {
    err << "verification failed; see rows with verdict 'fail'\n";
    return kExitVerificationFailed;
  }
  return kExitOk;
}

int cmd_crs_check(const Config& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.y.empty() || cfg.p.size() != cfg.y.size()) {
    throw InputError("crs-check needs --y and --p lists of equal, non-zero length");
  }
  const double c = cfg.c ? *cfg.c : kEdgeScale;
  const auto dist = ActiveSetDistribution::independent(cfg.p);
  CrsScheme scheme;
  try {
    scheme = build_star_crs(cfg.y, dist, c);
  } catch (const CrsInfeasible& e) {
    err << e.what() << "\n";
    return kExitVerificationFailed;
  }
  const auto marg = scheme.marginals(dist);
  const bool monotone = scheme.n <= 12 ? scheme.is_monotone() : true;
  bool ok = monotone;
  std::optional<LambdaCrsResult> lambda;
  if (!cfg.lambda.empty()) {
    if (cfg.lambda.size() != cfg.y.size()) throw InputError("--lambda must have one entry per element");
    std::vector<Mask> family;
    for (Mask s = 0; s < (Mask{1} << cfg.y.size()); ++s) {
      if (static_cast<std::size_t>(std::popcount(s)) <= cfg.rank) family.push_back(s);
    }
    lambda = check_lambda_crs(family, dist, cfg.lambda);
  }
  if (cfg.format == "json") {
    json doc{{"scheme", json::parse(scheme.to_json())}, {"marginals", marg}, {"monotone", monotone}};
    if (lambda) {
      doc["lambda_crs"] = {{"exists", lambda->exists}};
      if (!lambda->exists) doc["lambda_crs"]["counterexample"] = lambda->counterexample;
    }
    emit_text(cfg, doc.dump(2) + "\n", out);
  } else {
    Table t({"element", "y", "target", "achieved", "thinning", "monotone", "verdict"});
    for (std::size_t i = 0; i < scheme.n; ++i) {
      const bool hit = std::fabs(marg[i] - c * cfg.y[i]) <= 1e-9;
      ok = ok && hit;
      t.add({i, cfg.y[i], c * cfg.y[i], marg[i], scheme.thinning[i], monotone, hit && monotone ? "pass" : "fail"});
    }
    if (lambda) {
      if (lambda->exists) {
        t.comment("lambda-bounded CRS (rank " + std::to_string(cfg.rank) + "): exists");
      } else {
        std::string w;
        for (double v : lambda->counterexample) w += (w.empty() ? "" : " ") + fmt(v);
        t.comment("lambda-bounded CRS (rank " + std::to_string(cfg.rank) + "): none, counterexample w = (" + w + ")");
      }
    }
    emit(cfg, t, out);
  }
  return ok ? kExitOk : kExitVerificationFailed;
}

int cmd_oracle(const Config& cfg, std::ostream& out) {
  const auto li = load_instance(cfg);
  const auto r = brute_force_opt_online(li.instance);
  std::string edges;
  for (auto k : r.first_stage.edges) {
    const auto& e = li.instance.first_stage_edges[k];
    edges += (edges.empty() ? "" : ";") + li.instance.first_stage_ids[e.online] + "-" +
             li.instance.offline_ids[e.offline];
  }
  Table t({"instance", "opt_on", "opt_on_exact", "matchings_enumerated", "first_stage"});
  t.add({li.name, r.value, r.exact_value ? json(to_string(*r.exact_value)) : json(nullptr), r.matchings_enumerated,
         edges});
  emit(cfg, t, out);
  return kExitOk;
}

// Option wiring -------------------------------------------------------------

void add_source(CLI::App* app, Config& cfg) {
  auto* inst = app->add_option("--instance", cfg.instance_path, "Instance JSON file");
  auto* gen = app->add_option("--generate", cfg.generate,
                              "Generator: eight-cycle | single-node | edge-gap:n=N | "
                              "random:seed=S,offline=I,first=B1,second=B2,density=D,mode=M,scenarios=K");
  inst->excludes(gen);
  gen->excludes(inst);
  app->add_option("--mode", cfg.mode, "Weight mode override: unweighted | vertex | edge");
}

void add_output(CLI::App* app, Config& cfg) {
  app->add_option("--out", cfg.out_path, "Write output to this file instead of standard output");
  app->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_run_options(CLI::App* app, Config& cfg) {
  add_source(app, cfg);
  add_output(app, cfg);
  app->add_option("--trials", cfg.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app->add_option("--seed", cfg.seed, "Master seed");
  app->add_option("--c", cfg.c, "First-stage scale (defaults by weight mode)");
  app->add_option("--parallel", cfg.parallel, "Worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--trace", cfg.trace, "Write the first trial's rounding transcript to standard error");
  app->add_flag("--require-oracle", cfg.require_oracle, "Fail with exit code 3 when the oracle cap is exceeded");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Two-stage stochastic bipartite matching experiments", "twostage"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Solve the online (and optionally offline) relaxation");
  add_source(solve, cfg);
  add_output(solve, cfg);
  solve->add_flag("--offline", cfg.offline, "Also solve the offline relaxation");
  solve->add_option("--backend", cfg.backend, "auto | exact | float");

  auto* run = app.add_subcommand("run", "Run an algorithm and estimate its value");
  run->require_subcommand(1);
  auto* run_ra = run->add_subcommand("round-augment", "Round-Augment");
  add_run_options(run_ra, cfg);
  run_ra->add_option("--solution", cfg.solution_path, "Use this online-relaxation solution instead of solving");
  auto* run_off = run->add_subcommand("offline-round", "Two-stage rounding of the offline relaxation");
  add_run_options(run_off, cfg);
  run_off->add_option("--solution", cfg.solution_path, "Use this offline-relaxation solution instead of solving");
  auto* run_sample = run->add_subcommand("sample", "Round-Augment trained on sampled scenarios");
  add_run_options(run_sample, cfg);
  run_sample->add_option("--k", cfg.k, "Samples per training run")->check(CLI::PositiveNumber);
  run_sample->add_option("--repetitions", cfg.repetitions, "Independent training runs");

  auto* gap = app.add_subcommand("gap", "Integrality-gap tables");
  gap->require_subcommand(1);
  auto* gap_cycle = gap->add_subcommand("eight-cycle", "Eight-cycle instance");
  add_output(gap_cycle, cfg);
  auto* gap_edge = gap->add_subcommand("edge-gap", "Edge-weighted gap family");
  add_output(gap_edge, cfg);
  gap_edge->add_option("--n-min", cfg.n_min, "Smallest n");
  gap_edge->add_option("--n-max", cfg.n_max, "Largest n");

  auto* crs = app.add_subcommand("crs-check", "Build a star contention resolution scheme");
  add_output(crs, cfg);
  crs->add_option("--y", cfg.y, "Target weights y (sum at most 1)")->delimiter(',')->required();
  crs->add_option("--p", cfg.p, "Independent activation probabilities")->delimiter(',')->required();
  crs->add_option("--c", cfg.c, "Scale (default 2*sqrt(2)-2)");
  crs->add_option("--lambda", cfg.lambda, "Also decide a lambda-bounded CRS for a uniform matroid")->delimiter(',');
  crs->add_option("--rank", cfg.rank, "Rank of the uniform matroid for --lambda");

  auto* verify = app.add_subcommand("verify", "Verification batteries");
  verify->require_subcommand(1);
  std::vector<CLI::App*> batteries;
  for (const auto* name : {"bounds", "na", "crs", "all"}) {
    auto* b = verify->add_subcommand(name, std::string("Battery: ") + name);
    add_source(b, cfg);
    add_output(b, cfg);
    b->add_option("--trials", cfg.trials, "Monte Carlo trials (na)")->check(CLI::PositiveNumber);
    b->add_option("--seed", cfg.seed, "Master seed");
    b->add_option("--c", cfg.c, "First-stage scale for the na battery");
    b->add_option("--count", cfg.count, "Random instances per bounds battery");
    batteries.push_back(b);
  }

  auto* oracle = app.add_subcommand("oracle", "Brute-force optimum online value");
  add_source(oracle, cfg);
  add_output(oracle, cfg);

  std::vector<std::string> argv_store{"twostage"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg, out);
    if (run_ra->parsed()) return cmd_run_round_augment(cfg, out, err);
    if (run_off->parsed()) return cmd_run_offline(cfg, out, err);
    if (run_sample->parsed()) return cmd_run_sample(cfg, out);
    if (gap_cycle->parsed()) return cmd_gap("eight-cycle", cfg, out, err);
    if (gap_edge->parsed()) return cmd_gap("edge-gap", cfg, out, err);
    if (crs->parsed()) return cmd_crs_check(cfg, out, err);
    for (auto* b : batteries) {
      if (b->parsed()) return cmd_verify(b->get_name(), cfg, out, err);
    }
    if (oracle->parsed()) return cmd_oracle(cfg, out);
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitCapExceeded;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InfeasibleSolution& e) {
    err << "error: infeasible solution: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const VerificationFailed& e) {
    err << "verification failed: " << e.what() << "\n";
    return kExitVerificationFailed;
  }
  return kExitInputError;
}

}  // namespace twostage::cli
