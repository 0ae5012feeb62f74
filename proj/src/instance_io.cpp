#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "twostage/instance.hpp"

namespace twostage {

using nlohmann::json;

namespace {

json quantity_number(const Quantity& q) { return q.value; }

bool fits_int64(const boost::multiprecision::mpz_int& z) {
  return z >= std::numeric_limits<std::int64_t>::min() && z <= std::numeric_limits<std::int64_t>::max();
}

json edges_to_json(const std::vector<StageEdge>& edges, const std::vector<std::string>& online_ids,
                   const TwoStageInstance& inst) {
  json out = json::array();
  for (const auto& e : edges) {
    json je = {{"from", online_ids.at(e.online)}, {"to", inst.offline_ids.at(e.offline)}};
    if (inst.weight_mode == WeightMode::EdgeWeighted) je["weight"] = quantity_number(e.weight);
    out.push_back(std::move(je));
  }
  return out;
}

// Accessors that report the JSON path of the offending field.
const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw InputError(path + ": expected a string");
  return v.get<std::string>();
}

double require_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw InputError(path + ": expected a number");
  return v.get<double>();
}

const json& require_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw InputError(path + ": expected an array");
  return v;
}

std::vector<std::string> read_id_list(const json& v, const std::string& path) {
  std::vector<std::string> ids;
  const auto& arr = require_array(v, path);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    ids.push_back(require_string(arr[k], path + "[" + std::to_string(k) + "]"));
  }
  return ids;
}

std::vector<StageEdge> read_edges(const json& v, const std::string& path,
                                  const std::vector<std::string>& online_ids,
                                  const std::map<std::string, std::size_t>& offline_index) {
  std::map<std::string, std::size_t> online_index;
  for (std::size_t k = 0; k < online_ids.size(); ++k) online_index[online_ids[k]] = k;
  std::vector<StageEdge> edges;
  const auto& arr = require_array(v, path);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string here = path + "[" + std::to_string(k) + "]";
    const auto from = require_string(require(arr[k], "from", here), here + ".from");
    const auto to = require_string(require(arr[k], "to", here), here + ".to");
    const std::string label = here + " (" + from + " -> " + to + ")";
    auto f = online_index.find(from);
    if (f == online_index.end()) throw InputError(label + ": undeclared online node '" + from + "'");
    auto t = offline_index.find(to);
    if (t == offline_index.end()) throw InputError(label + ": undeclared offline node '" + to + "'");
    StageEdge e{f->second, t->second, Quantity::from_fraction(1, 1)};
    if (arr[k].contains("weight")) {
      e.weight = Quantity::from_double(require_number(arr[k]["weight"], here + ".weight"));
    }
    edges.push_back(e);
  }
  return edges;
}

std::string describe_parse_position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::string write_instance_json(const TwoStageInstance& inst) {
  inst.validate();
  json doc;
  doc["format_version"] = kInstanceFormatVersion;
  doc["weight_mode"] = to_string(inst.weight_mode);
  json offline = json::array();
  for (std::size_t i = 0; i < inst.num_offline(); ++i) {
    json node = {{"id", inst.offline_ids[i]}};
    if (inst.weight_mode == WeightMode::VertexWeighted) node["weight"] = quantity_number(inst.offline_weights[i]);
    offline.push_back(std::move(node));
  }
  doc["offline_nodes"] = std::move(offline);
  doc["first_stage"] = {{"nodes", inst.first_stage_ids},
                        {"edges", edges_to_json(inst.first_stage_edges, inst.first_stage_ids, inst)}};
  json scenarios = json::array();
  for (const auto& s : inst.scenarios) {
    json js;
    const auto& p = s.probability;
    if (p.exact && fits_int64(numerator(*p.exact)) && fits_int64(denominator(*p.exact))) {
      js["probability_frac"] = {numerator(*p.exact).convert_to<std::int64_t>(),
                                denominator(*p.exact).convert_to<std::int64_t>()};
    } else {
      js["probability"] = p.value;
    }
    js["nodes"] = s.node_ids;
    js["edges"] = edges_to_json(s.edges, s.node_ids, inst);
    scenarios.push_back(std::move(js));
  }
  doc["scenarios"] = std::move(scenarios);
  return doc.dump(2) + "\n";
}

TwoStageInstance read_instance_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("JSON parse error at " + describe_parse_position(text, e.byte) + ": " + e.what());
  }
  const std::string root = "$";
  const auto version = require(doc, "format_version", root);
  if (!version.is_number_integer() || version.get<int>() != kInstanceFormatVersion) {
    throw InputError("format_version: unsupported value " + version.dump() + " (expected " +
                     std::to_string(kInstanceFormatVersion) + ")");
  }

  TwoStageInstance inst;
  inst.weight_mode = parse_weight_mode(require_string(require(doc, "weight_mode", root), "weight_mode"));

  const auto& offline = require_array(require(doc, "offline_nodes", root), "offline_nodes");
  std::map<std::string, std::size_t> offline_index;
  for (std::size_t k = 0; k < offline.size(); ++k) {
    const std::string here = "offline_nodes[" + std::to_string(k) + "]";
    const auto id = require_string(require(offline[k], "id", here), here + ".id");
    if (!offline_index.emplace(id, k).second) throw InputError(here + ": duplicate node id '" + id + "'");
    inst.offline_ids.push_back(id);
    inst.offline_weights.push_back(offline[k].contains("weight")
                                       ? Quantity::from_double(require_number(offline[k]["weight"], here + ".weight"))
                                       : Quantity::from_fraction(1, 1));
  }

  const auto& first = require(doc, "first_stage", root);
  inst.first_stage_ids = read_id_list(require(first, "nodes", "first_stage"), "first_stage.nodes");
  inst.first_stage_edges = read_edges(require(first, "edges", "first_stage"), "first_stage.edges",
                                      inst.first_stage_ids, offline_index);

  const auto& scenarios = require_array(require(doc, "scenarios", root), "scenarios");
  for (std::size_t t = 0; t < scenarios.size(); ++t) {
    const std::string here = "scenarios[" + std::to_string(t) + "]";
    const auto& js = scenarios[t];
    Scenario s;
    if (js.contains("probability_frac")) {
      const auto& frac = js["probability_frac"];
      if (!frac.is_array() || frac.size() != 2 || !frac[0].is_number_integer() ||
          !frac[1].is_number_integer() || frac[1].get<std::int64_t>() <= 0) {
        throw InputError(here + ".probability_frac: expected [numerator, positive denominator]");
      }
      s.probability = Quantity::from_fraction(frac[0].get<std::int64_t>(), frac[1].get<std::int64_t>());
    } else if (js.contains("probability")) {
      s.probability = Quantity::from_double(require_number(js["probability"], here + ".probability"));
    } else {
      throw InputError(here + ": missing field 'probability' or 'probability_frac'");
    }
    s.node_ids = read_id_list(require(js, "nodes", here), here + ".nodes");
    s.edges = read_edges(require(js, "edges", here), here + ".edges", s.node_ids, offline_index);
    inst.scenarios.push_back(std::move(s));
  }
  inst.validate();
  return inst;
}

void write_instance(const TwoStageInstance& instance, const std::filesystem::path& path) {
  const auto text = write_instance_json(instance);
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << text;
}

TwoStageInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return read_instance_json(buffer.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace twostage
