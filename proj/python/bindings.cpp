#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "twostage/crs.hpp"
#include "twostage/instance.hpp"
#include "twostage/lp.hpp"
#include "twostage/twostage.hpp"
#include "twostage/verify.hpp"

namespace py = pybind11;
using namespace twostage;

namespace {

py::dict solution_dict(const EdgeValues& v) {
  py::dict d;
  d["x"] = v.x;
  d["y"] = v.y;
  d["objective"] = v.objective;
  d["objective_exact"] = v.exact_objective ? py::object(py::str(to_string(*v.exact_objective))) : py::none();
  d["backend"] = to_string(v.backend);
  return d;
}

LpBackend backend_from(const std::string& name) {
  if (name == "auto") return LpBackend::Auto;
  if (name == "exact") return LpBackend::Exact;
  if (name == "float") return LpBackend::Float;
  throw InputError("unknown backend '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_twostage, m) {
  m.doc() = "Two-stage stochastic bipartite matching";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);
  py::register_exception<InfeasibleSolution>(m, "InfeasibleSolution", PyExc_ValueError);

  py::enum_<WeightMode>(m, "WeightMode")
      .value("UNWEIGHTED", WeightMode::Unweighted)
      .value("VERTEX", WeightMode::VertexWeighted)
      .value("EDGE", WeightMode::EdgeWeighted);

  py::class_<TwoStageInstance>(m, "Instance")
      .def_readonly("weight_mode", &TwoStageInstance::weight_mode)
      .def_readonly("offline_ids", &TwoStageInstance::offline_ids)
      .def_readonly("first_stage_ids", &TwoStageInstance::first_stage_ids)
      .def_property_readonly("num_offline", &TwoStageInstance::num_offline)
      .def_property_readonly("num_first_stage", &TwoStageInstance::num_first_stage)
      .def_property_readonly("num_scenarios", &TwoStageInstance::num_scenarios)
      .def_property_readonly("num_first_stage_edges",
                             [](const TwoStageInstance& i) { return i.first_stage_edges.size(); })
      .def("is_rational", &TwoStageInstance::is_rational)
      .def("to_json", &write_instance_json)
      .def_static("from_json", &read_instance_json, py::arg("text"))
      .def("__eq__", [](const TwoStageInstance& a, const TwoStageInstance& b) { return a == b; })
      .def("__repr__", [](const TwoStageInstance& i) {
        std::ostringstream os;
        os << "<Instance " << to_string(i.weight_mode) << " |I|=" << i.num_offline()
           << " |B1|=" << i.num_first_stage() << " scenarios=" << i.num_scenarios() << ">";
        return os.str();
      });

  m.def("make_eight_cycle", &make_eight_cycle);
  m.def("make_edge_gap_family", &make_edge_gap_family, py::arg("n"));
  m.def("make_single_offline_node", &make_single_offline_node);
  m.def(
      "make_random_instance",
      [](std::uint64_t seed, std::size_t offline, std::size_t first, std::size_t second, double density,
         WeightMode mode, std::size_t scenarios) {
        RandomInstanceSpec s;
        s.seed = seed;
        s.num_offline = offline;
        s.num_first_stage = first;
        s.num_second_stage = second;
        s.edge_density = density;
        s.weight_mode = mode;
        s.num_scenarios = scenarios;
        return make_random_instance(s);
      },
      py::arg("seed"), py::arg("offline") = 4, py::arg("first") = 2, py::arg("second") = 2,
      py::arg("density") = 0.5, py::arg("mode") = WeightMode::Unweighted, py::arg("scenarios") = 2);
  m.def("read_instance", [](const std::string& path) { return read_instance(path); }, py::arg("path"));

  m.def(
      "solve_lp_on",
      [](const TwoStageInstance& i, const std::string& backend) { return solution_dict(solve_lp_on(i, backend_from(backend))); },
      py::arg("instance"), py::arg("backend") = "auto");
  m.def(
      "solve_lp_off",
      [](const TwoStageInstance& i, const std::string& backend) { return solution_dict(solve_lp_off(i, backend_from(backend))); },
      py::arg("instance"), py::arg("backend") = "auto");

  m.def(
      "opt_online",
      [](const TwoStageInstance& i) {
        const auto r = brute_force_opt_online(i);
        py::dict d;
        d["value"] = r.value;
        d["value_exact"] = r.exact_value ? py::object(py::str(to_string(*r.exact_value))) : py::none();
        d["first_stage"] = r.first_stage.edges;
        d["matchings_enumerated"] = r.matchings_enumerated;
        return d;
      },
      py::arg("instance"));

  m.def(
      "round_augment_ratio",
      [](const TwoStageInstance& i, std::size_t trials, std::uint64_t seed, std::optional<double> c,
         std::size_t parallel) {
        const auto lp = solve_lp_on(i);
        const double scale = c ? *c : default_scale(i.weight_mode);
        const auto est = estimate_ratio(i, round_augment_policy(i, lp.x, scale), trials, seed, parallel,
                                        i.first_stage_edges.size() <= kOracleEdgeCap);
        py::dict d;
        d["mean"] = est.summary.mean;
        d["ci_lower"] = est.summary.ci_lower;
        d["lp_on"] = est.lp_on;
        d["ratio_lp"] = est.ratio_lp;
        d["opt_on"] = est.opt_on ? py::object(py::float_(*est.opt_on)) : py::none();
        d["ratio_opt"] = est.ratio_opt ? py::object(py::float_(*est.ratio_opt)) : py::none();
        return d;
      },
      py::arg("instance"), py::arg("trials") = 10000, py::arg("seed") = 1, py::arg("c") = py::none(),
      py::arg("parallel") = 1);

  m.def(
      "star_crs_marginals",
      [](const std::vector<double>& y, const std::vector<double>& p, double c) {
        const auto dist = ActiveSetDistribution::independent(p);
        return build_star_crs(y, dist, c).marginals(dist);
      },
      py::arg("y"), py::arg("p"), py::arg("c") = kEdgeScale);
  m.def("star_bound_h", &star_bound_h, py::arg("m"), py::arg("c") = kEdgeScale);
  m.def("sample_size_vertex", &sample_size_vertex, py::arg("num_offline"), py::arg("epsilon"), py::arg("delta"));
  m.def("sample_size_edge", &sample_size_edge, py::arg("num_edges"), py::arg("epsilon"), py::arg("delta"),
        py::arg("max_weight"), py::arg("min_weight"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end in process; returns (exit_code, stdout, stderr).");

  m.attr("EDGE_SCALE") = kEdgeScale;
}
