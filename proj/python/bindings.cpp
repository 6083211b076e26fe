#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heatcert/pipeline.hpp"

namespace py = pybind11;
using namespace heatcert;

namespace {

py::object json_to_py(const Json& j) {
  switch (j.type()) {
    case nlohmann::detail::value_t::null:
      return py::none();
    case nlohmann::detail::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nlohmann::detail::value_t::number_integer:
      return py::int_(j.get<long long>());
    case nlohmann::detail::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case nlohmann::detail::value_t::number_float:
      return py::float_(j.get<double>());
    case nlohmann::detail::value_t::string:
      return py::str(j.get<std::string>());
    case nlohmann::detail::value_t::array: {
      py::list out;
      for (const auto& el : j) out.append(json_to_py(el));
      return out;
    }
    case nlohmann::detail::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = json_to_py(v);
      return out;
    }
    default:
      return py::none();
  }
}

Json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    Json out = Json::object();
    for (auto item : obj.cast<py::dict>())
      out[item.first.cast<std::string>()] = py_to_json(item.second);
    return out;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    Json out = Json::array();
    for (auto item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
    return out;
  }
  throw std::invalid_argument("unsupported config value type");
}

py::dict report_to_py(const Report& r) {
  return json_to_py(r.to_json()).cast<py::dict>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "heat kernel bounds, volume doubling and Sobolev constants on "
            "finite weighted graphs";

  py::enum_<MeasureMode>(m, "MeasureMode")
      .value("normalizing", MeasureMode::normalizing)
      .value("counting", MeasureMode::counting)
      .value("custom", MeasureMode::custom);

  py::class_<WeightedGraph>(m, "WeightedGraph")
      .def_property_readonly("size", &WeightedGraph::size)
      .def_property_readonly("ids", &WeightedGraph::ids)
      .def("index_of", &WeightedGraph::index_of)
      .def("measure", &WeightedGraph::measure)
      .def("degree", &WeightedGraph::degree)
      .def("weighted_degree", &WeightedGraph::weighted_degree)
      .def_property_readonly("total_measure", &WeightedGraph::total_measure)
      .def("__repr__", [](const WeightedGraph& g) {
        return "<WeightedGraph " + std::to_string(g.size()) + " vertices, " +
               std::to_string(g.edges().size()) + " edges, " +
               to_string(g.mode()) + ">";
      });

  m.def("build_graph", &build_graph, py::arg("edges"), py::arg("mode"),
        py::arg("custom_measure") = std::map<std::string, double>{});
  m.def("single_vertex_graph", &single_vertex_graph);
  m.def("generate_family", &generate_family, py::arg("spec"), py::arg("mode"));
  m.def("save_graph", &save_graph);
  m.def("load_graph", &load_graph);
  m.def("graph_to_string", &graph_to_string);

  py::class_<EdgeWeights>(m, "EdgeWeights")
      .def_readonly("w", &EdgeWeights::w);
  m.def("default_intrinsic_weights", &default_intrinsic_weights);
  m.def("combinatorial_weights", &combinatorial_weights);

  py::class_<MetricStructure>(m, "MetricStructure")
      .def_static("all_pairs_distances", &MetricStructure::all_pairs_distances,
                  py::arg("graph"), py::arg("weights"))
      .def("distance", &MetricStructure::distance)
      .def("breakpoints", &MetricStructure::breakpoints)
      .def_property_readonly("diameter", &MetricStructure::diameter)
      .def_property_readonly("global_jump_size",
                             &MetricStructure::global_jump_size)
      .def("ball", &MetricStructure::ball)
      .def("ball_measure", &MetricStructure::ball_measure)
      .def("jump_size", &MetricStructure::jump_size)
      .def("annulus_jump_sup", &MetricStructure::annulus_jump_sup);

  m.def("verify_intrinsic",
        [](const WeightedGraph& g, const MetricStructure& metric) {
          IntrinsicReport rep = verify_intrinsic(g, metric);
          py::dict out;
          out["pass"] = rep.pass;
          out["worst_vertex"] =
              rep.worst_vertex >= 0 ? py::object(py::str(g.id(rep.worst_vertex)))
                                    : py::object(py::none());
          out["worst_slack"] = rep.worst_slack;
          return out;
        });

  py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
      .def_readonly("eigenvalues", &SpectralDecomposition::eigenvalues)
      .def_readonly("eigenfunctions", &SpectralDecomposition::eigenfunctions)
      .def_property_readonly("lambda_bottom",
                             &SpectralDecomposition::lambda_bottom);
  m.def("decompose", &decompose);
  m.def("laplacian_apply", &laplacian_apply);
  m.def("heat_kernel", &heat_kernel, py::arg("dec"), py::arg("t"), py::arg("x"),
        py::arg("y"));
  m.def("heat_kernel_matrix", &heat_kernel_matrix);
  m.def("heat_semigroup_apply", &heat_semigroup_apply);
  m.def("heat_evolve_ode", &heat_evolve_ode, py::arg("graph"), py::arg("f"),
        py::arg("t"), py::arg("rtol") = 1e-12, py::arg("atol") = 1e-15);
  m.def("gradient_norm", &gradient_norm);
  m.def("dirichlet_energy", &dirichlet_energy);
  m.def("h_omega", &h_omega);
  m.def("sandwiched_semigroup",
        [](const WeightedGraph& g, const SpectralDecomposition& dec,
           const Vector& omega, double t, const Vector& f) {
          return sandwiched_semigroup(g, dec, make_omega_context(g, omega), t, f);
        });

  m.def("zeta", &zeta, py::arg("r"), py::arg("t"), py::arg("S"));
  m.def("nu_correction", &nu_correction, py::arg("r"), py::arg("t"),
        py::arg("S"));
  m.def("counting_corrections",
        [](double r, double R, double deg_x, double n, double S, bool relaxed) {
          CountingCorrections cc =
              counting_corrections(r, R, deg_x, n, S, relaxed);
          py::dict out;
          out["kappa"] = cc.kappa;
          out["theta"] = cc.theta;
          out["log_Phi"] = cc.Phi.log_mag;
          out["log_Psi"] = cc.Psi.log_mag;
          out["negative_floor"] = cc.negative_floor;
          return out;
        },
        py::arg("r"), py::arg("R"), py::arg("deg_x"), py::arg("n"), py::arg("S"),
        py::arg("relaxed") = false);
  m.def("variable_dimension_counting",
        [](double r, double R1, double n, double S, double deg_sup,
           bool relaxed) {
          VariableDimension vd =
              variable_dimension_counting(r, R1, n, S, deg_sup, relaxed);
          py::dict out;
          out["r_prime"] = vd.r_prime;
          out["p"] = vd.p;
          out["nu"] = vd.nu;
          out["n_prime"] = vd.n_prime;
          out["branch"] = vd.branch;
          return out;
        },
        py::arg("r"), py::arg("R1"), py::arg("n"), py::arg("S"),
        py::arg("deg_sup"), py::arg("relaxed") = false);

  py::class_<SobolevProblem>(m, "SobolevProblem")
      .def(py::init([](const WeightedGraph& g, std::vector<int> ball, double r,
                       double n) {
             SobolevProblem p{&g, std::move(ball), r, n};
             p.validate();
             return p;
           }),
           py::arg("graph"), py::arg("ball"), py::arg("r"), py::arg("n"),
           py::keep_alive<1, 2>())
      .def_property_readonly("q", &SobolevProblem::q);
  m.def("sobolev_ratio", &sobolev_ratio);
  m.def("minimal_sobolev_constant",
        [](const SobolevProblem& p, int restarts, int max_iterations,
           double tolerance, uint64_t seed) {
          OptimizerBudget b{restarts, max_iterations, tolerance, seed};
          OptimizationResult res = minimal_sobolev_constant(p, b);
          py::dict out;
          out["phi_star"] = res.phi_star;
          out["maximizer"] = res.maximizer;
          out["certification"] = res.certification;
          out["restarts"] = res.restarts_used;
          return out;
        },
        py::arg("problem"), py::arg("restarts") = 100,
        py::arg("max_iterations") = 400, py::arg("tolerance") = 1e-10,
        py::arg("seed") = 1);
  m.def("grid_oracle_constant",
        [](const SobolevProblem& p, double resolution) {
          GridOracleResult res = grid_oracle_constant(p, resolution);
          py::dict out;
          out["value"] = res.value;
          out["argmax"] = res.argmax;
          out["points"] = res.points;
          return out;
        },
        py::arg("problem"), py::arg("resolution") = 1e-3);

  m.def("run_pipeline",
        [](const std::string& mode, const py::dict& config) {
          PipelineConfig cfg = PipelineConfig::from_json(py_to_json(config));
          Report rep;
          if (mode == "forward-normalizing")
            rep = run_forward_normalizing(cfg);
          else if (mode == "reverse-normalizing")
            rep = run_reverse_normalizing(cfg, nullptr);
          else if (mode == "counting")
            rep = run_counting(cfg);
          else if (mode == "general")
            rep = run_general(cfg);
          else
            throw std::invalid_argument("unknown pipeline mode '" + mode + "'");
          if (!cfg.out_dir.empty()) emit_report(rep, cfg.out_dir);
          return report_to_py(rep);
        },
        py::arg("mode"), py::arg("config"));

  py::register_exception<GuardViolation>(m, "GuardViolation");
  py::register_exception<PipelineError>(m, "PipelineError");

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "0.1.0";
#endif
}
