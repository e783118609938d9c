// Python bindings for surfaces, grids, the cohomological solver and the
// experiment harness.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "twistlab/cohosolve.hpp"
#include "twistlab/config.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/grid.hpp"
#include "twistlab/harness.hpp"
#include "twistlab/origami.hpp"
#include "twistlab/spectral.hpp"
#include "twistlab/surface_io.hpp"

namespace py = pybind11;
using namespace twistlab;

namespace {

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["solution"] = r.solution;
  d["residual"] = r.residual;
  d["obstruction_dim"] = r.obstruction_dim;
  d["obstruction_mass"] = r.obstruction_mass;
  d["kernel_dim"] = r.kernel_dim;
  d["twist"] = r.twist;
  d["ratio"] = r.ratio;
  d["norms_computed"] = r.norms_computed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_twistlab, m) {
  m.doc() = "Twisted cohomological equations on square-tiled surfaces";

  py::register_exception<Error>(m, "Error");

  py::class_<Origami>(m, "Origami")
      .def(py::init([](const std::vector<int>& right, const std::vector<int>& up) {
             return build_origami(static_cast<int>(right.size()), right, up);
           }),
           py::arg("right"), py::arg("up"))
      .def_property_readonly("n_squares", &Origami::n_squares)
      .def_property_readonly("perm_right", &Origami::perm_right)
      .def_property_readonly("perm_up", &Origami::perm_up)
      .def_property_readonly("genus", [](const Origami& o) { return singularities(o).genus; })
      .def_property_readonly("cone_orders",
                             [](const Origami& o) {
                               std::vector<int> orders;
                               for (const auto& c : singularities(o).cone_points) orders.push_back(c.order);
                               return orders;
                             })
      .def("__repr__", [](const Origami& o) {
        return "Origami(right=" + format_cycles(o.perm_right()) + ", up=" + format_cycles(o.perm_up()) + ")";
      });

  m.def("torus", &surfaces::torus);
  m.def("l_shaped", &surfaces::l_shaped);
  m.def("two_square_cover", &surfaces::two_square_cover);
  m.def("quaternion", &surfaces::quaternion);
  m.def("parse_surface", [](const std::string& text) { return parse_surface(text); }, py::arg("text"));
  m.def("load_surface", &load_surface, py::arg("path"));

  py::class_<Grid>(m, "Grid")
      .def(py::init<Origami, int>(), py::arg("origami"), py::arg("m"))
      .def_property_readonly("m", &Grid::m)
      .def_property_readonly("size", &Grid::size)
      .def("norm", &Grid::norm)
      .def("inner", &Grid::inner);

  m.def("operators",
        [](const Grid& g) {
          SparseOperator S = assemble_S(g), T = assemble_T(g);
          return py::make_tuple(S.matrix, T.matrix);
        },
        py::arg("grid"), "Sparse matrices of the horizontal and vertical derivatives.");

  m.def("lowest_eigenpairs",
        [](const Grid& g, int K, double tol, std::uint64_t seed) {
          SparseOperator S = assemble_S(g), T = assemble_T(g);
          EigenBasis b = lowest_eigenpairs(assemble_Q(S, T), g, K, tol, seed);
          return py::make_tuple(b.eigenvalues, b.vectors);
        },
        py::arg("grid"), py::arg("K"), py::arg("tol") = 1e-10, py::arg("seed") = 0);

  m.def("solve",
        [](const Grid& g, const GridField& f, double theta, double sigma, const std::string& twist_mode) {
          if (f.size() != g.size()) throw DimensionMismatch("f has the wrong length for this grid");
          SparseOperator S = assemble_S(g), T = assemble_T(g);
          SolveConfig cfg;
          cfg.theta = theta;
          cfg.sigma = sigma;
          cfg.twist_mode = parse_twist_mode(twist_mode);
          return report_dict(solve_lsq(f, S, T, g, cfg));
        },
        py::arg("grid"), py::arg("f"), py::arg("theta"), py::arg("sigma"), py::arg("twist_mode") = "raw",
        "Minimal-norm solution of (cos(theta) S + sin(theta) T + i twist) u = P f.");

  m.def("config_reference", &config_reference);
  m.def("command_names", &command_names);
  m.def("run",
        [](const std::string& command, const std::string& config_path, const std::string& out_dir, int threads,
           const std::map<std::string, std::string>& overrides) {
          ExperimentConfig cfg = ExperimentConfig::load(config_path);
          for (const auto& [name, value] : overrides) {
            auto dot = name.find('.');
            if (dot == std::string::npos) throw ConfigError("override '" + name + "' is not section.key");
            cfg.set(name.substr(0, dot), name.substr(dot + 1), value);
          }
          RunOptions opt;
          opt.out_dir = out_dir;
          opt.threads = threads;
          std::ostringstream log;
          opt.log = &log;
          int code;
          {
            py::gil_scoped_release release;
            code = run_command(command, cfg, opt);
          }
          return py::make_tuple(code, log.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out") = "", py::arg("threads") = 1,
        py::arg("overrides") = std::map<std::string, std::string>{},
        "Runs a harness command; returns (exit_code, log). Overrides use 'section.key' names.");
}
