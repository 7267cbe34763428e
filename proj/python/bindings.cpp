// Python bindings for the relcoh core.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "relcoh/coherence.hpp"
#include "relcoh/config.hpp"
#include "relcoh/dynamics.hpp"
#include "relcoh/error.hpp"
#include "relcoh/hierarchy.hpp"
#include "relcoh/mesh.hpp"
#include "relcoh/pipeline.hpp"
#include "relcoh/sampling.hpp"
#include "relcoh/spectral.hpp"
#include "relcoh/transfer.hpp"
#include "relcoh/verify.hpp"

namespace py = pybind11;
using namespace relcoh;

namespace {

std::vector<Point2> to_points(const std::vector<std::pair<double, double>>& xy) {
  std::vector<Point2> pts;
  pts.reserve(xy.size());
  for (const auto& [x, y] : xy) pts.push_back({x, y});
  return pts;
}

std::vector<std::pair<double, double>> from_points(const std::vector<Point2>& pts) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(pts.size());
  for (const auto& p : pts) xy.emplace_back(p.x, p.y);
  return xy;
}

std::vector<std::vector<double>> to_dense(const TransitionMatrix& P) {
  std::vector<std::vector<double>> d(P.n_rows, std::vector<double>(P.n_cols, 0.0));
  for (std::size_t i = 0; i < P.n_rows; ++i)
    for (std::size_t k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) d[i][P.col_idx[k]] = P.values[k];
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hierarchical relatively coherent sets from Ulam transfer matrices";

  py::register_exception<Error>(m, "RelcohError");

  py::class_<Rect>(m, "Rect")
      .def(py::init([](double xmin, double xmax, double ymin, double ymax) {
             Rect r{xmin, xmax, ymin, ymax};
             r.validate();
             return r;
           }),
           py::arg("xmin"), py::arg("xmax"), py::arg("ymin"), py::arg("ymax"))
      .def_readonly("xmin", &Rect::xmin)
      .def_readonly("xmax", &Rect::xmax)
      .def_readonly("ymin", &Rect::ymin)
      .def_readonly("ymax", &Rect::ymax)
      .def("area", &Rect::area);

  py::class_<TriMesh, std::shared_ptr<TriMesh>>(m, "TriMesh")
      .def(py::init<const Rect&, std::size_t, std::size_t>(), py::arg("rect"), py::arg("nx"),
           py::arg("ny"))
      .def("__len__", &TriMesh::size)
      .def_property_readonly("nx", &TriMesh::nx)
      .def_property_readonly("ny", &TriMesh::ny)
      .def("triangle_area", &TriMesh::triangle_area)
      .def("centroid",
           [](const TriMesh& mesh, std::size_t t) {
             const Point2 c = mesh.centroid(t);
             return std::make_pair(c.x, c.y);
           })
      .def("locate", [](const TriMesh& mesh, double x, double y) -> py::object {
        const std::size_t t = mesh.locate({x, y});
        if (t == kOutside) return py::none();
        return py::int_(t);
      });

  py::class_<FlowSpec>(m, "FlowSpec")
      .def_property_readonly("kind", [](const FlowSpec& s) { return std::string(to_string(s.kind)); })
      .def_readwrite("params", &FlowSpec::params)
      .def_readwrite("t0", &FlowSpec::t0)
      .def_readwrite("tau", &FlowSpec::tau)
      .def_readwrite("integrator_step", &FlowSpec::integrator_step)
      .def("velocity", [](const FlowSpec& s, double x, double y, double t) {
        const Vec2 v = velocity(s, {x, y}, t);
        return std::make_pair(v.x, v.y);
      });

  m.def("double_gyre_flow", &double_gyre_flow, py::arg("A") = 0.25, py::arg("epsilon") = 0.25,
        py::arg("omega") = 6.283185307179586, py::arg("t0") = 0.0, py::arg("tau") = 10.0,
        py::arg("step") = 0.01);
  m.def("standard_map_flow", &standard_map_flow, py::arg("K"), py::arg("iterations"));
  m.def("rossby_flow", &rossby_flow, py::arg("tau_seconds") = 10 * 86400.0,
        py::arg("step_seconds") = 1800.0);
  m.def("linear_flow", &linear_flow, py::arg("a11"), py::arg("a12"), py::arg("a21"),
        py::arg("a22"), py::arg("b1") = 0.0, py::arg("b2") = 0.0);

  m.def(
      "seed_uniform",
      [](const Rect& r, std::size_t n, std::uint64_t seed) {
        return from_points(seed_uniform(r, n, seed));
      },
      py::arg("rect"), py::arg("n"), py::arg("seed"));

  py::class_<TrajectoryEnsemble>(m, "TrajectoryEnsemble")
      .def("__len__", &TrajectoryEnsemble::size)
      .def_property_readonly("initial", [](const TrajectoryEnsemble& e) { return from_points(e.initial); })
      .def_property_readonly("final", [](const TrajectoryEnsemble& e) { return from_points(e.final); })
      .def_property_readonly("flagged", [](const TrajectoryEnsemble& e) {
        return std::vector<bool>(e.flagged.begin(), e.flagged.end());
      });

  m.def(
      "advect",
      [](const FlowSpec& spec, const std::vector<std::pair<double, double>>& initial,
         std::uint64_t seed, unsigned workers) {
        const auto pts = to_points(initial);
        py::gil_scoped_release release;
        return advect(spec, pts, seed, workers);
      },
      py::arg("spec"), py::arg("initial"), py::arg("seed") = 0, py::arg("workers") = 0);

  py::class_<TransitionMatrix>(m, "TransitionMatrix")
      .def_readonly("n_rows", &TransitionMatrix::n_rows)
      .def_readonly("n_cols", &TransitionMatrix::n_cols)
      .def_readonly("outflow", &TransitionMatrix::outflow)
      .def_readonly("row_counts", &TransitionMatrix::row_counts)
      .def("nnz", &TransitionMatrix::nnz)
      .def("at", &TransitionMatrix::at)
      .def("row_sum", &TransitionMatrix::row_sum)
      .def("to_dense", &to_dense);

  m.def(
      "matrix_from_dense",
      [](const std::vector<std::vector<double>>& dense, const std::vector<double>& outflow) {
        return matrix_from_dense(dense, outflow);
      },
      py::arg("dense"), py::arg("outflow") = std::vector<double>{});
  m.def(
      "matrix_from_cells",
      [](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
         std::size_t n_rows, std::size_t n_cols) {
        return build_matrix_from_cells(rows, cols, n_rows, n_cols);
      },
      py::arg("rows"), py::arg("cols"), py::arg("n_rows"), py::arg("n_cols"));
  m.def(
      "build_matrix",
      [](const TrajectoryEnsemble& ens, std::shared_ptr<TriMesh> domain,
         std::shared_ptr<TriMesh> image) {
        const Partition d = uniform_partition(domain, all_cells(*domain));
        const Partition im = uniform_partition(image, all_cells(*image));
        return build_matrix(ens, d, im);
      },
      py::arg("ensemble"), py::arg("domain"), py::arg("image"),
      "Ulam matrix on two uniform meshes; points leaving the image count as outflow.");
  m.def(
      "push_measure",
      [](const TransitionMatrix& P, const std::vector<double>& p) { return push_measure(P, p); },
      py::arg("P"), py::arg("p"));

  py::class_<SingularPair>(m, "SingularPair")
      .def_readonly("sigma1", &SingularPair::sigma1)
      .def_readonly("sigma2", &SingularPair::sigma2)
      .def_readonly("left2", &SingularPair::left2)
      .def_readonly("right2", &SingularPair::right2)
      .def_readonly("residual", &SingularPair::residual)
      .def_readonly("degenerate", &SingularPair::degenerate)
      .def_readonly("warning", &SingularPair::warning);

  m.def(
      "second_singular",
      [](const TransitionMatrix& P, double tol, std::size_t max_iter, std::uint64_t seed) {
        return second_singular(P, tol, max_iter, seed);
      },
      py::arg("P"), py::arg("tol") = 1e-11, py::arg("max_iter") = 20000, py::arg("seed") = 0);

  m.def(
      "coherence_ratio",
      [](const TransitionMatrix& P, const std::vector<double>& p, const IndexSet& rows,
         const IndexSet& cols) { return coherence_ratio(P, p, rows, cols); },
      py::arg("P"), py::arg("p"), py::arg("rows"), py::arg("cols"));

  py::class_<CoherentPair>(m, "CoherentPair")
      .def_readonly("rows", &CoherentPair::rows)
      .def_readonly("cols", &CoherentPair::cols)
      .def_readonly("rho", &CoherentPair::rho)
      .def_readonly("rho_complement", &CoherentPair::rho_complement)
      .def_readonly("b_star", &CoherentPair::b_star)
      .def_readonly("c_star", &CoherentPair::c_star);

  m.def(
      "optimize_split",
      [](const TransitionMatrix& P, const std::vector<double>& p, double min_mass) {
        const SingularPair sv = second_singular(P);
        return optimize_split(P, p, sv, min_mass);
      },
      py::arg("P"), py::arg("p"), py::arg("min_mass") = 0.05,
      "Best threshold split; returns (pair, complement).");

  py::class_<HierarchyNode>(m, "HierarchyNode")
      .def_readonly("label", &HierarchyNode::label)
      .def_readonly("depth", &HierarchyNode::depth)
      .def_readonly("rows", &HierarchyNode::rows)
      .def_readonly("cols", &HierarchyNode::cols)
      .def_property_readonly("status", [](const HierarchyNode& n) { return std::string(to_string(n.status)); })
      .def_readonly("rho_star", &HierarchyNode::rho_star)
      .def_readonly("mass", &HierarchyNode::mass)
      .def_readonly("rho", &HierarchyNode::rho)
      .def_readonly("children", &HierarchyNode::children)
      .def("is_leaf", &HierarchyNode::is_leaf);

  py::class_<HierarchyTree>(m, "HierarchyTree")
      .def_readonly("root", &HierarchyTree::root)
      .def_readonly("rho0", &HierarchyTree::rho0)
      .def_readonly("max_depth", &HierarchyTree::max_depth)
      .def("leaf_count", &HierarchyTree::leaf_count)
      .def("reached_depth", &HierarchyTree::reached_depth)
      .def("labels", [](const HierarchyTree& t) {
        const CellLabels l = assign_labels(t);
        return std::make_pair(l.x, l.y);
      })
      .def("__str__", [](const HierarchyTree& t) {
        std::ostringstream s;
        write_tree(s, t);
        return s.str();
      });

  m.def(
      "build_tree",
      [](const TransitionMatrix& P, const std::vector<double>& p, double rho0,
         std::size_t max_depth, double min_mass, std::uint64_t seed) {
        py::gil_scoped_release release;
        return build_tree(P, p, rho0, max_depth, min_mass, seed);
      },
      py::arg("P"), py::arg("p"), py::arg("rho0") = 0.9, py::arg("max_depth") = 4,
      py::arg("min_mass") = 0.05, py::arg("seed") = 0);
  m.def(
      "relative_weights",
      [](const std::vector<double>& parent, const IndexSet& subset) {
        return relative_weights(parent, subset);
      },
      py::arg("parent"), py::arg("subset"));

  py::class_<SamplingAdvice>(m, "SamplingAdvice")
      .def_readonly("q", &SamplingAdvice::q)
      .def_readonly("M", &SamplingAdvice::M)
      .def_readonly("epoch", &SamplingAdvice::epoch)
      .def_readonly("epsilon", &SamplingAdvice::epsilon)
      .def_readonly("points_per_box", &SamplingAdvice::points_per_box)
      .def_readonly("box_count", &SamplingAdvice::box_count)
      .def_readonly("total_points", &SamplingAdvice::total_points);

  m.def("advise", &advise, py::arg("q"), py::arg("M"), py::arg("epoch"), py::arg("box_count") = 1);
  m.def("estimate_lipschitz", &estimate_lipschitz, py::arg("spec"), py::arg("rect"),
        py::arg("n_samples") = 100000, py::arg("seed") = 0, py::arg("workers") = 0);

  m.def(
      "run",
      [](const std::string& config_path, const std::string& out) {
        RunConfig c = load_config(config_path);
        if (!out.empty()) c.output = out;
        c.validate();
        py::gil_scoped_release release;
        return run_pipeline(c).directory;
      },
      py::arg("config"), py::arg("out") = "", "Runs the full pipeline; returns the bundle directory.");
  m.def(
      "verify",
      [](const std::string& dir) {
        const VerifyReport r = verify_bundle(dir);
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : r.checks) out.emplace_back(c.name, c.passed, c.detail);
        return out;
      },
      py::arg("bundle"), "Invariant checks of a bundle as (name, passed, detail) tuples.");
}
