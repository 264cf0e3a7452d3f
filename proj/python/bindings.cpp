#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dpg/adapt.hpp"
#include "dpg/forms.hpp"
#include "dpg/problems.hpp"
#include "dpg/study.hpp"

namespace py = pybind11;
using namespace dpg;

namespace
{
  Eigen::MatrixXd vertex_array(const Mesh & m)
  {
    Eigen::MatrixXd out(m.num_vertices(), 2);
    for (size_t v = 0; v < m.num_vertices(); ++v) {
      out.row(static_cast<Eigen::Index>(v)) = m.point(static_cast<int>(v)).transpose();
    }
    return out;
  }

  Eigen::MatrixXi triangle_array(const Mesh & m)
  {
    Eigen::MatrixXi out(m.num_triangles(), 3);
    for (size_t t = 0; t < m.num_triangles(); ++t) {
      for (int k = 0; k < 3; ++k) {
        out(static_cast<Eigen::Index>(t), k) = m.triangles()[t].vertices[k];
      }
    }
    return out;
  }

  py::dict row_dict(const StudyRow & r)
  {
    py::dict d;
    d["level"] = r.level;
    d["nelem"] = r.nelem;
    d["ndof"] = r.ndof;
    d["hmax"] = r.hmax;
    d["err_u"] = r.err_u;
    d["err_M"] = r.err_m;
    d["eta_res"] = r.eta_res;
    d["eta_data"] = r.eta_data;
    d["eta_total"] = r.eta_total;
    d["marked"] = r.marked;
    d["cholesky_ok"] = r.cholesky_ok;
    d["relative_residual"] = r.relative_residual;
    return d;
  }
} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Ultraweak DPG and DPG least-squares solvers for A : D^2 u = f";

  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);
  py::register_exception<CordesViolation>(m, "CordesViolation", PyExc_ValueError);

  py::enum_<Method>(m, "Method").value("dpg", Method::dpg).value("dpg_lsq", Method::dpg_lsq);
  py::enum_<TrialKind>(m, "TrialKind").value("standard", TrialKind::standard).value("augmented", TrialKind::augmented);
  py::enum_<Refinement>(m, "Refinement")
      .value("uniform", Refinement::uniform)
      .value("adaptive", Refinement::adaptive);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_triangles", &Mesh::num_triangles)
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("triangles", &triangle_array)
      .def("area", &Mesh::area)
      .def("total_area", &Mesh::total_area)
      .def("max_diameter", &Mesh::max_diameter)
      .def("min_angle", &Mesh::min_angle)
      .def("is_conforming", [](const Mesh & mesh) { return mesh.is_conforming(); })
      .def("dump", [](const Mesh & mesh) {
        std::ostringstream os;
        mesh.write(os);
        return os.str();
      });

  m.def("initial_square_mesh", &initial_square_mesh);
  m.def("uniform_refine", &uniform_refine);
  m.def(
      "refine_nvb", [](const Mesh & mesh, const std::vector<int> & marked) { return refine_nvb(mesh, marked); },
      py::arg("mesh"), py::arg("marked"));

  py::class_<ProblemSpec>(m, "Problem")
      .def_readonly("name", &ProblemSpec::name)
      .def_readonly("notes", &ProblemSpec::notes)
      .def_readonly("trial", &ProblemSpec::trial)
      .def_property_readonly("has_exact_solution", [](const ProblemSpec & p) { return p.exact.has_value(); })
      .def("A", [](const ProblemSpec & p, double x, double y) { return p.coefficient.A(Point(x, y)); })
      .def("f", [](const ProblemSpec & p, double x, double y) { return p.f(Point(x, y)); })
      .def("u", [](const ProblemSpec & p, double x, double y) {
        if (!p.exact) {
          throw std::invalid_argument("problem " + p.name + " has no exact solution");
        }
        return p.exact->u(Point(x, y));
      });
  m.def("problem", &problem_by_id, py::arg("id"));

  py::class_<Solution>(m, "Solution")
      .def_readonly("method", &Solution::method)
      .def_readonly("u", &Solution::u)
      .def_readonly("m", &Solution::m)
      .def_readonly("trace", &Solution::trace)
      .def_readonly("residual_energy", &Solution::residual_energy)
      .def_readonly("num_dofs", &Solution::num_dofs)
      .def_readonly("cholesky_ok", &Solution::cholesky_ok)
      .def_readonly("relative_residual", &Solution::relative_residual)
      .def_readonly("linear_solver", &Solution::linear_solver)
      .def("u_at", [](const Solution & s, const Mesh & mesh, int t, double x, double y) {
        return s.u_at(mesh, t, Point(x, y));
      });

  m.def(
      "solve",
      [](const ProblemSpec & problem, const Mesh & mesh, Method method, std::optional<TrialKind> trial,
         int test_degree) {
        return solve(problem, mesh, {method, trial.value_or(problem.trial), test_degree});
      },
      py::arg("problem"), py::arg("mesh"), py::arg("method") = Method::dpg, py::arg("trial") = py::none(),
      py::arg("test_degree") = 0);

  py::class_<FieldErrors>(m, "FieldErrors")
      .def_readonly("u", &FieldErrors::u)
      .def_readonly("m", &FieldErrors::m)
      .def("total", &FieldErrors::total);
  m.def(
      "field_errors",
      [](const Solution & s, const Mesh & mesh, const ProblemSpec & p) {
        if (!p.exact) {
          throw std::invalid_argument("problem " + p.name + " has no exact solution");
        }
        return field_errors(s, mesh, p.exact->u, p.exact->hessian);
      },
      py::arg("solution"), py::arg("mesh"), py::arg("problem"));

  py::class_<Indicators>(m, "Indicators")
      .def_readonly("residual", &Indicators::residual)
      .def_readonly("data", &Indicators::data)
      .def("residual_total", &Indicators::residual_total)
      .def("data_total", &Indicators::data_total)
      .def("total", &Indicators::total);
  m.def("estimate", &estimate, py::arg("solution"), py::arg("problem"), py::arg("mesh"));
  m.def("doerfler_mark", &doerfler_mark, py::arg("indicators"), py::arg("theta"));

  m.def(
      "cordes_epsilon",
      [](const ProblemSpec & p, int refinements) {
        Mesh mesh = initial_square_mesh();
        for (int k = 0; k < refinements; ++k) {
          mesh = uniform_refine(mesh);
        }
        const CordesReport r = cordes_epsilon(p.coefficient.A, quadrature_samples(mesh));
        return py::make_tuple(r.epsilon, r.lambda_min, r.lambda_max);
      },
      py::arg("problem"), py::arg("refinements") = 2,
      "(epsilon, lambda_min, lambda_max) over quadrature points of a uniformly refined initial mesh");

  m.def(
      "run_convergence",
      [](int problem, Method method, Refinement refinement, int levels, double theta, int max_elements, int max_dofs,
         std::optional<TrialKind> trial, int test_degree) {
        StudyConfig c;
        c.problem = problem;
        c.method = method;
        c.refinement = refinement;
        c.levels = levels;
        c.theta = theta;
        c.max_elements = max_elements;
        c.max_dofs = max_dofs;
        c.trial = trial;
        c.test_degree = test_degree;
        py::list rows;
        for (const StudyRow & r : run_convergence(c).rows) {
          rows.append(row_dict(r));
        }
        return rows;
      },
      py::arg("problem") = 61, py::arg("method") = Method::dpg, py::arg("refinement") = Refinement::uniform,
      py::arg("levels") = 5, py::arg("theta") = 0.5, py::arg("max_elements") = 50000, py::arg("max_dofs") = -1,
      py::arg("trial") = py::none(), py::arg("test_degree") = 0);

  m.def(
      "run_study",
      [](int problem, Method method, Refinement refinement, int levels, double theta, int max_elements,
         const std::filesystem::path & out) {
        StudyConfig c;
        c.problem = problem;
        c.method = method;
        c.refinement = refinement;
        c.levels = levels;
        c.theta = theta;
        c.max_elements = max_elements;
        return static_cast<int>(run_study_to_directory(c, out).rows.size());
      },
      py::arg("problem"), py::arg("method"), py::arg("refinement"), py::arg("levels"), py::arg("theta"),
      py::arg("max_elements"), py::arg("out"), "Writes table.csv, meta.txt, meshes and solutions; returns the level count");
}
