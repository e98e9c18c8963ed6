#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mcf/analysis.hpp"
#include "mcf/config.hpp"
#include "mcf/driver.hpp"
#include "mcf/flow.hpp"
#include "mcf/io.hpp"
#include "mcf/mesh.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_mcflow, m) {
  m.doc() = "mean curvature flow of closed surfaces by evolving finite elements";

  py::class_<mcf::SurfaceMesh>(m, "SurfaceMesh")
      .def_property_readonly("order", &mcf::SurfaceMesh::order)
      .def_property_readonly("num_vertices", &mcf::SurfaceMesh::num_vertices)
      .def_property_readonly("num_nodes", &mcf::SurfaceMesh::num_nodes)
      .def_property_readonly("num_elements", &mcf::SurfaceMesh::num_elements)
      .def_property_readonly("elements", [](const mcf::SurfaceMesh& mesh) { return mesh.elements(); })
      .def_property_readonly("reference_positions",
                             [](const mcf::SurfaceMesh& mesh) { return mesh.reference_positions(); })
      .def("validate", &mcf::SurfaceMesh::validate);

  py::class_<mcf::ImplicitSurface>(m, "ImplicitSurface")
      .def("value", [](const mcf::ImplicitSurface& s, const mcf::Vec3& p) { return s.value(p); })
      .def("gradient", [](const mcf::ImplicitSurface& s, const mcf::Vec3& p) { return s.gradient(p); });

  m.def("make_sphere_surface", &mcf::make_sphere_surface, py::arg("radius"));
  m.def("make_dumbbell_surface", &mcf::make_dumbbell_surface);
  m.def("dumbbell_half_extents", &mcf::dumbbell_half_extents);
  m.def("level_set_mean_curvature", &mcf::level_set_mean_curvature, py::arg("surface"), py::arg("point"));

  m.def("build_sphere_mesh", &mcf::build_sphere_mesh, py::arg("subdivisions"), py::arg("fe_order"),
        py::arg("radius"));
  m.def("build_dumbbell_mesh", &mcf::build_dumbbell_mesh, py::arg("subdivisions"), py::arg("fe_order"));
  m.def("mesh_width",
        [](const mcf::SurfaceMesh& mesh, const std::vector<double>& x) { return mcf::mesh_width(mesh, x); });
  m.def("surface_area", [](const mcf::SurfaceMesh& mesh, const std::vector<double>& x) {
    return mcf::surface_area(mesh, x);
  });
  m.def("neck_radius",
        [](const mcf::SurfaceMesh& mesh, const std::vector<double>& x, double band) {
          return mcf::neck_radius(mesh, x, band);
        },
        py::arg("mesh"), py::arg("x"), py::arg("band") = 0.0);

  py::class_<mcf::NodalState>(m, "NodalState")
      .def_readwrite("t", &mcf::NodalState::t)
      .def_readwrite("x", &mcf::NodalState::x)
      .def_readwrite("v", &mcf::NodalState::v)
      .def_readwrite("nu", &mcf::NodalState::nu)
      .def_readwrite("h", &mcf::NodalState::h);

  py::class_<mcf::BdfScheme>(m, "BdfScheme")
      .def_readonly("order", &mcf::BdfScheme::order)
      .def_readonly("delta", &mcf::BdfScheme::delta)
      .def_readonly("gamma", &mcf::BdfScheme::gamma)
      .def_readonly("delta_numerators", &mcf::BdfScheme::delta_numerators)
      .def_readonly("delta_denominator", &mcf::BdfScheme::delta_denominator);
  m.def("bdf_coefficients", &mcf::bdf_coefficients, py::arg("order"));

  m.def("exact_sphere_state", &mcf::exact_sphere_state, py::arg("mesh"), py::arg("r0"), py::arg("t"));
  m.def("initial_state_from_implicit", &mcf::initial_state_from_implicit, py::arg("mesh"), py::arg("surface"));
  m.def("sphere_radius", &mcf::sphere_radius, py::arg("r0"), py::arg("t"));

  py::enum_<mcf::SchemeKind>(m, "SchemeKind")
      .value("esfem", mcf::SchemeKind::esfem)
      .value("esfem_normalized", mcf::SchemeKind::esfem_normalized)
      .value("dziuk", mcf::SchemeKind::dziuk);

  py::enum_<mcf::StopReason>(m, "StopReason")
      .value("reached_end", mcf::StopReason::reached_end)
      .value("degenerate_geometry", mcf::StopReason::degenerate_geometry)
      .value("cg_failure", mcf::StopReason::cg_failure)
      .value("normal_blowup", mcf::StopReason::normal_blowup)
      .value("normal_collapse", mcf::StopReason::normal_collapse)
      .value("nonfinite_state", mcf::StopReason::nonfinite_state)
      .value("area_growth", mcf::StopReason::area_growth);

  py::class_<mcf::FlowConfig>(m, "FlowConfig")
      .def(py::init<>())
      .def_readwrite("scheme", &mcf::FlowConfig::scheme)
      .def_readwrite("bdf_order", &mcf::FlowConfig::bdf_order)
      .def_readwrite("tau", &mcf::FlowConfig::tau)
      .def_readwrite("end_time", &mcf::FlowConfig::end_time)
      .def_readwrite("alpha", &mcf::FlowConfig::alpha)
      .def_readwrite("min_area_element", &mcf::FlowConfig::min_area_element)
      .def_readwrite("max_normal_norm", &mcf::FlowConfig::max_normal_norm)
      .def_readwrite("halt_on_area_growth", &mcf::FlowConfig::halt_on_area_growth)
      .def_readwrite("snapshot_every", &mcf::FlowConfig::snapshot_every)
      .def_readwrite("quadrature_degree", &mcf::FlowConfig::quadrature_degree);

  py::class_<mcf::StepDiagnostics>(m, "StepDiagnostics")
      .def_readonly("t", &mcf::StepDiagnostics::t)
      .def_readonly("area", &mcf::StepDiagnostics::area)
      .def_readonly("h", &mcf::StepDiagnostics::h)
      .def_readonly("min_area_element", &mcf::StepDiagnostics::min_area_element)
      .def_readonly("min_nu_norm", &mcf::StepDiagnostics::min_nu_norm)
      .def_readonly("max_nu_norm", &mcf::StepDiagnostics::max_nu_norm)
      .def_readonly("max_H", &mcf::StepDiagnostics::max_h);

  py::class_<mcf::FlowResult>(m, "FlowResult")
      .def_readonly("final_state", &mcf::FlowResult::final_state)
      .def_readonly("stop", &mcf::FlowResult::stop)
      .def_readonly("stop_time", &mcf::FlowResult::stop_time)
      .def_readonly("diagnostics", &mcf::FlowResult::diagnostics)
      .def_readonly("snapshots", &mcf::FlowResult::snapshots);

  m.def("run_flow",
        [](const mcf::SurfaceMesh& mesh, const mcf::FlowConfig& config, const mcf::NodalState& initial) {
          return mcf::run_flow(mesh, config, initial);
        },
        py::arg("mesh"), py::arg("config"), py::arg("initial"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<mcf::SphereErrors>(m, "SphereErrors")
      .def_readonly("x", &mcf::SphereErrors::x)
      .def_readonly("v", &mcf::SphereErrors::v)
      .def_readonly("nu", &mcf::SphereErrors::nu)
      .def_readonly("H", &mcf::SphereErrors::h);
  m.def("sphere_errors", &mcf::sphere_errors, py::arg("mesh"), py::arg("state"), py::arg("r0"));

  m.def("write_vtk_file", &mcf::write_vtk_file, py::arg("path"), py::arg("mesh"), py::arg("state"),
        py::arg("title") = "mcf surface");
  m.def("write_obj_file", [](const std::string& path, const mcf::SurfaceMesh& mesh, const std::vector<double>& x) {
    mcf::write_obj_file(path, mesh, x);
  });
  m.def("read_obj_file", &mcf::read_obj_file, py::arg("path"));

  py::class_<mcf::RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("command", &mcf::RunConfig::command)
      .def_readwrite("output_dir", &mcf::RunConfig::output_dir)
      .def_readwrite("surface", &mcf::RunConfig::surface)
      .def_readwrite("input_obj", &mcf::RunConfig::input_obj)
      .def_readwrite("scheme", &mcf::RunConfig::scheme)
      .def_readwrite("bdf_order", &mcf::RunConfig::bdf_order)
      .def_readwrite("fe_order", &mcf::RunConfig::fe_order)
      .def_readwrite("subdivision", &mcf::RunConfig::subdivision)
      .def_readwrite("radius", &mcf::RunConfig::radius)
      .def_readwrite("tau", &mcf::RunConfig::tau)
      .def_readwrite("end_time", &mcf::RunConfig::end_time)
      .def_readwrite("alpha", &mcf::RunConfig::alpha)
      .def_readwrite("cg_tol", &mcf::RunConfig::cg_tol)
      .def_readwrite("snapshot_every", &mcf::RunConfig::snapshot_every)
      .def_readwrite("quadrature_degree", &mcf::RunConfig::quadrature_degree)
      .def_readwrite("min_area_element", &mcf::RunConfig::min_area_element)
      .def_readwrite("max_normal_norm", &mcf::RunConfig::max_normal_norm)
      .def_readwrite("halt_on_area_growth", &mcf::RunConfig::halt_on_area_growth)
      .def_readwrite("study", &mcf::RunConfig::study)
      .def_readwrite("tau0", &mcf::RunConfig::tau0)
      .def_readwrite("levels", &mcf::RunConfig::levels)
      .def_readwrite("spatial_subdivisions", &mcf::RunConfig::spatial_subdivisions)
      .def_readwrite("spatial_tau", &mcf::RunConfig::spatial_tau);
  m.def("default_config", &mcf::default_config, py::arg("command"));
  m.def("render_config", &mcf::render_config, py::arg("config"));
  m.def("parse_config_text",
        [](const std::string& text) { return mcf::parse_config_text(text); }, py::arg("text"));
  m.def("apply_key_value", &mcf::apply_key_value, py::arg("config"), py::arg("key"), py::arg("value"));
  m.def("stop_reason_name", &mcf::stop_reason_name, py::arg("reason"));

  m.def("run_command",
        [](const mcf::RunConfig& config) {
          std::ostringstream log;
          const int code = mcf::run_command(config, log);
          return py::make_tuple(code, log.str());
        },
        py::arg("config"));
}
