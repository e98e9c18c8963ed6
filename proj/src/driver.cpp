#include "mcf/driver.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mcf/analysis.hpp"
#include "mcf/io.hpp"

namespace mcf {

namespace {

void print_table(std::ostream& log, const TextTable& table) {
  std::vector<std::size_t> width(table.columns.size());
  for (std::size_t i = 0; i < table.columns.size(); ++i) width[i] = table.columns[i].size();
  for (const auto& row : table.rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) log << "  ";
      log << cells[i] << std::string(width[i] - cells[i].size(), ' ');
    }
    log << '\n';
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
}

std::vector<int> parse_subdivision_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::invalid_argument("spatial_subdivisions: empty list");
  return out;
}

std::string snapshot_path(const std::string& dir, const std::string& stem, int index) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%04d.vtk", stem.c_str(), index);
  return dir + "/" + name;
}

SphereStudyConfig study_config_from(const RunConfig& config) {
  SphereStudyConfig sc;
  sc.radius = config.radius;
  sc.end_time = config.end_time;
  sc.fe_order = config.fe_order;
  sc.bdf_order = config.bdf_order;
  sc.scheme = parse_scheme(config.scheme);
  sc.alpha = config.alpha;
  sc.cg.rel_tol = config.cg_tol;
  sc.quadrature_degree = config.quadrature_degree;
  return sc;
}

int run_sphere_convergence(const RunConfig& config, std::ostream& log) {
  const SphereStudyConfig sc = study_config_from(config);
  ConvergenceTable table;
  if (config.study == "temporal") {
    log << "temporal study: BDF" << sc.bdf_order << ", subdivision " << config.subdivision << ", tau0 "
        << format_double(config.tau0) << ", " << config.levels << " levels, T " << format_double(sc.end_time)
        << "\n";
    table = temporal_convergence(sc, config.tau0, config.levels, config.subdivision);
  } else {
    const std::vector<int> subs = parse_subdivision_list(config.spatial_subdivisions);
    log << "spatial study: BDF" << sc.bdf_order << ", subdivisions " << config.spatial_subdivisions << ", tau "
        << format_double(config.spatial_tau) << ", T " << format_double(sc.end_time) << "\n";
    table = spatial_convergence(sc, config.spatial_tau, subs);
  }
  const TextTable text = convergence_text_table(table);
  const std::string stem = config.output_dir + "/" + config.study + "_q" + std::to_string(sc.bdf_order);
  write_csv_file(stem + ".csv", text);
  write_gnuplot_file(stem + ".dat", text);
  print_table(log, text);
  log << "wrote " << stem << ".csv and " << stem << ".dat\n";
  for (const ConvergenceRow& row : table.rows)
    if (row.stop != StopReason::reached_end) {
      log << "warning: a run stopped early (" << stop_reason_name(row.stop) << ")\n";
      return 1;
    }
  return 0;
}

int run_evolution(const RunConfig& config, std::ostream& log) {
  const PreparedSurface prepared = prepare_surface(config);
  const SurfaceMesh& mesh = prepared.mesh;
  log << config.command << ": " << config.surface << " surface, " << mesh.num_nodes() << " nodes, "
      << mesh.num_elements() << " elements, scheme " << config.scheme << ", BDF" << config.bdf_order << ", tau "
      << format_double(config.tau) << "\n";

  const bool track_neck = config.surface == "dumbbell";
  const double band = mesh_width(mesh, prepared.initial.x);
  std::vector<std::string> neck;
  StateObserver observer;
  if (track_neck)
    observer = [&](const NodalState& s) { neck.push_back(format_double(neck_radius(mesh, s.x, band))); };

  const FlowResult result = run_flow(mesh, flow_config_from(config), prepared.initial, observer);

  TextTable table = diagnostics_table(result.diagnostics);
  if (track_neck) {
    table.columns.push_back("neck_radius");
    for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].push_back(neck[i]);
  }
  const std::string stem = config.output_dir + "/" + config.surface;
  write_csv_file(stem + "_diagnostics.csv", table);
  write_gnuplot_file(stem + "_diagnostics.dat", table);
  for (std::size_t i = 0; i < result.snapshots.size(); ++i)
    write_vtk_file(snapshot_path(config.output_dir, config.surface, static_cast<int>(i)), mesh,
                   result.snapshots[i], config.surface + " at t = " + format_double(result.snapshots[i].t));

  log << "stop: " << stop_reason_name(result.stop) << " at t = " << format_double(result.stop_time) << " after "
      << result.diagnostics.size() - 1 << " accepted states\n";
  const StepDiagnostics& first = result.diagnostics.front();
  const StepDiagnostics& last = result.diagnostics.back();
  log << "area " << format_double(first.area) << " -> " << format_double(last.area) << ", max H "
      << format_double(first.max_h) << " -> " << format_double(last.max_h) << "\n";
  if (track_neck && !neck.empty()) log << "neck radius " << neck.front() << " -> " << neck.back() << "\n";
  if (config.surface == "sphere" && result.stop == StopReason::reached_end) {
    const SphereErrors e = sphere_errors(mesh, result.final_state, config.radius);
    log << "errors against the exact sphere at t = " << format_double(result.stop_time) << ": x "
        << format_double(e.x) << ", v " << format_double(e.v) << ", nu " << format_double(e.nu) << ", H "
        << format_double(e.h) << "\n";
  }
  log << "wrote " << stem << "_diagnostics.csv and " << result.snapshots.size() << " vtk snapshots\n";
  return 0;
}

int run_mesh_gen(const RunConfig& config, std::ostream& log) {
  const PreparedSurface prepared = prepare_surface(config);
  const std::string path = config.output_dir + "/" + config.surface + ".obj";
  write_obj_file(path, prepared.mesh, prepared.initial.x);
  log << "mesh-gen: " << config.surface << ", subdivision " << config.subdivision << ", "
      << prepared.mesh.num_vertices() << " vertices, " << prepared.mesh.num_elements() << " elements\n";
  log << "wrote " << path << "\n";
  return 0;
}

}  // namespace

FlowConfig flow_config_from(const RunConfig& config) {
  FlowConfig fc;
  fc.scheme = parse_scheme(config.scheme);
  fc.bdf_order = config.bdf_order;
  fc.tau = config.tau;
  fc.end_time = config.end_time;
  fc.alpha = config.alpha;
  fc.min_area_element = config.min_area_element;
  fc.max_normal_norm = config.max_normal_norm;
  fc.halt_on_area_growth = config.halt_on_area_growth != 0;
  fc.snapshot_every = config.snapshot_every;
  fc.cg.rel_tol = config.cg_tol;
  fc.quadrature_degree = config.quadrature_degree;
  return fc;
}

PreparedSurface prepare_surface(const RunConfig& config) {
  if (config.surface == "sphere") {
    SurfaceMesh mesh = build_sphere_mesh(config.subdivision, config.fe_order, config.radius);
    NodalState initial = initial_state_from_implicit(mesh, make_sphere_surface(config.radius));
    return {std::move(mesh), std::move(initial)};
  }
  if (config.surface == "dumbbell") {
    SurfaceMesh mesh = build_dumbbell_mesh(config.subdivision, config.fe_order);
    NodalState initial = initial_state_from_implicit(mesh, make_dumbbell_surface());
    return {std::move(mesh), std::move(initial)};
  }
  if (config.surface == "obj") {
    if (config.input_obj.empty()) throw std::invalid_argument("surface = obj needs input_obj");
    SurfaceMesh mesh = read_obj_file(config.input_obj);
    if (config.fe_order == 2) mesh = elevate_to_quadratic(mesh);
    const int n = mesh.num_nodes();
    NodalState initial = make_nodal_state(0.0, n);
    initial.x = mesh.reference_positions();
    initial.nu = nodal_element_normals(mesh, initial.x);
    initial.h = lumped_mean_curvature(mesh, initial.x, initial.nu);
    for (int j = 0; j < n; ++j)
      set_node_vec(initial.v, n, j, -initial.h[j] * node_vec(initial.nu, n, j));
    return {std::move(mesh), std::move(initial)};
  }
  throw std::invalid_argument("surface: unknown value '" + config.surface + "'");
}

int run_command(const RunConfig& config, std::ostream& log) {
  std::filesystem::create_directories(config.output_dir);
  if (config.command == "sphere-convergence") return run_sphere_convergence(config, log);
  if (config.command == "dumbbell" || config.command == "single-run") return run_evolution(config, log);
  if (config.command == "mesh-gen") return run_mesh_gen(config, log);
  throw std::invalid_argument("command: unknown value '" + config.command + "'");
}

}  // namespace mcf
