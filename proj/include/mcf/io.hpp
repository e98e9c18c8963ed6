#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcf/analysis.hpp"
#include "mcf/flow.hpp"
#include "mcf/mesh.hpp"

namespace mcf {

// Shortest decimal form that parses back to the same double, so repeated runs
// produce byte-identical files.
std::string format_double(double value);

// Legacy ASCII VTK polydata with point data nu, H, nu_norm and v. Quadratic
// elements are written as four flat sub-triangles over the six nodes.
void write_vtk(std::ostream& out, const SurfaceMesh& mesh, const NodalState& state,
               const std::string& title = "mcf surface");
void write_vtk_file(const std::string& path, const SurfaceMesh& mesh, const NodalState& state,
                    const std::string& title = "mcf surface");

// Wavefront OBJ of the corner-vertex triangulation at the positions x.
void write_obj(std::ostream& out, const SurfaceMesh& mesh, std::span<const double> x);
void write_obj_file(const std::string& path, const SurfaceMesh& mesh, std::span<const double> x);

// Reads a triangulated OBJ (v / f lines, 1-based indices, texture and normal
// references ignored) into a flat-element mesh and validates it.
SurfaceMesh read_obj(std::istream& in);
SurfaceMesh read_obj_file(const std::string& path);

struct TextTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // each row sized like columns
};

// RFC 4180: comma separated, CRLF line ends, quotes only where needed.
void write_csv(std::ostream& out, const TextTable& table);
void write_csv_file(const std::string& path, const TextTable& table);

// Space separated with a leading '#' header comment, for gnuplot.
void write_gnuplot(std::ostream& out, const TextTable& table);
void write_gnuplot_file(const std::string& path, const TextTable& table);

TextTable diagnostics_table(const std::vector<StepDiagnostics>& diagnostics);
TextTable convergence_text_table(const ConvergenceTable& table);

}  // namespace mcf
