#include "mcf/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mcf {

std::string format_double(double value) {
  std::array<char, 64> buffer;
  const std::to_chars_result r = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (r.ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buffer.data(), r.ptr);
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void check_stream(const std::ostream& out, const char* what) {
  if (!out) throw std::runtime_error(std::string("write failed: ") + what);
}

// Flat triangles covering an element: the element itself for order 1, the
// four corner / center sub-triangles for order 2.
std::vector<std::array<int, 3>> flat_triangles(const SurfaceMesh& mesh, int element) {
  const std::span<const int> nodes = mesh.element_nodes(element);
  if (mesh.order() == 1) return {{nodes[0], nodes[1], nodes[2]}};
  return {{nodes[0], nodes[5], nodes[4]},
          {nodes[1], nodes[3], nodes[5]},
          {nodes[2], nodes[4], nodes[3]},
          {nodes[3], nodes[4], nodes[5]}};
}

}  // namespace

void write_vtk(std::ostream& out, const SurfaceMesh& mesh, const NodalState& state, const std::string& title) {
  const int n = mesh.num_nodes();
  if (static_cast<int>(state.x.size()) != 3 * n) throw std::invalid_argument("state does not fit the mesh");
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << n << " double\n";
  for (int j = 0; j < n; ++j) {
    const Vec3 p = node_vec(state.x, n, j);
    out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]) << '\n';
  }
  std::vector<std::array<int, 3>> triangles;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (const std::array<int, 3>& t : flat_triangles(mesh, e)) triangles.push_back(t);
  out << "POLYGONS " << triangles.size() << ' ' << 4 * triangles.size() << '\n';
  for (const std::array<int, 3>& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';

  out << "POINT_DATA " << n << '\n';
  out << "VECTORS nu double\n";
  for (int j = 0; j < n; ++j) {
    const Vec3 v = node_vec(state.nu, n, j);
    out << format_double(v[0]) << ' ' << format_double(v[1]) << ' ' << format_double(v[2]) << '\n';
  }
  out << "SCALARS H double 1\nLOOKUP_TABLE default\n";
  for (int j = 0; j < n; ++j) out << format_double(state.h[j]) << '\n';
  out << "SCALARS nu_norm double 1\nLOOKUP_TABLE default\n";
  for (int j = 0; j < n; ++j) out << format_double(norm(node_vec(state.nu, n, j))) << '\n';
  out << "VECTORS v double\n";
  for (int j = 0; j < n; ++j) {
    const Vec3 v = node_vec(state.v, n, j);
    out << format_double(v[0]) << ' ' << format_double(v[1]) << ' ' << format_double(v[2]) << '\n';
  }
  check_stream(out, "vtk");
}

void write_vtk_file(const std::string& path, const SurfaceMesh& mesh, const NodalState& state,
                    const std::string& title) {
  std::ofstream out = open_output(path);
  write_vtk(out, mesh, state, title);
}

void write_obj(std::ostream& out, const SurfaceMesh& mesh, std::span<const double> x) {
  const int n = mesh.num_nodes();
  if (static_cast<int>(x.size()) != 3 * n) throw std::invalid_argument("positions do not fit the mesh");
  for (int j = 0; j < mesh.num_vertices(); ++j) {
    const Vec3 p = node_vec(x, n, j);
    out << "v " << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]) << '\n';
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const std::span<const int> nodes = mesh.element_nodes(e);
    out << "f " << nodes[0] + 1 << ' ' << nodes[1] + 1 << ' ' << nodes[2] + 1 << '\n';
  }
  check_stream(out, "obj");
}

void write_obj_file(const std::string& path, const SurfaceMesh& mesh, std::span<const double> x) {
  std::ofstream out = open_output(path);
  write_obj(out, mesh, x);
}

SurfaceMesh read_obj(std::istream& in) {
  std::vector<Vec3> vertices;
  std::vector<int> faces;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream tokens(line);
    std::string tag;
    if (!(tokens >> tag) || tag.empty() || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(tokens >> p[0] >> p[1] >> p[2]))
        throw std::runtime_error("obj line " + std::to_string(line_number) + ": malformed vertex");
      vertices.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> ids;
      std::string ref;
      for (int k = 0; k < 3; ++k) {
        if (!(tokens >> ref)) throw std::runtime_error("obj line " + std::to_string(line_number) + ": malformed face");
        const std::size_t slash = ref.find('/');
        ids[k] = std::stoi(ref.substr(0, slash));
        if (ids[k] < 1 || ids[k] > static_cast<int>(vertices.size()))
          throw std::runtime_error("obj line " + std::to_string(line_number) + ": vertex index out of range");
      }
      if (tokens >> ref) throw std::runtime_error("obj line " + std::to_string(line_number) + ": only triangles supported");
      for (int id : ids) faces.push_back(id - 1);
    }
  }
  if (vertices.empty() || faces.empty()) throw std::runtime_error("obj contains no triangulated surface");
  const int n = static_cast<int>(vertices.size());
  std::vector<double> positions(3 * static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) set_node_vec(positions, n, j, vertices[j]);
  SurfaceMesh mesh(1, n, std::move(faces), std::move(positions));
  mesh.validate();
  return mesh;
}

SurfaceMesh read_obj_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_obj(in);
}

namespace {

bool needs_quotes(const std::string& cell) {
  return cell.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_cell(const std::string& cell) {
  if (!needs_quotes(cell)) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

void check_table(const TextTable& table) {
  for (const std::vector<std::string>& row : table.rows)
    if (row.size() != table.columns.size()) throw std::invalid_argument("table row width mismatch");
}

}  // namespace

void write_csv(std::ostream& out, const TextTable& table) {
  check_table(table);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << csv_cell(cells[i]);
    }
    out << "\r\n";
  };
  line(table.columns);
  for (const std::vector<std::string>& row : table.rows) line(row);
  check_stream(out, "csv");
}

void write_csv_file(const std::string& path, const TextTable& table) {
  std::ofstream out = open_output(path);
  write_csv(out, table);
}

void write_gnuplot(std::ostream& out, const TextTable& table) {
  check_table(table);
  out << '#';
  for (const std::string& c : table.columns) out << ' ' << c;
  out << '\n';
  for (const std::vector<std::string>& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ' ';
      out << (row[i].empty() ? "nan" : row[i]);
    }
    out << '\n';
  }
  check_stream(out, "gnuplot");
}

void write_gnuplot_file(const std::string& path, const TextTable& table) {
  std::ofstream out = open_output(path);
  write_gnuplot(out, table);
}

TextTable diagnostics_table(const std::vector<StepDiagnostics>& diagnostics) {
  TextTable table;
  table.columns = {"t", "area", "h", "min_area_element", "min_nu_norm", "max_nu_norm", "max_H"};
  for (const StepDiagnostics& d : diagnostics)
    table.rows.push_back({format_double(d.t), format_double(d.area), format_double(d.h),
                          format_double(d.min_area_element), format_double(d.min_nu_norm),
                          format_double(d.max_nu_norm), format_double(d.max_h)});
  return table;
}

TextTable convergence_text_table(const ConvergenceTable& table) {
  TextTable text;
  text.columns = {"tau", "h", "nodes", "err_x", "err_v", "err_nu", "err_H", "eoc_x", "eoc_v", "eoc_nu", "eoc_H"};
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const ConvergenceRow& r = table.rows[i];
    std::vector<std::string> row = {format_double(r.tau),     format_double(r.width),
                                    std::to_string(r.nodes),  format_double(r.error.x),
                                    format_double(r.error.v), format_double(r.error.nu),
                                    format_double(r.error.h)};
    if (i == 0) {
      row.insert(row.end(), {"", "", "", ""});
    } else {
      const SphereErrors& e = table.eoc[i - 1];
      row.insert(row.end(),
                 {format_double(e.x), format_double(e.v), format_double(e.nu), format_double(e.h)});
    }
    text.rows.push_back(row);
  }
  return text;
}

}  // namespace mcf
