#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mcf/analysis.hpp"
#include "mcf/flow.hpp"
#include "mcf/geometry.hpp"
#include "mcf/io.hpp"
#include "mcf/mesh.hpp"

using namespace mcf;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("shortest float form parses back exactly") {
  const double values[] = {0.0,    1.0,       2.0,       0.1, -0.1,             1.0 / 3.0, 6.02214076e23,
                           1e-300, -2.5e-308, 0.1 + 0.2, 1e6, std::numbers::pi, -0.0,      123456.789};
  for (double v : values) {
    const std::string text = format_double(v);
    CHECK(std::stod(text) == v);
    // shortest form: integers print without an exponent or trailing zeros
    if (v == 2.0) CHECK(text == "2");
  }
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("vtk output describes the quadratic surface as flat sub triangles") {
  const ImplicitSurface sphere = make_sphere_surface(1.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(0, 1.0), &sphere);
  const NodalState state = exact_sphere_state(mesh, 1.0, 0.0);

  std::ostringstream out;
  write_vtk(out, mesh, state, "test surface");
  const std::vector<std::string> lines = lines_of(out.str());

  REQUIRE(lines.size() > 10);
  CHECK(lines[0] == "# vtk DataFile Version 3.0");
  CHECK(lines[1] == "test surface");
  CHECK(lines[2] == "ASCII");
  CHECK(lines[3] == "DATASET POLYDATA");
  CHECK(lines[4] == "POINTS 42 double");

  const auto find_line = [&](const std::string& prefix) {
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (lines[i].rfind(prefix, 0) == 0) return i;
    return lines.size();
  };

  // 20 quadratic elements, four flat sub triangles each
  const std::size_t polys = find_line("POLYGONS");
  REQUIRE(polys < lines.size());
  CHECK(lines[polys] == "POLYGONS 80 320");
  for (int e = 0; e < mesh.num_elements(); ++e) {
    std::set<int> used;
    for (int sub = 0; sub < 4; ++sub) {
      std::istringstream tri(lines[polys + 1 + 4 * e + sub]);
      int count = 0, a = -1, b = -1, c = -1;
      tri >> count >> a >> b >> c;
      CHECK(count == 3);
      for (int idx : {a, b, c}) {
        CHECK(idx >= 0);
        CHECK(idx < mesh.num_nodes());
        used.insert(idx);
      }
    }
    // the sub triangulation visits all six nodes of the element
    const std::span<const int> nodes = mesh.element_nodes(e);
    CHECK(used == std::set<int>(nodes.begin(), nodes.end()));
  }

  CHECK(find_line("POINT_DATA 42") < lines.size());
  CHECK(find_line("VECTORS nu double") < lines.size());
  CHECK(find_line("SCALARS H double 1") < lines.size());
  CHECK(find_line("SCALARS nu_norm double 1") < lines.size());
  CHECK(find_line("VECTORS v double") < lines.size());

  // unit normals on the exact sphere state
  const std::size_t nu_norm = find_line("SCALARS nu_norm double 1");
  CHECK(lines[nu_norm + 1] == "LOOKUP_TABLE default");
  for (int j = 0; j < mesh.num_nodes(); ++j) CHECK(std::stod(lines[nu_norm + 2 + j]) == doctest::Approx(1.0));
}

TEST_CASE("obj round trip preserves the corner triangulation bit for bit") {
  const SurfaceMesh mesh = build_icosphere(1, 1.37);
  std::ostringstream out;
  write_obj(out, mesh, mesh.reference_positions());

  std::istringstream in(out.str());
  const SurfaceMesh back = read_obj(in);
  CHECK(back.order() == 1);
  CHECK(back.num_nodes() == mesh.num_nodes());
  CHECK(back.num_elements() == mesh.num_elements());
  CHECK(back.elements() == mesh.elements());
  for (std::size_t i = 0; i < mesh.reference_positions().size(); ++i)
    CHECK(back.reference_positions()[i] == mesh.reference_positions()[i]);
}

TEST_CASE("obj output of a quadratic mesh keeps only the vertices") {
  const ImplicitSurface sphere = make_sphere_surface(1.0);
  const SurfaceMesh mesh = elevate_to_quadratic(build_icosphere(1, 1.0), &sphere);
  std::ostringstream out;
  write_obj(out, mesh, mesh.reference_positions());
  std::istringstream in(out.str());
  const SurfaceMesh back = read_obj(in);
  CHECK(back.num_nodes() == mesh.num_vertices());
  CHECK(back.num_elements() == mesh.num_elements());
  back.validate();
}

TEST_CASE("obj reader tolerates comments and attribute references") {
  const std::string text =
      "# header comment\n"
      "v 0 0 0\n"
      "v 1 0 0\n"
      "v 0 1 0\n"
      "v 0 0 1\n"
      "vn 0 0 1\n"
      "vt 0.5 0.5\n"
      "f 1/1/1 2/2/2 3/3/3\n"
      "f 1 4 2\n"
      "f 2 4 3\n"
      "f 3 4 1\n";
  std::istringstream in(text);
  const SurfaceMesh mesh = read_obj(in);
  CHECK(mesh.num_nodes() == 4);
  CHECK(mesh.num_elements() == 4);
}

TEST_CASE("obj reader rejects malformed input") {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_obj(in);
  };
  CHECK_THROWS_WITH(parse("v 0 0\n"), doctest::Contains("malformed vertex"));
  CHECK_THROWS_WITH(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n"), doctest::Contains("malformed face"));
  CHECK_THROWS_WITH(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n"), doctest::Contains("out of range"));
  CHECK_THROWS_WITH(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3 4\n"),
                    doctest::Contains("only triangles"));
  CHECK_THROWS_WITH(parse("# nothing here\n"), doctest::Contains("no triangulated surface"));
  // a lone triangle is not a closed surface
  CHECK_THROWS(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"));
}

TEST_CASE("csv quoting follows rfc 4180") {
  TextTable table;
  table.columns = {"name", "value"};
  table.rows = {{"plain", "1"},
                {"comma, separated", "2"},
                {"has \"quotes\"", "3"},
                {"multi\nline", "4"}};
  std::ostringstream out;
  write_csv(out, table);
  CHECK(out.str() ==
        "name,value\r\n"
        "plain,1\r\n"
        "\"comma, separated\",2\r\n"
        "\"has \"\"quotes\"\"\",3\r\n"
        "\"multi\nline\",4\r\n");

  TextTable ragged = table;
  ragged.rows.push_back({"only one cell"});
  std::ostringstream sink;
  CHECK_THROWS_AS(write_csv(sink, ragged), std::invalid_argument);
}

TEST_CASE("gnuplot tables carry a comment header and nan placeholders") {
  TextTable table;
  table.columns = {"t", "err"};
  table.rows = {{"0", "1.5"}, {"0.1", ""}};
  std::ostringstream out;
  write_gnuplot(out, table);
  CHECK(out.str() == "# t err\n0 1.5\n0.1 nan\n");
}

TEST_CASE("diagnostics rows serialize every field") {
  StepDiagnostics d;
  d.t = 0.25;
  d.area = 12.5;
  d.h = 0.33;
  d.min_area_element = 1e-4;
  d.min_nu_norm = 0.99;
  d.max_nu_norm = 1.01;
  d.max_h = 42.0;
  const TextTable table = diagnostics_table({d});
  CHECK(table.columns ==
        std::vector<std::string>{"t", "area", "h", "min_area_element", "min_nu_norm", "max_nu_norm", "max_H"});
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][0] == "0.25");
  CHECK(table.rows[0][1] == "12.5");
  CHECK(table.rows[0][6] == "42");
}

TEST_CASE("convergence tables leave the first rate cell empty") {
  ConvergenceTable conv;
  conv.rows.resize(2);
  conv.rows[0].tau = 0.2;
  conv.rows[0].width = 0.5;
  conv.rows[0].nodes = 100;
  conv.rows[0].error = {1e-2, 2e-2, 3e-2, 4e-2};
  conv.rows[1].tau = 0.1;
  conv.rows[1].width = 0.5;
  conv.rows[1].nodes = 100;
  conv.rows[1].error = {5e-3, 1e-2, 1.5e-2, 2e-2};
  conv.eoc.push_back({1.0, 1.0, 1.0, 1.0});

  const TextTable table = convergence_text_table(conv);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.columns.size() == 11);
  CHECK(table.rows[0][7].empty());
  CHECK(table.rows[1][7] == "1");
  for (const std::vector<std::string>& row : table.rows) CHECK(row.size() == table.columns.size());
}

TEST_CASE("file helpers create and reread real files") {
  const std::string dir = "io_test_tmp";
  std::filesystem::create_directories(dir);
  const SurfaceMesh mesh = build_icosphere(0, 1.0);
  write_obj_file(dir + "/ball.obj", mesh, mesh.reference_positions());
  const SurfaceMesh back = read_obj_file(dir + "/ball.obj");
  CHECK(back.num_nodes() == mesh.num_nodes());
  CHECK_THROWS(read_obj_file(dir + "/does_not_exist.obj"));
  std::filesystem::remove_all(dir);
}
