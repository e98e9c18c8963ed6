#include "mcf/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mcf/io.hpp"

namespace mcf {

namespace {

// Single listing of all keys; apply / render / parse stay in sync through it.
template <class Config, class F>
void for_each_field(Config& c, F&& f) {
  f("command", c.command);
  f("output_dir", c.output_dir);
  f("surface", c.surface);
  f("input_obj", c.input_obj);
  f("scheme", c.scheme);
  f("bdf_order", c.bdf_order);
  f("fe_order", c.fe_order);
  f("subdivision", c.subdivision);
  f("radius", c.radius);
  f("tau", c.tau);
  f("end_time", c.end_time);
  f("alpha", c.alpha);
  f("cg_tol", c.cg_tol);
  f("snapshot_every", c.snapshot_every);
  f("quadrature_degree", c.quadrature_degree);
  f("min_area_element", c.min_area_element);
  f("max_normal_norm", c.max_normal_norm);
  f("halt_on_area_growth", c.halt_on_area_growth);
  f("study", c.study);
  f("tau0", c.tau0);
  f("levels", c.levels);
  f("spatial_subdivisions", c.spatial_subdivisions);
  f("spatial_tau", c.spatial_tau);
}

void parse_into(const std::string& key, const std::string& text, std::string& out) {
  (void)key;
  out = text;
}

void parse_into(const std::string& key, const std::string& text, int& out) {
  int v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const std::from_chars_result r = std::from_chars(begin, end, v);
  if (r.ec != std::errc{} || r.ptr != end) throw std::invalid_argument(key + ": not an integer: " + text);
  out = v;
}

void parse_into(const std::string& key, const std::string& text, double& out) {
  double v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const std::from_chars_result r = std::from_chars(begin, end, v);
  if (r.ec != std::errc{} || r.ptr != end) throw std::invalid_argument(key + ": not a number: " + text);
  out = v;
}

std::string render_value(const std::string& v) { return v; }
std::string render_value(int v) { return std::to_string(v); }
std::string render_value(double v) { return format_double(v); }

void check_choice(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
  if (std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return value == a; })) return;
  std::string msg = key + ": unknown value '" + value + "', expected one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw std::invalid_argument(msg);
}

std::string trim(const std::string& s) {
  const std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const std::size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

RunConfig default_config(const std::string& command) {
  check_choice("command", command, {"sphere-convergence", "dumbbell", "mesh-gen", "single-run"});
  RunConfig c;
  c.command = command;
  if (command == "sphere-convergence") {
    c.bdf_order = 3;
    c.subdivision = 4;
  } else if (command == "dumbbell") {
    c.surface = "dumbbell";
    c.scheme = "esfem-normalized";
    c.subdivision = 4;
    c.tau = 3e-3;
    c.end_time = 0.2;
  } else if (command == "mesh-gen") {
    c.fe_order = 1;
  }
  return c;
}

void apply_key_value(RunConfig& config, const std::string& key, const std::string& value) {
  bool found = false;
  for_each_field(config, [&](const char* name, auto& field) {
    if (found || key != name) return;
    found = true;
    parse_into(key, value, field);
  });
  if (!found) throw std::invalid_argument("unknown config key: " + key);
  if (key == "command") check_choice(key, value, {"sphere-convergence", "dumbbell", "mesh-gen", "single-run"});
  if (key == "surface") check_choice(key, value, {"sphere", "dumbbell", "obj"});
  if (key == "scheme") parse_scheme(value);
  if (key == "study") check_choice(key, value, {"temporal", "spatial"});
}

std::string render_config(const RunConfig& config) {
  std::string text;
  for_each_field(config, [&](const char* name, const auto& field) {
    text += name;
    text += " = ";
    text += render_value(field);
    text += '\n';
  });
  return text;
}

RunConfig parse_config(std::istream& in, const RunConfig& base) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": expected key = value");
    entries.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  RunConfig config = base;
  for (const auto& [key, value] : entries)
    if (key == "command") config = default_config(value);
  for (const auto& [key, value] : entries) apply_key_value(config, key, value);
  return config;
}

RunConfig parse_config_text(const std::string& text, const RunConfig& base) {
  std::istringstream in(text);
  return parse_config(in, base);
}

RunConfig parse_config_file(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return parse_config(in, base);
}

SchemeKind parse_scheme(const std::string& name) {
  if (name == "esfem") return SchemeKind::esfem;
  if (name == "esfem-normalized") return SchemeKind::esfem_normalized;
  if (name == "dziuk") return SchemeKind::dziuk;
  throw std::invalid_argument("scheme: unknown value '" + name + "', expected esfem, esfem-normalized or dziuk");
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::esfem: return "esfem";
    case SchemeKind::esfem_normalized: return "esfem-normalized";
    case SchemeKind::dziuk: return "dziuk";
  }
  throw std::logic_error("unreachable");
}

std::string stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::reached_end: return "reached_end";
    case StopReason::degenerate_geometry: return "degenerate_geometry";
    case StopReason::cg_failure: return "cg_failure";
    case StopReason::normal_blowup: return "normal_blowup";
    case StopReason::normal_collapse: return "normal_collapse";
    case StopReason::nonfinite_state: return "nonfinite_state";
    case StopReason::area_growth: return "area_growth";
  }
  throw std::logic_error("unreachable");
}

}  // namespace mcf
