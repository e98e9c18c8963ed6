#pragma once

#include <iosfwd>
#include <string>

#include "mcf/flow.hpp"

namespace mcf {

// Flat key = value run description. One struct serves all commands; each
// command reads the subset it cares about.
struct RunConfig {
  std::string command = "single-run";  // sphere-convergence | dumbbell | mesh-gen | single-run
  std::string output_dir = "out";
  std::string surface = "sphere";  // sphere | dumbbell | obj
  std::string input_obj;           // surface = obj reads this file
  std::string scheme = "esfem";    // esfem | esfem-normalized | dziuk
  int bdf_order = 2;
  int fe_order = 2;
  int subdivision = 2;
  double radius = 2.0;
  double tau = 0.0125;
  double end_time = 0.6;
  double alpha = 0.0;
  double cg_tol = 1e-10;
  int snapshot_every = 0;
  int quadrature_degree = 0;
  double min_area_element = 1e-10;
  double max_normal_norm = 10.0;
  int halt_on_area_growth = 1;
  // convergence study knobs
  std::string study = "temporal";  // temporal | spatial
  double tau0 = 0.2;
  int levels = 5;
  std::string spatial_subdivisions = "2,3,4";
  double spatial_tau = 0.0125;

  bool operator==(const RunConfig&) const = default;
};

// Command-specific defaults on top of the field initializers above.
RunConfig default_config(const std::string& command);

// Sets one field from its key; throws on unknown keys and unparsable values.
void apply_key_value(RunConfig& config, const std::string& key, const std::string& value);

// key = value lines in a fixed order; parse(render(c)) == c.
std::string render_config(const RunConfig& config);

// Keys apply on top of base, except that a command key resets the base to
// that command's defaults first.
RunConfig parse_config(std::istream& in, const RunConfig& base = {});
RunConfig parse_config_text(const std::string& text, const RunConfig& base = {});
RunConfig parse_config_file(const std::string& path, const RunConfig& base = {});

SchemeKind parse_scheme(const std::string& name);
std::string scheme_name(SchemeKind kind);
std::string stop_reason_name(StopReason reason);

}  // namespace mcf
