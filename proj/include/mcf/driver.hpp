#pragma once

#include <iosfwd>

#include "mcf/config.hpp"
#include "mcf/flow.hpp"
#include "mcf/mesh.hpp"

namespace mcf {

// Flow parameters from the shared knobs of a run description.
FlowConfig flow_config_from(const RunConfig& config);

struct PreparedSurface {
  SurfaceMesh mesh;
  NodalState initial;
};

// Mesh plus initial data for the configured surface. Implicit surfaces give
// exact normals and curvature; an OBJ input falls back to the geometric
// estimates.
PreparedSurface prepare_surface(const RunConfig& config);

// Executes the configured command, writing files under output_dir and a
// human-readable account to log. Returns a process exit code.
int run_command(const RunConfig& config, std::ostream& log);

}  // namespace mcf
