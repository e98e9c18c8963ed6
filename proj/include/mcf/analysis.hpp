#pragma once

#include <span>
#include <vector>

#include "mcf/femcore.hpp"
#include "mcf/flow.hpp"
#include "mcf/mesh.hpp"

namespace mcf {

// Shrinking sphere: a sphere of initial radius r0 evolving by v = -H nu stays
// a sphere with radius(t) = sqrt(r0^2 - 4 t), gone at t = r0^2 / 4.
double sphere_radius(double r0, double t);
double sphere_extinction_time(double r0);

// Icosphere of the requested element order with every node on the sphere.
SurfaceMesh build_sphere_mesh(int subdivisions, int fe_order, double radius);

// Exact solution sampled at the mesh nodes: positions scaled from the
// reference sphere, nu = x / |x|, H = 2 / radius, v = -H nu.
NodalState exact_sphere_state(const SurfaceMesh& mesh, double r0, double t);

// Initial data read off an implicit description: x from the mesh reference
// positions, nu and H from the level set, v = -H nu.
NodalState initial_state_from_implicit(const SurfaceMesh& mesh, const ImplicitSurface& surface);

// Discrete norms through the assembled matrices.
double mass_norm(const SparseMatrix& mass, std::span<const double> w);
double stiffness_seminorm(const SparseMatrix& stiffness, std::span<const double> w);
double energy_norm(const SparseMatrix& mass, const SparseMatrix& stiffness, std::span<const double> w);
// Sum of squared energy norms over the component blocks of a 3N field.
double block_energy_norm(const SparseMatrix& mass, const SparseMatrix& stiffness, std::span<const double> w,
                         int blocks);

struct SphereErrors {
  double x = 0.0;
  double v = 0.0;
  double nu = 0.0;
  double h = 0.0;
};

// Energy norm distance between a computed state and the exact sphere state at
// the same time, with the matrices assembled on the exact nodal positions.
SphereErrors sphere_errors(const SurfaceMesh& mesh, const NodalState& state, double r0);

// Same distance, but reusing matrices assembled once on the reference sphere:
// scaling the sphere by s scales the mass form by s^2 and leaves the
// stiffness form unchanged. Suited to per-step evaluation along a run.
class SphereErrorEvaluator {
 public:
  SphereErrorEvaluator(const SurfaceMesh& mesh, double r0);
  SphereErrors operator()(const NodalState& state) const;

 private:
  const SurfaceMesh* mesh_;
  double r0_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
};

// Running maximum, the L-infinity-in-time error of a run.
void max_errors(SphereErrors& accumulated, const SphereErrors& step);

struct ConvergenceRow {
  double tau = 0.0;
  double width = 0.0;
  int nodes = 0;
  StopReason stop = StopReason::reached_end;
  SphereErrors error;
};

struct ConvergenceTable {
  bool rate_in_tau = true;  // rates against tau, otherwise against the width
  std::vector<ConvergenceRow> rows;
  std::vector<SphereErrors> eoc;  // between rows i-1 and i, size rows.size()-1
};

struct SphereStudyConfig {
  double radius = 2.0;
  double end_time = 0.6;
  int fe_order = 2;
  int bdf_order = 3;
  SchemeKind scheme = SchemeKind::esfem;
  double alpha = 0.0;
  CgConfig cg;
  int quadrature_degree = 0;
};

// Halving runs tau0, tau0/2, ... on one icosphere; errors at the end time.
ConvergenceTable temporal_convergence(const SphereStudyConfig& config, double tau0, int levels, int subdivision);

// One run per subdivision at a fixed small tau.
ConvergenceTable spatial_convergence(const SphereStudyConfig& config, double tau, std::span<const int> subdivisions);

// Worker cap for the study fan-out, from MCF_THREADS (default 1).
int thread_budget();

// Smallest distance to the x3 axis among nodes within |x3| < band. A band of
// zero means the current mesh width.
double neck_radius(const SurfaceMesh& mesh, std::span<const double> x, double band = 0.0);

}  // namespace mcf
