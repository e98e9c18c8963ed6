#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mcf/geometry.hpp"

namespace mcf {

// Closed orientable triangulated surface with isoparametric elements of
// order 1 (flat triangles) or 2 (curved six-node triangles). Element tuples
// list the three vertices first; for order 2 the midnode opposite vertex a
// (i.e. on the edge spanned by the other two vertices) follows at slot 3+a.
class SurfaceMesh {
 public:
  SurfaceMesh(int order, int num_vertices, std::vector<int> elements, std::vector<double> reference_positions);

  int order() const { return order_; }
  int num_vertices() const { return num_vertices_; }
  int num_nodes() const { return num_nodes_; }
  int num_elements() const { return static_cast<int>(elements_.size()) / nodes_per_element(); }
  int nodes_per_element() const { return order_ == 1 ? 3 : 6; }

  int element_node(int element, int slot) const { return elements_[element * nodes_per_element() + slot]; }
  std::span<const int> element_nodes(int element) const {
    return {elements_.data() + static_cast<std::size_t>(element) * nodes_per_element(),
            static_cast<std::size_t>(nodes_per_element())};
  }
  const std::vector<int>& elements() const { return elements_; }

  // Node coordinates at mesh construction time, component major (3N).
  const std::vector<double>& reference_positions() const { return reference_positions_; }

  // Audits closedness (every undirected edge shared by exactly two elements)
  // and consistent orientation (each directed vertex edge appears once).
  void validate() const;

 private:
  int order_;
  int num_vertices_;
  int num_nodes_;
  std::vector<int> elements_;
  std::vector<double> reference_positions_;
};

// Level-set description of a closed surface {d = 0} with d < 0 inside, so
// grad d points along the outward normal.
struct ImplicitSurface {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::function<Mat3(const Vec3&)> hessian;
};

ImplicitSurface make_sphere_surface(double radius);

// d(x) = x1^2 + x2^2 + G(x3^2) - 0.04 with G(s) = 2 s (s - 199/200).
ImplicitSurface make_dumbbell_surface();

// Outward unit normal grad d / |grad d| at a point (need not lie on {d=0}).
Vec3 level_set_normal(const ImplicitSurface& surface, const Vec3& p);

// Mean curvature of the level set through p, sum of principal curvatures,
// positive for a sphere with outward normal.
double level_set_mean_curvature(const ImplicitSurface& surface, const Vec3& p);

// Bounding half-extents (a, a, c) of the dumbbell: a = max on-surface radius
// in the x1-x2 plane, c = positive root of d(0,0,z) = 0.
Vec3 dumbbell_half_extents();

// Recursively subdivided icosahedron with all vertices on the sphere of the
// given radius: 10*4^s + 2 vertices, 20*4^s elements, outward orientation.
SurfaceMesh build_icosphere(int subdivisions, double radius);

// Moves every node onto {d = 0} along grad d (Newton on the line search
// x <- x - d(x) grad d(x)/|grad d(x)|^2). Throws naming the first node that
// fails to reach |d| <= tol within max_iterations.
SurfaceMesh project_to_implicit(const SurfaceMesh& mesh, const ImplicitSurface& surface, double tol = 1e-14,
                                int max_iterations = 50);

// Inserts one midnode per undirected edge. Midnodes are edge midpoints,
// projected onto the surface when one is supplied.
SurfaceMesh elevate_to_quadratic(const SurfaceMesh& mesh, const ImplicitSurface* surface = nullptr);

// Icosphere mapped onto the dumbbell as a body of revolution (azimuth kept,
// latitude following meridian arc length); quadratic for fe_order = 2.
SurfaceMesh build_dumbbell_mesh(int subdivisions, int fe_order);

// Max over elements of the max pairwise vertex distance, for the node
// positions x (component major, 3N).
double mesh_width(const SurfaceMesh& mesh, std::span<const double> x);

}  // namespace mcf
