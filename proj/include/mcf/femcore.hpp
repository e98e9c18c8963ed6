#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcf/geometry.hpp"
#include "mcf/mesh.hpp"

namespace mcf {

// Lagrange basis on the reference triangle {xi >= 0, eta >= 0, xi + eta <= 1}
// in barycentric form: l0 = 1 - xi - eta, l1 = xi, l2 = eta. Order-2 node
// order matches SurfaceMesh elements: vertices then opposite-edge midnodes.
class ReferenceElement {
 public:
  explicit ReferenceElement(int order);

  int order() const { return order_; }
  int node_count() const { return order_ == 1 ? 3 : 6; }
  std::array<double, 2> node_coordinates(int node) const;

  // Values / reference gradients of all shape functions at (xi, eta); the
  // point must lie in the closed reference triangle (1e-12 slack).
  void shape_values(double xi, double eta, std::span<double> values) const;
  void shape_gradients(double xi, double eta, std::span<std::array<double, 2>> gradients) const;

 private:
  void check_point(double xi, double eta) const;
  int order_;
};

struct QuadratureRule {
  std::vector<std::array<double, 2>> points;  // (xi, eta)
  std::vector<double> weights;                // sum to 1/2, all positive
};

// Symmetric rule on the reference triangle, exact for polynomials of the
// requested total degree. Degrees 0..6 supported.
QuadratureRule triangle_quadrature(int degree);

// Node-to-node coupling pattern of a mesh (CSR, symmetric, with diagonal).
class SparsityPattern {
 public:
  explicit SparsityPattern(const SurfaceMesh& mesh);

  int rows() const { return static_cast<int>(row_offsets_.size()) - 1; }
  int non_zeros() const { return static_cast<int>(column_indices_.size()); }
  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& column_indices() const { return column_indices_; }

  // Index into the value array, or -1 when (row, col) is not in the pattern.
  int find(int row, int col) const;

 private:
  std::vector<int> row_offsets_;
  std::vector<int> column_indices_;
};

class SparseMatrix {
 public:
  explicit SparseMatrix(std::shared_ptr<const SparsityPattern> pattern);

  const SparsityPattern& pattern() const { return *pattern_; }
  std::shared_ptr<const SparsityPattern> pattern_ptr() const { return pattern_; }
  int rows() const { return pattern_->rows(); }

  void set_zero();
  void add(int row, int col, double value);
  double entry(int row, int col) const;  // 0 when outside the pattern

  void multiply(std::span<const double> in, std::span<double> out) const;
  std::vector<double> multiply(std::span<const double> in) const;
  double quadratic_form(std::span<const double> left, std::span<const double> right) const;
  std::vector<double> diagonal() const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  // a*X + b*Y on the shared pattern (throws if patterns differ).
  static SparseMatrix combined(double a, const SparseMatrix& x, double b, const SparseMatrix& y);

 private:
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<double> values_;
};

// Raised when an element's first fundamental form degenerates
// (det(J^T J) <= 1e-20 or non-finite); the flow treats it as a stop signal.
struct MeshDegeneration : std::runtime_error {
  MeshDegeneration(int element, double det_g);
  int element;
  double det_g;
};

// First fundamental form data of one element at one reference point, for the
// node positions x (component major, 3N).
struct ElementGeometry {
  std::array<Vec3, 2> tangents;    // columns of the 3x2 Jacobian
  double sqrt_det_g;               // area element
  std::array<double, 4> g_inverse; // row-major 2x2
  Vec3 normal;                     // unit cross product of the tangents
};

ElementGeometry element_geometry(const SurfaceMesh& mesh, std::span<const double> x, int element, double xi,
                                 double eta);

// quadrature_degree 0 selects the default rule of degree 2*order.
SparseMatrix assemble_mass(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree = 0,
                           std::shared_ptr<const SparsityPattern> pattern = nullptr);
SparseMatrix assemble_stiffness(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree = 0,
                                std::shared_ptr<const SparsityPattern> pattern = nullptr);

// Right-hand side of the velocity law, 3N: for component l and node j,
//   g = -int H nu_l phi_j - int grad(H nu_l) . grad phi_j,
// with the product H nu formed pointwise at quadrature points.
std::vector<double> assemble_g(const SurfaceMesh& mesh, std::span<const double> x, std::span<const double> nu,
                               std::span<const double> h, int quadrature_degree = 0);

// Nonlinear right-hand sides of the normal / curvature equations with
// alpha_h^2 = |grad nu_h|^2 (squared Frobenius norm of the 3x3 matrix whose
// columns are the component surface gradients):
//   f1 = int alpha_h^2 nu_l phi_j  (3N),  f2 = int alpha_h^2 H phi_j  (N).
struct ForcingVectors {
  std::vector<double> f1;
  std::vector<double> f2;
};
ForcingVectors assemble_f(const SurfaceMesh& mesh, std::span<const double> x, std::span<const double> nu,
                          std::span<const double> h, int quadrature_degree = 0);

// Drift penalty -alpha int (nu_h - nu_Gamma) phi_j per component (3N), where
// nu_Gamma is the oriented unit element normal at each quadrature point.
std::vector<double> stabilization_term(const SurfaceMesh& mesh, std::span<const double> x,
                                       std::span<const double> nu, double alpha, int quadrature_degree = 0);

double surface_area(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree = 0);
double min_area_element(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree = 0);

// Area-weighted average of oriented element normals at each node, normalized
// (3N). Geometric fallback for schemes that do not evolve the normal.
std::vector<double> nodal_element_normals(const SurfaceMesh& mesh, std::span<const double> x);

// Lumped-mass estimate of the mean curvature at nodes: H_j = w_j . nu_j with
// w = (A x) / (M 1) blockwise. Diagnostic quality only.
std::vector<double> lumped_mean_curvature(const SurfaceMesh& mesh, std::span<const double> x,
                                          std::span<const double> normals);

// Global assembly call counters (diagnostics for operation-count audits).
struct AssemblyCounters {
  std::atomic<long long> mass{0};
  std::atomic<long long> stiffness{0};
  std::atomic<long long> g_vectors{0};
  std::atomic<long long> f_vectors{0};
};
AssemblyCounters& assembly_counters();

}  // namespace mcf
