#include "mcf/femcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mcf {

ReferenceElement::ReferenceElement(int order) : order_(order) {
  if (order != 1 && order != 2) throw std::invalid_argument("element order must be 1 or 2");
}

std::array<double, 2> ReferenceElement::node_coordinates(int node) const {
  static constexpr std::array<std::array<double, 2>, 6> coords = {
      {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {0.0, 0.5}, {0.5, 0.0}}};
  if (node < 0 || node >= node_count()) throw std::invalid_argument("reference node out of range");
  return coords[node];
}

void ReferenceElement::check_point(double xi, double eta) const {
  constexpr double slack = 1e-12;
  if (xi < -slack || eta < -slack || xi + eta > 1.0 + slack)
    throw std::invalid_argument("point outside reference triangle");
}

void ReferenceElement::shape_values(double xi, double eta, std::span<double> values) const {
  check_point(xi, eta);
  if (values.size() < static_cast<std::size_t>(node_count())) throw std::invalid_argument("values span too small");
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  if (order_ == 1) {
    values[0] = l0;
    values[1] = l1;
    values[2] = l2;
    return;
  }
  values[0] = l0 * (2.0 * l0 - 1.0);
  values[1] = l1 * (2.0 * l1 - 1.0);
  values[2] = l2 * (2.0 * l2 - 1.0);
  values[3] = 4.0 * l1 * l2;
  values[4] = 4.0 * l2 * l0;
  values[5] = 4.0 * l0 * l1;
}

void ReferenceElement::shape_gradients(double xi, double eta, std::span<std::array<double, 2>> gradients) const {
  check_point(xi, eta);
  if (gradients.size() < static_cast<std::size_t>(node_count()))
    throw std::invalid_argument("gradients span too small");
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  if (order_ == 1) {
    gradients[0] = {-1.0, -1.0};
    gradients[1] = {1.0, 0.0};
    gradients[2] = {0.0, 1.0};
    return;
  }
  // grad l0 = (-1,-1), grad l1 = (1,0), grad l2 = (0,1)
  gradients[0] = {-(4.0 * l0 - 1.0), -(4.0 * l0 - 1.0)};
  gradients[1] = {4.0 * l1 - 1.0, 0.0};
  gradients[2] = {0.0, 4.0 * l2 - 1.0};
  gradients[3] = {4.0 * l2, 4.0 * l1};
  gradients[4] = {-4.0 * l2, 4.0 * (l0 - l2)};
  gradients[5] = {4.0 * (l0 - l1), -4.0 * l1};
}

QuadratureRule triangle_quadrature(int degree) {
  if (degree < 0 || degree > 6) throw std::invalid_argument("quadrature degree must be in 0..6");
  QuadratureRule rule;
  auto orbit3 = [&rule](double beta, double w) {
    const double alpha = 1.0 - 2.0 * beta;
    rule.points.push_back({beta, beta});
    rule.points.push_back({alpha, beta});
    rule.points.push_back({beta, alpha});
    rule.weights.insert(rule.weights.end(), 3, 0.5 * w);
  };
  auto orbit6 = [&rule](double a, double b, double c, double w) {
    rule.points.push_back({b, c});
    rule.points.push_back({c, b});
    rule.points.push_back({a, c});
    rule.points.push_back({c, a});
    rule.points.push_back({a, b});
    rule.points.push_back({b, a});
    rule.weights.insert(rule.weights.end(), 6, 0.5 * w);
  };

  switch (degree) {
    case 0:
    case 1:
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0});
      rule.weights.push_back(0.5);
      break;
    case 2:
      orbit3(1.0 / 6.0, 1.0 / 3.0);
      break;
    case 3:
    case 4:
      orbit3(0.445948490915965, 0.223381589678011);
      orbit3(0.091576213509771, 0.109951743655322);
      break;
    case 5: {
      const double s = std::sqrt(15.0);
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0});
      rule.weights.push_back(0.5 * 9.0 / 40.0);
      orbit3((6.0 - s) / 21.0, (155.0 - s) / 1200.0);
      orbit3((6.0 + s) / 21.0, (155.0 + s) / 1200.0);
      break;
    }
    case 6:
      orbit3(0.063089014491502, 0.050844906370207);
      orbit3(0.249286745170910, 0.116786275726379);
      orbit6(0.636502499121399, 0.310352451033785, 0.053145049844816, 0.082851075618374);
      break;
  }
  return rule;
}

SparsityPattern::SparsityPattern(const SurfaceMesh& mesh) {
  const int n = mesh.num_nodes();
  std::vector<std::vector<int>> adjacency(n);
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b) adjacency[nodes[a]].push_back(nodes[b]);
  }
  row_offsets_.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) {
    auto& row = adjacency[j];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    row_offsets_[j + 1] = row_offsets_[j] + static_cast<int>(row.size());
  }
  column_indices_.reserve(row_offsets_[n]);
  for (int j = 0; j < n; ++j) column_indices_.insert(column_indices_.end(), adjacency[j].begin(), adjacency[j].end());
}

int SparsityPattern::find(int row, int col) const {
  const auto begin = column_indices_.begin() + row_offsets_[row];
  const auto end = column_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return -1;
  return static_cast<int>(it - column_indices_.begin());
}

SparseMatrix::SparseMatrix(std::shared_ptr<const SparsityPattern> pattern)
    : pattern_(std::move(pattern)), values_(pattern_->non_zeros(), 0.0) {}

void SparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void SparseMatrix::add(int row, int col, double value) {
  const int k = pattern_->find(row, col);
  if (k < 0) throw std::invalid_argument("entry outside sparsity pattern");
  values_[k] += value;
}

double SparseMatrix::entry(int row, int col) const {
  const int k = pattern_->find(row, col);
  return k < 0 ? 0.0 : values_[k];
}

void SparseMatrix::multiply(std::span<const double> in, std::span<double> out) const {
  const int n = rows();
  if (static_cast<int>(in.size()) != n || static_cast<int>(out.size()) != n)
    throw std::invalid_argument("matvec size mismatch");
  const auto& offsets = pattern_->row_offsets();
  const auto& cols = pattern_->column_indices();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) acc += values_[k] * in[cols[k]];
    out[i] = acc;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> in) const {
  std::vector<double> out(rows());
  multiply(in, out);
  return out;
}

double SparseMatrix::quadratic_form(std::span<const double> left, std::span<const double> right) const {
  const int n = rows();
  if (static_cast<int>(left.size()) != n || static_cast<int>(right.size()) != n)
    throw std::invalid_argument("quadratic form size mismatch");
  const auto& offsets = pattern_->row_offsets();
  const auto& cols = pattern_->column_indices();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) row += values_[k] * right[cols[k]];
    acc += left[i] * row;
  }
  return acc;
}

std::vector<double> SparseMatrix::diagonal() const {
  const int n = rows();
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = entry(i, i);
  return d;
}

SparseMatrix SparseMatrix::combined(double a, const SparseMatrix& x, double b, const SparseMatrix& y) {
  const bool same = x.pattern_ == y.pattern_ ||
                    (x.pattern_->row_offsets() == y.pattern_->row_offsets() &&
                     x.pattern_->column_indices() == y.pattern_->column_indices());
  if (!same) throw std::invalid_argument("combined requires matrices on the same pattern");
  SparseMatrix r(x.pattern_);
  for (std::size_t k = 0; k < r.values_.size(); ++k) r.values_[k] = a * x.values_[k] + b * y.values_[k];
  return r;
}

MeshDegeneration::MeshDegeneration(int element_, double det_g_)
    : std::runtime_error("degenerate element " + std::to_string(element_) +
                         " (det g = " + std::to_string(det_g_) + ")"),
      element(element_),
      det_g(det_g_) {}

AssemblyCounters& assembly_counters() {
  static AssemblyCounters counters;
  return counters;
}

namespace {

constexpr double kDegenerateDetG = 1e-20;

struct QpBasis {
  std::vector<double> values;                    // node_count
  std::vector<std::array<double, 2>> gradients;  // node_count
};

struct BasisTable {
  ReferenceElement ref;
  QuadratureRule quad;
  std::vector<QpBasis> qp;
  explicit BasisTable(const SurfaceMesh& mesh, int quadrature_degree)
      : ref(mesh.order()), quad(triangle_quadrature(quadrature_degree == 0 ? 2 * mesh.order() : quadrature_degree)) {
    qp.resize(quad.points.size());
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      qp[q].values.resize(ref.node_count());
      qp[q].gradients.resize(ref.node_count());
      ref.shape_values(quad.points[q][0], quad.points[q][1], qp[q].values);
      ref.shape_gradients(quad.points[q][0], quad.points[q][1], qp[q].gradients);
    }
  }
};

// Geometry plus surface gradients of every shape function at one point.
struct QpFrame {
  double area_element = 0.0;
  Vec3 normal{};
  std::vector<Vec3> surface_gradients;

  void compute(const SurfaceMesh& mesh, std::span<const double> x, int element, const QpBasis& basis) {
    const int n = mesh.num_nodes();
    const int npe = mesh.nodes_per_element();
    const auto nodes = mesh.element_nodes(element);
    Vec3 t0{0, 0, 0};
    Vec3 t1{0, 0, 0};
    for (int i = 0; i < npe; ++i) {
      const Vec3 p = node_vec(x, n, nodes[i]);
      t0 = t0 + basis.gradients[i][0] * p;
      t1 = t1 + basis.gradients[i][1] * p;
    }
    const double g00 = dot(t0, t0);
    const double g01 = dot(t0, t1);
    const double g11 = dot(t1, t1);
    const double det = g00 * g11 - g01 * g01;
    if (!(det > kDegenerateDetG) || !std::isfinite(det)) throw MeshDegeneration(element, det);
    area_element = std::sqrt(det);
    const Vec3 c = cross(t0, t1);
    normal = (1.0 / norm(c)) * c;
    const double i00 = g11 / det, i01 = -g01 / det, i11 = g00 / det;
    surface_gradients.resize(npe);
    for (int i = 0; i < npe; ++i) {
      const double a = i00 * basis.gradients[i][0] + i01 * basis.gradients[i][1];
      const double b = i01 * basis.gradients[i][0] + i11 * basis.gradients[i][1];
      surface_gradients[i] = a * t0 + b * t1;
    }
  }
};

void check_positions(const SurfaceMesh& mesh, std::span<const double> x) {
  if (static_cast<int>(x.size()) != 3 * mesh.num_nodes())
    throw std::invalid_argument("position vector size mismatch");
}

}  // namespace

ElementGeometry element_geometry(const SurfaceMesh& mesh, std::span<const double> x, int element, double xi,
                                 double eta) {
  check_positions(mesh, x);
  if (element < 0 || element >= mesh.num_elements()) throw std::invalid_argument("element index out of range");
  const int n = mesh.num_nodes();
  const int npe = mesh.nodes_per_element();
  const ReferenceElement ref(mesh.order());
  std::vector<std::array<double, 2>> grads(npe);
  ref.shape_gradients(xi, eta, grads);
  Vec3 t0{0, 0, 0}, t1{0, 0, 0};
  const auto nodes = mesh.element_nodes(element);
  for (int i = 0; i < npe; ++i) {
    const Vec3 p = node_vec(x, n, nodes[i]);
    t0 = t0 + grads[i][0] * p;
    t1 = t1 + grads[i][1] * p;
  }
  const double g00 = dot(t0, t0), g01 = dot(t0, t1), g11 = dot(t1, t1);
  const double det = g00 * g11 - g01 * g01;
  if (!(det > kDegenerateDetG) || !std::isfinite(det)) throw MeshDegeneration(element, det);
  ElementGeometry out;
  out.tangents = {t0, t1};
  out.sqrt_det_g = std::sqrt(det);
  out.g_inverse = {g11 / det, -g01 / det, -g01 / det, g00 / det};
  const Vec3 c = cross(t0, t1);
  out.normal = (1.0 / norm(c)) * c;
  return out;
}

SparseMatrix assemble_mass(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree,
                           std::shared_ptr<const SparsityPattern> pattern) {
  check_positions(mesh, x);
  assembly_counters().mass.fetch_add(1, std::memory_order_relaxed);
  if (!pattern) pattern = std::make_shared<SparsityPattern>(mesh);
  SparseMatrix m(std::move(pattern));
  const BasisTable table(mesh, quadrature_degree);
  const int npe = mesh.nodes_per_element();
  QpFrame frame;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      const double w = table.quad.weights[q] * frame.area_element;
      for (int i = 0; i < npe; ++i) {
        const double wi = w * table.qp[q].values[i];
        m.add(nodes[i], nodes[i], wi * table.qp[q].values[i]);
        for (int j = i + 1; j < npe; ++j) {
          const double v = wi * table.qp[q].values[j];
          m.add(nodes[i], nodes[j], v);
          m.add(nodes[j], nodes[i], v);
        }
      }
    }
  }
  return m;
}

SparseMatrix assemble_stiffness(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree,
                                std::shared_ptr<const SparsityPattern> pattern) {
  check_positions(mesh, x);
  assembly_counters().stiffness.fetch_add(1, std::memory_order_relaxed);
  if (!pattern) pattern = std::make_shared<SparsityPattern>(mesh);
  SparseMatrix a(std::move(pattern));
  const BasisTable table(mesh, quadrature_degree);
  const int npe = mesh.nodes_per_element();
  QpFrame frame;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      const double w = table.quad.weights[q] * frame.area_element;
      for (int i = 0; i < npe; ++i) {
        a.add(nodes[i], nodes[i], w * dot(frame.surface_gradients[i], frame.surface_gradients[i]));
        for (int j = i + 1; j < npe; ++j) {
          const double v = w * dot(frame.surface_gradients[i], frame.surface_gradients[j]);
          a.add(nodes[i], nodes[j], v);
          a.add(nodes[j], nodes[i], v);
        }
      }
    }
  }
  return a;
}

std::vector<double> assemble_g(const SurfaceMesh& mesh, std::span<const double> x, std::span<const double> nu,
                               std::span<const double> h, int quadrature_degree) {
  check_positions(mesh, x);
  const int n = mesh.num_nodes();
  if (static_cast<int>(nu.size()) != 3 * n || static_cast<int>(h.size()) != n)
    throw std::invalid_argument("field size mismatch");
  assembly_counters().g_vectors.fetch_add(1, std::memory_order_relaxed);
  std::vector<double> g(3 * static_cast<std::size_t>(n), 0.0);
  const BasisTable table(mesh, quadrature_degree);
  const int npe = mesh.nodes_per_element();
  QpFrame frame;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      const double w = table.quad.weights[q] * frame.area_element;
      const auto& phi = table.qp[q].values;
      double h_q = 0.0;
      Vec3 grad_h{0, 0, 0};
      Vec3 nu_q{0, 0, 0};
      std::array<Vec3, 3> grad_nu{Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}};
      for (int i = 0; i < npe; ++i) {
        h_q += h[nodes[i]] * phi[i];
        grad_h = grad_h + h[nodes[i]] * frame.surface_gradients[i];
        for (int c = 0; c < 3; ++c) {
          const double v = field_entry(nu, n, nodes[i], c);
          nu_q[c] += v * phi[i];
          grad_nu[c] = grad_nu[c] + v * frame.surface_gradients[i];
        }
      }
      for (int c = 0; c < 3; ++c) {
        const double value = h_q * nu_q[c];
        const Vec3 grad_value = h_q * grad_nu[c] + nu_q[c] * grad_h;
        for (int i = 0; i < npe; ++i) {
          field_entry(g, n, nodes[i], c) -=
              w * (value * phi[i] + dot(grad_value, frame.surface_gradients[i]));
        }
      }
    }
  }
  return g;
}

ForcingVectors assemble_f(const SurfaceMesh& mesh, std::span<const double> x, std::span<const double> nu,
                          std::span<const double> h, int quadrature_degree) {
  check_positions(mesh, x);
  const int n = mesh.num_nodes();
  if (static_cast<int>(nu.size()) != 3 * n || static_cast<int>(h.size()) != n)
    throw std::invalid_argument("field size mismatch");
  assembly_counters().f_vectors.fetch_add(1, std::memory_order_relaxed);
  ForcingVectors f;
  f.f1.assign(3 * static_cast<std::size_t>(n), 0.0);
  f.f2.assign(n, 0.0);
  const BasisTable table(mesh, quadrature_degree);
  const int npe = mesh.nodes_per_element();
  QpFrame frame;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      const double w = table.quad.weights[q] * frame.area_element;
      const auto& phi = table.qp[q].values;
      double h_q = 0.0;
      Vec3 nu_q{0, 0, 0};
      std::array<Vec3, 3> grad_nu{Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}};
      for (int i = 0; i < npe; ++i) {
        h_q += h[nodes[i]] * phi[i];
        for (int c = 0; c < 3; ++c) {
          const double v = field_entry(nu, n, nodes[i], c);
          nu_q[c] += v * phi[i];
          grad_nu[c] = grad_nu[c] + v * frame.surface_gradients[i];
        }
      }
      const double alpha2 = dot(grad_nu[0], grad_nu[0]) + dot(grad_nu[1], grad_nu[1]) + dot(grad_nu[2], grad_nu[2]);
      for (int i = 0; i < npe; ++i) {
        const double wphi = w * alpha2 * phi[i];
        for (int c = 0; c < 3; ++c) field_entry(f.f1, n, nodes[i], c) += wphi * nu_q[c];
        f.f2[nodes[i]] += wphi * h_q;
      }
    }
  }
  return f;
}

std::vector<double> stabilization_term(const SurfaceMesh& mesh, std::span<const double> x,
                                       std::span<const double> nu, double alpha, int quadrature_degree) {
  check_positions(mesh, x);
  const int n = mesh.num_nodes();
  if (static_cast<int>(nu.size()) != 3 * n) throw std::invalid_argument("field size mismatch");
  std::vector<double> s(3 * static_cast<std::size_t>(n), 0.0);
  if (alpha == 0.0) return s;
  const BasisTable table(mesh, quadrature_degree);
  const int npe = mesh.nodes_per_element();
  QpFrame frame;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      const double w = table.quad.weights[q] * frame.area_element;
      const auto& phi = table.qp[q].values;
      Vec3 nu_q{0, 0, 0};
      for (int i = 0; i < npe; ++i)
        for (int c = 0; c < 3; ++c) nu_q[c] += field_entry(nu, n, nodes[i], c) * phi[i];
      const Vec3 drift = nu_q - frame.normal;
      for (int i = 0; i < npe; ++i)
        for (int c = 0; c < 3; ++c) field_entry(s, n, nodes[i], c) -= alpha * w * drift[c] * phi[i];
    }
  }
  return s;
}

double surface_area(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree) {
  check_positions(mesh, x);
  const BasisTable table(mesh, quadrature_degree);
  QpFrame frame;
  double area = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      area += table.quad.weights[q] * frame.area_element;
    }
  }
  return area;
}

double min_area_element(const SurfaceMesh& mesh, std::span<const double> x, int quadrature_degree) {
  check_positions(mesh, x);
  const BasisTable table(mesh, quadrature_degree);
  QpFrame frame;
  double least = std::numeric_limits<double>::infinity();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      least = std::min(least, frame.area_element);
    }
  }
  return least;
}

std::vector<double> nodal_element_normals(const SurfaceMesh& mesh, std::span<const double> x) {
  check_positions(mesh, x);
  const int n = mesh.num_nodes();
  const int npe = mesh.nodes_per_element();
  const ReferenceElement ref(mesh.order());
  std::vector<double> acc(3 * static_cast<std::size_t>(n), 0.0);
  QpBasis basis;
  basis.values.resize(npe);
  basis.gradients.resize(npe);
  QpFrame frame;
  const QuadratureRule mid = triangle_quadrature(1);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    // area weight from the centroid, normal sampled at each node
    ref.shape_values(mid.points[0][0], mid.points[0][1], basis.values);
    ref.shape_gradients(mid.points[0][0], mid.points[0][1], basis.gradients);
    frame.compute(mesh, x, e, basis);
    const double weight = 0.5 * frame.area_element;
    for (int i = 0; i < npe; ++i) {
      const auto coords = ref.node_coordinates(i);
      ref.shape_values(coords[0], coords[1], basis.values);
      ref.shape_gradients(coords[0], coords[1], basis.gradients);
      frame.compute(mesh, x, e, basis);
      for (int c = 0; c < 3; ++c) field_entry(acc, n, nodes[i], c) += weight * frame.normal[c];
    }
  }
  for (int j = 0; j < n; ++j) {
    const Vec3 v = node_vec(acc, n, j);
    const double len = norm(v);
    if (len < 1e-15) throw std::runtime_error("nodal normal averaging degenerated at node " + std::to_string(j));
    set_node_vec(acc, n, j, (1.0 / len) * v);
  }
  return acc;
}

std::vector<double> lumped_mean_curvature(const SurfaceMesh& mesh, std::span<const double> x,
                                          std::span<const double> normals) {
  check_positions(mesh, x);
  const int n = mesh.num_nodes();
  if (static_cast<int>(normals.size()) != 3 * n) throw std::invalid_argument("normal field size mismatch");
  const BasisTable table(mesh, 0);
  const int npe = mesh.nodes_per_element();
  QpFrame frame;
  std::vector<double> lump(n, 0.0);
  std::vector<double> ax(3 * static_cast<std::size_t>(n), 0.0);  // stiffness applied to positions
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (std::size_t q = 0; q < table.quad.points.size(); ++q) {
      frame.compute(mesh, x, e, table.qp[q]);
      const double w = table.quad.weights[q] * frame.area_element;
      std::array<Vec3, 3> grad_x{Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}};
      for (int i = 0; i < npe; ++i)
        for (int c = 0; c < 3; ++c)
          grad_x[c] = grad_x[c] + field_entry(x, n, nodes[i], c) * frame.surface_gradients[i];
      for (int i = 0; i < npe; ++i) {
        lump[nodes[i]] += w * table.qp[q].values[i];
        for (int c = 0; c < 3; ++c)
          field_entry(ax, n, nodes[i], c) += w * dot(grad_x[c], frame.surface_gradients[i]);
      }
    }
  }
  std::vector<double> h(n);
  for (int j = 0; j < n; ++j) {
    const Vec3 w = (1.0 / lump[j]) * node_vec(ax, n, j);
    h[j] = dot(w, node_vec(normals, n, j));
  }
  return h;
}

}  // namespace mcf
