#include "mcf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace mcf {

SurfaceMesh::SurfaceMesh(int order, int num_vertices, std::vector<int> elements,
                         std::vector<double> reference_positions)
    : order_(order),
      num_vertices_(num_vertices),
      elements_(std::move(elements)),
      reference_positions_(std::move(reference_positions)) {
  if (order_ != 1 && order_ != 2) throw std::invalid_argument("mesh order must be 1 or 2");
  if (reference_positions_.size() % 3 != 0) throw std::invalid_argument("positions must hold 3 components per node");
  num_nodes_ = static_cast<int>(reference_positions_.size() / 3);
  if (num_vertices_ < 3 || num_vertices_ > num_nodes_) throw std::invalid_argument("bad vertex count");
  const int npe = nodes_per_element();
  if (elements_.empty() || elements_.size() % npe != 0) throw std::invalid_argument("bad element array size");
  for (int idx : elements_) {
    if (idx < 0 || idx >= num_nodes_) throw std::invalid_argument("element node index out of range");
  }
}

void SurfaceMesh::validate() const {
  // key: undirected vertex edge -> (#traversals a<b, #traversals b<a, midnode)
  std::map<std::pair<int, int>, std::array<int, 3>> edges;
  for (int e = 0; e < num_elements(); ++e) {
    for (int a = 0; a < 3; ++a) {
      const int va = element_node(e, a);
      const int vb = element_node(e, (a + 1) % 3);
      if (va == vb) throw std::runtime_error("degenerate element: repeated vertex");
      auto key = std::minmax(va, vb);
      auto& rec = edges.try_emplace({key.first, key.second}, std::array<int, 3>{0, 0, -1}).first->second;
      ++rec[va < vb ? 0 : 1];
      if (order_ == 2) {
        const int mid = element_node(e, 3 + (a + 2) % 3);  // midnode opposite the third vertex
        if (rec[2] == -1) {
          rec[2] = mid;
        } else if (rec[2] != mid) {
          throw std::runtime_error("neighbouring elements disagree on an edge midnode");
        }
      }
    }
  }
  for (const auto& [key, rec] : edges) {
    if (rec[0] + rec[1] != 2) throw std::runtime_error("surface not closed: edge not shared by two elements");
    if (rec[0] != 1 || rec[1] != 1) throw std::runtime_error("inconsistent orientation: edge traversed twice same way");
  }
}

ImplicitSurface make_sphere_surface(double radius) {
  if (radius <= 0) throw std::invalid_argument("sphere radius must be positive");
  ImplicitSurface s;
  s.value = [radius](const Vec3& p) { return norm(p) - radius; };
  s.gradient = [](const Vec3& p) {
    const double r = norm(p);
    return Vec3{p[0] / r, p[1] / r, p[2] / r};
  };
  s.hessian = [](const Vec3& p) {
    const double r = norm(p);
    const double r3 = r * r * r;
    Mat3 h{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h[3 * i + j] = (i == j ? 1.0 / r : 0.0) - p[i] * p[j] / r3;
    return h;
  };
  return s;
}

namespace {
constexpr double kDumbbellOffset = 0.04;
double dumbbell_g(double s) { return 2.0 * s * (s - 199.0 / 200.0); }
double dumbbell_gp(double s) { return 4.0 * s - 199.0 / 100.0; }
}  // namespace

ImplicitSurface make_dumbbell_surface() {
  ImplicitSurface s;
  s.value = [](const Vec3& p) { return p[0] * p[0] + p[1] * p[1] + dumbbell_g(p[2] * p[2]) - kDumbbellOffset; };
  s.gradient = [](const Vec3& p) {
    return Vec3{2.0 * p[0], 2.0 * p[1], 2.0 * p[2] * dumbbell_gp(p[2] * p[2])};
  };
  s.hessian = [](const Vec3& p) {
    const double s2 = p[2] * p[2];
    Mat3 h{};
    h[0] = 2.0;
    h[4] = 2.0;
    h[8] = 2.0 * dumbbell_gp(s2) + 16.0 * s2;  // G'' = 4
    return h;
  };
  return s;
}

Vec3 level_set_normal(const ImplicitSurface& surface, const Vec3& p) {
  const Vec3 g = surface.gradient(p);
  const double n = norm(g);
  if (n < 1e-15) throw std::runtime_error("level set gradient vanishes");
  return (1.0 / n) * g;
}

double level_set_mean_curvature(const ImplicitSurface& surface, const Vec3& p) {
  const Vec3 g = surface.gradient(p);
  const Mat3 h = surface.hessian(p);
  const double g2 = dot(g, g);
  if (g2 < 1e-30) throw std::runtime_error("level set gradient vanishes");
  const double trace = h[0] + h[4] + h[8];
  const double ghg = dot(g, mat_vec(h, g));
  return (trace * g2 - ghg) / (g2 * std::sqrt(g2));
}

Vec3 dumbbell_half_extents() {
  const double s_star = 1.99 / 4.0;  // argmin of G: G'(s) = 4s - 1.99 = 0
  const double a = std::sqrt(kDumbbellOffset - dumbbell_g(s_star));
  // d(0,0,z) = 0: 2 z^4 - 1.99 z^2 - 0.04 = 0, positive root in z^2
  const double z2 = (1.99 + std::sqrt(1.99 * 1.99 + 8.0 * kDumbbellOffset)) / 4.0;
  return {a, a, std::sqrt(z2)};
}

namespace {

std::int64_t edge_key(int a, int b) {
  auto [lo, hi] = std::minmax(a, b);
  return static_cast<std::int64_t>(lo) << 32 | static_cast<std::int64_t>(hi);
}

Vec3 project_point(const ImplicitSurface& surface, Vec3 p, double tol, int max_iterations, int node) {
  for (int it = 0; it < max_iterations; ++it) {
    const double d = surface.value(p);
    if (std::abs(d) <= tol) return p;
    const Vec3 g = surface.gradient(p);
    const double g2 = dot(g, g);
    if (g2 < 1e-30) break;
    p = p - (d / g2) * g;
  }
  throw std::runtime_error("projection onto level set failed for node " + std::to_string(node));
}

}  // namespace

SurfaceMesh build_icosphere(int subdivisions, double radius) {
  if (subdivisions < 0) throw std::invalid_argument("subdivisions must be non-negative");
  if (radius <= 0) throw std::invalid_argument("radius must be positive");

  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1},
  };
  for (auto& v : verts) v = (radius / norm(v)) * v;

  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1},
  };

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::int64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(verts.size()));
      if (inserted) {
        Vec3 m = 0.5 * (verts[a] + verts[b]);
        verts.push_back((radius / norm(m)) * m);
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int m01 = mid(f[0], f[1]);
      const int m12 = mid(f[1], f[2]);
      const int m02 = mid(f[0], f[2]);
      next.push_back({f[0], m01, m02});
      next.push_back({f[1], m12, m01});
      next.push_back({f[2], m02, m12});
      next.push_back({m01, m12, m02});
    }
    faces = std::move(next);
  }

  const int num_nodes = static_cast<int>(verts.size());
  std::vector<double> pos(3 * static_cast<std::size_t>(num_nodes));
  for (int j = 0; j < num_nodes; ++j) set_node_vec(pos, num_nodes, j, verts[j]);
  std::vector<int> elems;
  elems.reserve(faces.size() * 3);
  for (const auto& f : faces) elems.insert(elems.end(), f.begin(), f.end());
  return SurfaceMesh(1, num_nodes, std::move(elems), std::move(pos));
}

SurfaceMesh project_to_implicit(const SurfaceMesh& mesh, const ImplicitSurface& surface, double tol,
                                int max_iterations) {
  const int n = mesh.num_nodes();
  std::vector<double> pos = mesh.reference_positions();
  for (int j = 0; j < n; ++j) {
    const Vec3 p = project_point(surface, node_vec(pos, n, j), tol, max_iterations, j);
    set_node_vec(pos, n, j, p);
  }
  return SurfaceMesh(mesh.order(), mesh.num_vertices(), mesh.elements(), std::move(pos));
}

SurfaceMesh elevate_to_quadratic(const SurfaceMesh& mesh, const ImplicitSurface* surface) {
  if (mesh.order() != 1) throw std::invalid_argument("elevate_to_quadratic expects an order-1 mesh");
  const int nv = mesh.num_nodes();
  std::vector<double> pos = mesh.reference_positions();  // re-packed below once count is known
  std::vector<Vec3> mids;
  std::map<std::int64_t, int> edge_node;

  const int ne = mesh.num_elements();
  std::vector<int> elems(static_cast<std::size_t>(ne) * 6);
  for (int e = 0; e < ne; ++e) {
    const int v0 = mesh.element_node(e, 0);
    const int v1 = mesh.element_node(e, 1);
    const int v2 = mesh.element_node(e, 2);
    auto midnode = [&](int a, int b) {
      auto [it, inserted] = edge_node.try_emplace(edge_key(a, b), nv + static_cast<int>(mids.size()));
      if (inserted) {
        Vec3 m = 0.5 * (node_vec(pos, nv, a) + node_vec(pos, nv, b));
        if (surface) m = project_point(*surface, m, 1e-14, 50, it->second);
        mids.push_back(m);
      }
      return it->second;
    };
    elems[6 * e + 0] = v0;
    elems[6 * e + 1] = v1;
    elems[6 * e + 2] = v2;
    elems[6 * e + 3] = midnode(v1, v2);
    elems[6 * e + 4] = midnode(v2, v0);
    elems[6 * e + 5] = midnode(v0, v1);
  }

  const int num_nodes = nv + static_cast<int>(mids.size());
  std::vector<double> all(3 * static_cast<std::size_t>(num_nodes));
  for (int j = 0; j < nv; ++j) set_node_vec(all, num_nodes, j, node_vec(pos, nv, j));
  for (std::size_t m = 0; m < mids.size(); ++m) set_node_vec(all, num_nodes, nv + static_cast<int>(m), mids[m]);
  return SurfaceMesh(2, nv, std::move(elems), std::move(all));
}

SurfaceMesh build_dumbbell_mesh(int subdivisions, int fe_order) {
  if (fe_order != 1 && fe_order != 2) throw std::invalid_argument("fe_order must be 1 or 2");
  const ImplicitSurface surf = make_dumbbell_surface();
  const double z0 = dumbbell_half_extents()[2];
  const auto profile_radius = [&](double z) {
    return std::sqrt(std::max(kDumbbellOffset - dumbbell_g(z * z), 0.0));
  };
  // The surface is a body of revolution about the z axis. Map the icosphere
  // by azimuth and meridian arc length: latitude becomes the fraction of the
  // profile curve traversed from the +z tip. This keeps the meridian spacing
  // uniform; projecting a scaled sphere instead shears the elements into
  // slivers where the waist meets the bulbs. Arc length is tabulated over
  // psi with z = z0 cos(psi), which is smooth through both tips.
  constexpr int kSamples = 1 << 14;
  std::vector<double> arc(kSamples + 1, 0.0);
  {
    double rp = profile_radius(z0);
    double zp = z0;
    for (int i = 1; i <= kSamples; ++i) {
      const double psi = std::numbers::pi * i / kSamples;
      const double z = z0 * std::cos(psi);
      const double r = profile_radius(z);
      arc[i] = arc[i - 1] + std::hypot(r - rp, z - zp);
      rp = r;
      zp = z;
    }
  }
  const double total = arc[kSamples];
  SurfaceMesh ball = build_icosphere(subdivisions, 1.0);
  const int n = ball.num_nodes();
  std::vector<double> pos = ball.reference_positions();
  for (int j = 0; j < n; ++j) {
    const Vec3 p = node_vec(pos, n, j);
    const double phi = std::acos(std::clamp(p[2], -1.0, 1.0));
    const double target = (phi / std::numbers::pi) * total;
    const auto it = std::upper_bound(arc.begin(), arc.end(), target);
    double psi = std::numbers::pi;
    if (it != arc.end()) {
      const auto hi = std::max<std::ptrdiff_t>(it - arc.begin(), 1);
      const double seg = arc[hi] - arc[hi - 1];
      const double frac = seg > 0.0 ? (target - arc[hi - 1]) / seg : 0.0;
      psi = std::numbers::pi * (static_cast<double>(hi - 1) + frac) / kSamples;
    }
    const double z = z0 * std::cos(psi);
    const double r = profile_radius(z);
    const double azimuth = std::hypot(p[0], p[1]);
    const double ct = azimuth > 0.0 ? p[0] / azimuth : 1.0;
    const double st = azimuth > 0.0 ? p[1] / azimuth : 0.0;
    set_node_vec(pos, n, j, {r * ct, r * st, z});
  }
  SurfaceMesh mapped(1, n, ball.elements(), std::move(pos));
  if (fe_order == 1) return mapped;
  return elevate_to_quadratic(mapped, &surf);
}

double mesh_width(const SurfaceMesh& mesh, std::span<const double> x) {
  const int n = mesh.num_nodes();
  if (static_cast<int>(x.size()) != 3 * n) throw std::invalid_argument("position vector size mismatch");
  double width = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        const Vec3 d = node_vec(x, n, mesh.element_node(e, a)) - node_vec(x, n, mesh.element_node(e, b));
        width = std::max(width, norm(d));
      }
    }
  }
  return width;
}

}  // namespace mcf
