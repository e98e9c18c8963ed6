#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mcf {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row major

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

// Nodal vector fields with d components are stored component major: entry for
// node j, component c sits at index j + c*N. Scalar fields are plain length-N.
inline double& field_entry(std::vector<double>& f, std::size_t num_nodes, std::size_t node, std::size_t comp) {
  return f[node + comp * num_nodes];
}
inline double field_entry(std::span<const double> f, std::size_t num_nodes, std::size_t node, std::size_t comp) {
  return f[node + comp * num_nodes];
}

inline Vec3 node_vec(std::span<const double> f, std::size_t num_nodes, std::size_t node) {
  return {f[node], f[node + num_nodes], f[node + 2 * num_nodes]};
}

inline void set_node_vec(std::vector<double>& f, std::size_t num_nodes, std::size_t node, const Vec3& v) {
  f[node] = v[0];
  f[node + num_nodes] = v[1];
  f[node + 2 * num_nodes] = v[2];
}

}  // namespace mcf
