#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace modaseg {

using Shape3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 mat3_identity() {
  return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

inline Vec3 mat3_apply(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}

inline Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return r;
}

inline Mat3 mat3_transpose(const Mat3& m) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = m[j][i];
  return r;
}

inline double mat3_det(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// max|M^T M - I|; zero for a perfectly orthonormal matrix
inline double orthonormality_error(const Mat3& m) {
  Mat3 g = mat3_mul(mat3_transpose(m), m);
  double err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      err = std::max(err, std::abs(g[i][j] - (i == j ? 1.0 : 0.0)));
  return err;
}

/// Physical placement of a voxel grid: shape, mm spacing, world origin of
/// voxel (0,0,0) center, and an orthonormal direction matrix whose columns
/// are the world directions of the voxel axes.
struct Geometry {
  Shape3 shape{0, 0, 0};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};
  Mat3 direction = mat3_identity();

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
  }

  Vec3 voxel_to_world(const Vec3& idx) const {
    Vec3 s{idx[0] * spacing[0], idx[1] * spacing[1], idx[2] * spacing[2]};
    Vec3 r = mat3_apply(direction, s);
    return {r[0] + origin[0], r[1] + origin[1], r[2] + origin[2]};
  }

  Vec3 world_to_voxel(const Vec3& world) const {
    Vec3 d{world[0] - origin[0], world[1] - origin[1], world[2] - origin[2]};
    // direction is orthonormal, so the inverse is the transpose
    Vec3 s = mat3_apply(mat3_transpose(direction), d);
    return {s[0] / spacing[0], s[1] / spacing[1], s[2] / spacing[2]};
  }

  Vec3 world_center() const {
    return voxel_to_world({(shape[0] - 1) / 2.0, (shape[1] - 1) / 2.0, (shape[2] - 1) / 2.0});
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (shape[a] <= 0) throw std::invalid_argument("geometry: non-positive shape");
      if (!(spacing[a] > 0.0)) throw std::invalid_argument("geometry: non-positive spacing");
      if (!std::isfinite(origin[a])) throw std::invalid_argument("geometry: non-finite origin");
    }
    if (orthonormality_error(direction) > 1e-6)
      throw std::invalid_argument("geometry: direction matrix is not orthonormal");
  }

  bool approx_equal(const Geometry& o, double tol = 1e-6) const {
    if (shape != o.shape) return false;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(spacing[a] - o.spacing[a]) > tol) return false;
      if (std::abs(origin[a] - o.origin[a]) > tol) return false;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (std::abs(direction[i][j] - o.direction[i][j]) > tol) return false;
    return true;
  }
};

/// Axis-aligned voxel box: inclusive min corner and size in voxels.
struct Box {
  std::array<int, 3> min{0, 0, 0};
  std::array<int, 3> size{0, 0, 0};

  std::array<int, 3> end() const {  // exclusive
    return {min[0] + size[0], min[1] + size[1], min[2] + size[2]};
  }

  bool inside(const Shape3& grid) const {
    for (int a = 0; a < 3; ++a)
      if (min[a] < 0 || size[a] <= 0 || min[a] + size[a] > grid[a]) return false;
    return true;
  }

  void validate() const {
    for (int a = 0; a < 3; ++a)
      if (size[a] <= 0) throw std::invalid_argument("box: non-positive size");
  }
};

}  // namespace modaseg
