#pragma once

#include "modaseg/geometry.hpp"

namespace modaseg {

/// 6-DOF rotation + translation acting on world (mm) coordinates:
/// p' = R p + t. Rotation must be proper (det +1) and orthonormal.
struct RigidTransform {
  Mat3 rotation = mat3_identity();
  Vec3 translation{0.0, 0.0, 0.0};

  Vec3 apply(const Vec3& p) const {
    Vec3 r = mat3_apply(rotation, p);
    return {r[0] + translation[0], r[1] + translation[1], r[2] + translation[2]};
  }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = mat3_transpose(rotation);
    Vec3 rt = mat3_apply(inv.rotation, translation);
    inv.translation = {-rt[0], -rt[1], -rt[2]};
    return inv;
  }

  /// this ∘ other: applies `other` first.
  RigidTransform compose(const RigidTransform& other) const {
    RigidTransform r;
    r.rotation = mat3_mul(rotation, other.rotation);
    Vec3 rt = mat3_apply(rotation, other.translation);
    for (int i = 0; i < 3; ++i) r.translation[i] = rt[i] + translation[i];
    return r;
  }

  void validate() const {
    if (orthonormality_error(rotation) > 1e-6)
      throw std::invalid_argument("rigid transform: rotation not orthonormal");
    if (std::abs(mat3_det(rotation) - 1.0) > 1e-6)
      throw std::invalid_argument("rigid transform: rotation not proper (det != +1)");
    for (double t : translation)
      if (!std::isfinite(t)) throw std::invalid_argument("rigid transform: non-finite translation");
  }
};

/// Intrinsic rotations applied in x, y, z order (angles in radians).
Mat3 euler_to_matrix(double rx, double ry, double rz);

/// Recovers (rx, ry, rz) from a rotation matrix built by euler_to_matrix.
Vec3 matrix_to_euler(const Mat3& r);

/// Rotation about a world-space center point: p' = R (p - c) + c + t.
RigidTransform rigid_about_center(const Mat3& rotation, const Vec3& translation, const Vec3& center);

}  // namespace modaseg
