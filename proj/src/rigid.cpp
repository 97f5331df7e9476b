#include "modaseg/rigid.hpp"

#include <cmath>

namespace modaseg {

Mat3 euler_to_matrix(double rx, double ry, double rz) {
  double cx = std::cos(rx), sx = std::sin(rx);
  double cy = std::cos(ry), sy = std::sin(ry);
  double cz = std::cos(rz), sz = std::sin(rz);
  Mat3 mx = {{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
  Mat3 my = {{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  Mat3 mz = {{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
  return mat3_mul(mz, mat3_mul(my, mx));
}

Vec3 matrix_to_euler(const Mat3& r) {
  // r = Rz Ry Rx; r[2][0] = -sin(ry)
  double ry = std::asin(-std::max(-1.0, std::min(1.0, r[2][0])));
  double rx, rz;
  if (std::abs(std::cos(ry)) > 1e-8) {
    rx = std::atan2(r[2][1], r[2][2]);
    rz = std::atan2(r[1][0], r[0][0]);
  } else {  // gimbal lock: fold everything into rx
    rx = std::atan2(-r[1][2], r[1][1]);
    rz = 0.0;
  }
  return {rx, ry, rz};
}

RigidTransform rigid_about_center(const Mat3& rotation, const Vec3& translation, const Vec3& center) {
  RigidTransform t;
  t.rotation = rotation;
  Vec3 rc = mat3_apply(rotation, center);
  for (int i = 0; i < 3; ++i) t.translation[i] = center[i] - rc[i] + translation[i];
  return t;
}

}  // namespace modaseg
