#include "modaseg/resample.hpp"

#include <cmath>
#include <stdexcept>

namespace modaseg {

namespace {

Geometry centered_target_geometry(const Geometry& in, const Shape3& shape, const Vec3& spacing) {
  Geometry g;
  g.shape = shape;
  g.spacing = spacing;
  g.direction = in.direction;
  g.validate();
  // place so that the world centers of both fields of view coincide
  Vec3 in_center = in.world_center();
  Vec3 half{(shape[0] - 1) / 2.0 * spacing[0], (shape[1] - 1) / 2.0 * spacing[1],
            (shape[2] - 1) / 2.0 * spacing[2]};
  Vec3 off = mat3_apply(g.direction, half);
  for (int i = 0; i < 3; ++i) g.origin[i] = in_center[i] - off[i];
  return g;
}

template <typename Img, typename Sampler>
Img map_onto(const Img& src, const Geometry& target, const RigidTransform& world_map_inv,
             Sampler sample) {
  Img out(target);
  const auto& s = target.shape;
  for (int z = 0; z < s[2]; ++z)
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        Vec3 w = target.voxel_to_world({static_cast<double>(x), static_cast<double>(y),
                                        static_cast<double>(z)});
        Vec3 m = world_map_inv.apply(w);
        Vec3 c = src.geom.world_to_voxel(m);
        out.at(x, y, z) = sample(src, c);
      }
  return out;
}

float sample_vol_linear(const Volume& v, const Vec3& c) {
  return v.sample_linear(c[0], c[1], c[2]);
}
float sample_vol_nearest(const Volume& v, const Vec3& c) {
  return v.sample_nearest(c[0], c[1], c[2]);
}
std::uint8_t sample_lab_nearest(const LabelMap& l, const Vec3& c) {
  return l.sample_nearest(c[0], c[1], c[2]);
}

}  // namespace

Volume resample(const Volume& v, const Shape3& target_shape, const Vec3& target_spacing,
                Interpolation interp) {
  Geometry target = centered_target_geometry(v.geom, target_shape, target_spacing);
  RigidTransform identity;
  if (interp == Interpolation::kLinear) return map_onto(v, target, identity, sample_vol_linear);
  return map_onto(v, target, identity, sample_vol_nearest);
}

LabelMap resample(const LabelMap& l, const Shape3& target_shape, const Vec3& target_spacing,
                  Interpolation interp) {
  if (interp != Interpolation::kNearest)
    throw std::invalid_argument("resample: label maps require nearest interpolation");
  Geometry target = centered_target_geometry(l.geom, target_shape, target_spacing);
  RigidTransform identity;
  return map_onto(l, target, identity, sample_lab_nearest);
}

Volume apply_transform(const Volume& v, const RigidTransform& t, const Geometry& reference,
                       Interpolation interp) {
  t.validate();
  RigidTransform inv = t.inverse();
  if (interp == Interpolation::kLinear) return map_onto(v, reference, inv, sample_vol_linear);
  return map_onto(v, reference, inv, sample_vol_nearest);
}

LabelMap apply_transform(const LabelMap& l, const RigidTransform& t, const Geometry& reference) {
  t.validate();
  return map_onto(l, reference, t.inverse(), sample_lab_nearest);
}

Geometry crop_geometry(const Geometry& g, const Box& box) {
  Geometry out = g;
  out.shape = box.size;
  out.origin = g.voxel_to_world({static_cast<double>(box.min[0]), static_cast<double>(box.min[1]),
                                 static_cast<double>(box.min[2])});
  return out;
}

namespace {

template <typename Img>
Img crop_impl(const Img& v, const Box& box) {
  box.validate();
  if (!box.inside(v.geom.shape)) throw std::invalid_argument("crop: box out of bounds");
  Img out(crop_geometry(v.geom, box));
  for (int z = 0; z < box.size[2]; ++z)
    for (int y = 0; y < box.size[1]; ++y)
      for (int x = 0; x < box.size[0]; ++x)
        out.at(x, y, z) = v.at(box.min[0] + x, box.min[1] + y, box.min[2] + z);
  return out;
}

template <typename Img>
Img paste_impl(const Img& cropped, const Box& box, const Geometry& reference) {
  box.validate();
  if (cropped.geom.shape != box.size)
    throw std::invalid_argument("paste: cropped shape does not equal box size");
  if (!box.inside(reference.shape)) throw std::invalid_argument("paste: box out of bounds");
  Img out(reference);  // zero/background outside the box
  for (int z = 0; z < box.size[2]; ++z)
    for (int y = 0; y < box.size[1]; ++y)
      for (int x = 0; x < box.size[0]; ++x)
        out.at(box.min[0] + x, box.min[1] + y, box.min[2] + z) = cropped.at(x, y, z);
  return out;
}

}  // namespace

Volume crop(const Volume& v, const Box& box) { return crop_impl(v, box); }
LabelMap crop(const LabelMap& l, const Box& box) { return crop_impl(l, box); }

Volume paste(const Volume& cropped, const Box& box, const Geometry& reference) {
  return paste_impl(cropped, box, reference);
}
LabelMap paste(const LabelMap& cropped, const Box& box, const Geometry& reference) {
  return paste_impl(cropped, box, reference);
}

}  // namespace modaseg
