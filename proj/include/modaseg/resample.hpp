#pragma once

#include "modaseg/rigid.hpp"
#include "modaseg/volume.hpp"

namespace modaseg {

enum class Interpolation { kLinear, kNearest };

/// Resamples onto a new grid of the given shape and spacing. The output grid
/// keeps the input direction and is positioned so both grids share the same
/// world-space center (field of view preserved).
Volume resample(const Volume& v, const Shape3& target_shape, const Vec3& target_spacing,
                Interpolation interp);
LabelMap resample(const LabelMap& l, const Shape3& target_shape, const Vec3& target_spacing,
                  Interpolation interp = Interpolation::kNearest);

/// Resamples `v` onto `reference` after mapping it by the rigid transform
/// `t` (moving-to-reference world mapping): out(i) = v(t^-1(world(i))).
Volume apply_transform(const Volume& v, const RigidTransform& t, const Geometry& reference,
                       Interpolation interp);
LabelMap apply_transform(const LabelMap& l, const RigidTransform& t, const Geometry& reference);

/// Extracts the subvolume spanned by `box`; throws if the box leaves the grid.
Volume crop(const Volume& v, const Box& box);
LabelMap crop(const LabelMap& l, const Box& box);

/// Inverse of crop: places the cropped block at `box` inside a zero-filled
/// grid with `reference` geometry.
Volume paste(const Volume& cropped, const Box& box, const Geometry& reference);
LabelMap paste(const LabelMap& cropped, const Box& box, const Geometry& reference);

/// Geometry of the subgrid spanned by `box` within `g`.
Geometry crop_geometry(const Geometry& g, const Box& box);

}  // namespace modaseg
