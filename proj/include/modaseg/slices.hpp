#pragma once

#include <vector>

#include "modaseg/volume.hpp"

namespace modaseg {

/// An ordered sequence of 2D slices taken perpendicular to `axis`, carrying
/// enough geometry to reassemble the exact source volume.
struct SliceStack {
  std::vector<std::vector<float>> slices;  // fast-axis-major 2D grids
  Geometry source_geometry;
  int axis = 2;
  std::array<int, 2> slice_shape{0, 0};  // (fast, slow) extents of one slice
};

/// Splits into slices along `axis` (default z, the thick-slice axis).
SliceStack split_volume(const Volume& v, int axis = 2);

/// Exact inverse of split_volume.
Volume stack_slices(const SliceStack& s);

}  // namespace modaseg
