#pragma once

#include "modaseg/volume.hpp"

namespace modaseg {

struct BiasFieldOptions {
  int control_points = 4;   // cubic B-spline control points per axis
  int iterations = 4;       // robust reweighting rounds
  double ridge = 1e-4;      // Tikhonov term on the spline coefficients
  int sample_stride = 1;    // voxel subsampling for the fit
};

struct BiasFieldResult {
  Volume corrected;  // v / field, exactly
  Volume field;      // smooth, positive, geometric mean 1
  double shift;      // intensity shift applied before the log transform
};

/// Multiplicative bias model v = corrected * field. The field is estimated
/// iteratively in log space on a cubic B-spline basis with robust weights so
/// that anatomy contributes less than the smooth shading; intensities are
/// shifted positive first when needed (shift reported in the result).
BiasFieldResult correct_bias_field(const Volume& v, const BiasFieldOptions& opts = {});

}  // namespace modaseg
