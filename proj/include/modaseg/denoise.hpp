#pragma once

#include "modaseg/volume.hpp"

namespace modaseg {

/// Non-local means denoising. Patch distances are compared within a
/// (2*search_radius+1)^3 window; the filtering bandwidth is
/// strength * sigma_hat, where sigma_hat is a robust noise estimate from
/// pseudo-residuals. Returns a volume with identical geometry.
Volume denoise_nlm(const Volume& v, double strength = 1.0, int patch_radius = 1,
                   int search_radius = 3);

/// Robust noise standard-deviation estimate (median absolute deviation of
/// 6-neighbor pseudo-residuals).
double estimate_noise_sigma(const Volume& v);

}  // namespace modaseg
