#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "modaseg/volume.hpp"

namespace modaseg {

/// Parameter ranges and application probabilities for the online
/// augmentation engine. All intensity transforms assume inputs in [0,1].
struct AugmentationSpec {
  std::pair<double, double> affine_angle_range{-10.0, 10.0};  // degrees, per axis
  std::pair<double, double> affine_scale_range{0.9, 1.2};     // isotropic
  int elastic_control_points = 7;                             // per axis
  double elastic_max_displacement = 6.0;                      // voxels
  std::pair<double, double> gamma_range{0.5, 2.0};
  std::pair<double, double> blur_sigma_range{0.5, 1.5};       // voxels
  double noise_sigma = 0.01;
  double sharpen_alpha = 10.0;
  double sharpen_sigma = 1.5;

  double p_spatial = 0.5;
  double p_clahe = 0.5;
  double p_gamma = 0.5;
  double p_blur = 0.5;
  double p_noise = 0.5;
  double p_sharpen = 0.5;

  std::uint64_t seed = 0;

  void validate() const;
};

enum class SpatialVariant { kAffine, kElastic, kAffineElastic };

/// One concrete sampled draw; fully determined by (spec, draw_index).
struct AugmentationInstance {
  bool spatial = false;
  SpatialVariant variant = SpatialVariant::kAffine;
  std::array<double, 3> angles_deg{0, 0, 0};
  double scale = 1.0;
  int elastic_control_points = 0;
  std::vector<std::array<float, 3>> elastic_displacements;  // voxels, grid order x-fastest

  bool clahe = false;
  bool gamma = false;
  double gamma_value = 1.0;
  bool blur = false;
  double blur_sigma = 0.0;
  bool noise = false;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  bool sharpen = false;
  double sharpen_alpha = 0.0;
  double sharpen_sigma = 0.0;

  bool is_identity() const {
    return !spatial && !clahe && !gamma && !blur && !noise && !sharpen;
  }
};

/// Deterministically samples the draw_index-th instance of the spec.
AugmentationInstance sample(const AugmentationSpec& spec, std::uint64_t draw_index);

/// Applies the instance's geometric warp identically to image and labels
/// (image trilinear, labels nearest). Affine and elastic displacements are
/// composed into a single resampling pass.
std::pair<Volume, LabelMap> apply_spatial(const Volume& v, const LabelMap& l,
                                          const AugmentationInstance& inst);

/// Power-law contrast v^gamma on [0,1] intensities.
Volume apply_gamma(const Volume& v, double gamma);

/// Slice-wise contrast-limited adaptive histogram equalization (8x8 tiles,
/// clip limit 0.01 of each tile's histogram mass). Output in [0,1].
Volume apply_clahe(const Volume& v);

/// Separable Gaussian blur, sigma in voxels, replicated edges.
Volume apply_blur(const Volume& v, double sigma);

/// Additive Gaussian noise from the given stream, clamped to [0,1].
Volume apply_noise(const Volume& v, double sigma, std::uint64_t rng_seed);

/// Unsharp mask: with I_b = blur(v, sigma) and I_bb = blur(I_b, sigma),
/// returns clamp(I_b + alpha * (I_b - I_bb)).
Volume apply_sharpen(const Volume& v, double alpha, double sigma);

/// Applies all active transforms of the instance in order: spatial,
/// appearance (CLAHE, gamma), quality (blur, noise, sharpen).
std::pair<Volume, LabelMap> apply_instance(const Volume& v, const LabelMap& l,
                                           const AugmentationInstance& inst);

}  // namespace modaseg
