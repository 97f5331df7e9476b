#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modaseg/registration.hpp"
#include "modaseg/resample.hpp"
#include "modaseg/rigid.hpp"
#include "modaseg/volume.hpp"

namespace modaseg {

/// Everything needed to map an ROI-space segmentation back onto the native
/// voxel grid: the rigid alignment, the template grid, the ROI box inside
/// the template grid, the normalization range, and the native geometry.
struct ProvenanceRecord {
  RigidTransform rigid;       // maps native world coords into the template frame
  Geometry template_geometry;
  Box roi_box;                // within the template grid
  double intensity_min = 0.0;
  double intensity_max = 1.0;
  Geometry native_geometry;
};

std::string provenance_to_json(const ProvenanceRecord& p);
ProvenanceRecord provenance_from_json(const std::string& text);
void save_provenance(const ProvenanceRecord& p, const std::string& path);
ProvenanceRecord load_provenance(const std::string& path);

/// Union of the tight foreground bounding boxes of all label maps, extended
/// symmetrically (centered) to exactly `fixed_size` and clamped to the grid
/// by shifting, never shrinking. Throws if any label map is empty, if the
/// union exceeds `fixed_size`, or if the grid is smaller than `fixed_size`.
Box compute_roi_box(const std::vector<LabelMap>& labels, const Shape3& fixed_size);

struct NormalizationResult {
  Volume volume;
  double min, max;
};

/// Linear rescale to [0,1]; constant volumes map to all zeros.
NormalizationResult normalize_intensity(const Volume& v);

struct PreprocessOptions {
  double nlm_strength = 1.0;
  int nlm_patch_radius = 1;
  int nlm_search_radius = 3;
  bool denoise = true;
  bool bias_correction = true;
  RegistrationOptions registration;
};

struct PreprocessResult {
  Volume volume;          // denoised, aligned, bias-corrected, cropped, normalized
  ProvenanceRecord record;
};

/// The five-step preprocessing chain: denoise, align to the template by
/// rigid registration, correct the bias field, crop the ROI, normalize to
/// [0,1]. When `roi` is empty the caller must crop later (compute_roi_box
/// needs all cohort labels); prefer preprocess_to_template + crop_normalize.
PreprocessResult preprocess_pipeline(const Volume& v, const Volume& template_volume, const Box& roi,
                                     const PreprocessOptions& opts = {});

/// Steps 1-3 only: denoise, rigid alignment onto the template grid, bias
/// correction. Returns the template-space volume plus a partial record
/// (rigid + geometries filled in).
PreprocessResult preprocess_to_template(const Volume& v, const Volume& template_volume,
                                        const PreprocessOptions& opts = {});

/// Steps 4-5: ROI crop and intensity normalization, completing the record.
PreprocessResult crop_normalize(const Volume& template_space, const ProvenanceRecord& partial,
                                const Box& roi);

/// Transforms a native-space label map onto the template grid and crops it
/// to the ROI so it pairs with a preprocessed volume.
LabelMap labels_to_roi(const LabelMap& native, const ProvenanceRecord& p);

/// Maps an ROI-space segmentation back to the native grid: paste into the
/// template grid at the ROI box, invert the rigid alignment, resample
/// nearest onto the native geometry.
LabelMap restore_to_native(const LabelMap& seg, const ProvenanceRecord& p);

}  // namespace modaseg
