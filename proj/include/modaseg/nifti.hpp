#pragma once

#include <string>

#include "modaseg/volume.hpp"

namespace modaseg {

/// Reads a NIfTI-1 image (.nii or .nii.gz), applies scl slope/intercept,
/// converts to float32 and reorients to the canonical axis order (direction
/// as close to identity as a signed axis permutation allows).
/// Honors sform when valid, falling back to qform, then to pixdim.
Volume load_volume(const std::string& path);

/// Reads a label image and checks the {0,1,2} value set.
LabelMap load_labelmap(const std::string& path);

/// Writes float32 NIfTI-1 (gzip-compressed when the path ends in .gz).
/// The geometry is stored through the sform.
void save_volume(const Volume& v, const std::string& path);

/// Writes uint8 NIfTI-1; rejects label values outside {0,1,2}.
void save_labelmap(const LabelMap& l, const std::string& path);

/// Permutes/flips axes so that the direction matrix becomes as close to the
/// identity as possible. Exact for axis-aligned direction matrices.
Volume reorient_to_canonical(const Volume& v);
LabelMap reorient_to_canonical(const LabelMap& l);

}  // namespace modaseg
