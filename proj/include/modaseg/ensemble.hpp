#pragma once

#include <vector>

#include "modaseg/preprocess.hpp"
#include "modaseg/volume.hpp"

namespace modaseg {

/// Voxel-wise union of the per-class masks over all inputs. A voxel claimed
/// VS by one model and cochlea by another resolves to VS.
LabelMap fuse_union(const std::vector<LabelMap>& segs);

/// Keeps only the largest 26-connected component of `class_id`; other
/// classes are untouched. Size ties keep the component with the smallest
/// minimum linear voxel index. An empty class is returned unchanged.
LabelMap largest_component(const LabelMap& seg, std::uint8_t class_id);

/// Postprocessing: largest connected component for VS, then the provenance
/// inverse back onto the native grid.
LabelMap postprocess(const LabelMap& seg, const ProvenanceRecord& p);

}  // namespace modaseg
