#include "modaseg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "modaseg/bias.hpp"
#include "modaseg/denoise.hpp"

namespace modaseg {

using nlohmann::json;

namespace {

json geometry_to_json(const Geometry& g) {
  return json{{"shape", g.shape},
              {"spacing_mm", g.spacing},
              {"origin_mm", g.origin},
              {"direction", g.direction}};
}

Geometry geometry_from_json(const json& j) {
  Geometry g;
  g.shape = j.at("shape").get<Shape3>();
  g.spacing = j.at("spacing_mm").get<Vec3>();
  g.origin = j.at("origin_mm").get<Vec3>();
  g.direction = j.at("direction").get<Mat3>();
  return g;
}

}  // namespace

std::string provenance_to_json(const ProvenanceRecord& p) {
  json j{{"format", "modaseg-provenance"},
         {"version", 1},
         {"rigid",
          {{"rotation", p.rigid.rotation}, {"translation_mm", p.rigid.translation}}},
         {"template_geometry", geometry_to_json(p.template_geometry)},
         {"roi_box", {{"min_voxel", p.roi_box.min}, {"size_voxel", p.roi_box.size}}},
         {"intensity_min", p.intensity_min},
         {"intensity_max", p.intensity_max},
         {"native_geometry", geometry_to_json(p.native_geometry)}};
  return j.dump(2);
}

ProvenanceRecord provenance_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != "modaseg-provenance")
    throw std::runtime_error("not a provenance record");
  ProvenanceRecord p;
  p.rigid.rotation = j.at("rigid").at("rotation").get<Mat3>();
  p.rigid.translation = j.at("rigid").at("translation_mm").get<Vec3>();
  p.template_geometry = geometry_from_json(j.at("template_geometry"));
  p.roi_box.min = j.at("roi_box").at("min_voxel").get<std::array<int, 3>>();
  p.roi_box.size = j.at("roi_box").at("size_voxel").get<std::array<int, 3>>();
  p.intensity_min = j.at("intensity_min").get<double>();
  p.intensity_max = j.at("intensity_max").get<double>();
  p.native_geometry = geometry_from_json(j.at("native_geometry"));
  return p;
}

void save_provenance(const ProvenanceRecord& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open file for writing: " + path);
  f << provenance_to_json(p) << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

ProvenanceRecord load_provenance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open file for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return provenance_from_json(text);
}

Box compute_roi_box(const std::vector<LabelMap>& labels, const Shape3& fixed_size) {
  if (labels.empty()) throw std::invalid_argument("compute_roi_box: no label maps");
  const Shape3 grid = labels.front().geom.shape;
  std::array<int, 3> lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                        std::numeric_limits<int>::max()};
  std::array<int, 3> hi{-1, -1, -1};
  for (const auto& l : labels) {
    if (l.geom.shape != grid)
      throw std::invalid_argument("compute_roi_box: label maps on different grids");
    bool any = false;
    const auto& s = l.geom.shape;
    for (int z = 0; z < s[2]; ++z)
      for (int y = 0; y < s[1]; ++y)
        for (int x = 0; x < s[0]; ++x)
          if (l.at(x, y, z) != labels::kBackground) {
            any = true;
            lo[0] = std::min(lo[0], x);
            lo[1] = std::min(lo[1], y);
            lo[2] = std::min(lo[2], z);
            hi[0] = std::max(hi[0], x);
            hi[1] = std::max(hi[1], y);
            hi[2] = std::max(hi[2], z);
          }
    if (!any) throw std::invalid_argument("compute_roi_box: empty label map");
  }

  Box box;
  for (int a = 0; a < 3; ++a) {
    int span = hi[a] - lo[a] + 1;
    if (fixed_size[a] < span)
      throw std::invalid_argument("compute_roi_box: ROI smaller than union of label boxes");
    if (fixed_size[a] > grid[a])
      throw std::invalid_argument("compute_roi_box: ROI larger than the grid");
    // extend symmetrically around the union, then clamp by shifting
    int pad = fixed_size[a] - span;
    int start = lo[a] - pad / 2;
    start = std::max(0, std::min(start, grid[a] - fixed_size[a]));
    box.min[a] = start;
    box.size[a] = fixed_size[a];
  }
  return box;
}

NormalizationResult normalize_intensity(const Volume& v) {
  float lo = min_value(v), hi = max_value(v);
  NormalizationResult r{Volume(v.geom), static_cast<double>(lo), static_cast<double>(hi)};
  if (hi <= lo) return r;  // constant volume -> all zeros
  float scale = 1.0f / (hi - lo);
  for (std::size_t i = 0; i < v.data.size(); ++i) r.volume.data[i] = (v.data[i] - lo) * scale;
  return r;
}

PreprocessResult preprocess_to_template(const Volume& v, const Volume& template_volume,
                                        const PreprocessOptions& opts) {
  Volume work = v;
  if (opts.denoise)
    work = denoise_nlm(work, opts.nlm_strength, opts.nlm_patch_radius, opts.nlm_search_radius);

  RegistrationResult reg = register_rigid(work, template_volume, opts.registration);
  Volume aligned = apply_transform(work, reg.transform, template_volume.geom, Interpolation::kLinear);

  if (opts.bias_correction) aligned = correct_bias_field(aligned).corrected;

  PreprocessResult res;
  res.volume = std::move(aligned);
  res.record.rigid = reg.transform;
  res.record.template_geometry = template_volume.geom;
  res.record.native_geometry = v.geom;
  res.record.roi_box = Box{{0, 0, 0}, template_volume.geom.shape};
  return res;
}

PreprocessResult crop_normalize(const Volume& template_space, const ProvenanceRecord& partial,
                                const Box& roi) {
  PreprocessResult res;
  res.record = partial;
  res.record.roi_box = roi;
  NormalizationResult norm = normalize_intensity(crop(template_space, roi));
  res.volume = std::move(norm.volume);
  res.record.intensity_min = norm.min;
  res.record.intensity_max = norm.max;
  return res;
}

PreprocessResult preprocess_pipeline(const Volume& v, const Volume& template_volume, const Box& roi,
                                     const PreprocessOptions& opts) {
  PreprocessResult staged = preprocess_to_template(v, template_volume, opts);
  return crop_normalize(staged.volume, staged.record, roi);
}

LabelMap labels_to_roi(const LabelMap& native, const ProvenanceRecord& p) {
  LabelMap aligned = apply_transform(native, p.rigid, p.template_geometry);
  return crop(aligned, p.roi_box);
}

LabelMap restore_to_native(const LabelMap& seg, const ProvenanceRecord& p) {
  if (seg.geom.shape != p.roi_box.size)
    throw std::invalid_argument("restore_to_native: segmentation does not match the ROI box");
  LabelMap in_template = paste(seg, p.roi_box, p.template_geometry);
  return apply_transform(in_template, p.rigid.inverse(), p.native_geometry);
}

}  // namespace modaseg
