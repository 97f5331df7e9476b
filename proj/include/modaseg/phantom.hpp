#pragma once

#include <string>
#include <utility>
#include <vector>

#include "modaseg/volume.hpp"

namespace modaseg {

/// Synthetic two-modality dataset: a bright "VS" ellipsoid and a small
/// "cochlea" sphere inside a head-like ellipsoid, with rigid pose jitter per
/// subject. Modality B intensities follow a fixed monotone piecewise-linear
/// lookup of the clean modality-A intensities plus modality-specific noise.
struct PhantomConfig {
  Shape3 shape{64, 32, 16};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::uint64_t seed = 7;

  std::pair<double, double> vs_radius_range{4.5, 6.5};       // x semi-axis, voxels
  std::pair<double, double> cochlea_radius_range{2.6, 3.4};  // voxels
  double rotation_jitter_deg = 4.0;
  double translation_jitter_vox = 2.0;
  double noise_sigma_a = 0.01;
  double noise_sigma_b = 0.02;

  /// A->B intensity lookup knots (piecewise linear, must be monotone).
  std::vector<std::pair<double, double>> intensity_lookup{
      {0.00, 0.03}, {0.15, 0.35}, {0.40, 0.55}, {0.60, 0.72}, {0.85, 0.92}, {1.00, 0.97}};

  // appearance shift applied to modality B only; used to build held-out
  // cohorts whose target appearance differs from the training distribution
  double shift_gamma_b = 1.0;
  double shift_gain_b = 1.0;
  double shift_bias_b = 0.0;
  double shift_extra_noise_b = 0.0;

  void validate() const;
};

struct PhantomSubject {
  Volume a;
  Volume b;
  LabelMap labels;
};

/// Deterministic subject synthesis; identical (cfg, index) pairs produce
/// bit-identical triples.
PhantomSubject generate_subject(const PhantomConfig& cfg, std::uint64_t subject_index);

/// Canonical noise-free modality-A phantom (mean radii, no pose jitter);
/// serves as the registration template.
Volume generate_template(const PhantomConfig& cfg);

/// The analytic A->B intensity map; the translation oracle for tests.
Volume apply_modality_lookup(const Volume& a, const PhantomConfig& cfg);
double lookup_intensity(double a_value, const PhantomConfig& cfg);

struct CohortManifest {
  PhantomConfig config;
  int n = 0;
  std::string directory;
  std::vector<std::uint64_t> subject_seeds;
  std::vector<std::string> image_a, image_b, label_paths;
  std::string template_path;
};

/// Writes n subjects + template + manifest.json into out_dir and returns the
/// manifest. Regenerating from the manifest reproduces the files byte for
/// byte.
CohortManifest generate_cohort(const PhantomConfig& cfg, int n, const std::string& out_dir);

CohortManifest load_manifest(const std::string& path);
void save_manifest(const CohortManifest& m, const std::string& path);

}  // namespace modaseg
