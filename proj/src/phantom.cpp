#include "modaseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "modaseg/nifti.hpp"
#include "modaseg/rigid.hpp"
#include "modaseg/rng.hpp"

namespace modaseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ellipsoid {
  Vec3 center;    // mm
  Vec3 semiaxes;  // mm
  Mat3 pose = mat3_identity();

  // normalized radial coordinate: <= 1 inside
  double membership(const Vec3& p) const {
    Vec3 d{p[0] - center[0], p[1] - center[1], p[2] - center[2]};
    Vec3 q = mat3_apply(mat3_transpose(pose), d);
    double m = 0.0;
    for (int i = 0; i < 3; ++i) {
      double r = q[i] / semiaxes[i];
      m += r * r;
    }
    return std::sqrt(m);
  }

  double min_axis() const { return std::min({semiaxes[0], semiaxes[1], semiaxes[2]}); }
};

// soft edge over ~1.2 voxels around the ellipsoid surface
double soft_inside(const Ellipsoid& e, const Vec3& p, double edge_mm = 1.2) {
  double m = e.membership(p);
  double dist = (1.0 - m) * e.min_axis();  // approximate signed distance, + inside
  double t = dist / edge_mm + 0.5;
  t = std::min(1.0, std::max(0.0, t));
  return t * t * (3.0 - 2.0 * t);
}

struct Anatomy {
  Ellipsoid head, vs, cochlea;
  std::array<double, 9> modulation;  // 3 waves x (freq per axis scale, phase, amp)
};

struct TissueLevels {
  double background = 0.15;
  double head = 0.40;
  double vs = 0.85;
  double cochlea = 0.60;
};

Anatomy make_anatomy(const PhantomConfig& cfg, Rng& rng, bool jitter, bool modulate) {
  const Vec3& sp = cfg.spacing;
  Vec3 c{(cfg.shape[0] - 1) / 2.0 * sp[0], (cfg.shape[1] - 1) / 2.0 * sp[1],
         (cfg.shape[2] - 1) / 2.0 * sp[2]};

  // fixed draw order keeps subjects reproducible from the seed alone
  double ax = rng.uniform(cfg.vs_radius_range.first, cfg.vs_radius_range.second);
  double ay = ax * rng.uniform(0.70, 0.85);
  double az = ax * rng.uniform(0.55, 0.70);
  double rc = rng.uniform(cfg.cochlea_radius_range.first, cfg.cochlea_radius_range.second);
  double rx = rng.uniform(-cfg.rotation_jitter_deg, cfg.rotation_jitter_deg) * kPi / 180.0;
  double ry = rng.uniform(-cfg.rotation_jitter_deg, cfg.rotation_jitter_deg) * kPi / 180.0;
  double rz = rng.uniform(-cfg.rotation_jitter_deg, cfg.rotation_jitter_deg) * kPi / 180.0;
  Vec3 t{rng.uniform(-cfg.translation_jitter_vox, cfg.translation_jitter_vox) * sp[0],
         rng.uniform(-cfg.translation_jitter_vox, cfg.translation_jitter_vox) * sp[1],
         rng.uniform(-cfg.translation_jitter_vox, cfg.translation_jitter_vox) * sp[2]};
  std::array<double, 9> waves;
  for (int w = 0; w < 3; ++w) {
    waves[3 * w + 0] = rng.uniform(0.5, 1.5);       // cycles across the axis
    waves[3 * w + 1] = rng.uniform(0.0, 2.0 * kPi); // phase
    waves[3 * w + 2] = 0.03;                        // amplitude
  }

  if (!jitter) {
    ax = 0.5 * (cfg.vs_radius_range.first + cfg.vs_radius_range.second);
    ay = ax * 0.775;
    az = ax * 0.625;
    rc = 0.5 * (cfg.cochlea_radius_range.first + cfg.cochlea_radius_range.second);
    rx = ry = rz = 0.0;
    t = {0, 0, 0};
  }
  if (!modulate)
    for (int w = 0; w < 3; ++w) waves[3 * w + 2] = 0.0;

  Mat3 pose = euler_to_matrix(rx, ry, rz);
  auto place = [&](const Vec3& offset) {
    Vec3 r = mat3_apply(pose, offset);
    return Vec3{c[0] + r[0] + t[0], c[1] + r[1] + t[1], c[2] + r[2] + t[2]};
  };

  Anatomy a;
  a.modulation = waves;
  a.head = {place({0, 0, 0}),
            {0.40 * cfg.shape[0] * sp[0], 0.38 * cfg.shape[1] * sp[1], 0.42 * cfg.shape[2] * sp[2]},
            pose};
  a.vs = {place({2.0 * sp[0], 0.5 * sp[1], 0.0}), {ax * sp[0], ay * sp[1], az * sp[2]}, pose};
  double cochlea_gap = 1.5 * sp[0];
  a.cochlea = {place({2.0 * sp[0] + ax * sp[0] + cochlea_gap + rc * sp[0], 0.5 * sp[1], 0.0}),
               {rc * sp[0], rc * sp[1], rc * sp[2]},
               pose};
  return a;
}

double clean_intensity(const Anatomy& a, const TissueLevels& lv, const Vec3& p, const Shape3& shape,
                       const Vec3& spacing) {
  double mod = 0.0;
  const int axis_len[3] = {shape[0], shape[1], shape[2]};
  for (int w = 0; w < 3; ++w) {
    double arg = 2.0 * kPi * a.modulation[3 * w + 0] * p[w] / (axis_len[w] * spacing[w]) +
                 a.modulation[3 * w + 1];
    mod += a.modulation[3 * w + 2] * std::cos(arg);
  }
  double v = lv.background + mod;
  v = v + (lv.head - v) * soft_inside(a.head, p);
  v = v + (lv.vs - v) * soft_inside(a.vs, p);
  v = v + (lv.cochlea - v) * soft_inside(a.cochlea, p);
  return std::min(1.0, std::max(0.0, v));
}

Geometry phantom_geometry(const PhantomConfig& cfg) {
  Geometry g;
  g.shape = cfg.shape;
  g.spacing = cfg.spacing;
  return g;
}

json config_to_json(const PhantomConfig& c) {
  return json{{"shape", c.shape},
              {"spacing_mm", c.spacing},
              {"seed", c.seed},
              {"vs_radius_range", c.vs_radius_range},
              {"cochlea_radius_range", c.cochlea_radius_range},
              {"rotation_jitter_deg", c.rotation_jitter_deg},
              {"translation_jitter_vox", c.translation_jitter_vox},
              {"noise_sigma_a", c.noise_sigma_a},
              {"noise_sigma_b", c.noise_sigma_b},
              {"intensity_lookup", c.intensity_lookup},
              {"shift_gamma_b", c.shift_gamma_b},
              {"shift_gain_b", c.shift_gain_b},
              {"shift_bias_b", c.shift_bias_b},
              {"shift_extra_noise_b", c.shift_extra_noise_b}};
}

PhantomConfig config_from_json(const json& j) {
  PhantomConfig c;
  c.shape = j.at("shape").get<Shape3>();
  c.spacing = j.at("spacing_mm").get<Vec3>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.vs_radius_range = j.at("vs_radius_range").get<std::pair<double, double>>();
  c.cochlea_radius_range = j.at("cochlea_radius_range").get<std::pair<double, double>>();
  c.rotation_jitter_deg = j.at("rotation_jitter_deg").get<double>();
  c.translation_jitter_vox = j.at("translation_jitter_vox").get<double>();
  c.noise_sigma_a = j.at("noise_sigma_a").get<double>();
  c.noise_sigma_b = j.at("noise_sigma_b").get<double>();
  c.intensity_lookup = j.at("intensity_lookup").get<std::vector<std::pair<double, double>>>();
  c.shift_gamma_b = j.at("shift_gamma_b").get<double>();
  c.shift_gain_b = j.at("shift_gain_b").get<double>();
  c.shift_bias_b = j.at("shift_bias_b").get<double>();
  c.shift_extra_noise_b = j.at("shift_extra_noise_b").get<double>();
  return c;
}

}  // namespace

void PhantomConfig::validate() const {
  for (int a = 0; a < 3; ++a)
    if (shape[a] < 8) throw std::invalid_argument("phantom: shape too small");
  if (vs_radius_range.first <= 0 || vs_radius_range.first > vs_radius_range.second)
    throw std::invalid_argument("phantom: bad vs radius range");
  if (cochlea_radius_range.first <= 0 || cochlea_radius_range.first > cochlea_radius_range.second)
    throw std::invalid_argument("phantom: bad cochlea radius range");
  // the full chain (vs offset + vs + gap + cochlea + jitter) must fit
  double reach = 2.0 + vs_radius_range.second + 1.5 + 2.0 * cochlea_radius_range.second +
                 translation_jitter_vox + 2.0;
  if (reach > shape[0] / 2.0)
    throw std::invalid_argument("phantom: structures do not fit inside the grid");
  if (intensity_lookup.size() < 2) throw std::invalid_argument("phantom: lookup needs >= 2 knots");
  for (std::size_t i = 1; i < intensity_lookup.size(); ++i)
    if (intensity_lookup[i].first <= intensity_lookup[i - 1].first ||
        intensity_lookup[i].second < intensity_lookup[i - 1].second)
      throw std::invalid_argument("phantom: lookup must be monotone");
}

double lookup_intensity(double v, const PhantomConfig& cfg) {
  const auto& lut = cfg.intensity_lookup;
  if (v <= lut.front().first) return lut.front().second;
  if (v >= lut.back().first) return lut.back().second;
  for (std::size_t i = 1; i < lut.size(); ++i)
    if (v <= lut[i].first) {
      double f = (v - lut[i - 1].first) / (lut[i].first - lut[i - 1].first);
      return lut[i - 1].second + f * (lut[i].second - lut[i - 1].second);
    }
  return lut.back().second;
}

Volume apply_modality_lookup(const Volume& a, const PhantomConfig& cfg) {
  Volume out(a.geom);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = static_cast<float>(lookup_intensity(a.data[i], cfg));
  return out;
}

PhantomSubject generate_subject(const PhantomConfig& cfg, std::uint64_t subject_index) {
  cfg.validate();
  std::uint64_t subject_seed = derive_seed(cfg.seed, subject_index);
  Rng rng(subject_seed);
  Anatomy anatomy = make_anatomy(cfg, rng, /*jitter=*/true, /*modulate=*/true);
  TissueLevels lv;

  Geometry g = phantom_geometry(cfg);
  PhantomSubject subj{Volume(g), Volume(g), LabelMap(g)};
  Rng noise_a(derive_seed(subject_seed, 1001));
  Rng noise_b(derive_seed(subject_seed, 1002));
  Rng noise_shift(derive_seed(subject_seed, 1003));

  for (int z = 0; z < g.shape[2]; ++z)
    for (int y = 0; y < g.shape[1]; ++y)
      for (int x = 0; x < g.shape[0]; ++x) {
        Vec3 p = g.voxel_to_world({static_cast<double>(x), static_cast<double>(y),
                                   static_cast<double>(z)});
        double clean = clean_intensity(anatomy, lv, p, g.shape, g.spacing);
        double a_val = clean + cfg.noise_sigma_a * noise_a.normal();
        double b_clean = lookup_intensity(clean, cfg);
        // optional appearance shift for held-out cohorts
        b_clean = cfg.shift_gain_b * std::pow(std::min(1.0, std::max(0.0, b_clean)),
                                              cfg.shift_gamma_b) +
                  cfg.shift_bias_b;
        double b_val = b_clean + cfg.noise_sigma_b * noise_b.normal() +
                       cfg.shift_extra_noise_b * noise_shift.normal();
        subj.a.at(x, y, z) = static_cast<float>(std::min(1.0, std::max(0.0, a_val)));
        subj.b.at(x, y, z) = static_cast<float>(std::min(1.0, std::max(0.0, b_val)));
        if (anatomy.vs.membership(p) <= 1.0)
          subj.labels.at(x, y, z) = labels::kVS;
        else if (anatomy.cochlea.membership(p) <= 1.0)
          subj.labels.at(x, y, z) = labels::kCochlea;
      }
  return subj;
}

Volume generate_template(const PhantomConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 0xFFFFull));
  Anatomy anatomy = make_anatomy(cfg, rng, /*jitter=*/false, /*modulate=*/false);
  TissueLevels lv;
  Geometry g = phantom_geometry(cfg);
  Volume tpl(g);
  for (int z = 0; z < g.shape[2]; ++z)
    for (int y = 0; y < g.shape[1]; ++y)
      for (int x = 0; x < g.shape[0]; ++x) {
        Vec3 p = g.voxel_to_world({static_cast<double>(x), static_cast<double>(y),
                                   static_cast<double>(z)});
        tpl.at(x, y, z) = static_cast<float>(clean_intensity(anatomy, lv, p, g.shape, g.spacing));
      }
  return tpl;
}

CohortManifest generate_cohort(const PhantomConfig& cfg, int n, const std::string& out_dir) {
  if (n < 1) throw std::invalid_argument("generate_cohort: n must be >= 1");
  cfg.validate();
  fs::create_directories(out_dir);

  CohortManifest m;
  m.config = cfg;
  m.n = n;
  m.directory = out_dir;
  for (int i = 0; i < n; ++i) {
    PhantomSubject s = generate_subject(cfg, static_cast<std::uint64_t>(i));
    char name[64];
    std::snprintf(name, sizeof(name), "subject%02d", i);
    std::string a_path = std::string(name) + "_a.nii.gz";
    std::string b_path = std::string(name) + "_b.nii.gz";
    std::string l_path = std::string(name) + "_labels.nii.gz";
    save_volume(s.a, (fs::path(out_dir) / a_path).string());
    save_volume(s.b, (fs::path(out_dir) / b_path).string());
    save_labelmap(s.labels, (fs::path(out_dir) / l_path).string());
    m.subject_seeds.push_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    m.image_a.push_back(a_path);
    m.image_b.push_back(b_path);
    m.label_paths.push_back(l_path);
  }
  m.template_path = "template.nii.gz";
  save_volume(generate_template(cfg), (fs::path(out_dir) / m.template_path).string());
  save_manifest(m, (fs::path(out_dir) / "manifest.json").string());
  return m;
}

void save_manifest(const CohortManifest& m, const std::string& path) {
  json j{{"format", "modaseg-phantom-manifest"},
         {"version", 1},
         {"n", m.n},
         {"config", config_to_json(m.config)},
         {"template", m.template_path},
         {"subjects", json::array()}};
  for (int i = 0; i < m.n; ++i)
    j["subjects"].push_back(json{{"index", i},
                                 {"seed", m.subject_seeds[i]},
                                 {"image_a", m.image_a[i]},
                                 {"image_b", m.image_b[i]},
                                 {"labels", m.label_paths[i]}});
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open file for writing: " + path);
  f << j.dump(2) << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

CohortManifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open file for reading: " + path);
  json j = json::parse(f);
  if (j.value("format", "") != "modaseg-phantom-manifest")
    throw std::runtime_error("not a phantom manifest: " + path);
  CohortManifest m;
  m.config = config_from_json(j.at("config"));
  m.n = j.at("n").get<int>();
  m.directory = fs::path(path).parent_path().string();
  m.template_path = j.at("template").get<std::string>();
  for (const auto& s : j.at("subjects")) {
    m.subject_seeds.push_back(s.at("seed").get<std::uint64_t>());
    m.image_a.push_back(s.at("image_a").get<std::string>());
    m.image_b.push_back(s.at("image_b").get<std::string>());
    m.label_paths.push_back(s.at("labels").get<std::string>());
  }
  return m;
}

}  // namespace modaseg
