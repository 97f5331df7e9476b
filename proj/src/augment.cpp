#include "modaseg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "modaseg/rigid.hpp"
#include "modaseg/rng.hpp"

namespace modaseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_range(const std::pair<double, double>& r, const char* name) {
  if (!(r.first <= r.second))
    throw std::invalid_argument(std::string("augmentation spec: unordered range ") + name);
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string("augmentation spec: probability out of [0,1] ") + name);
}

inline float clamp01(double v) {
  return static_cast<float>(std::min(1.0, std::max(0.0, v)));
}

inline void bspline_weights(double f, double w[4]) {
  double f2 = f * f, f3 = f2 * f;
  w[0] = (1 - 3 * f + 3 * f2 - f3) / 6.0;
  w[1] = (4 - 6 * f2 + 3 * f3) / 6.0;
  w[2] = (1 + 3 * f + 3 * f2 - 3 * f3) / 6.0;
  w[3] = f3 / 6.0;
}

// dense displacement at voxel x from the control grid (cubic B-spline)
struct ElasticField {
  int ncp = 0;
  const std::vector<std::array<float, 3>>* disp = nullptr;
  Shape3 shape;

  std::array<double, 3> at(int x, int y, int z) const {
    if (ncp == 0 || disp == nullptr || disp->empty()) return {0, 0, 0};
    double w[3][4];
    int first[3];
    int pos[3] = {x, y, z};
    for (int a = 0; a < 3; ++a) {
      double u = shape[a] > 1
                     ? (static_cast<double>(pos[a]) / (shape[a] - 1)) * (ncp - 3)
                     : 0.0;
      int i0 = std::min(static_cast<int>(std::floor(u)), ncp - 4);
      first[a] = i0;
      bspline_weights(u - i0, w[a]);
    }
    std::array<double, 3> d{0, 0, 0};
    for (int c = 0; c < 4; ++c)
      for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a) {
          double wt = w[0][a] * w[1][b] * w[2][c];
          const auto& cp =
              (*disp)[static_cast<std::size_t>(first[0] + a) +
                      static_cast<std::size_t>(ncp) *
                          ((first[1] + b) + static_cast<std::size_t>(ncp) * (first[2] + c))];
          d[0] += wt * cp[0];
          d[1] += wt * cp[1];
          d[2] += wt * cp[2];
        }
    return d;
  }
};

}  // namespace

void AugmentationSpec::validate() const {
  check_range(affine_angle_range, "affine_angle_range");
  check_range(affine_scale_range, "affine_scale_range");
  check_range(gamma_range, "gamma_range");
  check_range(blur_sigma_range, "blur_sigma_range");
  if (affine_scale_range.first <= 0.0)
    throw std::invalid_argument("augmentation spec: scale must be positive");
  if (gamma_range.first <= 0.0)
    throw std::invalid_argument("augmentation spec: gamma must be positive");
  if (elastic_control_points < 4)
    throw std::invalid_argument("augmentation spec: need >= 4 elastic control points");
  if (elastic_max_displacement < 0.0 || noise_sigma < 0.0 || sharpen_sigma <= 0.0)
    throw std::invalid_argument("augmentation spec: negative magnitude");
  check_prob(p_spatial, "p_spatial");
  check_prob(p_clahe, "p_clahe");
  check_prob(p_gamma, "p_gamma");
  check_prob(p_blur, "p_blur");
  check_prob(p_noise, "p_noise");
  check_prob(p_sharpen, "p_sharpen");
}

AugmentationInstance sample(const AugmentationSpec& spec, std::uint64_t draw_index) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, draw_index));
  AugmentationInstance inst;

  // every quantity is drawn unconditionally, in a fixed order, so the
  // instance depends only on (seed, draw_index)
  bool spatial_on = rng.bernoulli(spec.p_spatial);
  int variant = static_cast<int>(rng.uniform_int(3));  // at most one spatial variant per draw
  std::array<double, 3> angles;
  for (auto& a : angles) a = rng.uniform(spec.affine_angle_range.first, spec.affine_angle_range.second);
  double scale = rng.uniform(spec.affine_scale_range.first, spec.affine_scale_range.second);
  const int ncp = spec.elastic_control_points;
  std::vector<std::array<float, 3>> disp(static_cast<std::size_t>(ncp) * ncp * ncp);
  for (auto& d : disp)
    for (int a = 0; a < 3; ++a)
      d[a] = static_cast<float>(
          rng.uniform(-spec.elastic_max_displacement, spec.elastic_max_displacement));
  bool clahe_on = rng.bernoulli(spec.p_clahe);
  bool gamma_on = rng.bernoulli(spec.p_gamma);
  double gamma_value = rng.uniform(spec.gamma_range.first, spec.gamma_range.second);
  bool blur_on = rng.bernoulli(spec.p_blur);
  double blur_sigma = rng.uniform(spec.blur_sigma_range.first, spec.blur_sigma_range.second);
  bool noise_on = rng.bernoulli(spec.p_noise);
  std::uint64_t noise_seed = rng.next_u64();
  bool sharpen_on = rng.bernoulli(spec.p_sharpen);

  if (spatial_on) {
    inst.spatial = true;
    inst.variant = static_cast<SpatialVariant>(variant);
    if (inst.variant != SpatialVariant::kElastic) {
      inst.angles_deg = angles;
      inst.scale = scale;
    }
    if (inst.variant != SpatialVariant::kAffine) {
      inst.elastic_control_points = ncp;
      inst.elastic_displacements = std::move(disp);
    }
  }
  if (clahe_on) inst.clahe = true;
  if (gamma_on) {
    inst.gamma = true;
    inst.gamma_value = gamma_value;
  }
  if (blur_on) {
    inst.blur = true;
    inst.blur_sigma = blur_sigma;
  }
  if (noise_on) {
    inst.noise = true;
    inst.noise_sigma = spec.noise_sigma;
    inst.noise_seed = noise_seed;
  }
  if (sharpen_on) {
    inst.sharpen = true;
    inst.sharpen_alpha = spec.sharpen_alpha;
    inst.sharpen_sigma = spec.sharpen_sigma;
  }
  return inst;
}

std::pair<Volume, LabelMap> apply_spatial(const Volume& v, const LabelMap& l,
                                          const AugmentationInstance& inst) {
  if (!v.geom.approx_equal(l.geom))
    throw std::invalid_argument("apply_spatial: image and labels have different geometries");
  if (!inst.spatial) return {v, l};

  const auto& s = v.geom.shape;
  const Vec3& sp = v.geom.spacing;
  Vec3 c{(s[0] - 1) / 2.0, (s[1] - 1) / 2.0, (s[2] - 1) / 2.0};

  Mat3 rot_inv = mat3_transpose(euler_to_matrix(inst.angles_deg[0] * kPi / 180.0,
                                                inst.angles_deg[1] * kPi / 180.0,
                                                inst.angles_deg[2] * kPi / 180.0));
  double inv_scale = 1.0 / inst.scale;

  ElasticField elastic{inst.elastic_control_points, &inst.elastic_displacements, s};

  Volume vo(v.geom);
  LabelMap lo(l.geom);
  for (int z = 0; z < s[2]; ++z)
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        // affine about the grid center in physical units, then the elastic
        // voxel displacement, composed into one sampling position
        Vec3 d{(x - c[0]) * sp[0], (y - c[1]) * sp[1], (z - c[2]) * sp[2]};
        Vec3 q = mat3_apply(rot_inv, d);
        std::array<double, 3> e = elastic.at(x, y, z);
        double px = c[0] + q[0] * inv_scale / sp[0] + e[0];
        double py = c[1] + q[1] * inv_scale / sp[1] + e[1];
        double pz = c[2] + q[2] * inv_scale / sp[2] + e[2];
        vo.at(x, y, z) = v.sample_linear(px, py, pz);
        lo.at(x, y, z) = l.sample_nearest(px, py, pz);
      }
  return {std::move(vo), std::move(lo)};
}

Volume apply_gamma(const Volume& v, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("apply_gamma: gamma must be positive");
  float lo = min_value(v), hi = max_value(v);
  if (lo < -1e-5f || hi > 1.0f + 1e-5f)
    throw std::invalid_argument("apply_gamma: intensities must lie in [0,1]");
  Volume out(v.geom);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    double x = std::min(1.0, std::max(0.0, static_cast<double>(v.data[i])));
    out.data[i] = static_cast<float>(std::pow(x, gamma));
  }
  return out;
}

Volume apply_clahe(const Volume& v) {
  constexpr int kBins = 256;
  constexpr int kTiles = 8;
  constexpr double kClipFraction = 0.01;

  const auto& s = v.geom.shape;
  Volume out(v.geom);

  const int tiles_x = std::min(kTiles, s[0]);
  const int tiles_y = std::min(kTiles, s[1]);

  std::vector<double> mapping(static_cast<std::size_t>(tiles_x) * tiles_y * kBins);
  for (int z = 0; z < s[2]; ++z) {
    // slice range
    float lo = v.at(0, 0, z), hi = lo;
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        lo = std::min(lo, v.at(x, y, z));
        hi = std::max(hi, v.at(x, y, z));
      }
    if (hi - lo < 1e-12f) {  // constant slice stays constant
      for (int y = 0; y < s[1]; ++y)
        for (int x = 0; x < s[0]; ++x) out.at(x, y, z) = v.at(x, y, z);
      continue;
    }
    const double bin_scale = (kBins - 1) / static_cast<double>(hi - lo);
    auto bin_of = [&](float val) {
      int b = static_cast<int>((val - lo) * bin_scale + 0.5);
      return std::min(kBins - 1, std::max(0, b));
    };

    // per-tile clipped histogram -> cumulative mapping to [0,1]
    for (int ty = 0; ty < tiles_y; ++ty)
      for (int tx = 0; tx < tiles_x; ++tx) {
        int x0 = tx * s[0] / tiles_x, x1 = (tx + 1) * s[0] / tiles_x;
        int y0 = ty * s[1] / tiles_y, y1 = (ty + 1) * s[1] / tiles_y;
        int count = (x1 - x0) * (y1 - y0);
        std::array<double, kBins> hist{};
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) hist[bin_of(v.at(x, y, z))] += 1.0;

        double clip = std::max(1.0, kClipFraction * count);
        double excess = 0.0;
        for (auto& h : hist)
          if (h > clip) {
            excess += h - clip;
            h = clip;
          }
        double add = excess / kBins;
        for (auto& h : hist) h += add;

        double cdf = 0.0;
        double* m = &mapping[(static_cast<std::size_t>(ty) * tiles_x + tx) * kBins];
        for (int b = 0; b < kBins; ++b) {
          cdf += hist[b];
          m[b] = cdf;
        }
        double cdf_min = m[bin_of(static_cast<float>(lo))];
        // normalize so the occupied range maps onto [0,1]
        double denom = std::max(m[kBins - 1] - cdf_min, 1e-12);
        for (int b = 0; b < kBins; ++b) m[b] = std::max(0.0, (m[b] - cdf_min)) / denom;
      }

    // bilinear blend between the four surrounding tile mappings
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        int b = bin_of(v.at(x, y, z));
        double gx = (x + 0.5) * tiles_x / s[0] - 0.5;
        double gy = (y + 0.5) * tiles_y / s[1] - 0.5;
        int tx0 = static_cast<int>(std::floor(gx)), ty0 = static_cast<int>(std::floor(gy));
        double fx = gx - tx0, fy = gy - ty0;
        int txa = std::max(0, std::min(tiles_x - 1, tx0));
        int txb = std::max(0, std::min(tiles_x - 1, tx0 + 1));
        int tya = std::max(0, std::min(tiles_y - 1, ty0));
        int tyb = std::max(0, std::min(tiles_y - 1, ty0 + 1));
        auto m = [&](int ty, int tx) {
          return mapping[(static_cast<std::size_t>(ty) * tiles_x + tx) * kBins + b];
        };
        double val = (1 - fy) * ((1 - fx) * m(tya, txa) + fx * m(tya, txb)) +
                     fy * ((1 - fx) * m(tyb, txa) + fx * m(tyb, txb));
        out.at(x, y, z) = clamp01(val);
      }
  }
  return out;
}

Volume apply_blur(const Volume& v, double sigma) {
  if (sigma <= 0.0) return v;
  const auto& s = v.geom.shape;
  int rad = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * rad + 1);
  double ksum = 0.0;
  for (int i = -rad; i <= rad; ++i) {
    k[i + rad] = std::exp(-0.5 * i * i / (sigma * sigma));
    ksum += k[i + rad];
  }
  for (auto& kv : k) kv /= ksum;

  Volume cur = v, tmp(v.geom);
  for (int axis = 0; axis < 3; ++axis) {
    for (int z = 0; z < s[2]; ++z)
      for (int y = 0; y < s[1]; ++y)
        for (int x = 0; x < s[0]; ++x) {
          double acc = 0.0;
          for (int i = -rad; i <= rad; ++i) {
            int xi = x, yi = y, zi = z;
            if (axis == 0) xi = std::clamp(x + i, 0, s[0] - 1);
            if (axis == 1) yi = std::clamp(y + i, 0, s[1] - 1);
            if (axis == 2) zi = std::clamp(z + i, 0, s[2] - 1);
            acc += k[i + rad] * cur.at(xi, yi, zi);
          }
          tmp.at(x, y, z) = static_cast<float>(acc);
        }
    std::swap(cur, tmp);
  }
  return cur;
}

Volume apply_noise(const Volume& v, double sigma, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  Volume out(v.geom);
  for (std::size_t i = 0; i < v.data.size(); ++i)
    out.data[i] = clamp01(static_cast<double>(v.data[i]) + sigma * rng.normal());
  return out;
}

Volume apply_sharpen(const Volume& v, double alpha, double sigma) {
  Volume blurred = apply_blur(v, sigma);
  Volume blurred2 = apply_blur(blurred, sigma);
  Volume out(v.geom);
  for (std::size_t i = 0; i < v.data.size(); ++i)
    out.data[i] = clamp01(blurred.data[i] + alpha * (static_cast<double>(blurred.data[i]) -
                                                     blurred2.data[i]));
  return out;
}

std::pair<Volume, LabelMap> apply_instance(const Volume& v, const LabelMap& l,
                                           const AugmentationInstance& inst) {
  Volume img = v;
  LabelMap lab = l;
  if (inst.spatial) {
    auto warped = apply_spatial(img, lab, inst);
    img = std::move(warped.first);
    lab = std::move(warped.second);
  }
  if (inst.clahe) img = apply_clahe(img);
  if (inst.gamma) img = apply_gamma(img, inst.gamma_value);
  if (inst.blur) img = apply_blur(img, inst.blur_sigma);
  if (inst.noise) img = apply_noise(img, inst.noise_sigma, inst.noise_seed);
  if (inst.sharpen) img = apply_sharpen(img, inst.sharpen_alpha, inst.sharpen_sigma);
  return {std::move(img), std::move(lab)};
}

}  // namespace modaseg
