#include "modaseg/registration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "modaseg/resample.hpp"

namespace modaseg {

namespace {

struct IntensityRange {
  double lo, hi;
};

IntensityRange value_range(const Volume& v) {
  float lo = min_value(v), hi = max_value(v);
  return {static_cast<double>(lo), static_cast<double>(hi)};
}

// joint histogram MI with linear Parzen spreading in both intensity axes
double mi_metric(const Volume& moving, const Volume& fixed, const IntensityRange& mr,
                 const IntensityRange& fr, const RigidTransform& sampling, int bins) {
  const auto& fs = fixed.geom.shape;
  const auto& ms = moving.geom.shape;
  std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
  const double fscale = (bins - 1) / std::max(fr.hi - fr.lo, 1e-12);
  const double mscale = (bins - 1) / std::max(mr.hi - mr.lo, 1e-12);
  double total = 0.0;

  for (int z = 0; z < fs[2]; ++z)
    for (int y = 0; y < fs[1]; ++y)
      for (int x = 0; x < fs[0]; ++x) {
        Vec3 w = fixed.geom.voxel_to_world({static_cast<double>(x), static_cast<double>(y),
                                            static_cast<double>(z)});
        Vec3 c = moving.geom.world_to_voxel(sampling.apply(w));
        if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[0] > ms[0] - 1 || c[1] > ms[1] - 1 ||
            c[2] > ms[2] - 1)
          continue;  // outside the moving grid
        double fv = (fixed.at(x, y, z) - fr.lo) * fscale;
        double mv = (moving.sample_linear(c[0], c[1], c[2]) - mr.lo) * mscale;
        fv = std::min(std::max(fv, 0.0), static_cast<double>(bins - 1));
        mv = std::min(std::max(mv, 0.0), static_cast<double>(bins - 1));
        int f0 = std::min(static_cast<int>(fv), bins - 2);
        int m0 = std::min(static_cast<int>(mv), bins - 2);
        double ff = fv - f0, mf = mv - m0;
        joint[static_cast<std::size_t>(f0) * bins + m0] += (1 - ff) * (1 - mf);
        joint[static_cast<std::size_t>(f0) * bins + m0 + 1] += (1 - ff) * mf;
        joint[static_cast<std::size_t>(f0 + 1) * bins + m0] += ff * (1 - mf);
        joint[static_cast<std::size_t>(f0 + 1) * bins + m0 + 1] += ff * mf;
        total += 1.0;
      }

  if (total < 16.0) return -1.0;  // essentially no overlap
  std::vector<double> pf(bins, 0.0), pm(bins, 0.0);
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) {
      double p = joint[static_cast<std::size_t>(i) * bins + j] / total;
      pf[i] += p;
      pm[j] += p;
    }
  double mi = 0.0;
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) {
      double p = joint[static_cast<std::size_t>(i) * bins + j] / total;
      if (p > 1e-12) mi += p * std::log(p / (pf[i] * pm[j]));
    }
  return mi;
}

Volume gaussian_downsample(const Volume& v, int factor) {
  if (factor <= 1) return v;
  // light separable smoothing before decimation
  const auto& s = v.geom.shape;
  double sigma = factor * 0.5;
  int rad = static_cast<int>(std::ceil(2.0 * sigma));
  std::vector<double> k(2 * rad + 1);
  double ksum = 0.0;
  for (int i = -rad; i <= rad; ++i) {
    k[i + rad] = std::exp(-0.5 * i * i / (sigma * sigma));
    ksum += k[i + rad];
  }
  for (auto& kv : k) kv /= ksum;

  Volume tmp = v, cur = v;
  for (int axis = 0; axis < 3; ++axis) {
    std::swap(tmp, cur);
    for (int z = 0; z < s[2]; ++z)
      for (int y = 0; y < s[1]; ++y)
        for (int x = 0; x < s[0]; ++x) {
          double acc = 0.0;
          for (int i = -rad; i <= rad; ++i) {
            int xi = x, yi = y, zi = z;
            if (axis == 0) xi = std::clamp(x + i, 0, s[0] - 1);
            if (axis == 1) yi = std::clamp(y + i, 0, s[1] - 1);
            if (axis == 2) zi = std::clamp(z + i, 0, s[2] - 1);
            acc += k[i + rad] * tmp.at(xi, yi, zi);
          }
          cur.at(x, y, z) = static_cast<float>(acc);
        }
  }

  Shape3 ns{std::max(1, s[0] / factor), std::max(1, s[1] / factor), std::max(1, s[2] / factor)};
  Vec3 nsp{v.geom.spacing[0] * s[0] / ns[0], v.geom.spacing[1] * s[1] / ns[1],
           v.geom.spacing[2] * s[2] / ns[2]};
  return resample(cur, ns, nsp, Interpolation::kLinear);
}

Vec3 center_of_mass(const Volume& v) {
  double lo = min_value(v);
  double wsum = 1e-12;
  Vec3 acc{0, 0, 0};
  const auto& s = v.geom.shape;
  for (int z = 0; z < s[2]; ++z)
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        double w = v.at(x, y, z) - lo;
        Vec3 p = v.geom.voxel_to_world({static_cast<double>(x), static_cast<double>(y),
                                        static_cast<double>(z)});
        for (int i = 0; i < 3; ++i) acc[i] += w * p[i];
        wsum += w;
      }
  for (int i = 0; i < 3; ++i) acc[i] /= wsum;
  return acc;
}

}  // namespace

double mutual_information(const Volume& moving, const Volume& fixed, const RigidTransform& sampling,
                          int bins) {
  return mi_metric(moving, fixed, value_range(moving), value_range(fixed), sampling, bins);
}

RegistrationResult register_rigid(const Volume& moving, const Volume& fixed,
                                  const RegistrationOptions& opts) {
  if (max_value(moving) == min_value(moving) || max_value(fixed) == min_value(fixed))
    throw std::invalid_argument("register_rigid: constant volume has no registerable content");

  Vec3 center = fixed.geom.world_center();
  // parameters: rx, ry, rz (rad), tx, ty, tz (mm); sampling map is
  // fixed world -> moving world, rotation about the fixed center
  std::array<double, 6> p{0, 0, 0, 0, 0, 0};
  auto to_sampling = [&](const std::array<double, 6>& q) {
    return rigid_about_center(euler_to_matrix(q[0], q[1], q[2]), {q[3], q[4], q[5]}, center);
  };

  if (opts.center_of_mass_init) {
    Vec3 cm = center_of_mass(moving), cf = center_of_mass(fixed);
    for (int i = 0; i < 3; ++i) p[3 + i] = cm[i] - cf[i];
  }

  double min_spacing = std::min({fixed.geom.spacing[0], fixed.geom.spacing[1], fixed.geom.spacing[2]});
  RegistrationResult result;
  int total_iters = 0;

  for (int level = opts.levels - 1; level >= 0; --level) {
    int factor = 1 << level;
    Volume f = gaussian_downsample(fixed, factor);
    Volume m = gaussian_downsample(moving, factor);
    IntensityRange fr = value_range(f), mr = value_range(m);
    auto metric = [&](const std::array<double, 6>& q) {
      return mi_metric(m, f, mr, fr, to_sampling(q), opts.histogram_bins);
    };

    // scaled parameter space: one unit ~ comparable image effect
    std::array<double, 6> scale{0.002, 0.002, 0.002, 0.2 * min_spacing * factor,
                                0.2 * min_spacing * factor, 0.2 * min_spacing * factor};
    double step = 8.0;
    double cur = metric(p);
    int stall = 0;
    result.converged = false;
    for (int it = 0; it < opts.max_iterations && step >= opts.min_step; ++it) {
      ++total_iters;
      std::array<double, 6> grad{};
      double gnorm = 0.0;
      for (int k = 0; k < 6; ++k) {
        auto qp = p, qm = p;
        qp[k] += scale[k];
        qm[k] -= scale[k];
        grad[k] = (metric(qp) - metric(qm)) / 2.0;
        gnorm += grad[k] * grad[k];
      }
      gnorm = std::sqrt(gnorm);
      if (gnorm < 1e-14) {
        result.converged = true;
        break;
      }
      auto q = p;
      for (int k = 0; k < 6; ++k) q[k] += step * scale[k] * grad[k] / gnorm;
      double nv = metric(q);
      if (nv > cur + 1e-12) {
        p = q;
        cur = nv;
        step = std::min(step * 1.1, 16.0);
        stall = 0;
      } else {
        step *= 0.5;
        if (++stall > 40) break;
      }
      if (step < opts.min_step) result.converged = true;
    }
    result.final_metric = cur;
  }

  result.iterations = total_iters;
  // return the moving -> fixed mapping (inverse of the sampling map)
  result.transform = to_sampling(p).inverse();
  result.transform.validate();
  return result;
}

}  // namespace modaseg
