#include "modaseg/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace modaseg {

namespace {
inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

double estimate_noise_sigma(const Volume& v) {
  const auto& s = v.geom.shape;
  std::vector<double> residuals;
  residuals.reserve(v.data.size());
  // pseudo-residual epsilon_i = sqrt(6/7) * (v_i - mean of 6-neighbors)
  const double scale = std::sqrt(6.0 / 7.0);
  for (int z = 0; z < s[2]; ++z)
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        double nb = v.at(clampi(x - 1, 0, s[0] - 1), y, z) + v.at(clampi(x + 1, 0, s[0] - 1), y, z) +
                    v.at(x, clampi(y - 1, 0, s[1] - 1), z) + v.at(x, clampi(y + 1, 0, s[1] - 1), z) +
                    v.at(x, y, clampi(z - 1, 0, s[2] - 1)) + v.at(x, y, clampi(z + 1, 0, s[2] - 1));
        residuals.push_back(std::abs(scale * (v.at(x, y, z) - nb / 6.0)));
      }
  std::nth_element(residuals.begin(), residuals.begin() + residuals.size() / 2, residuals.end());
  double mad = residuals[residuals.size() / 2];
  return 1.4826 * mad;
}

Volume denoise_nlm(const Volume& v, double strength, int patch_radius, int search_radius) {
  if (patch_radius < 1 || search_radius < 1)
    throw std::invalid_argument("denoise_nlm: radii must be >= 1");
  const auto& s = v.geom.shape;
  double sigma = estimate_noise_sigma(v);
  if (sigma < 1e-12 || strength <= 0.0) return v;  // nothing to filter

  const double two_sigma2 = 2.0 * sigma * sigma;
  const double h2 = strength * strength * sigma * sigma;
  const int pr = patch_radius, sr = search_radius;
  const int patch_n = (2 * pr + 1) * (2 * pr + 1) * (2 * pr + 1);

  Volume out(v.geom);
#pragma omp parallel for schedule(dynamic)
  for (int z = 0; z < s[2]; ++z) {
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        double wsum = 0.0, acc = 0.0;
        for (int dz = -sr; dz <= sr; ++dz)
          for (int dy = -sr; dy <= sr; ++dy)
            for (int dx = -sr; dx <= sr; ++dx) {
              int nx = x + dx, ny = y + dy, nz = z + dz;
              if (nx < 0 || ny < 0 || nz < 0 || nx >= s[0] || ny >= s[1] || nz >= s[2]) continue;
              // mean squared patch difference, replicated borders
              double d2 = 0.0;
              for (int pz = -pr; pz <= pr; ++pz)
                for (int py = -pr; py <= pr; ++py)
                  for (int px = -pr; px <= pr; ++px) {
                    float a = v.at(clampi(x + px, 0, s[0] - 1), clampi(y + py, 0, s[1] - 1),
                                   clampi(z + pz, 0, s[2] - 1));
                    float b = v.at(clampi(nx + px, 0, s[0] - 1), clampi(ny + py, 0, s[1] - 1),
                                   clampi(nz + pz, 0, s[2] - 1));
                    double diff = static_cast<double>(a) - b;
                    d2 += diff * diff;
                  }
              d2 /= patch_n;
              double w = std::exp(-std::max(d2 - two_sigma2, 0.0) / h2);
              wsum += w;
              acc += w * v.at(nx, ny, nz);
            }
        out.at(x, y, z) = static_cast<float>(acc / wsum);
      }
  }
  return out;
}

}  // namespace modaseg
