#include "modaseg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace modaseg {

namespace {
inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

float Volume::sample_linear(double x, double y, double z) const {
  const auto& s = geom.shape;
  // clamp the continuous coordinate so border samples take the edge value
  x = std::min(std::max(x, 0.0), static_cast<double>(s[0] - 1));
  y = std::min(std::max(y, 0.0), static_cast<double>(s[1] - 1));
  z = std::min(std::max(z, 0.0), static_cast<double>(s[2] - 1));
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  int z0 = static_cast<int>(std::floor(z));
  int x1 = std::min(x0 + 1, s[0] - 1);
  int y1 = std::min(y0 + 1, s[1] - 1);
  int z1 = std::min(z0 + 1, s[2] - 1);
  double fx = x - x0, fy = y - y0, fz = z - z0;

  auto v = [&](int xi, int yi, int zi) { return static_cast<double>(at(xi, yi, zi)); };
  double c00 = v(x0, y0, z0) * (1 - fx) + v(x1, y0, z0) * fx;
  double c10 = v(x0, y1, z0) * (1 - fx) + v(x1, y1, z0) * fx;
  double c01 = v(x0, y0, z1) * (1 - fx) + v(x1, y0, z1) * fx;
  double c11 = v(x0, y1, z1) * (1 - fx) + v(x1, y1, z1) * fx;
  double c0 = c00 * (1 - fy) + c10 * fy;
  double c1 = c01 * (1 - fy) + c11 * fy;
  return static_cast<float>(c0 * (1 - fz) + c1 * fz);
}

float Volume::sample_nearest(double x, double y, double z) const {
  const auto& s = geom.shape;
  int xi = clampi(static_cast<int>(std::lround(x)), 0, s[0] - 1);
  int yi = clampi(static_cast<int>(std::lround(y)), 0, s[1] - 1);
  int zi = clampi(static_cast<int>(std::lround(z)), 0, s[2] - 1);
  return at(xi, yi, zi);
}

void Volume::validate() const {
  geom.validate();
  if (data.size() != geom.voxel_count())
    throw std::invalid_argument("volume: data size does not match geometry");
  for (float v : data)
    if (!std::isfinite(v)) throw std::invalid_argument("volume: non-finite data");
}

std::uint8_t LabelMap::sample_nearest(double x, double y, double z) const {
  const auto& s = geom.shape;
  int xi = clampi(static_cast<int>(std::lround(x)), 0, s[0] - 1);
  int yi = clampi(static_cast<int>(std::lround(y)), 0, s[1] - 1);
  int zi = clampi(static_cast<int>(std::lround(z)), 0, s[2] - 1);
  return at(xi, yi, zi);
}

std::size_t LabelMap::count(std::uint8_t value) const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), value));
}

void LabelMap::validate() const {
  geom.validate();
  if (data.size() != geom.voxel_count())
    throw std::invalid_argument("labelmap: data size does not match geometry");
  for (std::uint8_t v : data)
    if (v >= labels::kNumClasses) throw std::invalid_argument("labelmap: label out of range");
}

float min_value(const Volume& v) { return *std::min_element(v.data.begin(), v.data.end()); }
float max_value(const Volume& v) { return *std::max_element(v.data.begin(), v.data.end()); }

double mean_value(const Volume& v) {
  return std::accumulate(v.data.begin(), v.data.end(), 0.0) / static_cast<double>(v.data.size());
}

}  // namespace modaseg
