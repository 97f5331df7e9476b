#pragma once

#include <cstdint>
#include <vector>

#include "modaseg/geometry.hpp"

namespace modaseg {

namespace labels {
constexpr std::uint8_t kBackground = 0;
constexpr std::uint8_t kVS = 1;
constexpr std::uint8_t kCochlea = 2;
constexpr int kNumClasses = 3;
}  // namespace labels

/// 3D scalar image with physical geometry. Values are 32-bit floats in
/// x-fastest memory order. Treated as immutable once constructed; all
/// operations on volumes are pure functions returning new volumes.
struct Volume {
  Geometry geom;
  std::vector<float> data;

  Volume() = default;
  Volume(Geometry g, float fill = 0.0f) : geom(g), data(g.voxel_count(), fill) {}

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(geom.shape[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(geom.shape[1]) * z);
  }
  float at(int x, int y, int z) const { return data[index(x, y, z)]; }
  float& at(int x, int y, int z) { return data[index(x, y, z)]; }

  /// Trilinear sample at a continuous voxel coordinate; out-of-grid
  /// coordinates clamp to the nearest edge voxel.
  float sample_linear(double x, double y, double z) const;

  /// Nearest-neighbor sample with edge clamping.
  float sample_nearest(double x, double y, double z) const;

  void validate() const;
};

/// Integer-class grid sharing a Volume's geometry. Values restricted to
/// {0 background, 1 VS, 2 cochlea}.
struct LabelMap {
  Geometry geom;
  std::vector<std::uint8_t> data;

  LabelMap() = default;
  LabelMap(Geometry g, std::uint8_t fill = 0) : geom(g), data(g.voxel_count(), fill) {}

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(geom.shape[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(geom.shape[1]) * z);
  }
  std::uint8_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
  std::uint8_t& at(int x, int y, int z) { return data[index(x, y, z)]; }

  std::uint8_t sample_nearest(double x, double y, double z) const;

  std::size_t count(std::uint8_t value) const;
  bool empty_class(std::uint8_t value) const { return count(value) == 0; }

  void validate() const;
};

float min_value(const Volume& v);
float max_value(const Volume& v);
double mean_value(const Volume& v);

}  // namespace modaseg
