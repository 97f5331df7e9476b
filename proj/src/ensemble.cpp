#include "modaseg/ensemble.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace modaseg {

LabelMap fuse_union(const std::vector<LabelMap>& segs) {
  if (segs.empty()) throw std::invalid_argument("fuse_union: empty input list");
  const Geometry& g = segs.front().geom;
  for (const auto& s : segs)
    if (!s.geom.approx_equal(g)) throw std::invalid_argument("fuse_union: geometry mismatch");

  LabelMap out(g);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    bool vs = false, cochlea = false;
    for (const auto& s : segs) {
      vs |= s.data[i] == labels::kVS;
      cochlea |= s.data[i] == labels::kCochlea;
    }
    // cross-class conflicts resolve in favor of VS
    out.data[i] = vs ? labels::kVS : (cochlea ? labels::kCochlea : labels::kBackground);
  }
  return out;
}

LabelMap largest_component(const LabelMap& seg, std::uint8_t class_id) {
  if (class_id == 0 || class_id >= labels::kNumClasses)
    throw std::invalid_argument("largest_component: invalid class id");
  const auto& s = seg.geom.shape;
  const std::size_t n = seg.data.size();
  std::vector<std::int32_t> comp(n, -1);

  std::int32_t ncomp = 0;
  std::vector<std::size_t> comp_size;
  std::vector<std::size_t> comp_min_index;
  std::vector<std::size_t> stack;

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (seg.data[seed] != class_id || comp[seed] >= 0) continue;
    std::size_t size = 0, min_index = seed;
    stack.push_back(seed);
    comp[seed] = ncomp;
    while (!stack.empty()) {
      std::size_t cur = stack.back();
      stack.pop_back();
      ++size;
      if (cur < min_index) min_index = cur;
      int x = static_cast<int>(cur % s[0]);
      int y = static_cast<int>((cur / s[0]) % s[1]);
      int z = static_cast<int>(cur / (static_cast<std::size_t>(s[0]) * s[1]));
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            int nx = x + dx, ny = y + dy, nz = z + dz;
            if (nx < 0 || ny < 0 || nz < 0 || nx >= s[0] || ny >= s[1] || nz >= s[2]) continue;
            std::size_t ni = seg.index(nx, ny, nz);
            if (seg.data[ni] == class_id && comp[ni] < 0) {
              comp[ni] = ncomp;
              stack.push_back(ni);
            }
          }
    }
    comp_size.push_back(size);
    comp_min_index.push_back(min_index);
    ++ncomp;
  }

  if (ncomp <= 1) return seg;  // zero or one component: unchanged

  std::int32_t best = 0;
  for (std::int32_t c = 1; c < ncomp; ++c) {
    if (comp_size[c] > comp_size[best] ||
        (comp_size[c] == comp_size[best] && comp_min_index[c] < comp_min_index[best]))
      best = c;
  }

  LabelMap out = seg;
  for (std::size_t i = 0; i < n; ++i)
    if (seg.data[i] == class_id && comp[i] != best) out.data[i] = labels::kBackground;
  return out;
}

LabelMap postprocess(const LabelMap& seg, const ProvenanceRecord& p) {
  LabelMap filtered = largest_component(seg, labels::kVS);
  return restore_to_native(filtered, p);
}

}  // namespace modaseg
