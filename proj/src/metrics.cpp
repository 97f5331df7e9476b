#include "modaseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace modaseg {

namespace {

void require_same_geometry(const LabelMap& a, const LabelMap& b) {
  if (!a.geom.approx_equal(b.geom))
    throw std::invalid_argument("metrics: label maps have different geometries");
}

// Felzenszwalb-Huttenlocher 1D squared distance transform with an axis
// weight, run separably to get exact anisotropic Euclidean distances.
void dt1d(std::vector<double>& f, double spacing) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1), d(n);
  const double s2 = spacing * spacing;
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double fq = f[q];
    while (true) {
      int p = v[k];
      double s = ((fq + s2 * q * q) - (f[p] + s2 * p * p)) / (2.0 * s2 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
        break;
      }
    }
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    int p = v[k];
    d[q] = s2 * (q - p) * (q - p) + f[p];
  }
  f = d;
}

// exact squared Euclidean distance (mm^2) to the given seed voxels
std::vector<double> squared_distance_field(const Geometry& g,
                                           const std::vector<std::array<int, 3>>& seeds) {
  const auto& s = g.shape;
  const std::size_t n = g.voxel_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n, inf);
  for (const auto& p : seeds)
    d[static_cast<std::size_t>(p[0]) + static_cast<std::size_t>(s[0]) * (p[1] + static_cast<std::size_t>(s[1]) * p[2])] = 0.0;

  std::vector<double> line;
  // x pass
  line.resize(s[0]);
  for (int z = 0; z < s[2]; ++z)
    for (int y = 0; y < s[1]; ++y) {
      std::size_t base = static_cast<std::size_t>(s[0]) * (y + static_cast<std::size_t>(s[1]) * z);
      for (int x = 0; x < s[0]; ++x) line[x] = d[base + x];
      dt1d(line, g.spacing[0]);
      for (int x = 0; x < s[0]; ++x) d[base + x] = line[x];
    }
  // y pass
  line.resize(s[1]);
  for (int z = 0; z < s[2]; ++z)
    for (int x = 0; x < s[0]; ++x) {
      for (int y = 0; y < s[1]; ++y)
        line[y] = d[x + static_cast<std::size_t>(s[0]) * (y + static_cast<std::size_t>(s[1]) * z)];
      dt1d(line, g.spacing[1]);
      for (int y = 0; y < s[1]; ++y)
        d[x + static_cast<std::size_t>(s[0]) * (y + static_cast<std::size_t>(s[1]) * z)] = line[y];
    }
  // z pass
  line.resize(s[2]);
  for (int y = 0; y < s[1]; ++y)
    for (int x = 0; x < s[0]; ++x) {
      for (int z = 0; z < s[2]; ++z)
        line[z] = d[x + static_cast<std::size_t>(s[0]) * (y + static_cast<std::size_t>(s[1]) * z)];
      dt1d(line, g.spacing[2]);
      for (int z = 0; z < s[2]; ++z)
        d[x + static_cast<std::size_t>(s[0]) * (y + static_cast<std::size_t>(s[1]) * z)] = line[z];
    }
  return d;
}

}  // namespace

double dice(const LabelMap& a, const LabelMap& b, std::uint8_t class_id) {
  require_same_geometry(a, b);
  std::size_t na = 0, nb = 0, ni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    bool ia = a.data[i] == class_id, ib = b.data[i] == class_id;
    na += ia;
    nb += ib;
    ni += ia && ib;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(ni) / static_cast<double>(na + nb);
}

std::vector<std::array<int, 3>> surface_voxels(const LabelMap& l, std::uint8_t class_id) {
  const auto& s = l.geom.shape;
  std::vector<std::array<int, 3>> out;
  auto fg = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= s[0] || y >= s[1] || z >= s[2]) return false;
    return l.at(x, y, z) == class_id;
  };
  for (int z = 0; z < s[2]; ++z)
    for (int y = 0; y < s[1]; ++y)
      for (int x = 0; x < s[0]; ++x) {
        if (!fg(x, y, z)) continue;
        if (!fg(x - 1, y, z) || !fg(x + 1, y, z) || !fg(x, y - 1, z) || !fg(x, y + 1, z) ||
            !fg(x, y, z - 1) || !fg(x, y, z + 1))
          out.push_back({x, y, z});
      }
  return out;
}

double assd(const LabelMap& a, const LabelMap& b, std::uint8_t class_id) {
  require_same_geometry(a, b);
  auto sa = surface_voxels(a, class_id);
  auto sb = surface_voxels(b, class_id);
  if (sa.empty() || sb.empty())
    throw std::invalid_argument("assd: empty class mask (caller decides the sentinel policy)");

  auto da = squared_distance_field(a.geom, sa);  // distance to surface(a)
  auto db = squared_distance_field(b.geom, sb);
  const auto& s = a.geom.shape;
  auto mean_over = [&](const std::vector<std::array<int, 3>>& pts, const std::vector<double>& d) {
    double acc = 0.0;
    for (const auto& p : pts)
      acc += std::sqrt(d[static_cast<std::size_t>(p[0]) +
                         static_cast<std::size_t>(s[0]) * (p[1] + static_cast<std::size_t>(s[1]) * p[2])]);
    return acc / static_cast<double>(pts.size());
  };
  double d_ab = mean_over(sa, db);  // surface(a) -> surface(b)
  double d_ba = mean_over(sb, da);
  return 0.5 * (d_ab + d_ba);
}

CohortReport evaluate_cohort(const std::vector<LabelMap>& preds,
                             const std::vector<LabelMap>& truths,
                             const std::vector<std::string>& subject_names) {
  if (preds.size() != truths.size() || preds.size() != subject_names.size())
    throw std::invalid_argument("evaluate_cohort: size mismatch");
  if (preds.empty()) throw std::invalid_argument("evaluate_cohort: empty cohort");

  CohortReport rep;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::uint8_t c : {labels::kVS, labels::kCochlea}) {
      SubjectScore row;
      row.subject = subject_names[i];
      row.class_id = c;
      row.dice = dice(preds[i], truths[i], c);
      bool pred_empty = preds[i].empty_class(c), truth_empty = truths[i].empty_class(c);
      if (!pred_empty && !truth_empty)
        row.assd_mm = assd(preds[i], truths[i], c);
      rep.rows.push_back(std::move(row));
    }
  }

  for (std::uint8_t c : {labels::kVS, labels::kCochlea}) {
    ClassSummary s{};
    s.class_id = c;
    std::vector<double> dices, assds;
    for (const auto& row : rep.rows)
      if (row.class_id == c) {
        dices.push_back(row.dice);
        if (row.assd_mm) assds.push_back(*row.assd_mm);
      }
    auto mean_std = [](const std::vector<double>& xs, double& mean, double& stdev) {
      mean = 0.0;
      stdev = 0.0;
      if (xs.empty()) return;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      if (xs.size() < 2) return;  // single subject -> stdev 0
      double acc = 0.0;
      for (double x : xs) acc += (x - mean) * (x - mean);
      stdev = std::sqrt(acc / static_cast<double>(xs.size() - 1));  // sample stdev
    };
    mean_std(dices, s.dice_mean, s.dice_stdev);
    mean_std(assds, s.assd_mean, s.assd_stdev);
    s.n = static_cast<int>(dices.size());
    s.n_assd = static_cast<int>(assds.size());
    rep.summary.push_back(s);
  }
  return rep;
}

void write_report_csv(const CohortReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open file for writing: " + path);
  auto class_name = [](std::uint8_t c) { return c == labels::kVS ? "VS" : "cochlea"; };
  f << "subject,class,dice,assd_mm\n";
  for (const auto& row : report.rows) {
    f << row.subject << "," << class_name(row.class_id) << "," << row.dice << ",";
    if (row.assd_mm)
      f << *row.assd_mm;
    else
      f << "NA";  // empty mask: ASSD skipped
    f << "\n";
  }
  for (const auto& s : report.summary)
    f << "mean," << class_name(s.class_id) << "," << s.dice_mean << ","
      << (s.n_assd > 0 ? std::to_string(s.assd_mean) : "NA") << "\n";
  for (const auto& s : report.summary)
    f << "stdev," << class_name(s.class_id) << "," << s.dice_stdev << ","
      << (s.n_assd > 0 ? std::to_string(s.assd_stdev) : "NA") << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace modaseg
