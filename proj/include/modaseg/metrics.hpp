#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modaseg/volume.hpp"

namespace modaseg {

/// Dice overlap 2|A∩B| / (|A|+|B|) of the class-`class_id` masks.
/// Both masks empty -> 1.0; exactly one empty -> 0.0.
double dice(const LabelMap& a, const LabelMap& b, std::uint8_t class_id);

/// Average symmetric surface distance in mm. Surfaces are foreground voxels
/// with at least one background 6-neighbor (grid borders count as
/// background); distances are Euclidean between voxel centers with the
/// grid spacing applied. Throws if either class mask is empty.
double assd(const LabelMap& a, const LabelMap& b, std::uint8_t class_id);

/// Surface voxel extraction used by assd; exposed for tests.
std::vector<std::array<int, 3>> surface_voxels(const LabelMap& l, std::uint8_t class_id);

struct SubjectScore {
  std::string subject;
  std::uint8_t class_id;
  double dice;
  std::optional<double> assd_mm;  // empty when a mask was empty (flagged)
};

struct ClassSummary {
  std::uint8_t class_id;
  double dice_mean, dice_stdev;
  double assd_mean, assd_stdev;  // over subjects with defined ASSD
  int n, n_assd;
};

struct CohortReport {
  std::vector<SubjectScore> rows;
  std::vector<ClassSummary> summary;  // per foreground class
};

/// Scores each (pred, truth) pair for the VS and cochlea classes and
/// aggregates mean and sample (n-1) standard deviation per class. ASSD rows
/// where either mask is empty are skipped and flagged.
CohortReport evaluate_cohort(const std::vector<LabelMap>& preds,
                             const std::vector<LabelMap>& truths,
                             const std::vector<std::string>& subject_names);

/// CSV with columns subject,class,dice,assd_mm. Skipped ASSD cells hold NA;
/// summary rows use subjects "mean" and "stdev".
void write_report_csv(const CohortReport& report, const std::string& path);

}  // namespace modaseg
