#pragma once

#include "modaseg/rigid.hpp"
#include "modaseg/volume.hpp"

namespace modaseg {

struct RegistrationOptions {
  int levels = 3;            // multi-resolution pyramid depth (coarsest = 2^(levels-1))
  int histogram_bins = 32;
  int max_iterations = 150;  // per pyramid level
  double min_step = 0.05;    // convergence threshold in scaled parameter units
  bool center_of_mass_init = true;
};

struct RegistrationResult {
  RigidTransform transform;  // maps moving world coordinates into the fixed frame
  double final_metric = 0.0; // mutual information at the solution
  bool converged = false;
  int iterations = 0;
};

/// Rigid mutual-information registration (Parzen-windowed joint histogram,
/// multi-resolution pyramid, gradient ascent with adaptive step length).
/// Throws if either volume is constant; reports the final metric when the
/// iteration cap is hit without convergence.
RegistrationResult register_rigid(const Volume& moving, const Volume& fixed,
                                  const RegistrationOptions& opts = {});

/// Mutual information between fixed and the transformed moving image, where
/// `sampling` maps fixed world coordinates to moving world coordinates.
/// Exposed for tests and diagnostics.
double mutual_information(const Volume& moving, const Volume& fixed, const RigidTransform& sampling,
                          int bins = 32);

}  // namespace modaseg
