#pragma once

#include "richness/calibration.hpp"

namespace richness {

// Error-contaminated counts as recorded in the field: observed richness,
// singletons, doubletons, and the number of sampling units.
struct RawCounts {
  double s_obs_e = 0.0;
  double q1_e = 0.0;
  double q2_e = 0.0;
  int units = 2;
};

// Counts corrected for misidentification at rates (e_bar, r).
struct AdjustedCounts {
  double s_obs_a = 0.0;
  double q1_a = 0.0;
  double q2_a = 0.0;
  int units = 2;
};

// Expected inflation back-out for the observed richness:
// s_obs_a = s_obs_e / (1 - e_bar * r).
double adjust_observed(double s_obs_e, double e_bar, double r);

// Singleton correction: q1_a = q1_e / ((1 - e_bar*r) * exp(-e_bar*r)).
double adjust_singletons(double q1_e, double e_bar, double r);

// Doubleton correction; subtracts expected spurious doubletons formed when a
// misidentified singleton merges into another singleton, then rescales.
// Clamped at zero.  Requires the already-adjusted q1_a and s_obs_a.
double adjust_doubletons(const RawCounts& raw, double q1_a, double s_obs_a, double e_bar,
                         double r);

// Applies the three corrections in dependency order.
AdjustedCounts adjust_counts(const RawCounts& raw, const ErrorRateEstimate& est);
AdjustedCounts adjust_counts(const RawCounts& raw, double e_bar, double r);

}  // namespace richness
