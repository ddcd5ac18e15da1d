#pragma once

#include <string>

namespace richness {

// Outcome of the calibration subplot survey: how many of the s_sub known
// species were recorded correctly at least once (s_sub_e) and how many
// recorded names were not on the known list (f_sub_0).
struct CalibrationRecord {
  int s_sub = 0;
  double s_sub_e = 0.0;
  double f_sub_0 = 0.0;
};

// Where the solved error-rate pair landed relative to its feasible region.
enum class SolveBoundary {
  interior,             // strict root of both moment equations
  zero_error,           // no phantom records and no losses: (e_bar, r) = (0, 0)
  r_pinned_at_one,      // no phantom records but losses occurred: r fixed at 1
  no_solution_clamped,  // no root in range; nearest feasible point reported
};

struct ErrorRateEstimate {
  double e_bar = 0.0;     // mean per-species misidentification probability
  double r = 0.0;         // probability a misidentification lands on another real species
  double residual = 0.0;  // |moment mismatch| at the returned point
  SolveBoundary boundary = SolveBoundary::interior;
};

inline bool is_clamped(const ErrorRateEstimate& est) {
  return est.boundary == SolveBoundary::no_solution_clamped;
}

std::string to_string(SolveBoundary b);

// Forward moment equations for a subplot of s_sub known species surveyed with
// mean error rate e_bar and in-plot landing probability r.
double expected_f_sub0(int s_sub, double e_bar, double r);
double expected_s_sub_e(int s_sub, double e_bar, double r);

// Invert the two moment equations for (e_bar, r) given the observed record.
ErrorRateEstimate estimate_error_rates(const CalibrationRecord& record);

}  // namespace richness
