#pragma once

#include <cstdint>

#include "richness/adjustment.hpp"
#include "richness/calibration.hpp"

namespace richness {

struct BootstrapConfig {
  int trials = 200;
  std::uint64_t seed = 0;
};

// First-order propagation of calibration-survey sampling noise into the
// richness estimate.  The slopes translate a perturbation of the calibration
// outcome into a shift of the point estimate; the bootstrap adds that shift
// on top of each count-resampled replicate.
struct CalibrationPropagation {
  int s_sub = 0;
  double s_sub_e = 0.0;
  double f_sub_0 = 0.0;
  double slope_s_sub_e = 0.0;  // d(point estimate) / d(s_sub_e)
  double slope_f_sub_0 = 0.0;  // d(point estimate) / d(f_sub_0)
};

// Finite-difference slopes of the adjusted estimate with respect to the
// calibration outcome, evaluated at the observed record and raw counts.
CalibrationPropagation make_calibration_propagation(const CalibrationRecord& record,
                                                    const RawCounts& raw);

// Standard error of the adjusted estimator: each replicate independently
// redraws the three adjusted counts as Binomial(round(s_hat), count/s_hat)
// and re-applies the branched estimator.  Sample standard deviation,
// (trials-1) divisor.  Deterministic given cfg.seed.
double bootstrap_se(const AdjustedCounts& adj, double s_hat, const BootstrapConfig& cfg);

// Same scheme, adding per-replicate calibration noise: the calibration
// outcome is redrawn binomially and its effect enters through the
// first-order slopes in `prop`.
double bootstrap_se(const AdjustedCounts& adj, double s_hat, const BootstrapConfig& cfg,
                    const CalibrationPropagation& prop);

// The same count-regeneration scheme applied to unadjusted counts (no
// calibration term).  The replicate estimator stays the branched form: its
// low-doubleton fallback keeps replicates with tiny redrawn Q2 from blowing
// up the spread the way a raw Q1^2/(2*Q2) term would.
double bootstrap_se(const RawCounts& raw, double s_hat, const BootstrapConfig& cfg);

}  // namespace richness
