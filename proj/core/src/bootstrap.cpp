#include "richness/bootstrap.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "richness/estimators.hpp"
#include "richness/rng.hpp"

namespace richness {
namespace {

double checked_probability(double count, double s_hat) {
  const double p = count / s_hat;
  if (p < 0.0 || p > 1.0)
    throw std::domain_error("count/s_hat outside [0,1]; cannot parameterize resampling");
  return p;
}

double sample_sd(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

double replicate_estimate(double s, double q1, double q2, int units) {
  AdjustedCounts counts;
  counts.s_obs_a = s;
  counts.q1_a = q1;
  counts.q2_a = q2;
  counts.units = units;
  return adjusted_estimator(counts).point;
}

// Shared replicate loop: redraw the three counts, re-apply the branched
// estimator, and optionally add linearized calibration noise.
double run_bootstrap(double c0, double c1, double c2, int units, double s_hat,
                     const BootstrapConfig& cfg, const CalibrationPropagation* prop) {
  if (cfg.trials < 2) throw std::domain_error("bootstrap needs at least two trials");
  if (s_hat <= 0.0) throw std::domain_error("bootstrap needs a positive point estimate");
  const double p0 = checked_probability(c0, s_hat);
  const double p1 = checked_probability(c1, s_hat);
  const double p2 = checked_probability(c2, s_hat);
  const int n = static_cast<int>(std::llround(s_hat));

  double p_se = 0.0, p_f0 = 0.0;
  if (prop != nullptr) {
    p_se = checked_probability(prop->s_sub_e, static_cast<double>(prop->s_sub));
    p_f0 = checked_probability(prop->f_sub_0, static_cast<double>(prop->s_sub));
  }

  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(cfg.trials));
  for (int rep = 0; rep < cfg.trials; ++rep) {
    auto rng = RngStream::substream(cfg.seed, {static_cast<std::uint64_t>(rep)});
    const double s_star = rng.binomial(n, p0);
    const double q1_star = rng.binomial(n, p1);
    const double q2_star = rng.binomial(n, p2);
    double value = replicate_estimate(s_star, q1_star, q2_star, units);
    if (prop != nullptr) {
      const double se_star = rng.binomial(prop->s_sub, p_se);
      const double f0_star = rng.binomial(prop->s_sub, p_f0);
      value += prop->slope_s_sub_e * (se_star - prop->s_sub_e) +
               prop->slope_f_sub_0 * (f0_star - prop->f_sub_0);
    }
    estimates.push_back(value);
  }
  return sample_sd(estimates);
}

// The product e_bar*r implied by a calibration record, via the solver.
double solved_error_product(CalibrationRecord rec) {
  const ErrorRateEstimate est = estimate_error_rates(rec);
  return est.e_bar * est.r;
}

// Adjusted point estimate as a function of the error product alone.
double point_at_error_product(const RawCounts& raw, double x) {
  return adjusted_estimator(adjust_counts(raw, x, 1.0)).point;
}

}  // namespace

CalibrationPropagation make_calibration_propagation(const CalibrationRecord& record,
                                                    const RawCounts& raw) {
  CalibrationPropagation prop;
  prop.s_sub = record.s_sub;
  prop.s_sub_e = record.s_sub_e;
  prop.f_sub_0 = record.f_sub_0;

  const double x0 = solved_error_product(record);

  // Sensitivity of the estimate to the error product (central difference,
  // one-sided at the lower domain boundary).
  const double hx = 1e-4;
  double ds_dx = 0.0;
  if (x0 - hx >= 0.0) {
    ds_dx = (point_at_error_product(raw, x0 + hx) - point_at_error_product(raw, x0 - hx)) /
            (2.0 * hx);
  } else {
    ds_dx = (point_at_error_product(raw, x0 + hx) - point_at_error_product(raw, x0)) / hx;
  }

  // Sensitivity of the error product to each calibration outcome component
  // (half-count central differences, one-sided at the record's boundaries).
  auto x_at = [&](double s_sub_e, double f_sub_0) {
    CalibrationRecord r = record;
    r.s_sub_e = s_sub_e;
    r.f_sub_0 = f_sub_0;
    return solved_error_product(r);
  };
  const double h = 0.5;
  const double s_max = static_cast<double>(record.s_sub);

  double dx_dse = 0.0;
  if (record.s_sub_e + h <= s_max && record.s_sub_e - h >= 0.0) {
    dx_dse = (x_at(record.s_sub_e + h, record.f_sub_0) -
              x_at(record.s_sub_e - h, record.f_sub_0)) / (2.0 * h);
  } else if (record.s_sub_e + h <= s_max) {
    dx_dse = (x_at(record.s_sub_e + h, record.f_sub_0) - x0) / h;
  } else if (record.s_sub_e - h >= 0.0) {
    dx_dse = (x0 - x_at(record.s_sub_e - h, record.f_sub_0)) / h;
  }

  double dx_df0 = 0.0;
  if (record.f_sub_0 - h >= 0.0) {
    dx_df0 = (x_at(record.s_sub_e, record.f_sub_0 + h) -
              x_at(record.s_sub_e, record.f_sub_0 - h)) / (2.0 * h);
  } else {
    dx_df0 = (x_at(record.s_sub_e, record.f_sub_0 + h) - x0) / h;
  }

  prop.slope_s_sub_e = ds_dx * dx_dse;
  prop.slope_f_sub_0 = ds_dx * dx_df0;
  return prop;
}

double bootstrap_se(const AdjustedCounts& adj, double s_hat, const BootstrapConfig& cfg) {
  return run_bootstrap(adj.s_obs_a, adj.q1_a, adj.q2_a, adj.units, s_hat, cfg, nullptr);
}

double bootstrap_se(const AdjustedCounts& adj, double s_hat, const BootstrapConfig& cfg,
                    const CalibrationPropagation& prop) {
  return run_bootstrap(adj.s_obs_a, adj.q1_a, adj.q2_a, adj.units, s_hat, cfg, &prop);
}

double bootstrap_se(const RawCounts& raw, double s_hat, const BootstrapConfig& cfg) {
  return run_bootstrap(raw.s_obs_e, raw.q1_e, raw.q2_e, raw.units, s_hat, cfg, nullptr);
}

}  // namespace richness
