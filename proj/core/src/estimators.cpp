#include "richness/estimators.hpp"

#include <algorithm>
#include <stdexcept>

namespace richness {
namespace {

void check_inputs(double s_obs, double q1, double q2, int units) {
  if (units < 2) throw std::domain_error("estimators need at least two sampling units");
  if (s_obs < 0.0 || q1 < 0.0 || q2 < 0.0)
    throw std::domain_error("richness counts must be non-negative");
}

double unit_factor(int units) {
  return static_cast<double>(units - 1) / static_cast<double>(units);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::chao2: return "chao2";
    case Method::jackknife1: return "jackknife1";
    case Method::adjusted: return "adjusted";
  }
  return "unknown";
}

std::string to_string(EstimatorBranch b) {
  switch (b) {
    case EstimatorBranch::taylor_corrected: return "taylor_corrected";
    case EstimatorBranch::jackknife_fallback: return "jackknife_fallback";
    case EstimatorBranch::none: return "none";
  }
  return "unknown";
}

RichnessEstimate chao2(double s_obs, double q1, double q2, int units) {
  check_inputs(s_obs, q1, q2, units);
  RichnessEstimate est;
  est.method = Method::chao2;
  const double f = unit_factor(units);
  if (q2 > 0.0) {
    est.point = s_obs + f * q1 * q1 / (2.0 * q2);
  } else {
    est.point = s_obs + f * q1 * (q1 - 1.0) / 2.0;
  }
  est.point = std::max(est.point, s_obs);
  return est;
}

RichnessEstimate jackknife1(double s_obs, double q1, int units) {
  check_inputs(s_obs, q1, 0.0, units);
  RichnessEstimate est;
  est.method = Method::jackknife1;
  est.point = s_obs + unit_factor(units) * q1;
  return est;
}

RichnessEstimate adjusted_estimator(const AdjustedCounts& adj) {
  check_inputs(adj.s_obs_a, adj.q1_a, adj.q2_a, adj.units);
  RichnessEstimate est;
  est.method = Method::adjusted;
  const double f = unit_factor(adj.units);
  if (adj.q2_a > 1.0) {
    const double q1 = adj.q1_a;
    const double q2 = adj.q2_a;
    const double term = q1 * q1 / (2.0 * q2) - q1 / (2.0 * q2) - q1 * q1 / (2.0 * q2 * q2);
    est.point = adj.s_obs_a + f * std::max(term, 0.0);
    est.branch = EstimatorBranch::taylor_corrected;
  } else {
    est.point = adj.s_obs_a + f * adj.q1_a;
    est.branch = EstimatorBranch::jackknife_fallback;
  }
  return est;
}

}  // namespace richness
