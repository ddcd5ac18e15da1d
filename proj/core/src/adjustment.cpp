#include "richness/adjustment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace richness {
namespace {

double checked_product(double e_bar, double r) {
  if (e_bar < 0.0 || e_bar > 1.0 || r < 0.0 || r > 1.0)
    throw std::domain_error("error rates must lie in [0, 1]");
  const double x = e_bar * r;
  if (x >= 1.0 - 1e-9)
    throw std::domain_error("identity-error product e_bar*r too close to 1; adjustment diverges");
  return x;
}

void check_nonnegative(double v, const char* what) {
  if (v < 0.0) throw std::domain_error(std::string(what) + " must be non-negative");
}

}  // namespace

double adjust_observed(double s_obs_e, double e_bar, double r) {
  check_nonnegative(s_obs_e, "observed richness");
  const double x = checked_product(e_bar, r);
  return s_obs_e / (1.0 - x);
}

double adjust_singletons(double q1_e, double e_bar, double r) {
  check_nonnegative(q1_e, "singleton count");
  const double x = checked_product(e_bar, r);
  return q1_e / ((1.0 - x) * std::exp(-x));
}

double adjust_doubletons(const RawCounts& raw, double q1_a, double s_obs_a, double e_bar,
                         double r) {
  check_nonnegative(raw.q2_e, "doubleton count");
  check_nonnegative(q1_a, "adjusted singleton count");
  if (raw.units < 2) throw std::domain_error("need at least two sampling units");
  const double x = checked_product(e_bar, r);
  if (x == 0.0) return raw.q2_e;
  if (s_obs_a <= 0.0) {
    if (raw.q2_e > 0.0 || q1_a > 0.0)
      throw std::domain_error("doubleton adjustment needs a positive adjusted richness");
    return 0.0;
  }
  const double t = static_cast<double>(raw.units);
  const double spurious = q1_a * x * (1.0 - 1.0 / t) * (q1_a / s_obs_a) * std::exp(-x);
  const double value = (raw.q2_e - spurious) / ((1.0 - x) * std::exp(-x));
  return std::max(0.0, value);
}

AdjustedCounts adjust_counts(const RawCounts& raw, double e_bar, double r) {
  if (raw.q1_e + raw.q2_e > raw.s_obs_e + 1e-9)
    throw std::domain_error("singletons plus doubletons cannot exceed observed richness");
  AdjustedCounts adj;
  adj.units = raw.units;
  adj.s_obs_a = adjust_observed(raw.s_obs_e, e_bar, r);
  adj.q1_a = adjust_singletons(raw.q1_e, e_bar, r);
  adj.q2_a = adjust_doubletons(raw, adj.q1_a, adj.s_obs_a, e_bar, r);
  return adj;
}

AdjustedCounts adjust_counts(const RawCounts& raw, const ErrorRateEstimate& est) {
  return adjust_counts(raw, est.e_bar, est.r);
}

}  // namespace richness
