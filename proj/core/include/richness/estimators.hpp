#pragma once

#include <optional>
#include <string>

#include "richness/adjustment.hpp"

namespace richness {

enum class Method { chao2, jackknife1, adjusted };

// Which correction form produced an adjusted estimate: the Taylor-corrected
// form (doubletons abundant) or the jackknife fallback (doubletons scarce).
enum class EstimatorBranch { taylor_corrected, jackknife_fallback, none };

struct RichnessEstimate {
  double point = 0.0;
  std::optional<double> se;  // filled by the bootstrap, absent otherwise
  Method method = Method::chao2;
  EstimatorBranch branch = EstimatorBranch::none;
};

std::string to_string(Method m);
std::string to_string(EstimatorBranch b);

// Classic incidence-based lower-bound estimator.  With no doubletons the
// bias-corrected surrogate Q1*(Q1-1)/2 replaces the Q1^2/(2*Q2) term.
RichnessEstimate chao2(double s_obs, double q1, double q2, int units);

// First-order jackknife: S_obs + ((T-1)/T) * Q1.
RichnessEstimate jackknife1(double s_obs, double q1, int units);

// Estimator on misidentification-adjusted counts.  When q2_a > 1 the
// Taylor-corrected term max{Q1a^2/(2Q2a) - Q1a/(2Q2a) - Q1a^2/(2Q2a^2), 0}
// applies; when q2_a <= 1 the jackknife form on adjusted counts takes over.
RichnessEstimate adjusted_estimator(const AdjustedCounts& adj);

}  // namespace richness
