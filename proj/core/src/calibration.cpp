#include "richness/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace richness {
namespace {

constexpr int kGridPoints = 1025;
constexpr int kBisectionIters = 200;

// Missing fraction (s_sub - E[s_sub_e]) / s_sub at mean error rate e and
// landing probability r.
double missing_fraction(int s_sub, double e, double r) {
  const double base = 1.0 - e * r / (static_cast<double>(s_sub) - r);
  return e * std::pow(base, s_sub - 1);
}

// Count-scale misfit of both moment equations at a candidate pair.
double forward_residual(const CalibrationRecord& rec, double e, double r) {
  const double d_f0 = expected_f_sub0(rec.s_sub, e, r) - rec.f_sub_0;
  const double d_se = expected_s_sub_e(rec.s_sub, e, r) - rec.s_sub_e;
  return std::max(std::fabs(d_f0), std::fabs(d_se));
}

ErrorRateEstimate finish(const CalibrationRecord& rec, double e, double r, SolveBoundary b) {
  ErrorRateEstimate est;
  est.e_bar = std::clamp(e, 0.0, 1.0);
  est.r = std::clamp(r, 0.0, 1.0);
  est.boundary = b;
  est.residual = forward_residual(rec, est.e_bar, est.r);
  return est;
}

}  // namespace

std::string to_string(SolveBoundary b) {
  switch (b) {
    case SolveBoundary::interior: return "interior";
    case SolveBoundary::zero_error: return "zero_error";
    case SolveBoundary::r_pinned_at_one: return "r_pinned_at_one";
    case SolveBoundary::no_solution_clamped: return "no_solution_clamped";
  }
  return "unknown";
}

namespace {

void check_rates(int s_sub, double e_bar, double r) {
  if (s_sub < 1) throw std::domain_error("subplot size must be positive");
  if (e_bar < 0.0 || e_bar > 1.0)
    throw std::domain_error("mean error rate must lie in [0, 1]");
  if (r < 0.0 || r > 1.0)
    throw std::domain_error("landing probability must lie in [0, 1]");
}

}  // namespace

double expected_f_sub0(int s_sub, double e_bar, double r) {
  check_rates(s_sub, e_bar, r);
  return static_cast<double>(s_sub) * e_bar * (1.0 - r);
}

double expected_s_sub_e(int s_sub, double e_bar, double r) {
  check_rates(s_sub, e_bar, r);
  if (static_cast<double>(s_sub) - r <= 0.0)
    throw std::domain_error("subplot size must exceed the landing probability");
  return static_cast<double>(s_sub) * (1.0 - missing_fraction(s_sub, e_bar, r));
}

ErrorRateEstimate estimate_error_rates(const CalibrationRecord& record) {
  const int s = record.s_sub;
  if (s < 2) throw std::invalid_argument("calibration needs at least two known species");
  if (record.s_sub_e < 0.0 || record.s_sub_e > static_cast<double>(s))
    throw std::invalid_argument("correctly recorded count must lie in [0, s_sub]");
  if (record.f_sub_0 < 0.0)
    throw std::invalid_argument("phantom record count must be non-negative");

  const double a = record.f_sub_0 / static_cast<double>(s);       // = e_bar * (1 - r)
  const double b = (static_cast<double>(s) - record.s_sub_e) / s;  // = missing fraction

  if (record.f_sub_0 == 0.0) {
    if (b <= 0.0) {
      // Nothing lost and nothing invented: consistent with no error at all.
      // r is unidentifiable at e_bar = 0; 0 is a reporting convention.
      return finish(record, 0.0, 0.0, SolveBoundary::zero_error);
    }
    // Losses without phantom records force every misidentification in-plot.
    // Solve the remaining 1-D equation on its increasing branch.
    const double e_hi = static_cast<double>(s - 1) / s;  // argmax of the missing fraction
    if (missing_fraction(s, e_hi, 1.0) < b)
      return finish(record, e_hi, 1.0, SolveBoundary::no_solution_clamped);
    double lo = 0.0, hi = e_hi;
    for (int i = 0; i < kBisectionIters; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (missing_fraction(s, mid, 1.0) < b) lo = mid; else hi = mid;
    }
    return finish(record, 0.5 * (lo + hi), 1.0, SolveBoundary::r_pinned_at_one);
  }

  if (a >= 1.0) {
    // Even a certain misidentification with everything leaving the plot
    // cannot produce this many phantom records per known species.
    return finish(record, 1.0, 0.0, SolveBoundary::no_solution_clamped);
  }

  // With phantom records present, e_bar is tied to r through e_bar = a/(1-r);
  // keeping e_bar <= 1 restricts r to [0, 1-a].  Scan that interval for a
  // sign change of the remaining moment mismatch, then bisect.
  const double r_max = 1.0 - a;
  auto g = [&](double r) {
    const double e = a / (1.0 - r);
    return missing_fraction(s, e, r) - b;
  };

  double best_r = 0.0;
  double best_abs = std::numeric_limits<double>::infinity();
  double prev_r = 0.0, prev_g = 0.0;
  bool have_prev = false;
  bool bracketed = false;
  double lo = 0.0, hi = 0.0, g_lo = 0.0;
  for (int i = 0; i < kGridPoints; ++i) {
    const double r = r_max * static_cast<double>(i) / (kGridPoints - 1);
    const double gr = g(r);
    if (!std::isfinite(gr)) continue;
    // Integer records frequently satisfy a moment equation exactly (for
    // example one species ghosted, none confused in-plot): take the exact
    // root rather than bracketing around it.
    if (gr == 0.0) return finish(record, a / (1.0 - r), r, SolveBoundary::interior);
    if (std::fabs(gr) < best_abs) {
      best_abs = std::fabs(gr);
      best_r = r;
    }
    if (have_prev && ((prev_g < 0.0) != (gr < 0.0))) {
      lo = prev_r;
      hi = r;
      g_lo = prev_g;
      bracketed = true;
      break;
    }
    prev_r = r;
    prev_g = gr;
    have_prev = true;
  }

  if (!bracketed)
    return finish(record, a / (1.0 - best_r), best_r, SolveBoundary::no_solution_clamped);

  for (int i = 0; i < kBisectionIters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (g_mid == 0.0) return finish(record, a / (1.0 - mid), mid, SolveBoundary::interior);
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  const double r_hat = 0.5 * (lo + hi);
  return finish(record, a / (1.0 - r_hat), r_hat, SolveBoundary::interior);
}

}  // namespace richness
