#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "richness/calibration.hpp"
#include "richness/rng.hpp"
#include "richness/survey.hpp"

namespace richness {

enum class DetectionKind { uniform01, mixture };

struct DetectionModel {
  DetectionKind kind = DetectionKind::uniform01;
  // mixture: 0.8 * Uniform(0.1, 0.3) + 0.2 * Uniform(0.4, 1.0)
};

enum class ErrorDistribution { constant, uniform_0_to_2ebar };

struct ErrorModel {
  double e_bar_target = 0.0;
  ErrorDistribution e_distribution = ErrorDistribution::uniform_0_to_2ebar;
  double r = 0.0;  // probability a misidentification lands on an in-plot species
};

struct ExperimentConfig {
  int s_true = 100;  // community richness
  int s_sub = 40;    // calibration subplot size
  int units = 5;     // sampling units per survey
  int replicates = 500;
  int bootstrap_trials = 200;
  DetectionModel detection;
  std::vector<double> e_bar_grid = {0.0, 0.05, 0.10, 0.15, 0.20};
  ErrorDistribution e_distribution = ErrorDistribution::uniform_0_to_2ebar;
  double r = 0.91;
  std::uint64_t master_seed = 1;
  // Retain per-replicate results in the summary (identity/property tests).
  bool keep_replicate_details = false;
};

enum class SimMethod { truth, observed, adjusted };

std::string to_string(SimMethod m);
std::string to_string(DetectionKind k);
std::string to_string(ErrorDistribution d);

// One aggregated table row: a (method, error level) cell of the study.
struct SummaryRow {
  double e_bar_target = 0.0;
  double e_bar_realized = 0.0;
  double e_hat_mean = 0.0;
  SimMethod method = SimMethod::truth;
  double s_obs = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double s_hat = 0.0;
  double bias = 0.0;
  double se = 0.0;
  double se_hat = 0.0;
  double rmse = 0.0;
};

struct ReplicateMethodResult {
  double s_obs = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double s_hat = 0.0;
  double se_hat = 0.0;
};

struct ReplicateDetail {
  ReplicateMethodResult truth;
  ReplicateMethodResult observed;
  ReplicateMethodResult adjusted;
  double e_hat = 0.0;
  double r_hat = 0.0;
  SolveBoundary boundary = SolveBoundary::interior;
  // Seed of the resampling stream shared by the three methods' standard
  // errors; lets any replicate's bootstrap be reproduced standalone.
  std::uint64_t bootstrap_seed = 0;
};

struct SimulationSummary {
  std::vector<SummaryRow> rows;  // three method rows per error level
  std::vector<int> clamped_solves;  // per error level
  // Per level, per replicate; populated only when cfg.keep_replicate_details.
  std::vector<std::vector<ReplicateDetail>> replicate_details;
};

struct ProbSummary {
  double mean = 0.0;
  double cv = 0.0;  // coefficient of variation (population sd / mean)
};

// Detection probabilities drawn i.i.d. from the model.
std::vector<double> draw_detection_probs(const DetectionModel& model, int s, RngStream& rng);

// Realized mean and CV of a probability draw.
ProbSummary summarize_probs(std::span<const double> probs);

// Bernoulli incidence over `units` passes; undetected species are dropped.
// Species labels are "s1".."sN" in community order.
IncidenceMatrix simulate_incidence(const std::vector<double>& probs, int units, RngStream& rng);

// Wholesale misidentification: species i (with per-species error rate e[i])
// is misidentified with probability e[i]; if so, with probability r all its
// records merge (logical OR) into one uniformly chosen correctly-identified
// species, otherwise they are relabeled to species i's fixed out-of-plot
// ghost label.  e.size() must equal m.species_count().
IncidenceMatrix inject_identity_errors(const IncidenceMatrix& m, std::span<const double> e,
                                       double r, RngStream& rng);

// Convenience overload drawing per-species rates from the model each call.
IncidenceMatrix inject_identity_errors(const IncidenceMatrix& m, const ErrorModel& em,
                                       RngStream& rng);

// One calibration survey over s_sub designer-known species: per-species rates
// drawn from the model, misidentifications land uniformly among the other
// s_sub-1 known species with probability r (else a fresh ghost name).
CalibrationRecord simulate_calibration(int s_sub, const ErrorModel& em, RngStream& rng);

// Full study: for each target error level, apply the three estimation
// methods over cfg.replicates independent surveys and aggregate.
// Bit-identical output for a given master seed at any thread count.
SimulationSummary run_experiment(const ExperimentConfig& cfg, int threads = 1);

}  // namespace richness
