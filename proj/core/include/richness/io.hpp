#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "richness/adjustment.hpp"
#include "richness/bootstrap.hpp"
#include "richness/calibration.hpp"
#include "richness/estimators.hpp"
#include "richness/simulator.hpp"
#include "richness/survey.hpp"

namespace richness {

// CSV layout: first column species label, remaining columns one cell per
// sampling unit (0/1), optional header row naming the units.
IncidenceMatrix parse_incidence_csv(const std::string& path);

// One species name per line; blank lines and lines starting with '#' skipped.
std::vector<std::string> read_species_list(const std::string& path);

// Whitespace-separated "s_sub s_sub_e f_sub_0" (comments as above).
CalibrationRecord parse_calibration_file(const std::string& path);

// Derive a calibration record by comparing the designer's species list with
// the observer's recorded list.
CalibrationRecord record_from_lists(const std::vector<std::string>& truth,
                                    const std::vector<std::string>& recorded);

// Estimation results for one data set: the uncorrected row always, the
// error-corrected row when identification error rates were available.
struct AnalysisReport {
  RawCounts observed_counts;
  RichnessEstimate observed;
  bool has_adjusted = false;
  AdjustedCounts adjusted_counts;
  RichnessEstimate adjusted;
  bool has_rates = false;
  ErrorRateEstimate rates;
  bool has_calibration = false;  // rates were solved from a calibration record
  CalibrationRecord calibration;
};

// Runs the estimation pipeline: point estimates, bootstrap standard errors,
// and (when a calibration record is given) rate solving with calibration
// noise propagated into the adjusted standard error.  Supply either `rates`
// (known error rates) or `record` (solve first), not both.
AnalysisReport build_report(const FrequencyCounts& counts,
                            const std::optional<ErrorRateEstimate>& rates,
                            const std::optional<CalibrationRecord>& record,
                            const BootstrapConfig& bootstrap);

// Machine-readable forms carry full precision; the CSV round-trips through
// read_report_csv exactly.
void write_report_csv(const AnalysisReport& report, std::ostream& os);
AnalysisReport read_report_csv(std::istream& is);
void write_report_json(const AnalysisReport& report, std::ostream& os);

// Human-readable aligned table (counts and estimates to 1 decimal, rates and
// standard errors to 2).
std::string format_report_text(const AnalysisReport& report);

// Study summary: one row per (error level, method), full-precision values.
void write_summary_csv(const SimulationSummary& summary, std::ostream& os);
std::string format_summary_text(const SimulationSummary& summary);

// JSON experiment description; keys mirror ExperimentConfig field names.
ExperimentConfig parse_experiment_config(const std::string& path);

}  // namespace richness
