#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "richness/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitClamped = 2;   // record inconsistent with the error model
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct CalibrateArgs {
  int s_sub = 0;
  double s_sub_e = -1.0;
  double f_sub_0 = -1.0;
  std::string truth_list;
  std::string recorded_list;
  std::string out;
};

struct EstimateArgs {
  std::string data;
  double e_bar = -1.0;
  double r = -1.0;
  std::string calibration;
  int bootstrap = 200;
  std::uint64_t seed = 0;
  std::string out;
};

struct SimulateArgs {
  std::string config;
  std::string model;
  int units = 0;
  std::vector<double> e_bar_grid;
  double r = -1.0;
  int replicates = 0;
  int bootstrap = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out;
};

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << body;
}

int run_calibrate(const CalibrateArgs& a, const CLI::App& cmd) {
  const bool counts_mode = cmd.count("--s-sub") > 0;
  const bool list_mode = !a.truth_list.empty() || !a.recorded_list.empty();
  richness::CalibrationRecord rec;
  if (counts_mode && !list_mode) {
    if (cmd.count("--s-sub-e") == 0 || cmd.count("--f-sub0") == 0) {
      std::cerr << "calibrate: --s-sub, --s-sub-e, and --f-sub0 must be given together\n";
      return kExitUsage;
    }
    rec.s_sub = a.s_sub;
    rec.s_sub_e = a.s_sub_e;
    rec.f_sub_0 = a.f_sub_0;
  } else if (list_mode && !counts_mode) {
    if (a.truth_list.empty() || a.recorded_list.empty()) {
      std::cerr << "calibrate: --truth-list and --recorded-list must be given together\n";
      return kExitUsage;
    }
    rec = richness::record_from_lists(richness::read_species_list(a.truth_list),
                                      richness::read_species_list(a.recorded_list));
  } else {
    std::cerr << "calibrate: supply either --s-sub/--s-sub-e/--f-sub0 or "
                 "--truth-list/--recorded-list\n";
    return kExitUsage;
  }

  const richness::ErrorRateEstimate est = richness::estimate_error_rates(rec);
  std::printf("e_bar=%.3f r=%.3f residual=%.3g flag=%s\n", est.e_bar, est.r, est.residual,
              richness::to_string(est.boundary).c_str());
  if (!a.out.empty()) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"e_bar\": %.17g,\n  \"r\": %.17g,\n  \"residual\": %.17g,\n"
                  "  \"boundary\": \"%s\"\n}\n",
                  est.e_bar, est.r, est.residual, richness::to_string(est.boundary).c_str());
    write_text_file(a.out, buf);
  }
  return richness::is_clamped(est) ? kExitClamped : kExitOk;
}

int run_estimate(const EstimateArgs& a, const CLI::App& cmd) {
  const bool have_e = cmd.count("--e-bar") > 0;
  const bool have_r = cmd.count("--r") > 0;
  if (have_e != have_r) {
    std::cerr << "estimate: --e-bar and --r must be given together\n";
    return kExitUsage;
  }

  const richness::IncidenceMatrix m = richness::parse_incidence_csv(a.data);
  const richness::FrequencyCounts counts = richness::tally_frequencies(m);

  std::optional<richness::ErrorRateEstimate> rates;
  std::optional<richness::CalibrationRecord> record;
  if (have_e) {
    richness::ErrorRateEstimate given;
    given.e_bar = a.e_bar;
    given.r = a.r;
    rates = given;
  }
  if (!a.calibration.empty()) record = richness::parse_calibration_file(a.calibration);

  richness::BootstrapConfig bc;
  bc.trials = a.bootstrap;
  bc.seed = a.seed;
  const richness::AnalysisReport report = richness::build_report(counts, rates, record, bc);
  std::cout << richness::format_report_text(report);

  if (!a.out.empty()) {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot write " + a.out);
    if (a.out.size() >= 5 && a.out.substr(a.out.size() - 5) == ".json")
      richness::write_report_json(report, os);
    else
      richness::write_report_csv(report, os);
  }
  if (report.has_rates && richness::is_clamped(report.rates)) return kExitClamped;
  return kExitOk;
}

int run_simulate(const SimulateArgs& a) {
  richness::ExperimentConfig cfg;
  if (!a.config.empty()) cfg = richness::parse_experiment_config(a.config);
  if (!a.model.empty()) {
    if (a.model == "uniform01") cfg.detection.kind = richness::DetectionKind::uniform01;
    else if (a.model == "mixture") cfg.detection.kind = richness::DetectionKind::mixture;
    else throw std::invalid_argument("--model must be 'uniform01' or 'mixture'");
  }
  if (a.units > 0) cfg.units = a.units;
  if (!a.e_bar_grid.empty()) cfg.e_bar_grid = a.e_bar_grid;
  if (a.r >= 0.0) cfg.r = a.r;
  if (a.replicates > 0) cfg.replicates = a.replicates;
  if (a.bootstrap > 0) cfg.bootstrap_trials = a.bootstrap;
  if (a.seed_given) cfg.master_seed = a.seed;

  if (cfg.replicates == 1)
    std::cerr << "warning: a single replicate has no spread; se is reported as 0\n";

  const richness::SimulationSummary summary = richness::run_experiment(cfg, a.threads);
  std::cout << richness::format_summary_text(summary);
  std::cout << "clamped calibration solves per level:";
  for (int count : summary.clamped_solves) std::cout << ' ' << count;
  std::cout << "\n";

  if (!a.out.empty()) {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot write " + a.out);
    richness::write_summary_csv(summary, os);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Species richness estimation under observer misidentification"};
  app.require_subcommand(1);

  CalibrateArgs cal_args;
  CLI::App* cal = app.add_subcommand(
      "calibrate", "Estimate identification error rates from a known-species subplot record");
  cal->add_option("--s-sub", cal_args.s_sub, "Number of known species in the subplot");
  cal->add_option("--s-sub-e", cal_args.s_sub_e,
                  "Known species recorded correctly at least once");
  cal->add_option("--f-sub0", cal_args.f_sub_0, "Recorded names not on the known list");
  cal->add_option("--truth-list", cal_args.truth_list, "File of designer-known species names");
  cal->add_option("--recorded-list", cal_args.recorded_list,
                  "File of species names the observer recorded");
  cal->add_option("--out", cal_args.out, "Write the solved rates as JSON");

  EstimateArgs est_args;
  CLI::App* est = app.add_subcommand(
      "estimate", "Estimate species richness from an incidence matrix");
  est->add_option("--data", est_args.data, "Incidence CSV (label, then one 0/1 cell per unit)")
      ->required();
  auto* ebar_opt = est->add_option("--e-bar", est_args.e_bar, "Known mean identity-error rate");
  auto* r_opt = est->add_option("--r", est_args.r, "Known in-plot landing probability");
  auto* calfile_opt = est->add_option("--calibration", est_args.calibration,
                                      "Calibration record file: s_sub s_sub_e f_sub_0");
  calfile_opt->excludes(ebar_opt)->excludes(r_opt);
  est->add_option("--bootstrap", est_args.bootstrap, "Bootstrap trials")->default_val(200);
  est->add_option("--seed", est_args.seed, "Bootstrap seed")->default_val(0);
  est->add_option("--out", est_args.out, "Write the report (.json for JSON, else CSV)");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run the bias/RMSE simulation study for the three estimation methods");
  sim->add_option("--config", sim_args.config, "Experiment config JSON");
  sim->add_option("--model", sim_args.model, "Detection model: uniform01 or mixture");
  sim->add_option("--t", sim_args.units, "Sampling units per survey");
  sim->add_option("--e-bar-grid", sim_args.e_bar_grid, "Target mean error rates")
      ->delimiter(',');
  sim->add_option("--r", sim_args.r, "In-plot landing probability");
  sim->add_option("--replicates", sim_args.replicates, "Surveys per error level");
  sim->add_option("--bootstrap", sim_args.bootstrap, "Bootstrap trials per survey");
  auto* seed_opt = sim->add_option("--seed", sim_args.seed, "Master seed");
  sim->add_option("--threads", sim_args.threads, "Worker threads (0 = all cores)")
      ->default_val(0);
  sim->add_option("--out", sim_args.out, "Write the summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }
  sim_args.seed_given = seed_opt->count() > 0;

  try {
    if (cal->parsed()) return run_calibrate(cal_args, *cal);
    if (est->parsed()) return run_estimate(est_args, *est);
    if (sim->parsed()) return run_simulate(sim_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
