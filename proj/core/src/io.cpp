#include "richness/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace richness {
namespace {

using nlohmann::json;

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool is_skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

double parse_double(const std::string& cell, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(context + ": cannot parse number '" + cell + "'");
  }
}

long long parse_integer(const std::string& cell, const std::string& context) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(context + ": cannot parse integer '" + cell + "'");
  }
}

SolveBoundary parse_boundary(const std::string& s) {
  if (s == "interior") return SolveBoundary::interior;
  if (s == "zero_error") return SolveBoundary::zero_error;
  if (s == "r_pinned_at_one") return SolveBoundary::r_pinned_at_one;
  if (s == "no_solution_clamped") return SolveBoundary::no_solution_clamped;
  throw std::invalid_argument("unknown boundary flag '" + s + "'");
}

EstimatorBranch parse_branch(const std::string& s) {
  if (s == "taylor_corrected") return EstimatorBranch::taylor_corrected;
  if (s == "jackknife_fallback") return EstimatorBranch::jackknife_fallback;
  if (s.empty() || s == "none") return EstimatorBranch::none;
  throw std::invalid_argument("unknown estimator branch '" + s + "'");
}

constexpr const char* kReportHeader =
    "method,units,s_obs,q1,q2,s_hat,se_hat,branch,e_bar,r,residual,boundary,"
    "s_sub,s_sub_e,f_sub_0";

constexpr const char* kSummaryHeader =
    "e_bar_target,e_bar_realized,e_hat_mean,method,S_obs,Q1,Q2,S_hat,bias,se,se_hat,rmse";

}  // namespace

IncidenceMatrix parse_incidence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open incidence file: " + path);

  std::vector<std::string> labels;
  std::vector<std::vector<std::uint8_t>> rows;
  std::unordered_map<std::string, int> first_line_of;
  std::size_t width = 0;
  int line_no = 0;
  bool saw_content = false;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    std::vector<std::string> cells = split_csv(line);
    if (cells.size() < 2)
      throw std::invalid_argument(path + " line " + std::to_string(line_no) +
                                  ": need a species label and at least one unit column");
    if (!saw_content) {
      saw_content = true;
      width = cells.size();
      // Optional header: a first row whose unit cells are not all 0/1.
      const bool all_binary = std::all_of(cells.begin() + 1, cells.end(), [](const auto& c) {
        return c == "0" || c == "1";
      });
      if (!all_binary) continue;
    }
    if (cells.size() != width)
      throw std::invalid_argument(path + " line " + std::to_string(line_no) + ": has " +
                                  std::to_string(cells.size()) + " columns, expected " +
                                  std::to_string(width));
    const std::string& label = cells[0];
    auto [it, inserted] = first_line_of.emplace(label, line_no);
    if (!inserted)
      throw std::invalid_argument(path + " line " + std::to_string(line_no) +
                                  ": duplicate species label '" + label + "' (first seen line " +
                                  std::to_string(it->second) + ")");
    std::vector<std::uint8_t> row(width - 1);
    int ones = 0;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c] == "0") {
        row[c - 1] = 0;
      } else if (cells[c] == "1") {
        row[c - 1] = 1;
        ++ones;
      } else {
        throw std::invalid_argument(path + " line " + std::to_string(line_no) + ", column " +
                                    std::to_string(c + 1) + ": species '" + label + "' cell '" +
                                    cells[c] + "' is not 0 or 1");
      }
    }
    if (ones == 0)
      throw std::invalid_argument(path + " line " + std::to_string(line_no) + ": species '" +
                                  label + "' has no detections");
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (!saw_content || labels.empty())
    throw std::invalid_argument(path + ": no incidence rows found");
  return IncidenceMatrix::create(std::move(labels), std::move(rows),
                                 static_cast<int>(width - 1));
}

std::vector<std::string> read_species_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open species list: " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (is_skippable(line)) continue;
    names.push_back(trim(line));
  }
  return names;
}

CalibrationRecord parse_calibration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (is_skippable(line)) continue;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.size() != 3)
    throw std::invalid_argument(path + ": expected exactly three values " +
                                "(s_sub s_sub_e f_sub_0), found " +
                                std::to_string(tokens.size()));
  CalibrationRecord rec;
  rec.s_sub = static_cast<int>(parse_integer(tokens[0], path + " s_sub"));
  rec.s_sub_e = parse_double(tokens[1], path + " s_sub_e");
  rec.f_sub_0 = parse_double(tokens[2], path + " f_sub_0");
  return rec;
}

CalibrationRecord record_from_lists(const std::vector<std::string>& truth,
                                    const std::vector<std::string>& recorded) {
  const std::set<std::string> known(truth.begin(), truth.end());
  const std::set<std::string> seen(recorded.begin(), recorded.end());
  CalibrationRecord rec;
  rec.s_sub = static_cast<int>(known.size());
  int correct = 0, phantom = 0;
  for (const std::string& name : seen) {
    if (known.count(name)) ++correct;
    else ++phantom;
  }
  rec.s_sub_e = correct;
  rec.f_sub_0 = phantom;
  return rec;
}

AnalysisReport build_report(const FrequencyCounts& counts,
                            const std::optional<ErrorRateEstimate>& rates,
                            const std::optional<CalibrationRecord>& record,
                            const BootstrapConfig& bootstrap) {
  if (rates && record)
    throw std::invalid_argument("supply error rates or a calibration record, not both");

  AnalysisReport report;
  const RawCounts raw{static_cast<double>(counts.s_obs), counts.q1(), counts.q2(),
                      counts.units};
  report.observed_counts = raw;
  report.observed = chao2(raw.s_obs_e, raw.q1_e, raw.q2_e, raw.units);
  if (report.observed.point > 0.0)
    report.observed.se = bootstrap_se(raw, report.observed.point, bootstrap);

  std::optional<ErrorRateEstimate> use = rates;
  if (record) {
    report.has_calibration = true;
    report.calibration = *record;
    use = estimate_error_rates(*record);
  }
  if (!use) return report;

  report.has_rates = true;
  report.rates = *use;
  report.has_adjusted = true;
  report.adjusted_counts = adjust_counts(raw, *use);
  report.adjusted = adjusted_estimator(report.adjusted_counts);
  if (report.adjusted.point > 0.0) {
    AdjustedCounts capped = report.adjusted_counts;
    capped.s_obs_a = std::min(capped.s_obs_a, report.adjusted.point);
    capped.q1_a = std::min(capped.q1_a, report.adjusted.point);
    capped.q2_a = std::min(capped.q2_a, report.adjusted.point);
    if (report.has_calibration) {
      const CalibrationPropagation prop = make_calibration_propagation(*record, raw);
      report.adjusted.se = bootstrap_se(capped, report.adjusted.point, bootstrap, prop);
    } else {
      report.adjusted.se = bootstrap_se(capped, report.adjusted.point, bootstrap);
    }
  }
  return report;
}

void write_report_csv(const AnalysisReport& report, std::ostream& os) {
  os << kReportHeader << "\n";
  os << "observed," << report.observed_counts.units << ',' << fmt_full(report.observed_counts.s_obs_e)
     << ',' << fmt_full(report.observed_counts.q1_e) << ',' << fmt_full(report.observed_counts.q2_e)
     << ',' << fmt_full(report.observed.point) << ','
     << (report.observed.se ? fmt_full(*report.observed.se) : "") << ",,,,,,,,\n";
  if (!report.has_adjusted) return;
  os << "adjusted," << report.adjusted_counts.units << ',' << fmt_full(report.adjusted_counts.s_obs_a)
     << ',' << fmt_full(report.adjusted_counts.q1_a) << ',' << fmt_full(report.adjusted_counts.q2_a)
     << ',' << fmt_full(report.adjusted.point) << ','
     << (report.adjusted.se ? fmt_full(*report.adjusted.se) : "") << ','
     << to_string(report.adjusted.branch) << ',' << fmt_full(report.rates.e_bar) << ','
     << fmt_full(report.rates.r) << ',' << fmt_full(report.rates.residual) << ','
     << to_string(report.rates.boundary) << ',';
  if (report.has_calibration) {
    os << report.calibration.s_sub << ',' << fmt_full(report.calibration.s_sub_e) << ','
       << fmt_full(report.calibration.f_sub_0);
  } else {
    os << ",,";
  }
  os << "\n";
}

AnalysisReport read_report_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kReportHeader)
    throw std::invalid_argument("report CSV: missing or unexpected header");
  AnalysisReport report;
  bool saw_observed = false;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const std::vector<std::string> c = split_csv(line);
    if (c.size() != 15)
      throw std::invalid_argument("report CSV line " + std::to_string(line_no) +
                                  ": expected 15 columns, found " + std::to_string(c.size()));
    const std::string ctx = "report CSV line " + std::to_string(line_no);
    if (c[0] == "observed") {
      report.observed_counts.units = static_cast<int>(parse_integer(c[1], ctx));
      report.observed_counts.s_obs_e = parse_double(c[2], ctx);
      report.observed_counts.q1_e = parse_double(c[3], ctx);
      report.observed_counts.q2_e = parse_double(c[4], ctx);
      report.observed.method = Method::chao2;
      report.observed.point = parse_double(c[5], ctx);
      if (!c[6].empty()) report.observed.se = parse_double(c[6], ctx);
      saw_observed = true;
    } else if (c[0] == "adjusted") {
      report.has_adjusted = true;
      report.adjusted_counts.units = static_cast<int>(parse_integer(c[1], ctx));
      report.adjusted_counts.s_obs_a = parse_double(c[2], ctx);
      report.adjusted_counts.q1_a = parse_double(c[3], ctx);
      report.adjusted_counts.q2_a = parse_double(c[4], ctx);
      report.adjusted.method = Method::adjusted;
      report.adjusted.point = parse_double(c[5], ctx);
      if (!c[6].empty()) report.adjusted.se = parse_double(c[6], ctx);
      report.adjusted.branch = parse_branch(c[7]);
      report.has_rates = true;
      report.rates.e_bar = parse_double(c[8], ctx);
      report.rates.r = parse_double(c[9], ctx);
      report.rates.residual = parse_double(c[10], ctx);
      report.rates.boundary = parse_boundary(c[11]);
      if (!c[12].empty()) {
        report.has_calibration = true;
        report.calibration.s_sub = static_cast<int>(parse_integer(c[12], ctx));
        report.calibration.s_sub_e = parse_double(c[13], ctx);
        report.calibration.f_sub_0 = parse_double(c[14], ctx);
      }
    } else {
      throw std::invalid_argument("report CSV line " + std::to_string(line_no) +
                                  ": unknown method '" + c[0] + "'");
    }
  }
  if (!saw_observed) throw std::invalid_argument("report CSV: missing observed row");
  return report;
}

void write_report_json(const AnalysisReport& report, std::ostream& os) {
  json j;
  j["observed"] = {{"units", report.observed_counts.units},
                   {"s_obs", report.observed_counts.s_obs_e},
                   {"q1", report.observed_counts.q1_e},
                   {"q2", report.observed_counts.q2_e},
                   {"s_hat", report.observed.point}};
  if (report.observed.se) j["observed"]["se_hat"] = *report.observed.se;
  if (report.has_adjusted) {
    j["adjusted"] = {{"units", report.adjusted_counts.units},
                     {"s_obs", report.adjusted_counts.s_obs_a},
                     {"q1", report.adjusted_counts.q1_a},
                     {"q2", report.adjusted_counts.q2_a},
                     {"s_hat", report.adjusted.point},
                     {"branch", to_string(report.adjusted.branch)}};
    if (report.adjusted.se) j["adjusted"]["se_hat"] = *report.adjusted.se;
  }
  if (report.has_rates) {
    j["rates"] = {{"e_bar", report.rates.e_bar},
                  {"r", report.rates.r},
                  {"residual", report.rates.residual},
                  {"boundary", to_string(report.rates.boundary)}};
  }
  if (report.has_calibration) {
    j["calibration"] = {{"s_sub", report.calibration.s_sub},
                        {"s_sub_e", report.calibration.s_sub_e},
                        {"f_sub_0", report.calibration.f_sub_0}};
  }
  os << j.dump(2) << "\n";
}

std::string format_report_text(const AnalysisReport& report) {
  std::ostringstream os;
  os << "method      S_obs      Q1      Q2    S_hat   se_hat\n";
  auto row = [&os](const char* name, double s, double q1, double q2, double s_hat,
                   const std::optional<double>& se) {
    os << name << fmt("%9.1f", s) << fmt("%8.1f", q1) << fmt("%8.1f", q2)
       << fmt("%9.1f", s_hat);
    if (se) os << fmt("%9.2f", *se);
    os << "\n";
  };
  row("observed", report.observed_counts.s_obs_e, report.observed_counts.q1_e,
      report.observed_counts.q2_e, report.observed.point, report.observed.se);
  if (report.has_adjusted) {
    row("adjusted", report.adjusted_counts.s_obs_a, report.adjusted_counts.q1_a,
        report.adjusted_counts.q2_a, report.adjusted.point, report.adjusted.se);
  }
  if (report.has_calibration) {
    os << "calibration: s_sub=" << report.calibration.s_sub
       << " s_sub_e=" << fmt("%g", report.calibration.s_sub_e)
       << " f_sub_0=" << fmt("%g", report.calibration.f_sub_0) << "\n";
  }
  if (report.has_rates) {
    os << "rates: e_bar=" << fmt("%.2f", report.rates.e_bar) << " r="
       << fmt("%.2f", report.rates.r) << " residual=" << fmt("%.3g", report.rates.residual)
       << " flag=" << to_string(report.rates.boundary) << "\n";
  }
  return os.str();
}

void write_summary_csv(const SimulationSummary& summary, std::ostream& os) {
  os << kSummaryHeader << "\n";
  for (const SummaryRow& r : summary.rows) {
    os << fmt_full(r.e_bar_target) << ',' << fmt_full(r.e_bar_realized) << ','
       << fmt_full(r.e_hat_mean) << ',' << to_string(r.method) << ',' << fmt_full(r.s_obs)
       << ',' << fmt_full(r.q1) << ',' << fmt_full(r.q2) << ',' << fmt_full(r.s_hat) << ','
       << fmt_full(r.bias) << ',' << fmt_full(r.se) << ',' << fmt_full(r.se_hat) << ','
       << fmt_full(r.rmse) << "\n";
  }
}

std::string format_summary_text(const SimulationSummary& summary) {
  std::ostringstream os;
  os << "e_bar_target  e_bar_real  e_hat_mean  method     S_obs     Q1     Q2"
        "    S_hat     bias      se   se_hat     rmse\n";
  for (const SummaryRow& r : summary.rows) {
    char method[16];
    std::snprintf(method, sizeof method, "%-9s", to_string(r.method).c_str());
    os << fmt("%12.3f", r.e_bar_target) << fmt("%12.3f", r.e_bar_realized)
       << fmt("%12.3f", r.e_hat_mean) << "  " << method << fmt("%7.1f", r.s_obs)
       << fmt("%7.1f", r.q1) << fmt("%7.1f", r.q2) << fmt("%9.2f", r.s_hat)
       << fmt("%9.2f", r.bias) << fmt("%8.2f", r.se) << fmt("%9.2f", r.se_hat)
       << fmt("%9.2f", r.rmse) << "\n";
  }
  return os.str();
}

namespace {

void require_known_keys(const json& j, std::initializer_list<const char*> allowed,
                        const std::string& scope) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("unknown config field: " + scope + item.key());
  }
}

int require_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw std::invalid_argument(std::string("config field ") + key + " must be an integer");
  return j[key].get<int>();
}

double require_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw std::invalid_argument(std::string("config field ") + key + " must be a number");
  return j[key].get<double>();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(path + ": config must be a JSON object");

  require_known_keys(j, {"S", "S_sub", "T", "replicates", "bootstrap_trials", "detection_model",
                         "error_model", "master_seed"}, "");

  ExperimentConfig cfg;
  cfg.s_true = require_int(j, "S", cfg.s_true);
  cfg.s_sub = require_int(j, "S_sub", cfg.s_sub);
  cfg.units = require_int(j, "T", cfg.units);
  cfg.replicates = require_int(j, "replicates", cfg.replicates);
  cfg.bootstrap_trials = require_int(j, "bootstrap_trials", cfg.bootstrap_trials);

  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer())
      throw std::invalid_argument("config field master_seed must be a non-negative integer");
    const auto seed = j["master_seed"].get<long long>();
    if (seed < 0)
      throw std::invalid_argument("config field master_seed must be a non-negative integer");
    cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  }

  if (j.contains("detection_model")) {
    const json& d = j["detection_model"];
    if (!d.is_object())
      throw std::invalid_argument("config field detection_model must be an object");
    require_known_keys(d, {"kind"}, "detection_model.");
    if (d.contains("kind")) {
      const std::string kind = d["kind"].is_string() ? d["kind"].get<std::string>() : "";
      if (kind == "uniform01") cfg.detection.kind = DetectionKind::uniform01;
      else if (kind == "mixture") cfg.detection.kind = DetectionKind::mixture;
      else
        throw std::invalid_argument(
            "config field detection_model.kind must be 'uniform01' or 'mixture'");
    }
  }

  if (j.contains("error_model")) {
    const json& e = j["error_model"];
    if (!e.is_object()) throw std::invalid_argument("config field error_model must be an object");
    require_known_keys(e, {"e_bar_grid", "e_distribution", "r"}, "error_model.");
    if (e.contains("e_bar_grid")) {
      if (!e["e_bar_grid"].is_array())
        throw std::invalid_argument("config field error_model.e_bar_grid must be an array");
      cfg.e_bar_grid.clear();
      for (const json& v : e["e_bar_grid"]) {
        if (!v.is_number())
          throw std::invalid_argument("config field error_model.e_bar_grid must hold numbers");
        cfg.e_bar_grid.push_back(v.get<double>());
      }
    }
    if (e.contains("e_distribution")) {
      const std::string dist =
          e["e_distribution"].is_string() ? e["e_distribution"].get<std::string>() : "";
      if (dist == "constant") cfg.e_distribution = ErrorDistribution::constant;
      else if (dist == "uniform_0_to_2ebar") cfg.e_distribution = ErrorDistribution::uniform_0_to_2ebar;
      else
        throw std::invalid_argument("config field error_model.e_distribution must be "
                                    "'constant' or 'uniform_0_to_2ebar'");
    }
    cfg.r = require_number(e, "r", cfg.r);
  }
  return cfg;
}

}  // namespace richness
