#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "richness/adjustment.hpp"
#include "richness/bootstrap.hpp"
#include "richness/calibration.hpp"
#include "richness/estimators.hpp"
#include "richness/rng.hpp"
#include "richness/simulator.hpp"
#include "richness/survey.hpp"

using namespace richness;

namespace {

int total_cells(const IncidenceMatrix& m) {
  int total = 0;
  for (const auto& row : m.detections)
    for (auto c : row) total += c;
  return total;
}

struct RunningStat {
  double sum = 0.0, sumsq = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double se() const {
    const double m = mean();
    return std::sqrt((sumsq / n - m * m) / (n - 1));
  }
};

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.s_true = 60;
  cfg.s_sub = 20;
  cfg.units = 5;
  cfg.replicates = 30;
  cfg.bootstrap_trials = 20;
  cfg.e_bar_grid = {0.0, 0.2};
  cfg.r = 0.91;
  cfg.master_seed = 99;
  return cfg;
}

bool rows_equal(const SummaryRow& a, const SummaryRow& b) {
  return a.e_bar_target == b.e_bar_target && a.e_bar_realized == b.e_bar_realized &&
         a.e_hat_mean == b.e_hat_mean && a.method == b.method && a.s_obs == b.s_obs &&
         a.q1 == b.q1 && a.q2 == b.q2 && a.s_hat == b.s_hat && a.bias == b.bias &&
         a.se == b.se && a.se_hat == b.se_hat && a.rmse == b.rmse;
}

}  // namespace

TEST_CASE("detection probabilities stay inside the model support") {
  RngStream rng(31);
  const auto u = draw_detection_probs(DetectionModel{DetectionKind::uniform01}, 100, rng);
  REQUIRE(u.size() == 100);
  for (double p : u) {
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
  const ProbSummary us = summarize_probs(u);
  CHECK(us.mean > 0.40);
  CHECK(us.mean < 0.60);

  const auto m = draw_detection_probs(DetectionModel{DetectionKind::mixture}, 100, rng);
  for (double p : m) {
    const bool common = (p >= 0.1 && p <= 0.3);
    const bool rare = (p >= 0.4 && p <= 1.0);
    CHECK((common || rare));
  }
  // mixture mean 0.8*0.2 + 0.2*0.7 = 0.30
  const ProbSummary ms = summarize_probs(m);
  CHECK(ms.mean > 0.24);
  CHECK(ms.mean < 0.36);

  const auto one = draw_detection_probs(DetectionModel{DetectionKind::mixture}, 1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0] > 0.0);
  CHECK(one[0] <= 1.0);
}

TEST_CASE("probability summary computes mean and coefficient of variation") {
  const std::vector<double> v{0.2, 0.4};
  const ProbSummary s = summarize_probs(v);
  CHECK(s.mean == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s.cv == doctest::Approx(0.1 / 0.3).epsilon(1e-12));
}

TEST_CASE("certain detection fills the matrix; zero detection empties it") {
  RngStream rng(7);
  const std::vector<double> ones(10, 1.0);
  const IncidenceMatrix full = simulate_incidence(ones, 5, rng);
  CHECK(full.species_count() == 10);
  const FrequencyCounts f = tally_frequencies(full);
  CHECK(f.q_at(5) == 10);
  CHECK(full.species_labels[0] == "s1");
  CHECK(full.species_labels[9] == "s10");

  const std::vector<double> zeros(10, 0.0);
  CHECK(simulate_incidence(zeros, 5, rng).species_count() == 0);
}

TEST_CASE("observed richness matches the closed-form detection probability") {
  RngStream rng(2718);
  SUBCASE("near-certain detection regime") {
    const std::vector<double> p(100, 0.5);
    RunningStat s;
    for (int i = 0; i < 10000; ++i)
      s.add(simulate_incidence(p, 20, rng).species_count());
    const double expect = 100.0 * (1.0 - std::pow(0.5, 20));
    CHECK(std::abs(s.mean() - expect) <= 3 * s.se() + 1e-12);
  }
  SUBCASE("sparse detection regime") {
    const std::vector<double> p(100, 0.3);
    RunningStat s;
    for (int i = 0; i < 10000; ++i)
      s.add(simulate_incidence(p, 5, rng).species_count());
    const double expect = 100.0 * (1.0 - std::pow(0.7, 5));
    CHECK(std::abs(s.mean() - expect) <= 3 * s.se());
  }
}

TEST_CASE("zero error rates leave the survey untouched") {
  RngStream rng(5);
  const std::vector<double> p(20, 0.6);
  const IncidenceMatrix m = simulate_incidence(p, 4, rng);
  const std::vector<double> e(static_cast<std::size_t>(m.species_count()), 0.0);
  const IncidenceMatrix out = inject_identity_errors(m, e, 0.5, rng);
  REQUIRE(out.species_count() == m.species_count());
  CHECK(out.species_labels == m.species_labels);
  CHECK(out.detections == m.detections);
}

TEST_CASE("a fully misidentified loner keeps its row under a new name") {
  auto m = IncidenceMatrix::create({"sole"}, {{1, 0, 1}}, 3);
  RngStream rng(11);
  const std::vector<double> e{1.0};
  const IncidenceMatrix out = inject_identity_errors(m, e, 0.0, rng);
  REQUIRE(out.species_count() == 1);
  CHECK(out.species_labels[0] != "sole");
  CHECK(out.detections[0] == m.detections[0]);
}

TEST_CASE("with every species misidentified in-plot the rows fall back to ghosts") {
  // no correctly identified species remain to merge into
  auto m = IncidenceMatrix::create({"a", "b"}, {{1, 0}, {0, 1}}, 2);
  RngStream rng(13);
  const std::vector<double> e{1.0, 1.0};
  const IncidenceMatrix out = inject_identity_errors(m, e, 1.0, rng);
  CHECK(out.species_count() == 2);
  for (const auto& label : out.species_labels) {
    CHECK(label != "a");
    CHECK(label != "b");
  }
}

TEST_CASE("identity errors never invent detections") {
  RngStream rng(17);
  const std::vector<double> p(40, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const IncidenceMatrix m = simulate_incidence(p, 6, rng);
    std::vector<double> e(static_cast<std::size_t>(m.species_count()));
    for (auto& v : e) v = rng.uniform(0.0, 0.4);
    const IncidenceMatrix out = inject_identity_errors(m, e, 0.7, rng);
    CHECK(out.species_count() <= m.species_count());
    CHECK(total_cells(out) <= total_cells(m));
  }
}

TEST_CASE("pure out-of-plot errors preserve every detection cell") {
  RngStream rng(19);
  const std::vector<double> p(30, 0.5);
  const IncidenceMatrix m = simulate_incidence(p, 6, rng);
  std::vector<double> e(static_cast<std::size_t>(m.species_count()), 0.5);
  const IncidenceMatrix out = inject_identity_errors(m, e, 0.0, rng);
  CHECK(out.species_count() == m.species_count());
  CHECK(total_cells(out) == total_cells(m));
}

TEST_CASE("mean observed richness shrinks by the identity-error product") {
  // on a fully occupied plot the distinct-label count drops by one per
  // in-plot misidentification, so E(S_obs_e)/S_obs = 1 - e*r
  const int s = 100;
  std::vector<std::string> labels(s);
  std::vector<std::vector<std::uint8_t>> rows(s, std::vector<std::uint8_t>(3, 1));
  for (int i = 0; i < s; ++i) labels[static_cast<std::size_t>(i)] = "sp" + std::to_string(i);
  const IncidenceMatrix full = IncidenceMatrix::create(labels, rows, 3);
  RngStream rng(23);
  const std::vector<double> e(s, 0.15);
  const double r = 0.91;
  RunningStat ratio;
  for (int i = 0; i < 10000; ++i)
    ratio.add(inject_identity_errors(full, e, r, rng).species_count() / double(s));
  CHECK(std::abs(ratio.mean() - (1.0 - 0.15 * r)) <= 3 * ratio.se());
}

TEST_CASE("per-species error rates must match the matrix") {
  auto m = IncidenceMatrix::create({"a", "b"}, {{1, 0}, {0, 1}}, 2);
  RngStream rng(29);
  CHECK_THROWS_AS(inject_identity_errors(m, std::vector<double>{0.1}, 0.5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(inject_identity_errors(m, std::vector<double>{0.1, 1.2}, 0.5, rng),
                  std::invalid_argument);
  ErrorModel em;
  em.e_bar_target = 0.6;  // uniform(0, 1.2) would exceed 1
  em.e_distribution = ErrorDistribution::uniform_0_to_2ebar;
  em.r = 0.5;
  CHECK_THROWS_AS(inject_identity_errors(m, em, rng), std::invalid_argument);
}

TEST_CASE("an error-free observer inventories the whole subplot") {
  RngStream rng(37);
  ErrorModel em;
  em.e_bar_target = 0.0;
  em.r = 0.9;
  for (int i = 0; i < 20; ++i) {
    const CalibrationRecord rec = simulate_calibration(12, em, rng);
    CHECK(rec.s_sub == 12);
    CHECK(rec.s_sub_e == 12.0);
    CHECK(rec.f_sub_0 == 0.0);
  }
  CHECK_THROWS_AS(simulate_calibration(1, em, rng), std::invalid_argument);
}

TEST_CASE("an observer who ghosts every species records nothing real") {
  RngStream rng(41);
  ErrorModel em;
  em.e_bar_target = 1.0;
  em.e_distribution = ErrorDistribution::constant;
  em.r = 0.0;
  const CalibrationRecord rec = simulate_calibration(10, em, rng);
  CHECK(rec.s_sub_e == 0.0);
  CHECK(rec.f_sub_0 == 10.0);
}

TEST_CASE("calibration simulation reproduces its forward expectations") {
  RngStream rng(20260819);
  ErrorModel em;
  em.e_distribution = ErrorDistribution::constant;
  SUBCASE("standard subplot size") {
    em.e_bar_target = 0.15;
    em.r = 0.91;
    RunningStat f0, se;
    for (int i = 0; i < 20000; ++i) {
      const CalibrationRecord rec = simulate_calibration(40, em, rng);
      f0.add(rec.f_sub_0);
      se.add(rec.s_sub_e);
    }
    CHECK(std::abs(f0.mean() - expected_f_sub0(40, 0.15, 0.91)) <= 3 * f0.se());
    CHECK(std::abs(se.mean() - expected_s_sub_e(40, 0.15, 0.91)) <= 3 * se.se());
  }
  SUBCASE("tiny subplot") {
    // the survival approximation is weakest at small subplot sizes; at this
    // rate pair its error is ~0.002, well under the Monte-Carlo resolution
    em.e_bar_target = 0.15;
    em.r = 0.91;
    RunningStat f0, se;
    for (int i = 0; i < 100000; ++i) {
      const CalibrationRecord rec = simulate_calibration(5, em, rng);
      f0.add(rec.f_sub_0);
      se.add(rec.s_sub_e);
    }
    CHECK(std::abs(f0.mean() - expected_f_sub0(5, 0.15, 0.91)) <= 3 * f0.se());
    CHECK(std::abs(se.mean() - expected_s_sub_e(5, 0.15, 0.91)) <= 3 * se.se());
  }
}

TEST_CASE("experiment summaries are deterministic and thread-invariant") {
  const ExperimentConfig cfg = small_config();
  const SimulationSummary a = run_experiment(cfg, 1);
  const SimulationSummary b = run_experiment(cfg, 1);
  const SimulationSummary c = run_experiment(cfg, 4);
  REQUIRE(a.rows.size() == 6);  // two levels, three methods
  REQUIRE(b.rows.size() == a.rows.size());
  REQUIRE(c.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(rows_equal(a.rows[i], b.rows[i]));
    CHECK(rows_equal(a.rows[i], c.rows[i]));
  }
  CHECK(a.clamped_solves == b.clamped_solves);
  CHECK(a.clamped_solves == c.clamped_solves);
}

TEST_CASE("summary rows come in method order with consistent error columns") {
  const ExperimentConfig cfg = small_config();
  const SimulationSummary sum = run_experiment(cfg, 2);
  REQUIRE(sum.rows.size() == 6);
  REQUIRE(sum.clamped_solves.size() == 2);
  for (std::size_t level = 0; level < 2; ++level) {
    CHECK(sum.rows[3 * level + 0].method == SimMethod::truth);
    CHECK(sum.rows[3 * level + 1].method == SimMethod::observed);
    CHECK(sum.rows[3 * level + 2].method == SimMethod::adjusted);
  }
  // with no error injected nothing can be misread or clamped
  CHECK(sum.rows[0].e_bar_realized == 0.0);
  CHECK(sum.rows[0].e_hat_mean == 0.0);
  CHECK(sum.clamped_solves[0] == 0);
  // realized mean of 60 draws from uniform(0, 0.4) stays near the target
  CHECK(std::abs(sum.rows[3].e_bar_realized - 0.2) < 0.08);
  // every row satisfies the error decomposition identity
  for (const SummaryRow& row : sum.rows) {
    CHECK(std::abs(row.rmse * row.rmse - (row.bias * row.bias + row.se * row.se)) < 1e-9);
    CHECK(row.rmse >= std::abs(row.bias));
  }
  // identity errors push the observed estimate below the error-free one
  CHECK(sum.rows[4].s_hat < sum.rows[3].s_hat);
}

TEST_CASE("error-free replicates make the three methods coincide") {
  ExperimentConfig cfg = small_config();
  cfg.e_bar_grid = {0.0};
  cfg.keep_replicate_details = true;
  const SimulationSummary sum = run_experiment(cfg, 2);
  REQUIRE(sum.replicate_details.size() == 1);
  REQUIRE(sum.replicate_details[0].size() == 30);
  for (const ReplicateDetail& d : sum.replicate_details[0]) {
    CHECK(d.e_hat == 0.0);
    CHECK(d.r_hat == 0.0);
    CHECK(d.boundary == SolveBoundary::zero_error);
    CHECK(d.truth.s_obs == d.observed.s_obs);
    CHECK(d.truth.q1 == d.observed.q1);
    CHECK(d.truth.q2 == d.observed.q2);
    CHECK(d.truth.s_hat == d.observed.s_hat);
    CHECK(d.truth.se_hat == d.observed.se_hat);
    CHECK(d.adjusted.s_obs == d.observed.s_obs);
    CHECK(d.adjusted.q1 == d.observed.q1);
    CHECK(d.adjusted.q2 == d.observed.q2);
    const AdjustedCounts raw_as_adjusted{d.observed.s_obs, d.observed.q1, d.observed.q2,
                                         cfg.units};
    CHECK(d.adjusted.s_hat == adjusted_estimator(raw_as_adjusted).point);
    // the recorded resampling seed reproduces both standard errors standalone
    BootstrapConfig bc{cfg.bootstrap_trials, d.bootstrap_seed};
    const RawCounts raw{d.observed.s_obs, d.observed.q1, d.observed.q2, cfg.units};
    CHECK(d.observed.se_hat == bootstrap_se(raw, d.observed.s_hat, bc));
    const CalibrationPropagation prop = make_calibration_propagation(
        CalibrationRecord{cfg.s_sub, double(cfg.s_sub), 0.0}, raw);
    CHECK(d.adjusted.se_hat == bootstrap_se(raw_as_adjusted, d.adjusted.s_hat, bc, prop));
  }
}

TEST_CASE("invalid experiment configurations are rejected with clear messages") {
  ExperimentConfig cfg = small_config();
  cfg.replicates = 0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.s_sub = 61;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.bootstrap_trials = 1;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.units = 1;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.e_bar_grid = {};
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.e_bar_grid = {0.0, 0.6};  // uniform(0, 1.2) would exceed 1
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.r = 1.5;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("method labels render as stable strings") {
  CHECK(to_string(SimMethod::truth) == "true");
  CHECK(to_string(SimMethod::observed) == "observed");
  CHECK(to_string(SimMethod::adjusted) == "adjusted");
  CHECK(to_string(DetectionKind::uniform01) == "uniform01");
  CHECK(to_string(DetectionKind::mixture) == "mixture");
  CHECK(to_string(ErrorDistribution::constant) == "constant");
  CHECK(to_string(ErrorDistribution::uniform_0_to_2ebar) == "uniform_0_to_2ebar");
}
