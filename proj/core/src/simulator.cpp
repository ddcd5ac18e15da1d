#include "richness/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "richness/adjustment.hpp"
#include "richness/bootstrap.hpp"
#include "richness/estimators.hpp"

namespace richness {
namespace {

// Substream path tags; fixed constants are part of the reproducibility
// contract (a given master seed always yields the same study).
constexpr std::uint64_t kProbsTag = 777;
constexpr std::uint64_t kLevelTag = 999999;
constexpr std::uint64_t kBootstrapTag = 4242;

using Row = std::vector<std::uint8_t>;

struct PlotCounts {
  double s_obs = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
};

PlotCounts tally_rows(const std::vector<Row>& rows) {
  PlotCounts c;
  c.s_obs = static_cast<double>(rows.size());
  for (const Row& row : rows) {
    const int k = std::accumulate(row.begin(), row.end(), 0);
    if (k == 1) c.q1 += 1.0;
    else if (k == 2) c.q2 += 1.0;
  }
  return c;
}

// Bernoulli detection rows for every species; species never detected are
// dropped, with their community indices reported through `kept`.
std::vector<Row> bernoulli_rows(const std::vector<double>& probs, int units, RngStream& rng,
                                std::vector<int>* kept) {
  std::vector<Row> rows;
  rows.reserve(probs.size());
  if (kept) kept->reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    Row row(static_cast<std::size_t>(units));
    int ones = 0;
    for (int t = 0; t < units; ++t) {
      row[static_cast<std::size_t>(t)] = rng.bernoulli(probs[i]) ? 1 : 0;
      ones += row[static_cast<std::size_t>(t)];
    }
    if (ones > 0) {
      rows.push_back(std::move(row));
      if (kept) kept->push_back(static_cast<int>(i));
    }
  }
  return rows;
}

struct Injected {
  std::vector<Row> rows;                     // survivors (merged), then ghosts
  std::vector<std::size_t> survivor_index;   // input row index per survivor
  std::vector<std::size_t> ghost_index;      // input row index per ghost
};

Injected inject_rows(const std::vector<Row>& in, std::span<const double> e, double r,
                     RngStream& rng) {
  const std::size_t n = in.size();
  std::vector<char> mis(n, 0);
  for (std::size_t i = 0; i < n; ++i) mis[i] = rng.bernoulli(e[i]) ? 1 : 0;

  Injected out;
  out.survivor_index.reserve(n);
  std::vector<std::size_t> pos(n, 0);  // input index -> survivor row slot
  for (std::size_t i = 0; i < n; ++i) {
    if (!mis[i]) {
      pos[i] = out.rows.size();
      out.rows.push_back(in[i]);
      out.survivor_index.push_back(i);
    }
  }
  const std::size_t n_surv = out.rows.size();

  std::vector<Row> ghost_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mis[i]) continue;
    // A misidentification is recorded either as one of the correctly
    // identified species (merging the rows) or as this species' fixed ghost
    // name.  With nobody left identified correctly, only ghosts are possible.
    if (rng.bernoulli(r) && n_surv > 0) {
      const std::size_t target = out.survivor_index[rng.uniform_below(n_surv)];
      Row& dst = out.rows[pos[target]];
      for (std::size_t t = 0; t < dst.size(); ++t) dst[t] = (dst[t] | in[i][t]) ? 1 : 0;
    } else {
      out.ghost_index.push_back(i);
      ghost_rows.push_back(in[i]);
    }
  }
  for (Row& g : ghost_rows) out.rows.push_back(std::move(g));
  return out;
}

void check_rate(double v, const char* what) {
  if (v < 0.0 || v > 1.0)
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

std::vector<double> draw_species_rates(int n, const ErrorModel& em, RngStream& rng) {
  check_rate(em.e_bar_target, "mean error rate");
  if (em.e_distribution == ErrorDistribution::uniform_0_to_2ebar && em.e_bar_target > 0.5)
    throw std::invalid_argument("mean error rate above 0.5 would allow per-species rates > 1");
  std::vector<double> e(static_cast<std::size_t>(n));
  if (em.e_distribution == ErrorDistribution::constant || em.e_bar_target == 0.0) {
    std::fill(e.begin(), e.end(), em.e_bar_target);
  } else {
    for (double& v : e) v = rng.uniform(0.0, 2.0 * em.e_bar_target);
  }
  return e;
}

struct ReplicateInputs {
  const ExperimentConfig* cfg;
  const std::vector<double>* probs;
  const std::vector<double>* e_i;  // community error rates, fixed per level
  double e_bar_target;
  std::size_t level;
};

ReplicateDetail run_replicate(const ReplicateInputs& in, int rep) {
  const ExperimentConfig& cfg = *in.cfg;
  auto rng = RngStream::substream(cfg.master_seed,
                                  {in.level, static_cast<std::uint64_t>(rep)});

  // Error-free survey.
  std::vector<int> kept;
  std::vector<Row> clean = bernoulli_rows(*in.probs, cfg.units, rng, &kept);
  const PlotCounts tc = tally_rows(clean);

  // Error-contaminated survey: same detections, identities corrupted.
  std::vector<double> e_det(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k)
    e_det[k] = (*in.e_i)[static_cast<std::size_t>(kept[k])];
  const PlotCounts oc = tally_rows(inject_rows(clean, e_det, cfg.r, rng).rows);

  // Calibration survey and rate recovery.
  ErrorModel em;
  em.e_bar_target = in.e_bar_target;
  em.e_distribution = cfg.e_distribution;
  em.r = cfg.r;
  const CalibrationRecord record = simulate_calibration(cfg.s_sub, em, rng);
  const ErrorRateEstimate rates = estimate_error_rates(record);

  const RawCounts raw{oc.s_obs, oc.q1, oc.q2, cfg.units};
  const AdjustedCounts ac = adjust_counts(raw, rates);

  ReplicateDetail d;
  d.e_hat = rates.e_bar;
  d.r_hat = rates.r;
  d.boundary = rates.boundary;
  d.truth = {tc.s_obs, tc.q1, tc.q2, chao2(tc.s_obs, tc.q1, tc.q2, cfg.units).point, 0.0};
  d.observed = {oc.s_obs, oc.q1, oc.q2, chao2(oc.s_obs, oc.q1, oc.q2, cfg.units).point, 0.0};
  d.adjusted = {ac.s_obs_a, ac.q1_a, ac.q2_a, adjusted_estimator(ac).point, 0.0};

  // One bootstrap substream per replicate, shared by the three methods:
  // identical inputs then give identical standard errors.
  BootstrapConfig bc;
  bc.trials = cfg.bootstrap_trials;
  bc.seed = RngStream::derive_seed(
      cfg.master_seed, {in.level, static_cast<std::uint64_t>(rep), kBootstrapTag});
  d.bootstrap_seed = bc.seed;

  if (d.truth.s_hat > 0.0) {
    const RawCounts tr{tc.s_obs, tc.q1, tc.q2, cfg.units};
    d.truth.se_hat = bootstrap_se(tr, d.truth.s_hat, bc);
  }
  if (d.observed.s_hat > 0.0) d.observed.se_hat = bootstrap_se(raw, d.observed.s_hat, bc);
  if (d.adjusted.s_hat > 0.0) {
    const CalibrationPropagation prop = make_calibration_propagation(record, raw);
    // Cap each count at the point estimate: binomial resampling needs
    // count/s_hat <= 1, and the cap is unreachable for generated surveys.
    AdjustedCounts capped = ac;
    capped.s_obs_a = std::min(capped.s_obs_a, d.adjusted.s_hat);
    capped.q1_a = std::min(capped.q1_a, d.adjusted.s_hat);
    capped.q2_a = std::min(capped.q2_a, d.adjusted.s_hat);
    d.adjusted.se_hat = bootstrap_se(capped, d.adjusted.s_hat, bc, prop);
  }
  return d;
}

struct MethodAccumulator {
  double s_obs = 0.0, q1 = 0.0, q2 = 0.0, s_hat = 0.0, se_hat = 0.0;
};

SummaryRow summarize_method(const std::vector<ReplicateDetail>& details, SimMethod method,
                            const ExperimentConfig& cfg) {
  auto pick = [&](const ReplicateDetail& d) -> const ReplicateMethodResult& {
    switch (method) {
      case SimMethod::truth: return d.truth;
      case SimMethod::observed: return d.observed;
      default: return d.adjusted;
    }
  };
  const double n = static_cast<double>(details.size());
  MethodAccumulator acc;
  for (const ReplicateDetail& d : details) {
    const ReplicateMethodResult& m = pick(d);
    acc.s_obs += m.s_obs;
    acc.q1 += m.q1;
    acc.q2 += m.q2;
    acc.s_hat += m.s_hat;
    acc.se_hat += m.se_hat;
  }
  SummaryRow row;
  row.method = method;
  row.s_obs = acc.s_obs / n;
  row.q1 = acc.q1 / n;
  row.q2 = acc.q2 / n;
  row.s_hat = acc.s_hat / n;
  row.bias = row.s_hat - static_cast<double>(cfg.s_true);
  double ss = 0.0;
  for (const ReplicateDetail& d : details) {
    const double dev = pick(d).s_hat - row.s_hat;
    ss += dev * dev;
  }
  row.se = details.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  row.se_hat = acc.se_hat / n;
  row.rmse = std::sqrt(row.bias * row.bias + row.se * row.se);
  return row;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.s_true < 1) throw std::invalid_argument("community richness must be positive");
  if (cfg.s_sub < 2 || cfg.s_sub > cfg.s_true)
    throw std::invalid_argument("subplot size must lie in [2, community richness]");
  if (cfg.units < 2) throw std::invalid_argument("need at least two sampling units");
  if (cfg.replicates < 1) throw std::invalid_argument("need at least one replicate");
  if (cfg.bootstrap_trials < 2) throw std::invalid_argument("need at least two bootstrap trials");
  check_rate(cfg.r, "in-plot landing probability");
  if (cfg.e_bar_grid.empty()) throw std::invalid_argument("error-rate grid is empty");
  for (double t : cfg.e_bar_grid) {
    check_rate(t, "target error rate");
    if (cfg.e_distribution == ErrorDistribution::uniform_0_to_2ebar && t > 0.5)
      throw std::invalid_argument("target error rate above 0.5 would allow rates > 1");
  }
}

}  // namespace

std::string to_string(SimMethod m) {
  switch (m) {
    case SimMethod::truth: return "true";
    case SimMethod::observed: return "observed";
    case SimMethod::adjusted: return "adjusted";
  }
  return "unknown";
}

std::string to_string(DetectionKind k) {
  return k == DetectionKind::uniform01 ? "uniform01" : "mixture";
}

std::string to_string(ErrorDistribution d) {
  return d == ErrorDistribution::constant ? "constant" : "uniform_0_to_2ebar";
}

std::vector<double> draw_detection_probs(const DetectionModel& model, int s, RngStream& rng) {
  if (s < 1) throw std::invalid_argument("need at least one species");
  std::vector<double> probs(static_cast<std::size_t>(s));
  for (double& p : probs) {
    if (model.kind == DetectionKind::uniform01) {
      p = rng.next_double();
    } else {
      p = rng.next_double() < 0.8 ? rng.uniform(0.1, 0.3) : rng.uniform(0.4, 1.0);
    }
  }
  return probs;
}

ProbSummary summarize_probs(std::span<const double> probs) {
  ProbSummary s;
  if (probs.empty()) return s;
  const double n = static_cast<double>(probs.size());
  for (double p : probs) s.mean += p;
  s.mean /= n;
  if (probs.size() > 1 && s.mean > 0.0) {
    double ss = 0.0;
    for (double p : probs) ss += (p - s.mean) * (p - s.mean);
    s.cv = std::sqrt(ss / n) / s.mean;
  }
  return s;
}

IncidenceMatrix simulate_incidence(const std::vector<double>& probs, int units, RngStream& rng) {
  if (units < 1) throw std::invalid_argument("need at least one sampling unit");
  for (double p : probs) check_rate(p, "detection probability");
  std::vector<int> kept;
  std::vector<Row> rows = bernoulli_rows(probs, units, rng, &kept);
  std::vector<std::string> labels;
  labels.reserve(kept.size());
  for (int idx : kept) labels.push_back("s" + std::to_string(idx + 1));
  return IncidenceMatrix::create(std::move(labels), std::move(rows), units);
}

IncidenceMatrix inject_identity_errors(const IncidenceMatrix& m, std::span<const double> e,
                                       double r, RngStream& rng) {
  if (e.size() != static_cast<std::size_t>(m.species_count()))
    throw std::invalid_argument("need one error rate per species");
  for (double v : e) check_rate(v, "per-species error rate");
  check_rate(r, "in-plot landing probability");
  Injected inj = inject_rows(m.detections, e, r, rng);
  std::vector<std::string> labels;
  labels.reserve(inj.rows.size());
  for (std::size_t i : inj.survivor_index) labels.push_back(m.species_labels[i]);
  for (std::size_t i : inj.ghost_index) labels.push_back("ghost:" + m.species_labels[i]);
  return IncidenceMatrix::create(std::move(labels), std::move(inj.rows), m.units);
}

IncidenceMatrix inject_identity_errors(const IncidenceMatrix& m, const ErrorModel& em,
                                       RngStream& rng) {
  const std::vector<double> e = draw_species_rates(m.species_count(), em, rng);
  return inject_identity_errors(m, e, em.r, rng);
}

CalibrationRecord simulate_calibration(int s_sub, const ErrorModel& em, RngStream& rng) {
  if (s_sub < 2) throw std::invalid_argument("calibration needs at least two known species");
  check_rate(em.r, "in-plot landing probability");
  const std::vector<double> e = draw_species_rates(s_sub, em, rng);

  std::vector<char> recorded(static_cast<std::size_t>(s_sub), 0);
  std::vector<char> mis(static_cast<std::size_t>(s_sub), 0);
  for (int i = 0; i < s_sub; ++i) {
    mis[static_cast<std::size_t>(i)] = rng.bernoulli(e[static_cast<std::size_t>(i)]) ? 1 : 0;
    if (!mis[static_cast<std::size_t>(i)]) recorded[static_cast<std::size_t>(i)] = 1;
  }
  int f0 = 0;
  for (int i = 0; i < s_sub; ++i) {
    if (!mis[static_cast<std::size_t>(i)]) continue;
    if (rng.bernoulli(em.r)) {
      // Confused with one of the other known species (which may itself have
      // been misidentified -- its correct name still ends up recorded).
      std::uint64_t t = rng.uniform_below(static_cast<std::uint64_t>(s_sub - 1));
      if (t >= static_cast<std::uint64_t>(i)) ++t;
      recorded[static_cast<std::size_t>(t)] = 1;
    } else {
      ++f0;  // fixed per-species ghost name: one distinct phantom record
    }
  }
  CalibrationRecord rec;
  rec.s_sub = s_sub;
  rec.s_sub_e = static_cast<double>(
      std::count(recorded.begin(), recorded.end(), static_cast<char>(1)));
  rec.f_sub_0 = static_cast<double>(f0);
  return rec;
}

SimulationSummary run_experiment(const ExperimentConfig& cfg, int threads) {
  validate_config(cfg);
  int n_threads = threads;
  if (n_threads <= 0)
    n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, cfg.replicates);

  auto probs_rng = RngStream::substream(cfg.master_seed, {kProbsTag});
  const std::vector<double> probs = draw_detection_probs(cfg.detection, cfg.s_true, probs_rng);

  SimulationSummary out;
  for (std::size_t level = 0; level < cfg.e_bar_grid.size(); ++level) {
    const double target = cfg.e_bar_grid[level];

    // Community error rates drawn once per level, fixed across replicates.
    std::vector<double> e_i(static_cast<std::size_t>(cfg.s_true), 0.0);
    if (target > 0.0) {
      auto level_rng = RngStream::substream(cfg.master_seed, {level, kLevelTag});
      ErrorModel em;
      em.e_bar_target = target;
      em.e_distribution = cfg.e_distribution;
      em.r = cfg.r;
      e_i = draw_species_rates(cfg.s_true, em, level_rng);
    }
    const double e_bar_realized =
        std::accumulate(e_i.begin(), e_i.end(), 0.0) / static_cast<double>(cfg.s_true);

    ReplicateInputs inputs{&cfg, &probs, &e_i, target, level};
    std::vector<ReplicateDetail> details(static_cast<std::size_t>(cfg.replicates));

    if (n_threads == 1) {
      for (int rep = 0; rep < cfg.replicates; ++rep)
        details[static_cast<std::size_t>(rep)] = run_replicate(inputs, rep);
    } else {
      // Static partition; each replicate derives its own substream, so the
      // outcome is independent of scheduling.
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
      const int chunk = (cfg.replicates + n_threads - 1) / n_threads;
      for (int k = 0; k < n_threads; ++k) {
        const int begin = k * chunk;
        const int end = std::min(cfg.replicates, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, k, begin, end] {
          try {
            for (int rep = begin; rep < end; ++rep)
              details[static_cast<std::size_t>(rep)] = run_replicate(inputs, rep);
          } catch (...) {
            errors[static_cast<std::size_t>(k)] = std::current_exception();
          }
        });
      }
      for (std::thread& t : pool) t.join();
      for (const std::exception_ptr& err : errors)
        if (err) std::rethrow_exception(err);
    }

    double e_hat_sum = 0.0;
    int clamped = 0;
    for (const ReplicateDetail& d : details) {
      e_hat_sum += d.e_hat;
      if (d.boundary == SolveBoundary::no_solution_clamped) ++clamped;
    }
    const double e_hat_mean = e_hat_sum / static_cast<double>(cfg.replicates);

    for (SimMethod method : {SimMethod::truth, SimMethod::observed, SimMethod::adjusted}) {
      SummaryRow row = summarize_method(details, method, cfg);
      row.e_bar_target = target;
      row.e_bar_realized = e_bar_realized;
      row.e_hat_mean = e_hat_mean;
      out.rows.push_back(row);
    }
    out.clamped_solves.push_back(clamped);
    if (cfg.keep_replicate_details) out.replicate_details.push_back(std::move(details));
  }
  return out;
}

}  // namespace richness
