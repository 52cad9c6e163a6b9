#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "expconc/bounds.hpp"
#include "expconc/distribution.hpp"
#include "expconc/problem_spec.hpp"
#include "expconc/solver.hpp"

namespace expconc {

// Alternating-sign direction of norm 0.74: a fixed interior signal used by
// the stock experiment configs.
Eigen::VectorXd default_wbar(int d);

struct ExperimentConfig {
  ProblemSpec spec;

  // Finite-support generator (see make_distribution).
  int m_atoms = 50;
  double y_max = 1.0;
  Eigen::VectorXd wbar;  // empty => default_wbar(spec.domain.dim)
  double noise = 0.5;
  std::uint64_t dist_seed = 1;

  std::uint64_t trial_seed = 2;
  std::vector<long> n_grid = {128, 256, 512, 1024, 2048, 4096, 8192};
  int trials = 200;
  double delta = 0.1;

  // Empirical minimization when absent; penalized empirical minimization
  // (smooth average + g/n over the ball, reg must be zero) when set.
  std::optional<Regularizer> penalty;

  SolverConfig solver;
  int threads = 1;
  // wall_ms stays 0 unless enabled, keeping output artifacts byte-identical
  // across runs; timings are diagnostics, not results.
  bool timing = false;

  void validate() const;
};

struct TrialRecord {
  long n = 0;
  int d = 0;
  int trial_index = 0;
  std::uint64_t seed = 0;
  double excess_risk = 0.0;
  double solver_residual = 0.0;
  double wall_ms = 0.0;
  bool valid = true;
};

struct ExperimentRun {
  std::vector<TrialRecord> records;  // ordered by (n, trial_index)
  FiniteDistribution dist;
  PopulationOptimum optimum;
  long invalid_count = 0;
};

// Called with each record in (n, trial_index) order as it is produced, so
// callers can stream CSV rows.
using TrialSink = std::function<void(const TrialRecord&)>;

// Runs trials x |n_grid| empirical solves against the exact population
// optimum. Per-trial RNG stream is mix_seed(trial_seed, n, trial_index), so
// results do not depend on scheduling. Solver failures mark the trial
// invalid; more than 5% invalid trials fails the whole run.
ExperimentRun run_trials(const ExperimentConfig& cfg, const TrialSink& sink = nullptr);

enum class RateStatistic { median_excess, quantile_excess };
std::string to_string(RateStatistic s);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  RateStatistic statistic = RateStatistic::median_excess;
  double delta = 0.1;  // quantile level 1 - delta for quantile_excess
};

// Ascending-order empirical quantile: index = clamp(ceil(p N) - 1, 0, N-1),
// so p = 0 gives the minimum and p = 1 the maximum.
double empirical_quantile(std::vector<double> values, double p);

// Ordinary least squares of log statistic(n) on log n over the valid
// records. Needs >= 3 distinct n and positive statistics.
RateFit fit_rate(const std::vector<TrialRecord>& records, RateStatistic stat,
                 double delta = 0.1);

struct SummaryRow {
  long n = 0;
  int d = 0;
  long count = 0;
  long invalid = 0;
  double mean = 0.0;
  double median = 0.0;
  double quantile = 0.0;  // empirical (1 - delta)-quantile
  double thm1 = 0.0;
  std::optional<double> thm2;
  bool violation = false;  // quantile exceeded the matching bound
};

struct Summary {
  double delta = 0.1;
  std::vector<SummaryRow> rows;
  std::optional<RateFit> fit;  // absent with fewer than 3 usable n values
  ConfidenceNote note = ConfidenceNote::one_minus_two_delta;
};

// Per-n statistics with the theoretical bound attached. The empirical
// quantile is at level 1 - delta; the bound is evaluated at delta/2 so that
// its 1 - 2(delta/2) confidence matches that level. B, when given, adds the
// penalized-mode B/n term and the violation flag compares against it.
Summary summarize(const std::vector<TrialRecord>& records, double delta,
                  const Constants& consts, std::optional<double> B = std::nullopt);

// Trials CSV: header n,d,trial,seed,excess_risk,solver_residual,wall_ms,valid
void write_trial_header(std::ostream& os);
void write_trial_row(std::ostream& os, const TrialRecord& r);
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trials_csv(std::istream& is);

// Config and summary documents (round-trippable; defaults filled on load).
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::ordered_json to_json(const Summary& summary);

}  // namespace expconc
