#include "expconc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "expconc/certify.hpp"
#include "expconc/csv.hpp"
#include "expconc/errors.hpp"
#include "expconc/rng.hpp"

namespace expconc {

namespace {

constexpr double kExcessSlack = 1e-7;

double conventional_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) throw parameter_error("median of empty sample");
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::ordered_json reg_to_json(const Regularizer& reg) {
  if (reg.kind() == RegKind::custom)
    throw capability_error("custom regularizers do not serialize");
  return {{"kind", to_string(reg.kind())}, {"lambda", reg.lambda()}};
}

Regularizer reg_from_json(const nlohmann::json& j) {
  const auto kind = reg_kind_from_string(j.at("kind").get<std::string>());
  const double lambda = j.value("lambda", 0.0);
  switch (kind) {
    case RegKind::zero: return Regularizer::zero();
    case RegKind::l1: return Regularizer::l1(lambda);
    case RegKind::l2_squared: return Regularizer::l2_squared(lambda);
    case RegKind::custom: throw capability_error("custom regularizers do not deserialize");
  }
  throw parameter_error("unknown regularizer kind");
}

}  // namespace

Eigen::VectorXd default_wbar(int d) {
  if (d < 1) throw parameter_error("dimension must be >= 1");
  Eigen::VectorXd w(d);
  const double mag = 0.74 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) w[i] = (i % 2 == 0 ? mag : -mag);
  return w;
}

void ExperimentConfig::validate() const {
  if (m_atoms < 1) throw parameter_error("m_atoms must be >= 1");
  if (!(y_max > 0.0)) throw parameter_error("y_max must be positive");
  if (!(noise >= 0.0)) throw parameter_error("noise must be nonnegative");
  if (trials < 2) throw parameter_error("trials must be >= 2");
  if (!(delta > 0.0) || !(delta < 1.0)) throw parameter_error("delta must lie in (0, 1)");
  if (threads < 1) throw parameter_error("threads must be >= 1");
  if (n_grid.empty()) throw parameter_error("n_grid must be nonempty");
  long prev = 0;
  for (long n : n_grid) {
    if (n < 1) throw parameter_error("n_grid entries must be >= 1");
    if (n <= prev) throw parameter_error("n_grid must be strictly increasing");
    prev = n;
  }
  if (wbar.size() != 0 && wbar.size() != spec.domain.dim) {
    throw parameter_error("wbar dimension does not match the domain");
  }
  if (wbar.size() != 0 && wbar.norm() > spec.domain.radius + 1e-12) {
    throw parameter_error("wbar must lie in the domain ball");
  }
  if (penalty && spec.reg.kind() != RegKind::zero) {
    throw usage_error("penalized mode applies to unregularized objectives; set reg to zero");
  }
  if (penalty && !penalty->has_prox()) {
    throw capability_error("penalty needs a proximal operator");
  }
}

namespace {

struct TrialContext {
  const ExperimentConfig& cfg;
  const PopulationObjective& pop;
  const PopulationOptimum& opt;
  std::vector<double> cum_weights;  // inclusive prefix sums of atom weights

  std::size_t draw_atom(Rng& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cum_weights.begin(), cum_weights.end(), u);
    const std::size_t j = static_cast<std::size_t>(it - cum_weights.begin());
    return std::min(j, cum_weights.size() - 1);
  }

  TrialRecord run_one(long n, int trial_index) const {
    const auto& dist = pop.dist();
    const auto& spec = pop.spec();
    const std::size_t m = dist.atoms.size();

    TrialRecord rec;
    rec.n = n;
    rec.d = spec.domain.dim;
    rec.trial_index = trial_index;
    rec.seed = mix_seed(cfg.trial_seed, static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(trial_index));

    // n i.i.d. draws compress to per-atom counts: the empirical mean over the
    // sample equals the count-weighted mean over the (few) distinct atoms.
    Rng rng(rec.seed);
    std::vector<long> counts(m, 0);
    for (long i = 0; i < n; ++i) ++counts[draw_atom(rng)];

    const double inv_n = 1.0 / static_cast<double>(n);
    const Loss& loss = spec.loss;
    auto smooth = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) -> double {
      double val = 0.0;
      if (grad != nullptr) grad->setZero();
      for (std::size_t j = 0; j < m; ++j) {
        if (counts[j] == 0) continue;
        const double wt = static_cast<double>(counts[j]) * inv_n;
        val += wt * loss.eval(w, dist.atoms[j]);
        if (grad != nullptr) grad->noalias() += wt * loss.grad(w, dist.atoms[j]);
      }
      return val;
    };

    const Regularizer eff_reg =
        cfg.penalty ? cfg.penalty->scaled(inv_n) : spec.reg;
    const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(spec.domain.dim);

    try {
      const auto t0 = std::chrono::steady_clock::now();
      const SolverResult res = minimize_composite(smooth, spec.constants.L, eff_reg,
                                                  spec.domain, cfg.solver, w0);
      if (cfg.timing) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      }
      rec.excess_risk = pop.eval(res.w_hat) - opt.pstar;
      rec.solver_residual = res.residual;
      rec.valid = res.converged && std::isfinite(rec.excess_risk) &&
                  rec.excess_risk >= -kExcessSlack;
    } catch (const numeric_error&) {
      rec.excess_risk = std::numeric_limits<double>::quiet_NaN();
      rec.solver_residual = std::numeric_limits<double>::quiet_NaN();
      rec.valid = false;
    }
    return rec;
  }
};

void spot_check_curvature(const PopulationObjective& pop, std::uint64_t seed) {
  const auto& spec = pop.spec();
  const auto& dist = pop.dist();
  Rng rng(seed);
  std::vector<Lemma1Triple> triples;
  triples.reserve(100);
  for (int i = 0; i < 100; ++i) {
    Lemma1Triple t;
    t.w = rng.uniform_in_ball(spec.domain.dim, spec.domain.radius);
    t.w_prime = rng.uniform_in_ball(spec.domain.dim, spec.domain.radius);
    t.z = dist.atoms[rng.index(dist.atoms.size())];
    triples.push_back(std::move(t));
  }
  const ResidualReport rep = check_lemma1(spec.loss, spec.constants, triples);
  if (!rep.pass) {
    throw numeric_error("sampled atoms violate the curvature lower bound",
                        {rep.min_residual});
  }
}

}  // namespace

ExperimentRun run_trials(const ExperimentConfig& cfg, const TrialSink& sink) {
  cfg.validate();
  const Eigen::VectorXd wbar =
      cfg.wbar.size() != 0 ? cfg.wbar : default_wbar(cfg.spec.domain.dim);

  ExperimentRun run;
  run.dist = make_distribution(cfg.spec.domain.dim, cfg.m_atoms, cfg.y_max, wbar, cfg.noise,
                               cfg.dist_seed);
  PopulationObjective pop(run.dist, cfg.spec);
  run.optimum = population_minimizer(pop, cfg.solver);
  spot_check_curvature(pop, mix_seed(cfg.trial_seed, 0x11, 0));

  TrialContext ctx{cfg, pop, run.optimum, {}};
  ctx.cum_weights.reserve(run.dist.weights.size());
  double acc = 0.0;
  for (double w : run.dist.weights) {
    acc += w;
    ctx.cum_weights.push_back(acc);
  }

  run.records.reserve(cfg.n_grid.size() * static_cast<std::size_t>(cfg.trials));
  for (long n : cfg.n_grid) {
    std::vector<TrialRecord> block(cfg.trials);
    const int workers = std::min<int>(cfg.threads, cfg.trials);
    if (workers <= 1) {
      for (int t = 0; t < cfg.trials; ++t) block[t] = ctx.run_one(n, t);
    } else {
      std::atomic<int> next{0};
      auto drain = [&]() {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= cfg.trials) return;
          block[t] = ctx.run_one(n, t);
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int k = 0; k < workers; ++k) pool.emplace_back(drain);
      for (auto& th : pool) th.join();
    }
    for (TrialRecord& rec : block) {
      if (!rec.valid) ++run.invalid_count;
      if (sink) sink(rec);
      run.records.push_back(std::move(rec));
    }
  }

  const long total = static_cast<long>(run.records.size());
  if (run.invalid_count * 20 > total) {
    throw numeric_error("more than 5% of trials failed to solve",
                        {static_cast<double>(run.invalid_count), static_cast<double>(total)});
  }
  return run;
}

std::string to_string(RateStatistic s) {
  switch (s) {
    case RateStatistic::median_excess: return "median_excess";
    case RateStatistic::quantile_excess: return "quantile_excess";
  }
  throw parameter_error("unknown rate statistic");
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw parameter_error("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw parameter_error("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  if (p <= 0.0) return values.front();
  const std::size_t n = values.size();
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(n)) - 1.0);
  return values[std::min(k, n - 1)];
}

namespace {

struct GroupedExcess {
  long n = 0;
  int d = 0;
  std::vector<double> excess;  // valid trials only
  long invalid = 0;
};

std::map<long, GroupedExcess> group_by_n(const std::vector<TrialRecord>& records) {
  std::map<long, GroupedExcess> groups;
  for (const TrialRecord& r : records) {
    GroupedExcess& g = groups[r.n];
    g.n = r.n;
    g.d = r.d;
    if (r.valid) {
      g.excess.push_back(r.excess_risk);
    } else {
      ++g.invalid;
    }
  }
  return groups;
}

}  // namespace

RateFit fit_rate(const std::vector<TrialRecord>& records, RateStatistic stat, double delta) {
  if (!(delta > 0.0) || !(delta <= 1.0)) throw parameter_error("delta must lie in (0, 1]");
  const auto groups = group_by_n(records);

  std::vector<double> xs, ys;
  for (const auto& [n, g] : groups) {
    if (g.excess.empty()) continue;
    const double s = stat == RateStatistic::median_excess
                         ? conventional_median(g.excess)
                         : empirical_quantile(g.excess, 1.0 - delta);
    if (!(s > 0.0)) {
      throw parameter_error("rate fit needs positive statistics; drop n = " +
                            std::to_string(n));
    }
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(s));
  }
  if (xs.size() < 3) throw parameter_error("rate fit needs at least 3 distinct n values");

  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sst += (ys[i] - ybar) * (ys[i] - ybar);
  }

  RateFit fit;
  fit.statistic = stat;
  fit.delta = delta;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += resid * resid;
  }
  fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return fit;
}

Summary summarize(const std::vector<TrialRecord>& records, double delta,
                  const Constants& consts, std::optional<double> B) {
  if (!(delta > 0.0 && delta <= 1.0)) throw parameter_error("delta must lie in (0, 1]");
  if (B && !(*B >= 0.0)) throw parameter_error("penalty range must be nonnegative");

  Summary out;
  out.delta = delta;
  out.note = ConfidenceNote::one_minus_two_delta;

  for (const auto& [n, g] : group_by_n(records)) {
    SummaryRow row;
    row.n = n;
    row.d = g.d;
    row.count = static_cast<long>(g.excess.size());
    row.invalid = g.invalid;
    if (!g.excess.empty()) {
      row.mean = std::accumulate(g.excess.begin(), g.excess.end(), 0.0) /
                 static_cast<double>(g.excess.size());
      row.median = conventional_median(g.excess);
      row.quantile = empirical_quantile(g.excess, 1.0 - delta);
    } else {
      row.mean = row.median = row.quantile = std::numeric_limits<double>::quiet_NaN();
    }
    // Evaluated at delta/2 so the bound's 1 - 2(delta/2) confidence matches
    // the 1 - delta quantile level.
    row.thm1 = theorem1_bound(consts.L, consts.G, consts.R, g.d, consts.sigma, n,
                              delta / 2.0, false)
                   .first;
    if (B) row.thm2 = row.thm1 + *B / static_cast<double>(n);
    const double reference = row.thm2 ? *row.thm2 : row.thm1;
    row.violation = row.count > 0 && row.quantile > reference;
    out.rows.push_back(std::move(row));
  }

  try {
    out.fit = fit_rate(records, RateStatistic::median_excess, delta);
  } catch (const parameter_error&) {
    out.fit.reset();  // fewer than 3 usable n values: summary still emitted
  }
  return out;
}

void write_trial_header(std::ostream& os) {
  write_csv_row(os, {"n", "d", "trial", "seed", "excess_risk", "solver_residual", "wall_ms",
                     "valid"});
}

void write_trial_row(std::ostream& os, const TrialRecord& r) {
  write_csv_row(os, {std::to_string(r.n), std::to_string(r.d), std::to_string(r.trial_index),
                     std::to_string(r.seed), csv_format(r.excess_risk),
                     csv_format(r.solver_residual), csv_format(r.wall_ms),
                     r.valid ? "1" : "0"});
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  write_trial_header(os);
  for (const TrialRecord& r : records) write_trial_row(os, r);
}

std::vector<TrialRecord> read_trials_csv(std::istream& is) {
  std::vector<std::string> fields;
  if (!read_csv_row(is, fields) || fields.size() != 8 || fields[0] != "n") {
    throw usage_error("trials CSV: missing or malformed header");
  }
  std::vector<TrialRecord> out;
  while (read_csv_row(is, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    if (fields.size() != 8) throw usage_error("trials CSV: row with wrong field count");
    TrialRecord r;
    try {
      r.n = std::stol(fields[0]);
      r.d = std::stoi(fields[1]);
      r.trial_index = std::stoi(fields[2]);
      r.seed = std::stoull(fields[3]);
      r.excess_risk = std::stod(fields[4]);
      r.solver_residual = std::stod(fields[5]);
      r.wall_ms = std::stod(fields[6]);
      r.valid = fields[7] == "1";
    } catch (const std::exception& e) {
      throw usage_error(std::string("trials CSV: bad field: ") + e.what());
    }
    out.push_back(r);
  }
  return out;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["problem"] = to_json(cfg.spec);
  nlohmann::ordered_json dist;
  dist["m"] = cfg.m_atoms;
  dist["y_max"] = cfg.y_max;
  if (cfg.wbar.size() == 0) {
    dist["wbar"] = nullptr;
  } else {
    dist["wbar"] = std::vector<double>(cfg.wbar.data(), cfg.wbar.data() + cfg.wbar.size());
  }
  dist["noise"] = cfg.noise;
  dist["seed"] = cfg.dist_seed;
  j["distribution"] = std::move(dist);
  j["trial_seed"] = cfg.trial_seed;
  j["n_grid"] = cfg.n_grid;
  j["trials"] = cfg.trials;
  j["delta"] = cfg.delta;
  if (cfg.penalty) {
    j["mode"] = {{"kind", "penalized_erm"}, {"g", reg_to_json(*cfg.penalty)}};
  } else {
    j["mode"] = {{"kind", "erm"}};
  }
  j["solver"] = {{"tol", cfg.solver.tol},
                 {"max_iters", cfg.solver.max_iters},
                 {"step_init", cfg.solver.step_init},
                 {"backtrack_factor", cfg.solver.backtrack_factor},
                 {"armijo_c", cfg.solver.armijo_c},
                 {"grow_after", cfg.solver.grow_after},
                 {"dykstra_tol", cfg.solver.dykstra_tol},
                 {"dykstra_max", cfg.solver.dykstra_max}};
  j["threads"] = cfg.threads;
  j["timing"] = cfg.timing;
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    cfg.spec = problem_spec_from_json(j.at("problem"));
    if (j.contains("distribution")) {
      const auto& d = j.at("distribution");
      cfg.m_atoms = d.value("m", cfg.m_atoms);
      cfg.y_max = d.value("y_max", cfg.y_max);
      cfg.noise = d.value("noise", cfg.noise);
      cfg.dist_seed = d.value("seed", cfg.dist_seed);
      if (d.contains("wbar") && !d.at("wbar").is_null()) {
        const auto vals = d.at("wbar").get<std::vector<double>>();
        cfg.wbar = Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                     static_cast<long>(vals.size()));
      }
    }
    cfg.trial_seed = j.value("trial_seed", cfg.trial_seed);
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<long>>();
    cfg.trials = j.value("trials", cfg.trials);
    cfg.delta = j.value("delta", cfg.delta);
    if (j.contains("mode")) {
      const auto& m = j.at("mode");
      const std::string kind = m.value("kind", "erm");
      if (kind == "penalized_erm") {
        cfg.penalty = reg_from_json(m.at("g"));
      } else if (kind != "erm") {
        throw parameter_error("unknown experiment mode: " + kind);
      }
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      cfg.solver.tol = s.value("tol", cfg.solver.tol);
      cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
      cfg.solver.step_init = s.value("step_init", cfg.solver.step_init);
      cfg.solver.backtrack_factor = s.value("backtrack_factor", cfg.solver.backtrack_factor);
      cfg.solver.armijo_c = s.value("armijo_c", cfg.solver.armijo_c);
      cfg.solver.grow_after = s.value("grow_after", cfg.solver.grow_after);
      cfg.solver.dykstra_tol = s.value("dykstra_tol", cfg.solver.dykstra_tol);
      cfg.solver.dykstra_max = s.value("dykstra_max", cfg.solver.dykstra_max);
    }
    cfg.threads = j.value("threads", cfg.threads);
    cfg.timing = j.value("timing", cfg.timing);
  } catch (const nlohmann::json::exception& e) {
    throw parameter_error(std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open experiment config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parameter_error(std::string("experiment config parse: ") + e.what());
  }
  return experiment_config_from_json(j);
}

nlohmann::ordered_json to_json(const Summary& summary) {
  nlohmann::ordered_json j;
  j["delta"] = summary.delta;
  j["confidence_note"] = to_string(summary.note);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SummaryRow& r : summary.rows) {
    nlohmann::ordered_json row;
    row["n"] = r.n;
    row["d"] = r.d;
    row["count"] = r.count;
    row["invalid"] = r.invalid;
    row["mean"] = r.mean;
    row["median"] = r.median;
    row["quantile"] = r.quantile;
    row["thm1"] = r.thm1;
    if (r.thm2) {
      row["thm2"] = *r.thm2;
    } else {
      row["thm2"] = nullptr;
    }
    row["violation"] = r.violation;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  if (summary.fit) {
    j["rate_fit"] = {{"slope", summary.fit->slope},
                     {"intercept", summary.fit->intercept},
                     {"r2", summary.fit->r2},
                     {"statistic", to_string(summary.fit->statistic)},
                     {"delta", summary.fit->delta}};
  } else {
    j["rate_fit"] = nullptr;
  }
  return j;
}

}  // namespace expconc
