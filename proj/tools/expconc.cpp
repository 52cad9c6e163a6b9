// Batch front end: certify | bound | solve | experiment | fit-rate.
//
// Exit codes: 0 success, 1 usage/parameter error, 2 numeric or solver
// failure, 3 failed acceptance checks in `experiment --check`.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "expconc/bounds.hpp"
#include "expconc/certify.hpp"
#include "expconc/csv.hpp"
#include "expconc/distribution.hpp"
#include "expconc/errors.hpp"
#include "expconc/experiment.hpp"
#include "expconc/problem_spec.hpp"
#include "expconc/solver.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void emit(const ordered_json& doc, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw expconc::usage_error("cannot open output file: " + out_path);
  os << doc.dump(2) << "\n";
}

// One machine-parsable line on stderr: {"error":{"code":...,"message":...}}
int fail(const std::string& code, const std::string& message, int exit_code) {
  ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return exit_code;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("EXPCONC_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw expconc::usage_error("EXPCONC_SEED is not an unsigned integer");
  }
}

expconc::Loss loss_by_name(const std::string& name) {
  switch (expconc::loss_kind_from_string(name)) {
    case expconc::LossKind::square: return expconc::Loss::square();
    case expconc::LossKind::logistic: return expconc::Loss::logistic();
    case expconc::LossKind::squared_hinge: return expconc::Loss::squared_hinge();
    case expconc::LossKind::custom: break;
  }
  throw expconc::usage_error("custom losses are library-only");
}

// ---------------------------------------------------------------- certify

struct CertifyArgs {
  std::string loss = "square";
  double radius = 1.0;
  int dim = 2;
  double y_max = 1.0;
  double beta = 0.125;
  int w_points = 512;
  int z_points = 64;
  std::uint64_t seed = 0;
  bool estimate_max = false;
  std::string out;
};

int run_certify(const CertifyArgs& a) {
  const expconc::Loss loss = loss_by_name(a.loss);
  const expconc::Domain domain(a.radius, a.dim);
  expconc::SamplingPlan plan;
  plan.w_points = a.w_points;
  plan.z_points = a.z_points;
  plan.y_max = a.y_max;
  plan.seed = a.seed;

  const expconc::Certificate cert = expconc::expconcavity_check(loss, a.beta, domain, plan);

  ordered_json doc;
  doc["config"] = {{"command", "certify"}, {"loss", a.loss},      {"radius", a.radius},
                   {"dim", a.dim},         {"ymax", a.y_max},     {"beta", a.beta},
                   {"wpoints", a.w_points}, {"zpoints", a.z_points}, {"seed", a.seed}};
  doc["status"] =
      cert.status == expconc::Certificate::Status::certified ? "certified" : "refuted";
  doc["beta"] = cert.beta;
  doc["points_checked"] = cert.points_checked;
  doc["min_eig_seen"] = cert.min_eig_seen;
  if (cert.witness) {
    const auto& w = *cert.witness;
    doc["witness"] = {
        {"w", std::vector<double>(w.w.data(), w.w.data() + w.w.size())},
        {"x", std::vector<double>(w.z.x.data(), w.z.x.data() + w.z.x.size())},
        {"y", w.z.y},
        {"direction",
         std::vector<double>(w.direction.data(), w.direction.data() + w.direction.size())},
        {"quad_form", w.quad_form}};
  }
  if (a.estimate_max) {
    doc["max_beta_estimate"] = expconc::max_beta_estimate(loss, domain, plan);
  }
  emit(doc, a.out);
  return 0;
}

// ------------------------------------------------------------------ bound

struct BoundArgs {
  double L = 1.0, G = 1.0, R = 1.0, sigma = 0.0, beta = 0.0;
  int d = 1;
  double delta = 0.1;
  long n = 1;
  double eps = 0.0;    // 0 -> 1/n (the choice behind the log(6Rn) terms)
  double alpha = 1.0;
  double dist = 0.0;   // 0 -> 2R
  double excess = 0.0;
  std::optional<double> B;
  bool honest = false;
  std::vector<long> batch;
  std::string out;
};

expconc::BoundReport make_report(const BoundArgs& a, long n) {
  const double eps = a.eps > 0.0 ? a.eps : 1.0 / static_cast<double>(n);
  const double dist = a.dist > 0.0 ? a.dist : 2.0 * a.R;
  expconc::BoundReport rep;
  rep.n = n;
  rep.d = a.d;
  rep.delta = a.delta;
  rep.sigma = a.sigma;
  rep.covering_log = expconc::covering_number_bound(a.R, eps, a.d);
  rep.c_eps = expconc::c_epsilon(a.delta, a.d, a.R, eps);
  rep.lemma4 = expconc::grad_concentration_bound(a.G, a.alpha, a.d, a.sigma, n, a.delta);
  rep.lemma5 = expconc::net_deviation_bound(a.L, a.G, a.delta, a.d, a.R, eps, n, dist,
                                            a.excess);
  auto [thm1, note] =
      expconc::theorem1_bound(a.L, a.G, a.R, a.d, a.sigma, n, a.delta, a.honest);
  rep.thm1 = thm1;
  rep.confidence_note = note;
  if (a.B) {
    rep.thm2 = expconc::theorem2_bound(a.L, a.G, a.R, a.d, a.sigma, n, a.delta, *a.B,
                                       a.honest)
                   .first;
  }
  return rep;
}

int run_bound(BoundArgs a) {
  if (a.sigma <= 0.0) {
    if (a.beta <= 0.0) {
      throw expconc::usage_error("pass --sigma, or --beta to derive sigma from (G, R, beta)");
    }
    a.sigma = expconc::curvature_sigma(a.G, a.R, a.beta);
  }

  ordered_json config = {{"command", "bound"},
                         {"L", a.L},
                         {"G", a.G},
                         {"R", a.R},
                         {"d", a.d},
                         {"sigma", a.sigma},
                         {"delta", a.delta},
                         {"n", a.n},
                         {"eps", a.eps},
                         {"alpha", a.alpha},
                         {"dist", a.dist},
                         {"excess", a.excess},
                         {"B", a.B ? json(*a.B) : json(nullptr)},
                         {"honest", a.honest},
                         {"batch", a.batch}};

  if (!a.batch.empty()) {
    std::ostringstream os;
    expconc::write_csv_row(os, {"n", "d", "delta", "lemma4", "lemma5_at_eps", "thm1",
                                "thm2"});
    for (long n : a.batch) {
      const expconc::BoundReport rep = make_report(a, n);
      const double thm2 = rep.thm2 ? *rep.thm2 : rep.thm1;  // B defaults to 0
      expconc::write_csv_row(
          os, {std::to_string(rep.n), std::to_string(rep.d), expconc::csv_format(rep.delta),
               expconc::csv_format(rep.lemma4), expconc::csv_format(rep.lemma5),
               expconc::csv_format(rep.thm1), expconc::csv_format(thm2)});
    }
    if (a.out.empty() || a.out == "-") {
      std::cout << os.str();
    } else {
      std::ofstream f(a.out);
      if (!f) throw expconc::usage_error("cannot open output file: " + a.out);
      f << os.str();
    }
    std::cerr << config.dump() << "\n";  // echo resolved config off the data path
    return 0;
  }

  const expconc::BoundReport rep = make_report(a, a.n);
  ordered_json doc;
  doc["config"] = std::move(config);
  doc["n"] = rep.n;
  doc["d"] = rep.d;
  doc["delta"] = rep.delta;
  doc["sigma"] = rep.sigma;
  doc["covering_log"] = rep.covering_log;
  doc["c_eps"] = rep.c_eps;
  doc["lemma4"] = rep.lemma4;
  doc["lemma5"] = rep.lemma5;
  doc["thm1"] = rep.thm1;
  doc["thm2"] = rep.thm2 ? json(*rep.thm2) : json(nullptr);
  doc["confidence_note"] = expconc::to_string(rep.confidence_note);
  emit(doc, a.out);
  return 0;
}

// ------------------------------------------------------------------ solve

std::vector<expconc::Sample> read_dataset(const std::string& path, int dim) {
  std::ifstream is(path);
  if (!is) throw expconc::usage_error("cannot open dataset: " + path);
  std::vector<expconc::Sample> data;
  std::vector<std::string> fields;
  while (expconc::read_csv_row(is, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw expconc::usage_error("dataset row needs " + std::to_string(dim) +
                                 " features plus a label");
    }
    expconc::Sample s;
    s.x.resize(dim);
    try {
      for (int i = 0; i < dim; ++i) s.x[i] = std::stod(fields[i]);
      s.y = std::stod(fields[dim]);
    } catch (const std::exception& e) {
      throw expconc::usage_error(std::string("dataset: bad number: ") + e.what());
    }
    data.push_back(std::move(s));
  }
  return data;
}

struct SolveArgs {
  std::string problem;
  std::string data;
  double tol = 1e-8;
  long max_iters = 100000;
  std::string out;
};

int run_solve(const SolveArgs& a) {
  const expconc::ProblemSpec spec = expconc::load_problem_spec(a.problem);
  const auto dataset = read_dataset(a.data, spec.domain.dim);
  expconc::SolverConfig cfg;
  cfg.tol = a.tol;
  cfg.max_iters = a.max_iters;
  const expconc::SolverResult res = expconc::solve_erm(spec, dataset, cfg);

  ordered_json doc;
  doc["config"] = {{"command", "solve"},
                   {"problem", expconc::to_json(spec)},
                   {"data", a.data},
                   {"tol", a.tol},
                   {"max_iters", a.max_iters}};
  doc["n"] = dataset.size();
  doc["objective"] = res.objective;
  doc["residual"] = res.residual;
  doc["iters"] = res.iters;
  doc["converged"] = res.converged;
  doc["w_hat"] = std::vector<double>(res.w_hat.data(), res.w_hat.data() + res.w_hat.size());
  emit(doc, a.out);
  return res.converged ? 0 : 2;
}

// ------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string config_path;
  std::string out_trials;
  std::string out_summary;
  bool check = false;
  std::optional<int> threads;
  bool timing = false;
  std::optional<std::uint64_t> seed;
};

int run_experiment(const ExperimentArgs& a) {
  std::ifstream in(a.config_path);
  if (!in) throw expconc::usage_error("cannot open experiment config: " + a.config_path);
  json raw;
  try {
    in >> raw;
  } catch (const json::exception& e) {
    throw expconc::parameter_error(std::string("experiment config parse: ") + e.what());
  }

  // Seed resolution: explicit flag > config field > EXPCONC_SEED > default.
  const auto env = env_seed();
  if (a.seed) {
    raw["trial_seed"] = *a.seed;
  } else if (!raw.contains("trial_seed") && env) {
    raw["trial_seed"] = *env;
  }
  if (!raw.contains("distribution")) raw["distribution"] = json::object();
  if (!raw["distribution"].contains("seed") && env) {
    raw["distribution"]["seed"] = *env;
  }

  expconc::ExperimentConfig cfg = expconc::experiment_config_from_json(raw);
  if (a.threads) cfg.threads = *a.threads;
  if (a.timing) cfg.timing = true;
  cfg.validate();

  std::ofstream trials_os;
  std::ostream* trials = &std::cout;
  if (!a.out_trials.empty() && a.out_trials != "-") {
    trials_os.open(a.out_trials);
    if (!trials_os) throw expconc::usage_error("cannot open output file: " + a.out_trials);
    trials = &trials_os;
  }
  expconc::write_trial_header(*trials);
  const auto sink = [&](const expconc::TrialRecord& rec) {
    expconc::write_trial_row(*trials, rec);
  };
  const expconc::ExperimentRun run = expconc::run_trials(cfg, sink);
  trials->flush();

  std::optional<double> B;
  if (cfg.penalty) B = expconc::penalty_range_bound(*cfg.penalty, cfg.spec.domain);
  const expconc::Summary summary =
      expconc::summarize(run.records, cfg.delta, cfg.spec.constants, B);

  ordered_json doc;
  doc["config"] = expconc::to_json(cfg);
  doc["population"] = {
      {"wstar", std::vector<double>(run.optimum.wstar.data(),
                                    run.optimum.wstar.data() + run.optimum.wstar.size())},
      {"pstar", run.optimum.pstar},
      {"solver_residual", run.optimum.solve.residual}};
  if (B) doc["penalty_range"] = *B;
  doc["invalid_trials"] = run.invalid_count;
  doc["summary"] = expconc::to_json(summary);
  emit(doc, a.out_summary);

  if (!a.check) return 0;

  std::vector<std::string> failures;
  for (const auto& row : summary.rows) {
    if (row.violation) {
      failures.push_back("quantile exceeds bound at n=" + std::to_string(row.n));
    }
  }
  if (run.invalid_count > 0) {
    failures.push_back(std::to_string(run.invalid_count) + " invalid trials");
  }
  if (summary.fit) {
    if (summary.fit->slope < -1.25 || summary.fit->slope > -0.75) {
      failures.push_back("rate slope " + std::to_string(summary.fit->slope) +
                         " outside [-1.25, -0.75]");
    }
    if (summary.fit->r2 < 0.95) {
      failures.push_back("rate fit r2 " + std::to_string(summary.fit->r2) + " below 0.95");
    }
  }
  if (failures.empty()) return 0;
  std::string msg;
  for (const auto& f : failures) msg += (msg.empty() ? "" : "; ") + f;
  return fail("check", msg, 3);
}

// --------------------------------------------------------------- fit-rate

struct FitRateArgs {
  std::string trials;
  std::string statistic = "median";
  double delta = 0.1;
  std::string out;
};

int run_fit_rate(const FitRateArgs& a) {
  std::ifstream is(a.trials);
  if (!is) throw expconc::usage_error("cannot open trials CSV: " + a.trials);
  const auto records = expconc::read_trials_csv(is);
  expconc::RateStatistic stat;
  if (a.statistic == "median") {
    stat = expconc::RateStatistic::median_excess;
  } else if (a.statistic == "quantile") {
    stat = expconc::RateStatistic::quantile_excess;
  } else {
    throw expconc::usage_error("statistic must be median or quantile");
  }
  const expconc::RateFit fit = expconc::fit_rate(records, stat, a.delta);

  ordered_json doc;
  doc["config"] = {{"command", "fit-rate"},
                   {"trials", a.trials},
                   {"statistic", a.statistic},
                   {"delta", a.delta}};
  doc["slope"] = fit.slope;
  doc["intercept"] = fit.intercept;
  doc["r2"] = fit.r2;
  doc["statistic"] = expconc::to_string(fit.statistic);
  doc["delta"] = fit.delta;
  emit(doc, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regularized exp-concave empirical minimization toolkit"};
  app.require_subcommand(1);

  CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "pointwise exp-concavity PSD check");
  certify->add_option("--loss", ca.loss, "square | logistic | squared_hinge")
      ->capture_default_str();
  certify->add_option("--radius", ca.radius)->capture_default_str();
  certify->add_option("--dim", ca.dim)->capture_default_str();
  certify->add_option("--ymax", ca.y_max, "label bound of the z-sampling plan")
      ->capture_default_str();
  certify->add_option("--beta", ca.beta, "exp-concavity parameter to certify")
      ->capture_default_str();
  certify->add_option("--wpoints", ca.w_points)->capture_default_str();
  certify->add_option("--zpoints", ca.z_points)->capture_default_str();
  certify->add_option("--seed", ca.seed)->capture_default_str();
  certify->add_flag("--estimate-max-beta", ca.estimate_max,
                    "bisect for the largest certifiable beta");
  certify->add_option("--out", ca.out, "output file (default stdout)");

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "closed-form bound report");
  bound->add_option("--L", ba.L, "smoothness constant")->capture_default_str();
  bound->add_option("--G", ba.G, "gradient norm bound")->capture_default_str();
  bound->add_option("--R", ba.R, "domain radius")->capture_default_str();
  bound->add_option("--d", ba.d, "dimension")->capture_default_str();
  bound->add_option("--sigma", ba.sigma, "curvature constant (or pass --beta)");
  bound->add_option("--beta", ba.beta, "derive sigma = min(1/(8GR), beta)/2");
  bound->add_option("--delta", ba.delta)->capture_default_str();
  bound->add_option("--n", ba.n)->capture_default_str();
  bound->add_option("--eps", ba.eps, "net radius (default 1/n)");
  bound->add_option("--alpha", ba.alpha)->capture_default_str();
  bound->add_option("--dist", ba.dist, "||w - w*|| argument (default 2R)");
  bound->add_option("--excess", ba.excess)->capture_default_str();
  double b_value = 0.0;
  auto* b_opt = bound->add_option("--B", b_value, "penalty range; enables thm2");
  bound->add_flag("--honest", ba.honest, "substitute delta/2 for a 1-delta statement");
  bound->add_option("--batch", ba.batch, "n values; emits CSV instead of a report");
  bound->add_option("--out", ba.out, "output file (default stdout)");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "empirical minimization on a CSV dataset");
  solve->add_option("--problem", sa.problem, "problem spec JSON")->required();
  solve->add_option("--data", sa.data, "CSV: d feature columns then label")->required();
  solve->add_option("--tol", sa.tol)->capture_default_str();
  solve->add_option("--max-iters", sa.max_iters)->capture_default_str();
  solve->add_option("--out", sa.out, "output file (default stdout)");

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "excess-risk Monte Carlo");
  experiment->add_option("--config", ea.config_path, "experiment config JSON")->required();
  experiment->add_option("--out-trials", ea.out_trials, "trials CSV (default stdout)");
  experiment->add_option("--out-summary", ea.out_summary, "summary JSON (default stdout)");
  experiment->add_flag("--check", ea.check, "exit 3 unless rate/dominance checks pass");
  int threads_flag = 0;
  auto* threads_opt = experiment->add_option("--threads", threads_flag, "worker cap");
  experiment->add_flag("--timing", ea.timing, "record wall_ms (breaks byte determinism)");
  std::uint64_t seed_flag = 0;
  auto* seed_opt = experiment->add_option("--seed", seed_flag, "override trial seed");

  FitRateArgs fa;
  auto* fit = app.add_subcommand("fit-rate", "log-log OLS rate fit of a trials CSV");
  fit->add_option("--trials", fa.trials, "trials CSV")->required();
  fit->add_option("--statistic", fa.statistic, "median | quantile")->capture_default_str();
  fit->add_option("--delta", fa.delta, "quantile level 1 - delta")->capture_default_str();
  fit->add_option("--out", fa.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::ostringstream os;
    os << e.what();
    return fail("usage", os.str(), 1);
  }

  try {
    if (*certify) return run_certify(ca);
    if (*bound) {
      if (b_opt->count() > 0) ba.B = b_value;
      return run_bound(ba);
    }
    if (*solve) return run_solve(sa);
    if (*experiment) {
      if (threads_opt->count() > 0) ea.threads = threads_flag;
      if (seed_opt->count() > 0) ea.seed = seed_flag;
      return run_experiment(ea);
    }
    if (*fit) return run_fit_rate(fa);
    return fail("usage", "no subcommand", 1);
  } catch (const expconc::usage_error& e) {
    return fail("usage", e.what(), 1);
  } catch (const expconc::parameter_error& e) {
    return fail("parameter", e.what(), 1);
  } catch (const expconc::capability_error& e) {
    return fail("capability", e.what(), 1);
  } catch (const expconc::numeric_error& e) {
    return fail("numeric", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 2);
  }
}
