// End-to-end tests of the command-line front end: each case invokes the
// installed binary in a scratch directory with a controlled environment and
// checks exit codes, stdout/stderr documents, and artifact files.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "expconc/constants.hpp"
#include "expconc/experiment.hpp"
#include "expconc/problem_spec.hpp"

#ifndef EXPCONC_CLI_PATH
#error "EXPCONC_CLI_PATH must point at the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("expconc_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void spill(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  REQUIRE(os.good());
  os << text;
}

// Runs the binary through /bin/sh with EXPCONC_SEED scrubbed unless `env_seed`
// supplies a value. Arguments are passed pre-quoted.
CliResult run_cli(const std::string& args, const std::string& env_seed = "") {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out_" + std::to_string(counter) + ".txt");
  const fs::path err = scratch_dir() / ("err_" + std::to_string(counter) + ".txt");
  ++counter;

  std::string cmd = "env ";
  if (env_seed.empty()) {
    cmd += "-u EXPCONC_SEED ";
  } else {
    cmd += "EXPCONC_SEED=" + env_seed + " ";
  }
  cmd += "\"" EXPCONC_CLI_PATH "\" " + args;
  cmd += " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";

  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

json error_doc(const CliResult& r) {
  const json doc = json::parse(r.err);
  REQUIRE(doc.contains("error"));
  return doc.at("error");
}

expconc::ProblemSpec square_l1_spec(int d, double lambda) {
  expconc::ProblemSpec spec;
  spec.loss = expconc::Loss::square();
  spec.reg = lambda > 0.0 ? expconc::Regularizer::l1(lambda) : expconc::Regularizer::zero();
  spec.domain = expconc::Domain(1.0, d);
  spec.constants = expconc::derive_constants(spec.loss, spec.domain, 0.125, 2.0);
  return spec;
}

// A small but well-posed Monte Carlo config (two trials, two sample sizes).
ordered_json small_experiment_config(bool pin_trial_seed, bool pin_dist_seed) {
  ordered_json cfg;
  cfg["problem"] = expconc::to_json(square_l1_spec(2, 0.05));
  cfg["distribution"] = {{"m", 10}, {"noise", 0.3}};
  if (pin_dist_seed) cfg["distribution"]["seed"] = 4;
  if (pin_trial_seed) cfg["trial_seed"] = 9;
  cfg["n_grid"] = {16, 32};
  cfg["trials"] = 2;
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("bound report matches the frozen desk value") {
    const auto r = run_cli(
        "bound --L 1 --G 1 --R 1 --d 1 --sigma 1 --delta 0.7357588 --n 1");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    const double thm1 = doc.at("thm1").get<double>();
    CHECK(thm1 == doctest::Approx(246.84002735385775).epsilon(1e-12));
    CHECK(doc.at("confidence_note") == "1-2delta");
    CHECK(doc.at("thm2").is_null());
    CHECK(doc.at("config").at("sigma") == 1.0);

    const auto honest = run_cli(
        "bound --L 1 --G 1 --R 1 --d 1 --sigma 1 --delta 0.7357588 --n 1 --honest");
    REQUIRE(honest.exit_code == 0);
    const json hdoc = json::parse(honest.out);
    CHECK(hdoc.at("confidence_note") == "1-delta");
    CHECK(hdoc.at("thm1").get<double>() > thm1);  // delta/2 inflates every log term

    const auto with_b = run_cli(
        "bound --L 1 --G 1 --R 1 --d 1 --sigma 1 --delta 0.7357588 --n 1 --B 0.5");
    REQUIRE(with_b.exit_code == 0);
    const json bdoc = json::parse(with_b.out);
    CHECK(bdoc.at("thm2").get<double>() == doctest::Approx(thm1 + 0.5).epsilon(1e-12));
  }

  TEST_CASE("bound derives sigma from beta when asked") {
    const auto r = run_cli("bound --G 4 --R 1 --beta 0.125 --d 5 --n 64");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("sigma").get<double>() == doctest::Approx(1.0 / 64.0).epsilon(1e-15));

    const auto bad = run_cli("bound --d 5 --n 64");
    CHECK(bad.exit_code == 1);
    CHECK(error_doc(bad).at("code") == "usage");
  }

  TEST_CASE("bound batch emits the CSV schema with the echo on stderr") {
    const auto r = run_cli("bound --L 2 --G 4 --R 1 --sigma 0.015625 --d 5 "
                           "--delta 0.1 --batch 16 --batch 64");
    REQUIRE(r.exit_code == 0);
    std::istringstream rows(r.out);
    std::string line;
    REQUIRE(std::getline(rows, line));
    CHECK(line == "n,d,delta,lemma4,lemma5_at_eps,thm1,thm2");
    int data_rows = 0;
    std::vector<std::string> first_fields;
    while (std::getline(rows, line)) {
      if (line.empty()) continue;
      ++data_rows;
      if (data_rows == 1) {
        std::istringstream fs_(line);
        std::string f;
        while (std::getline(fs_, f, ',')) first_fields.push_back(f);
      }
    }
    CHECK(data_rows == 2);
    REQUIRE(first_fields.size() == 7);
    CHECK(first_fields[0] == "16");
    CHECK(first_fields[1] == "5");
    const auto [expected, note] =
        expconc::theorem1_bound(2.0, 4.0, 1.0, 5, 0.015625, 16, 0.1);
    (void)note;
    CHECK(std::stod(first_fields[5]) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(first_fields[6] == first_fields[5]);  // no B: thm2 column repeats thm1

    const json echo = json::parse(r.err);
    CHECK(echo.at("command") == "bound");
    CHECK(echo.at("batch") == json::array({16, 64}));
  }

  TEST_CASE("certify reports the square-loss threshold from both sides") {
    const auto good = run_cli("certify --loss square --beta 0.125");
    REQUIRE(good.exit_code == 0);
    const json gdoc = json::parse(good.out);
    CHECK(gdoc.at("status") == "certified");
    CHECK(gdoc.at("min_eig_seen").get<double>() >= -1e-8);
    CHECK(!gdoc.contains("witness"));
    CHECK(gdoc.at("points_checked").get<long>() > 0);

    const auto bad = run_cli("certify --loss square --beta 0.13");
    REQUIRE(bad.exit_code == 0);  // a refutation is a successful analysis
    const json bdoc = json::parse(bad.out);
    CHECK(bdoc.at("status") == "refuted");
    REQUIRE(bdoc.contains("witness"));
    // the square-loss violation bottoms out at 2 - 16 beta at a binding corner
    CHECK(bdoc.at("witness").at("quad_form").get<double>() ==
          doctest::Approx(2.0 - 16.0 * 0.13).epsilon(1e-9));
    CHECK(bdoc.at("witness").at("w").size() == 2);

    const auto estimate = run_cli("certify --loss square --estimate-max-beta");
    REQUIRE(estimate.exit_code == 0);
    const json edoc = json::parse(estimate.out);
    CHECK(edoc.at("max_beta_estimate").get<double>() ==
          doctest::Approx(0.125).epsilon(1e-7));

    const auto unknown = run_cli("certify --loss hinge");
    CHECK(unknown.exit_code == 1);
    CHECK(error_doc(unknown).at("code") == "parameter");

    const auto negative = run_cli("certify --loss square --beta -1");
    CHECK(negative.exit_code == 1);
  }

  TEST_CASE("solve recovers the closed-form two-atom solution") {
    const fs::path spec_path = scratch_dir() / "spec_solve.json";
    spill(spec_path, expconc::to_json(square_l1_spec(2, 0.1)).dump(2));
    const fs::path data_path = scratch_dir() / "two_atoms.csv";
    spill(data_path, "1,0,0.5\n-1,0,-0.5\n");

    const auto r = run_cli("solve --problem \"" + spec_path.string() + "\" --data \"" +
                           data_path.string() + "\"");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("n") == 2);
    CHECK(doc.at("converged") == true);
    REQUIRE(doc.at("w_hat").size() == 2);
    CHECK(doc.at("w_hat")[0].get<double>() == doctest::Approx(0.45).epsilon(1e-6));
    CHECK(doc.at("w_hat")[1].get<double>() == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(doc.at("objective").get<double>() == doctest::Approx(0.0475).epsilon(1e-8));

    // starving the iteration budget is a numeric failure, exit 2; a generic
    // (non-axis-aligned) ridge problem approaches its optimum geometrically,
    // so 5 iterations cannot reach 1e-12 (the axis-aligned datasets above
    // would be solved exactly in two steps)
    expconc::ProblemSpec ridge = square_l1_spec(2, 0.0);
    ridge.reg = expconc::Regularizer::l2_squared(0.1);
    const fs::path ridge_path = scratch_dir() / "spec_ridge.json";
    spill(ridge_path, expconc::to_json(ridge).dump(2));
    const fs::path generic = scratch_dir() / "generic_rows.csv";
    spill(generic, "0.6,0.3,0.9\n-0.2,0.5,-0.4\n0.8,-0.4,0.1\n");
    const auto starved = run_cli("solve --problem \"" + ridge_path.string() +
                                 "\" --data \"" + generic.string() +
                                 "\" --tol 1e-12 --max-iters 5");
    CHECK(starved.exit_code == 2);
    CHECK(json::parse(starved.out).at("converged") == false);

    const auto missing = run_cli("solve --problem \"" + spec_path.string() +
                                 "\" --data /nonexistent.csv");
    CHECK(missing.exit_code == 1);
    CHECK(error_doc(missing).at("code") == "usage");

    const fs::path bad_rows = scratch_dir() / "bad_rows.csv";
    spill(bad_rows, "1,0\n");
    const auto short_row = run_cli("solve --problem \"" + spec_path.string() +
                                   "\" --data \"" + bad_rows.string() + "\"");
    CHECK(short_row.exit_code == 1);
  }

  TEST_CASE("experiment runs are byte-reproducible through the CLI") {
    const fs::path cfg_path = scratch_dir() / "exp_small.json";
    spill(cfg_path, small_experiment_config(true, true).dump(2));
    const fs::path t1 = scratch_dir() / "t1.csv";
    const fs::path t2 = scratch_dir() / "t2.csv";
    const fs::path s1 = scratch_dir() / "s1.json";

    const auto r1 = run_cli("experiment --config \"" + cfg_path.string() +
                            "\" --out-trials \"" + t1.string() + "\" --out-summary \"" +
                            s1.string() + "\"");
    REQUIRE(r1.exit_code == 0);
    const auto r2 = run_cli("experiment --config \"" + cfg_path.string() +
                            "\" --out-trials \"" + t2.string() + "\" --out-summary -");
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(t1) == slurp(t2));

    const json summary = json::parse(slurp(s1));
    CHECK(summary.at("config").at("trial_seed") == 9);
    CHECK(summary.at("invalid_trials") == 0);
    REQUIRE(summary.at("summary").at("rows").size() == 2);
    CHECK(summary.at("summary").at("rows")[0].at("n") == 16);
    CHECK(summary.at("population").at("wstar").size() == 2);

    // the echoed config fully pins the run: replaying it under a different
    // ambient seed reproduces the same bytes
    const fs::path cfg2 = scratch_dir() / "exp_echo.json";
    spill(cfg2, summary.at("config").dump(2));
    const fs::path t3 = scratch_dir() / "t3.csv";
    const auto r3 = run_cli("experiment --config \"" + cfg2.string() +
                                "\" --out-trials \"" + t3.string() + "\" --out-summary -",
                            "31337");
    REQUIRE(r3.exit_code == 0);
    CHECK(slurp(t1) == slurp(t3));
  }

  TEST_CASE("ambient seed fills only the seed fields the config omits") {
    const fs::path unpinned = scratch_dir() / "exp_unpinned.json";
    spill(unpinned, small_experiment_config(false, false).dump(2));
    const auto r = run_cli("experiment --config \"" + unpinned.string() +
                               "\" --out-trials /dev/null --out-summary -",
                           "77");
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.out).at("config");
    CHECK(cfg.at("trial_seed") == 77);
    CHECK(cfg.at("distribution").at("seed") == 77);

    const fs::path pinned = scratch_dir() / "exp_pinned.json";
    spill(pinned, small_experiment_config(true, false).dump(2));
    const auto rp = run_cli("experiment --config \"" + pinned.string() +
                                "\" --out-trials /dev/null --out-summary -",
                            "77");
    REQUIRE(rp.exit_code == 0);
    const json pcfg = json::parse(rp.out).at("config");
    CHECK(pcfg.at("trial_seed") == 9);  // explicit config beats the environment
    CHECK(pcfg.at("distribution").at("seed") == 77);

    const auto rf = run_cli("experiment --config \"" + pinned.string() +
                                "\" --seed 5 --out-trials /dev/null --out-summary -",
                            "77");
    REQUIRE(rf.exit_code == 0);
    CHECK(json::parse(rf.out).at("config").at("trial_seed") == 5);  // flag beats both
  }

  TEST_CASE("experiment check exits by its own summary verdict") {
    const fs::path cfg_path = scratch_dir() / "exp_check.json";
    spill(cfg_path, small_experiment_config(true, true).dump(2));
    const auto plain = run_cli("experiment --config \"" + cfg_path.string() +
                               "\" --out-trials /dev/null --out-summary -");
    REQUIRE(plain.exit_code == 0);
    const json doc = json::parse(plain.out);

    bool expect_fail = doc.at("invalid_trials").get<long>() > 0;
    for (const auto& row : doc.at("summary").at("rows")) {
      if (row.at("violation").get<bool>()) expect_fail = true;
    }
    if (!doc.at("summary").at("rate_fit").is_null()) {
      const double slope = doc.at("summary").at("rate_fit").at("slope").get<double>();
      const double r2 = doc.at("summary").at("rate_fit").at("r2").get<double>();
      if (slope < -1.25 || slope > -0.75 || r2 < 0.95) expect_fail = true;
    }

    const auto checked = run_cli("experiment --config \"" + cfg_path.string() +
                                 "\" --check --out-trials /dev/null --out-summary -");
    CHECK(checked.exit_code == (expect_fail ? 3 : 0));
    if (expect_fail) CHECK(error_doc(checked).at("code") == "check");
  }

  TEST_CASE("experiment rejects missing or malformed configs") {
    const auto missing = run_cli("experiment --config /nonexistent.json");
    CHECK(missing.exit_code == 1);
    CHECK(error_doc(missing).at("code") == "usage");

    const fs::path garbled = scratch_dir() / "garbled.json";
    spill(garbled, "{not json");
    const auto parse = run_cli("experiment --config \"" + garbled.string() + "\"");
    CHECK(parse.exit_code == 1);
    CHECK(error_doc(parse).at("code") == "parameter");

    const fs::path invalid = scratch_dir() / "invalid_cfg.json";
    auto cfg = small_experiment_config(true, true);
    cfg["trials"] = 1;
    spill(invalid, cfg.dump(2));
    const auto rejected = run_cli("experiment --config \"" + invalid.string() + "\"");
    CHECK(rejected.exit_code == 1);
  }

  TEST_CASE("fit-rate recovers an exact rate from a trials CSV") {
    std::ostringstream csv;
    csv << "n,d,trial,seed,excess_risk,solver_residual,wall_ms,valid\n";
    for (long n : {100L, 1000L, 10000L}) {
      for (int t = 0; t < 3; ++t) {
        csv << n << ",2," << t << ",7," << (t + 1) * 1.0 / static_cast<double>(n)
            << ",1e-9,0,1\n";
      }
    }
    const fs::path trials = scratch_dir() / "rate_trials.csv";
    spill(trials, csv.str());

    const auto r = run_cli("fit-rate --trials \"" + trials.string() + "\"");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("slope").get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(doc.at("intercept").get<double>() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));  // median of {v,2v,3v} is 2v
    CHECK(doc.at("r2").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(doc.at("statistic") == "median_excess");

    const auto quant = run_cli("fit-rate --trials \"" + trials.string() +
                               "\" --statistic quantile --delta 0.5");
    REQUIRE(quant.exit_code == 0);
    CHECK(json::parse(quant.out).at("statistic") == "quantile_excess");

    const auto bad_stat = run_cli("fit-rate --trials \"" + trials.string() +
                                  "\" --statistic mean");
    CHECK(bad_stat.exit_code == 1);
    const auto gone = run_cli("fit-rate --trials /nonexistent.csv");
    CHECK(gone.exit_code == 1);
  }

  TEST_CASE("usage errors and help behave like a well-mannered tool") {
    const auto unknown = run_cli("frobnicate");
    CHECK(unknown.exit_code == 1);
    CHECK(error_doc(unknown).at("code") == "usage");

    const auto none = run_cli("");
    CHECK(none.exit_code == 1);

    const auto help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("certify") != std::string::npos);
    CHECK(help.out.find("experiment") != std::string::npos);
  }
}
