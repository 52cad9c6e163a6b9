#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "expconc/domain.hpp"
#include "expconc/problem_spec.hpp"
#include "expconc/regularizer.hpp"

namespace expconc {

struct SolverConfig {
  double tol = 1e-8;              // gradient-mapping norm threshold
  long max_iters = 100000;
  double step_init = 0.0;         // 0 -> 1/L_hint
  double backtrack_factor = 0.5;  // step shrink on a rejected trial
  double armijo_c = 1e-4;         // slack coefficient of the sufficient-decrease test
  int grow_after = 10;            // double the step after this many first-try accepts
  double dykstra_tol = 1e-10;
  long dykstra_max = 10000;
};

struct SolverResult {
  Eigen::VectorXd w_hat;
  double objective = 0.0;
  double residual = 0.0;  // final gradient-mapping norm
  long iters = 0;
  bool converged = false;
};

// Smooth part oracle: returns F(w); fills *grad when non-null.
using SmoothEvalGrad = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

// Euclidean projection onto the ball of radius R.
Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double R);

// prox of R alone: argmin_u (1/(2 eta)) ||u - v||^2 + reg(u).
Eigen::VectorXd prox(const Regularizer& reg, const Eigen::VectorXd& v, double eta);

/// prox of reg + indicator of the ball:
/// argmin_{||u|| <= R} (1/(2 eta)) ||u - v||^2 + reg(u).
/// Zero and l2_squared have radial closed forms; l1 composes exactly
/// (soft-threshold, then project). Custom regularizers fall back to Dykstra's
/// alternating algorithm between prox(reg) and project_ball, which converges
/// to the exact prox of the sum where plain alternation in general does not.
Eigen::VectorXd combined_prox(const Regularizer& reg, const Domain& domain,
                              const Eigen::VectorXd& v, double eta, const SolverConfig& cfg = {});

/// Proximal gradient with backtracking on the step:
///   w+ = combined_prox(reg, domain, w - eta grad F(w), eta),
/// accepting eta under the sufficient-decrease test
///   F(w+) <= F(w) + <grad F(w), w+ - w> + (1 + armijo_c)/(2 eta) ||w+ - w||^2.
/// Terminates when ||(w - w+)/eta|| <= tol or max_iters; returns the best
/// iterate seen. Throws numeric_error on non-finite values.
SolverResult minimize_composite(const SmoothEvalGrad& smooth, double L_hint,
                                const Regularizer& reg, const Domain& domain,
                                const SolverConfig& cfg, const Eigen::VectorXd& w0);

// Empirical minimizer of P_n(w) = (1/n) sum f(w, z_i) + R(w) over the ball,
// started from w0 = 0.
SolverResult solve_erm(const ProblemSpec& spec, const std::vector<Sample>& dataset,
                       const SolverConfig& cfg = {});

// Penalized empirical risk minimizer of F_n(w) + g(w)/n over the ball
// (no R(w) term; g/n is wrapped as the regularizer).
SolverResult solve_penalized_erm(const ProblemSpec& spec, const std::vector<Sample>& dataset,
                                 const Regularizer& g, const SolverConfig& cfg = {});

}  // namespace expconc
