#include "expconc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expconc/errors.hpp"

namespace expconc {

Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double R) {
  if (R <= 0.0) throw parameter_error("project_ball: R must be positive");
  const double nrm = v.norm();
  if (nrm <= R) return v;
  return v * (R / nrm);
}

Eigen::VectorXd prox(const Regularizer& reg, const Eigen::VectorXd& v, double eta) {
  return reg.prox(v, eta);
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd dykstra_prox(const Regularizer& reg, const Domain& domain,
                             const Eigen::VectorXd& v, double eta, const SolverConfig& cfg) {
  Eigen::VectorXd x = v;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(v.size());
  for (long it = 0; it < cfg.dykstra_max; ++it) {
    const Eigen::VectorXd y = reg.prox(x + p, eta);
    p = x + p - y;
    const Eigen::VectorXd x_next = project_ball(y + q, domain.radius);
    q = y + q - x_next;
    const double move = (x_next - x).norm();
    x = x_next;
    if (move <= cfg.dykstra_tol) return x;
  }
  throw numeric_error("combined_prox: Dykstra did not converge within " +
                          std::to_string(cfg.dykstra_max) + " iterations",
                      to_std(x));
}

}  // namespace

Eigen::VectorXd combined_prox(const Regularizer& reg, const Domain& domain,
                              const Eigen::VectorXd& v, double eta, const SolverConfig& cfg) {
  if (eta <= 0.0) throw parameter_error("combined_prox: eta must be positive");
  switch (reg.kind()) {
    case RegKind::zero:
      return project_ball(v, domain.radius);
    case RegKind::l2_squared:
      // exact by radial symmetry of both terms
      return project_ball(v / (1.0 + eta * reg.lambda()), domain.radius);
    case RegKind::l1:
      // Soft-threshold then project is exact here: radial projection scales by
      // a positive factor, preserving every sign pattern the l1 subdifferential
      // depends on, so the prox of the sum decomposes.
      return project_ball(reg.prox(v, eta), domain.radius);
    case RegKind::custom:
      if (!reg.has_prox()) throw capability_error("combined_prox: custom regularizer has no prox");
      return dykstra_prox(reg, domain, v, eta, cfg);
  }
  throw capability_error("combined_prox: unreachable kind");
}

SolverResult minimize_composite(const SmoothEvalGrad& smooth, double L_hint,
                                const Regularizer& reg, const Domain& domain,
                                const SolverConfig& cfg, const Eigen::VectorXd& w0) {
  if (cfg.tol <= 0.0) throw parameter_error("minimize_composite: tol must be positive");
  if (cfg.backtrack_factor <= 0.0 || cfg.backtrack_factor >= 1.0)
    throw parameter_error("minimize_composite: backtrack_factor must be in (0,1)");
  if (!domain.contains(w0, 1e-12)) throw usage_error("minimize_composite: w0 outside domain");

  Eigen::VectorXd w = w0;
  Eigen::VectorXd g(w.size());
  double fw = smooth(w, &g);
  if (!std::isfinite(fw) || !g.allFinite())
    throw numeric_error("minimize_composite: non-finite objective/gradient at w0", to_std(w));

  double eta = cfg.step_init > 0.0 ? cfg.step_init : 1.0 / std::max(L_hint, 1e-300);
  double best_obj = fw + reg.eval(w);
  Eigen::VectorXd best_w = w;

  SolverResult res;
  res.residual = std::numeric_limits<double>::infinity();
  int streak = 0;  // consecutive first-try accepts

  long it = 0;
  for (; it < cfg.max_iters; ++it) {
    Eigen::VectorXd w_next;
    bool first_try = true;
    for (;;) {
      w_next = combined_prox(reg, domain, w - eta * g, eta, cfg);
      const Eigen::VectorXd step = w_next - w;
      const double f_next = smooth(w_next, nullptr);
      if (!std::isfinite(f_next))
        throw numeric_error("minimize_composite: non-finite objective", to_std(w_next));
      const double quad = fw + g.dot(step) +
                          (1.0 + cfg.armijo_c) / (2.0 * eta) * step.squaredNorm();
      if (f_next <= quad) break;
      eta *= cfg.backtrack_factor;
      first_try = false;
      if (eta < 1e-300)
        throw numeric_error("minimize_composite: step size underflow", to_std(w));
    }

    res.residual = (w - w_next).norm() / eta;

    if (first_try) {
      if (++streak >= cfg.grow_after) {
        eta *= 2.0;
        streak = 0;
      }
    } else {
      streak = 0;
    }

    w = w_next;
    fw = smooth(w, &g);
    if (!std::isfinite(fw) || !g.allFinite())
      throw numeric_error("minimize_composite: non-finite objective/gradient", to_std(w));
    const double obj = fw + reg.eval(w);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
    }

    if (res.residual <= cfg.tol) {
      ++it;
      break;
    }
  }

  res.w_hat = best_w;
  res.objective = best_obj;
  res.iters = it;
  res.converged = res.residual <= cfg.tol;
  return res;
}

namespace {

SmoothEvalGrad dataset_smooth(const Loss& loss, const std::vector<Sample>& dataset) {
  return [&loss, &dataset](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    const double inv_n = 1.0 / static_cast<double>(dataset.size());
    double acc = 0.0;
    if (grad) grad->setZero(w.size());
    for (const Sample& z : dataset) {
      acc += loss.eval(w, z);
      if (grad) *grad += loss.grad(w, z);
    }
    if (grad) *grad *= inv_n;
    return acc * inv_n;
  };
}

}  // namespace

SolverResult solve_erm(const ProblemSpec& spec, const std::vector<Sample>& dataset,
                       const SolverConfig& cfg) {
  if (dataset.empty()) throw usage_error("solve_erm: dataset is empty");
  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(spec.domain.dim);
  return minimize_composite(dataset_smooth(spec.loss, dataset), spec.constants.L, spec.reg,
                            spec.domain, cfg, w0);
}

SolverResult solve_penalized_erm(const ProblemSpec& spec, const std::vector<Sample>& dataset,
                                 const Regularizer& g, const SolverConfig& cfg) {
  if (dataset.empty()) throw usage_error("solve_penalized_erm: dataset is empty");
  if (spec.reg.kind() != RegKind::zero) {
    throw usage_error(
        "solve_penalized_erm applies to unregularized objectives; set reg to zero");
  }
  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(spec.domain.dim);
  const Regularizer scaled_g = g.scaled(1.0 / static_cast<double>(dataset.size()));
  return minimize_composite(dataset_smooth(spec.loss, dataset), spec.constants.L, scaled_g,
                            spec.domain, cfg, w0);
}

}  // namespace expconc
