#include "expconc/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expconc/certify.hpp"
#include "expconc/errors.hpp"
#include "expconc/rng.hpp"

namespace expconc {

void FiniteDistribution::validate(double x_max, double y_max) const {
  if (atoms.empty()) throw parameter_error("distribution has no atoms");
  if (weights.size() != atoms.size()) {
    throw parameter_error("distribution weights and atoms differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw parameter_error("distribution weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-15 * static_cast<double>(weights.size())) {
    throw parameter_error("distribution weights must sum to 1");
  }
  for (const Sample& a : atoms) {
    if (a.x.norm() > x_max + 1e-12) throw parameter_error("atom feature exceeds norm bound");
    if (std::abs(a.y) > y_max + 1e-12) throw parameter_error("atom label exceeds bound");
  }
}

FiniteDistribution make_distribution(int d, int m, double y_max, const Eigen::VectorXd& wbar,
                                     double noise, std::uint64_t seed) {
  if (d < 1) throw parameter_error("dimension must be >= 1");
  if (m < 1) throw parameter_error("atom count must be >= 1");
  if (!(y_max > 0.0)) throw parameter_error("y_max must be positive (labels are clipped to it)");
  if (!(noise >= 0.0)) throw parameter_error("noise half-width must be nonnegative");
  if (wbar.size() != d) throw parameter_error("wbar dimension mismatch");

  Rng rng(seed);
  FiniteDistribution dist;
  dist.atoms.reserve(m);
  dist.weights.assign(m, 1.0 / static_cast<double>(m));
  for (int j = 0; j < m; ++j) {
    Sample s;
    s.x = rng.uniform_in_ball(d, 1.0);
    const double eps = noise > 0.0 ? rng.uniform(-noise, noise) : 0.0;
    s.y = std::clamp(s.x.dot(wbar) + eps, -y_max, y_max);
    dist.atoms.push_back(std::move(s));
  }
  dist.validate(1.0, y_max);
  return dist;
}

PopulationObjective::PopulationObjective(FiniteDistribution dist, ProblemSpec spec)
    : dist_(std::move(dist)), spec_(std::move(spec)) {
  dist_.validate(1.0, std::numeric_limits<double>::infinity());
  for (const Sample& a : dist_.atoms) {
    if (a.x.size() != spec_.domain.dim) {
      throw parameter_error("atom dimension does not match the domain");
    }
  }
}

double PopulationObjective::smooth_eval(const Eigen::VectorXd& w) const {
  double out = 0.0;
  for (std::size_t j = 0; j < dist_.atoms.size(); ++j) {
    out += dist_.weights[j] * spec_.loss.eval(w, dist_.atoms[j]);
  }
  return out;
}

Eigen::VectorXd PopulationObjective::smooth_grad(const Eigen::VectorXd& w) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (std::size_t j = 0; j < dist_.atoms.size(); ++j) {
    g.noalias() += dist_.weights[j] * spec_.loss.grad(w, dist_.atoms[j]);
  }
  return g;
}

double PopulationObjective::eval(const Eigen::VectorXd& w) const {
  return smooth_eval(w) + spec_.reg.eval(w);
}

SmoothEvalGrad PopulationObjective::smooth() const {
  // Capture by pointer: the objective outlives any solve it is handed to.
  const PopulationObjective* self = this;
  return [self](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    if (grad != nullptr) *grad = self->smooth_grad(w);
    return self->smooth_eval(w);
  };
}

PopulationOptimum population_minimizer(const PopulationObjective& pop, const SolverConfig& cfg,
                                       int probes, std::uint64_t probe_seed) {
  SolverConfig tight = cfg;
  tight.tol = std::min(cfg.tol, 1e-10);
  const ProblemSpec& spec = pop.spec();
  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(spec.domain.dim);
  SolverResult res =
      minimize_composite(pop.smooth(), spec.constants.L, spec.reg, spec.domain, tight, w0);

  if (probes > 0) {
    Rng rng(probe_seed);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(probes);
    for (int i = 0; i < probes; ++i) {
      pts.push_back(rng.uniform_in_ball(spec.domain.dim, spec.domain.radius));
    }
    ResidualReport rep =
        check_optimality_inequality(pop.smooth_grad(res.w_hat), spec.reg, res.w_hat, pts);
    if (!rep.pass) {
      throw numeric_error("population minimizer failed first-order optimality probes",
                          std::vector<double>(res.w_hat.data(),
                                              res.w_hat.data() + res.w_hat.size()));
    }
  }

  PopulationOptimum out;
  out.wstar = res.w_hat;
  out.pstar = pop.eval(res.w_hat);
  out.solve = std::move(res);
  return out;
}

}  // namespace expconc
