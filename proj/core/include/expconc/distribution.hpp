#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "expconc/problem_spec.hpp"
#include "expconc/solver.hpp"

namespace expconc {

// A finitely supported law for z = (x, y). Finite support makes the
// population risk an exact finite sum, so excess-risk measurements carry no
// oracle error.
struct FiniteDistribution {
  std::vector<Sample> atoms;
  std::vector<double> weights;  // nonnegative, sums to 1

  // Validates the weight simplex constraints and per-atom bounds
  // ||x||_2 <= x_max, |y| <= y_max.
  void validate(double x_max = 1.0, double y_max = 1.0) const;
};

// m atoms: x_j uniform in the unit ball, y_j = x_j . wbar + uniform noise on
// [-noise, noise] clipped so |y_j| <= y_max; uniform weights. Deterministic
// in seed.
FiniteDistribution make_distribution(int d, int m, double y_max, const Eigen::VectorXd& wbar,
                                     double noise, std::uint64_t seed);

// Exact population objective over a finite support: F(w) = sum_j weight_j
// f(w, atom_j), P(w) = F(w) + R(w).
class PopulationObjective {
 public:
  PopulationObjective(FiniteDistribution dist, ProblemSpec spec);

  double smooth_eval(const Eigen::VectorXd& w) const;        // F(w)
  Eigen::VectorXd smooth_grad(const Eigen::VectorXd& w) const;
  double eval(const Eigen::VectorXd& w) const;               // P(w) = F + R
  // F value and gradient in one pass, in the solver's callback shape.
  SmoothEvalGrad smooth() const;

  const FiniteDistribution& dist() const { return dist_; }
  const ProblemSpec& spec() const { return spec_; }

 private:
  FiniteDistribution dist_;
  ProblemSpec spec_;
};

struct PopulationOptimum {
  Eigen::VectorXd wstar;
  double pstar = 0.0;
  SolverResult solve;  // the minimizing run, tolerance 1e-10
};

// Minimizes the exact population objective to high accuracy and validates the
// result with first-order optimality probes (check_optimality_inequality) at
// `probes` random feasible points.
PopulationOptimum population_minimizer(const PopulationObjective& pop,
                                       const SolverConfig& cfg = {}, int probes = 64,
                                       std::uint64_t probe_seed = 17);

}  // namespace expconc
