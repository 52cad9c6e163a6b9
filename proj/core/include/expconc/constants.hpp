#pragma once

#include <optional>

#include "expconc/domain.hpp"
#include "expconc/loss.hpp"

namespace expconc {

// Problem constants. sigma = (1/2) min{1/(8 G R), beta} is the curvature
// coefficient of the quadratic lower bound certified by check_lemma1.
struct Constants {
  double G = 0.0;      // Lipschitz constant of f(., z)
  double L = 0.0;      // smoothness constant
  double beta = 0.0;   // exp-concavity parameter
  double sigma = 0.0;  // curvature constant
  double R = 0.0;      // domain radius
  int d = 0;           // dimension
};

// G defaults to sqrt(L/beta) for twice-differentiable smooth exp-concave
// losses; a user-supplied G wins since tight constants give tighter bounds.
Constants derive_constants(const Loss& loss, const Domain& domain, double beta, double L,
                           std::optional<double> G_opt = std::nullopt);

// sigma for explicit (G, R, beta), without a Loss at hand.
double curvature_sigma(double G, double R, double beta);

}  // namespace expconc
