#include "expconc/constants.hpp"

#include <algorithm>
#include <cmath>

#include "expconc/errors.hpp"

namespace expconc {

double curvature_sigma(double G, double R, double beta) {
  if (G <= 0.0 || R <= 0.0 || beta <= 0.0)
    throw parameter_error("curvature_sigma: G, R, beta must be positive");
  return 0.5 * std::min(1.0 / (8.0 * G * R), beta);
}

Constants derive_constants(const Loss& loss, const Domain& domain, double beta, double L,
                           std::optional<double> G_opt) {
  if (beta <= 0.0) throw parameter_error("derive_constants: beta must be positive");
  if (L <= 0.0) throw parameter_error("derive_constants: L must be positive");
  if (G_opt && *G_opt <= 0.0) throw parameter_error("derive_constants: G must be positive");
  if (!G_opt && !loss.has_hess())
    throw capability_error(
        "derive_constants: G = sqrt(L/beta) requires a twice-differentiable loss; "
        "supply G explicitly");

  Constants c;
  c.G = G_opt ? *G_opt : std::sqrt(L / beta);
  c.L = L;
  c.beta = beta;
  c.R = domain.radius;
  c.d = domain.dim;
  c.sigma = curvature_sigma(c.G, c.R, beta);
  return c;
}

}  // namespace expconc
