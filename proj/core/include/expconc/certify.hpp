#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "expconc/constants.hpp"
#include "expconc/domain.hpp"
#include "expconc/loss.hpp"
#include "expconc/regularizer.hpp"

namespace expconc {

// Minimum-eigenvalue slack of the pointwise PSD test. Absorbs symmetrization
// rounding without masking genuinely negative directions down to ~1e-6.
inline constexpr double kPsdTolerance = 1e-8;

/// Where the pointwise condition hess - beta grad grad' >= 0 gets evaluated.
/// The condition is "for all w, z", which is not finitely checkable; this is
/// a certification heuristic and reports say so. Points are deterministic
/// given (counts, seed): low-discrepancy interior points, every 8th of them
/// rescaled to the boundary, plus the +-R e_i axis points. z-samples cover
/// the +-e_j feature directions at y in {-y_max, 0, y_max} and fill up with
/// low-discrepancy draws; fixed_z overrides generation entirely.
struct SamplingPlan {
  int w_points = 512;
  int z_points = 64;
  double y_max = 1.0;
  std::uint64_t seed = 0;
  std::vector<Sample> fixed_z;

  std::vector<Eigen::VectorXd> make_w_points(const Domain& domain) const;
  std::vector<Sample> make_z_points(int dim) const;
};

struct Witness {
  Eigen::VectorXd w;
  Sample z;
  Eigen::VectorXd direction;  // unit eigenvector of the worst matrix
  double quad_form = 0.0;     // direction' M direction = min eigenvalue seen
};

struct Certificate {
  enum class Status { certified, refuted };
  double beta = 0.0;
  Status status = Status::certified;
  std::optional<Witness> witness;  // present iff refuted
  long points_checked = 0;
  double min_eig_seen = 0.0;
};

struct ResidualReport {
  double min_residual = 0.0;
  std::size_t argmin = 0;
  std::size_t count = 0;
  double threshold = 0.0;
  bool pass = false;
};

/// Samples M(w,z) = hess(w,z) - beta grad(w,z) grad(w,z)' over the plan and
/// certifies iff every minimum eigenvalue is >= -kPsdTolerance. Refutation
/// returns the worst point with its eigen-direction.
Certificate expconcavity_check(const Loss& loss, double beta, const Domain& domain,
                               const SamplingPlan& plan);

// Largest certified beta in [1e-9, 1e3] by bisection (40 iterations);
// 0 if even 1e-9 is refuted.
double max_beta_estimate(const Loss& loss, const Domain& domain, const SamplingPlan& plan);

/// Residuals of the curvature inequality
///   f(w,z) - f(w',z) - <w-w', grad f(w',z)> - (sigma/2) <w-w', grad f(w',z)>^2
/// over the given triples; pass iff min >= -1e-9.
struct Lemma1Triple {
  Eigen::VectorXd w;
  Eigen::VectorXd w_prime;
  Sample z;
};
ResidualReport check_lemma1(const Loss& loss, const Constants& consts,
                            const std::vector<Lemma1Triple>& triples);

/// Residuals of the first-order optimality inequality at a population
/// optimum w*: <w - w*, grad F(w*)> + R(w) - R(w*) >= 0 for feasible w;
/// pass iff min >= -1e-7.
ResidualReport check_optimality_inequality(const Eigen::VectorXd& popF_grad_at_wstar,
                                           const Regularizer& reg, const Eigen::VectorXd& wstar,
                                           const std::vector<Eigen::VectorXd>& probes);

}  // namespace expconc
