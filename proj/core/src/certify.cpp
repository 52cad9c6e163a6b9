#include "expconc/certify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "expconc/errors.hpp"
#include "expconc/rng.hpp"

namespace expconc {

namespace {

// Map a (d+1)-dimensional low-discrepancy point to the ball: last coordinate
// drives the radius via the uniform-ball transform, the rest the direction.
Eigen::VectorXd ball_point(const Eigen::VectorXd& h, int dim, double radius) {
  Eigen::VectorXd dir(dim);
  for (int k = 0; k < dim; ++k) dir[k] = 2.0 * h[k] - 1.0;
  const double nrm = dir.norm();
  if (nrm < 1e-15)
    dir = Eigen::VectorXd::Unit(dim, 0);
  else
    dir /= nrm;
  const double rho = std::pow(h[dim], 1.0 / static_cast<double>(dim));
  return (radius * rho) * dir;
}

}  // namespace

std::vector<Eigen::VectorXd> SamplingPlan::make_w_points(const Domain& domain) const {
  const int d = domain.dim;
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(w_points + w_points / 8 + 2 * d));

  // axis points first: they carry the extreme-margin cases
  for (int i = 0; i < d; ++i) {
    pts.push_back(domain.radius * Eigen::VectorXd::Unit(d, i));
    pts.push_back(-domain.radius * Eigen::VectorXd::Unit(d, i));
  }

  const Halton halton(d + 1);
  const std::uint64_t offset = 1 + (seed % 8191);
  const int interior = std::max(0, w_points - 2 * d);
  for (int i = 0; i < interior; ++i) {
    const Eigen::VectorXd h = halton.point(offset + static_cast<std::uint64_t>(i));
    Eigen::VectorXd w = ball_point(h, d, domain.radius);
    pts.push_back(w);
    if (i % 8 == 0 && w.norm() > 1e-12) pts.push_back(w * (domain.radius / w.norm()));
  }
  return pts;
}

std::vector<Sample> SamplingPlan::make_z_points(int dim) const {
  if (!fixed_z.empty()) return fixed_z;
  std::vector<Sample> zs;
  zs.reserve(static_cast<std::size_t>(z_points) + 6 * static_cast<std::size_t>(dim));

  // extreme block: +-e_j features crossed with y endpoints
  const double ys[3] = {-y_max, 0.0, y_max};
  for (int j = 0; j < dim; ++j) {
    for (double y : ys) {
      zs.emplace_back(Eigen::VectorXd::Unit(dim, j), y);
      zs.emplace_back(-Eigen::VectorXd::Unit(dim, j), y);
    }
  }

  const Halton halton(dim + 2);
  const std::uint64_t offset = 4099 + (seed % 8191);
  const int remaining = std::max(0, z_points - static_cast<int>(zs.size()));
  for (int i = 0; i < remaining; ++i) {
    const Eigen::VectorXd h = halton.point(offset + static_cast<std::uint64_t>(i));
    const Eigen::VectorXd x = ball_point(h, dim, 1.0);
    const double y = y_max * (2.0 * h[dim + 1] - 1.0);
    zs.emplace_back(x, y);
  }
  return zs;
}

Certificate expconcavity_check(const Loss& loss, double beta, const Domain& domain,
                               const SamplingPlan& plan) {
  if (beta <= 0.0) throw parameter_error("expconcavity_check: beta must be positive");
  if (!loss.has_hess()) throw capability_error("expconcavity_check: loss has no Hessian");

  const auto ws = plan.make_w_points(domain);
  const auto zs = plan.make_z_points(domain.dim);

  Certificate cert;
  cert.beta = beta;
  cert.min_eig_seen = std::numeric_limits<double>::infinity();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  Witness worst;
  for (const auto& w : ws) {
    for (const auto& z : zs) {
      const Eigen::VectorXd g = loss.grad(w, z);
      Eigen::MatrixXd M = loss.hess(w, z);
      M = 0.5 * (M + M.transpose()).eval();
      M.noalias() -= beta * g * g.transpose();
      eig.compute(M);
      const double lam = eig.eigenvalues()[0];
      ++cert.points_checked;
      if (lam < cert.min_eig_seen) {
        cert.min_eig_seen = lam;
        worst.w = w;
        worst.z = z;
        worst.direction = eig.eigenvectors().col(0);
        worst.quad_form = lam;
      }
    }
  }

  if (cert.min_eig_seen >= -kPsdTolerance) {
    cert.status = Certificate::Status::certified;
  } else {
    cert.status = Certificate::Status::refuted;
    cert.witness = std::move(worst);
  }
  return cert;
}

double max_beta_estimate(const Loss& loss, const Domain& domain, const SamplingPlan& plan) {
  const auto certified = [&](double beta) {
    return expconcavity_check(loss, beta, domain, plan).status == Certificate::Status::certified;
  };
  double lo = 1e-9, hi = 1e3;
  if (!certified(lo)) return 0.0;
  if (certified(hi)) return hi;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (certified(mid) ? lo : hi) = mid;
  }
  return lo;
}

ResidualReport check_lemma1(const Loss& loss, const Constants& consts,
                            const std::vector<Lemma1Triple>& triples) {
  ResidualReport rep;
  rep.threshold = -1e-9;
  rep.count = triples.size();
  rep.min_residual = std::numeric_limits<double>::infinity();
  const double slack = consts.R * 1e-9 + 1e-12;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    if (t.w.norm() > consts.R + slack || t.w_prime.norm() > consts.R + slack)
      throw usage_error("check_lemma1: point outside the domain ball");
    const Eigen::VectorXd g = loss.grad(t.w_prime, t.z);
    const double inner = (t.w - t.w_prime).dot(g);
    const double residual = loss.eval(t.w, t.z) - loss.eval(t.w_prime, t.z) - inner -
                            0.5 * consts.sigma * inner * inner;
    if (residual < rep.min_residual) {
      rep.min_residual = residual;
      rep.argmin = i;
    }
  }
  if (triples.empty()) rep.min_residual = 0.0;
  rep.pass = rep.min_residual >= rep.threshold;
  return rep;
}

ResidualReport check_optimality_inequality(const Eigen::VectorXd& popF_grad_at_wstar,
                                           const Regularizer& reg, const Eigen::VectorXd& wstar,
                                           const std::vector<Eigen::VectorXd>& probes) {
  ResidualReport rep;
  rep.threshold = -1e-7;
  rep.count = probes.size();
  rep.min_residual = std::numeric_limits<double>::infinity();
  const double r_star = reg.eval(wstar);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Eigen::VectorXd& w = probes[i];
    const double residual = (w - wstar).dot(popF_grad_at_wstar) + reg.eval(w) - r_star;
    if (residual < rep.min_residual) {
      rep.min_residual = residual;
      rep.argmin = i;
    }
  }
  if (probes.empty()) rep.min_residual = 0.0;
  rep.pass = rep.min_residual >= rep.threshold;
  return rep;
}

}  // namespace expconc
