#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "expconc/bounds.hpp"
#include "expconc/errors.hpp"
#include "expconc/rng.hpp"
#include "oracles.hpp"

using namespace expconc;

namespace {

struct Draw {
  double L, G, R, sigma, delta, eps, alpha, dist, excess;
  int d;
  long n;
};

std::vector<Draw> parameter_grid(int count, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xb0, 0xb0));
  std::vector<Draw> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Draw p;
    p.L = rng.uniform(0.5, 4.0);
    p.G = rng.uniform(0.5, 4.0);
    p.R = rng.uniform(0.5, 2.0);
    p.sigma = rng.uniform(0.01, 1.0);
    p.delta = rng.uniform(0.01, 0.9);
    p.eps = rng.uniform(0.05, 2.0) * p.R;  // keep 6R/eps > 1 so d matters
    p.alpha = rng.uniform(0.01, 2.0);
    p.dist = rng.uniform(0.0, 2.0 * p.R);
    p.excess = rng.uniform(0.0, 1.0);
    p.d = 1 + static_cast<int>(rng.index(10));
    p.n = 2 + static_cast<long>(rng.index(4096));
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("covering log bound hits its closed forms and clamps at zero") {
    CHECK(covering_number_bound(1.0, 6.0, 7) == 0.0);
    CHECK(covering_number_bound(1.0, 0.6, 2) == doctest::Approx(std::log(100.0)).epsilon(1e-14));
    CHECK(covering_number_bound(2.0, 1.0, 3) ==
          doctest::Approx(std::log(1728.0)).epsilon(1e-14));
    CHECK(covering_number_bound(1.0, 7.0, 5) == 0.0);
    CHECK(covering_number_bound(1.0, 100.0, 5) == 0.0);
    CHECK_THROWS_AS(covering_number_bound(0.0, 1.0, 2), parameter_error);
    CHECK_THROWS_AS(covering_number_bound(1.0, 0.0, 2), parameter_error);
    CHECK_THROWS_AS(covering_number_bound(1.0, 1.0, 0), parameter_error);
  }

  TEST_CASE("union-bound constant matches hand values") {
    const double e = std::exp(1.0);
    CHECK(c_epsilon(2.0 / e, 1, 1.0, 6.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(c_epsilon(2.0 / (e * e), 2, 1.0, 6.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(c_epsilon(2.0 / e, 1, 1.0, 6.0 / e) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK_THROWS_AS(c_epsilon(0.0, 1, 1.0, 1.0), parameter_error);
    CHECK_THROWS_AS(c_epsilon(1.0, 1, 1.0, 1.0), parameter_error);
  }

  TEST_CASE("norm concentration matches hand values") {
    const double e = std::exp(1.0);
    CHECK(vector_bernstein(1.0, 1.0, 8, 2.0 / e) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(vector_bernstein(0.0, 0.0, 5, 0.3) == 0.0);
    CHECK(vector_bernstein(1.0, 4.0, 2, 2.0 / e) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK_THROWS_AS(vector_bernstein(1.0, 1.0, 0, 0.5), parameter_error);
    CHECK_THROWS_AS(vector_bernstein(-1.0, 1.0, 4, 0.5), parameter_error);
    CHECK_THROWS_AS(vector_bernstein(1.0, -1.0, 4, 0.5), parameter_error);
    CHECK_THROWS_AS(vector_bernstein(1.0, 1.0, 4, 1.5), parameter_error);
  }

  TEST_CASE("gradient concentration matches hand values and its algebraic identity") {
    const double e = std::exp(1.0);
    CHECK(grad_concentration_bound(1.0, 0.5, 1, 0.5, 8, 2.0 / e) ==
          doctest::Approx(0.75).epsilon(1e-14));
    CHECK(grad_concentration_bound(2.0, 0.25, 4, 0.25, 32, 2.0 / e) ==
          doctest::Approx(0.625).epsilon(1e-14));
    for (const auto& p : parameter_grid(100, 101)) {
      const double direct =
          grad_concentration_bound(p.G, p.alpha, p.d, p.sigma, p.n, p.delta);
      const double via_bernstein =
          vector_bernstein(p.G, p.alpha * p.d / p.sigma, p.n, p.delta);
      CHECK(direct == doctest::Approx(via_bernstein).epsilon(1e-14));
    }
    CHECK_THROWS_AS(grad_concentration_bound(1.0, 0.0, 1, 0.5, 8, 0.5), parameter_error);
    CHECK_THROWS_AS(grad_concentration_bound(1.0, 0.5, 1, 0.0, 8, 0.5), parameter_error);
  }

  TEST_CASE("net deviation matches its five-term hand value") {
    const double e = std::exp(1.0);
    // C = 4: terms 1 + 6 + 1 + sqrt(6) + 12
    CHECK(net_deviation_bound(1.0, 1.0, 2.0 / e, 1, 1.0, 6.0, 4, 1.0, 1.0) ==
          doctest::Approx(20.0 + std::sqrt(6.0)).epsilon(1e-14));
    // monotone in dist and excess
    for (const auto& p : parameter_grid(30, 102)) {
      const double base =
          net_deviation_bound(p.L, p.G, p.delta, p.d, p.R, p.eps, p.n, p.dist, p.excess);
      CHECK(net_deviation_bound(p.L, p.G, p.delta, p.d, p.R, p.eps, p.n, p.dist + 0.5,
                                p.excess) > base);
      CHECK(net_deviation_bound(p.L, p.G, p.delta, p.d, p.R, p.eps, p.n, p.dist,
                                p.excess + 0.5) > base);
    }
    CHECK_THROWS_AS(net_deviation_bound(1.0, 1.0, 0.5, 1, 1.0, 1.0, 4, -1.0, 0.0),
                    parameter_error);
    CHECK_THROWS_AS(net_deviation_bound(1.0, 1.0, 0.5, 1, 1.0, 1.0, 4, 0.0, -1.0),
                    parameter_error);
  }

  TEST_CASE("excess-risk bound equals the independent long-double sum") {
    const double e = std::exp(1.0);
    const auto [frozen, note] = theorem1_bound(1.0, 1.0, 1.0, 1, 1.0, 1, 2.0 / e);
    CHECK(note == ConfidenceNote::one_minus_two_delta);
    // 64(1+log 6) + 8(1+log 6) + 12 + 24 + 0.5 + 8 + 4/3
    CHECK(frozen == doctest::Approx(246.84001511775329).epsilon(1e-9));
    const double hand = 72.0 * (1.0 + std::log(6.0)) + 12.0 + 24.0 + 0.5 + 8.0 + 4.0 / 3.0;
    CHECK(frozen == doctest::Approx(hand).epsilon(1e-12));

    for (const auto& p : parameter_grid(200, 103)) {
      const auto [value, n2] = theorem1_bound(p.L, p.G, p.R, p.d, p.sigma, p.n, p.delta);
      const double oracle = static_cast<double>(
          oracles::theorem1_sum_ld(p.L, p.G, p.R, p.d, p.sigma, p.n, p.delta));
      CHECK(value == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(value > 0.0);
      CHECK(std::isfinite(value));
      (void)n2;
    }
  }

  TEST_CASE("all bounds decrease in n, grow with d, and grow as delta shrinks") {
    for (const auto& p : parameter_grid(100, 104)) {
      const double t1 = theorem1_bound(p.L, p.G, p.R, p.d, p.sigma, p.n, p.delta).first;
      CHECK(theorem1_bound(p.L, p.G, p.R, p.d, p.sigma, 2 * p.n, p.delta).first < t1);
      CHECK(theorem1_bound(p.L, p.G, p.R, p.d + 1, p.sigma, p.n, p.delta).first > t1);
      CHECK(theorem1_bound(p.L, p.G, p.R, p.d, p.sigma, p.n, p.delta / 2.0).first > t1);

      const double l4 = grad_concentration_bound(p.G, p.alpha, p.d, p.sigma, p.n, p.delta);
      CHECK(grad_concentration_bound(p.G, p.alpha, p.d, p.sigma, 2 * p.n, p.delta) < l4);
      CHECK(grad_concentration_bound(p.G, p.alpha, p.d + 1, p.sigma, p.n, p.delta) > l4);
      CHECK(grad_concentration_bound(p.G, p.alpha, p.d, p.sigma, p.n, p.delta / 2.0) > l4);

      const double l5 =
          net_deviation_bound(p.L, p.G, p.delta, p.d, p.R, p.eps, p.n, p.dist, p.excess);
      CHECK(net_deviation_bound(p.L, p.G, p.delta, p.d, p.R, p.eps, 2 * p.n, p.dist,
                                p.excess) < l5);
      CHECK(net_deviation_bound(p.L, p.G, p.delta, p.d + 1, p.R, p.eps, p.n, p.dist,
                                p.excess) > l5);
      CHECK(net_deviation_bound(p.L, p.G, p.delta / 2.0, p.d, p.R, p.eps, p.n, p.dist,
                                p.excess) > l5);

      const double ce = c_epsilon(p.delta, p.d, p.R, p.eps);
      CHECK(c_epsilon(p.delta, p.d + 1, p.R, p.eps) > ce);
      CHECK(c_epsilon(p.delta / 2.0, p.d, p.R, p.eps) > ce);
    }
  }

  TEST_CASE("excess-risk bound is affine in dimension") {
    for (const auto& p : parameter_grid(50, 105)) {
      const double v1 = theorem1_bound(p.L, p.G, p.R, p.d, p.sigma, p.n, p.delta).first;
      const double v2 = theorem1_bound(p.L, p.G, p.R, 2 * p.d, p.sigma, p.n, p.delta).first;
      const double nd = static_cast<double>(p.n);
      const double expected_gap =
          (64.0 * p.L * p.R * p.R + 8.0 * p.L * p.R / nd) * p.d * std::log(6.0 * p.R * nd) /
              nd +
          12.0 * p.d * std::log(2.0 / p.delta) / (nd * p.sigma);
      CHECK(v2 - v1 == doctest::Approx(expected_gap).epsilon(1e-9));
    }
  }

  TEST_CASE("honest mode halves delta and relabels the confidence") {
    for (const auto& p : parameter_grid(20, 106)) {
      const auto honest = theorem1_bound(p.L, p.G, p.R, p.d, p.sigma, p.n, p.delta, true);
      const auto halved = theorem1_bound(p.L, p.G, p.R, p.d, p.sigma, p.n, p.delta / 2.0);
      CHECK(honest.first == halved.first);
      CHECK(honest.second == ConfidenceNote::one_minus_delta);
      CHECK(halved.second == ConfidenceNote::one_minus_two_delta);
    }
    CHECK(to_string(ConfidenceNote::one_minus_delta) == "1-delta");
    CHECK(to_string(ConfidenceNote::one_minus_two_delta) == "1-2delta");
  }

  TEST_CASE("penalized bound adds exactly the range over n") {
    const auto base = theorem1_bound(1.0, 2.0, 1.0, 3, 0.05, 10, 0.1);
    CHECK(theorem2_bound(1.0, 2.0, 1.0, 3, 0.05, 10, 0.1, 0.0).first == base.first);
    CHECK(theorem2_bound(1.0, 2.0, 1.0, 3, 0.05, 10, 0.1, 1.0).first ==
          doctest::Approx(base.first + 0.1).epsilon(1e-15));
    double prev = -1.0;
    for (double B : {0.0, 0.5, 1.0, 2.0}) {
      const double v = theorem2_bound(1.0, 2.0, 1.0, 3, 0.05, 10, 0.1, B).first;
      CHECK(v >= prev);
      prev = v;
    }
    CHECK_THROWS_AS(theorem2_bound(1.0, 2.0, 1.0, 3, 0.05, 10, 0.1, -1.0), parameter_error);
  }

  TEST_CASE("bound preconditions are enforced") {
    CHECK_THROWS_AS(theorem1_bound(0.0, 1.0, 1.0, 1, 1.0, 1, 0.5), parameter_error);
    CHECK_THROWS_AS(theorem1_bound(1.0, 0.0, 1.0, 1, 1.0, 1, 0.5), parameter_error);
    CHECK_THROWS_AS(theorem1_bound(1.0, 1.0, 0.0, 1, 1.0, 1, 0.5), parameter_error);
    CHECK_THROWS_AS(theorem1_bound(1.0, 1.0, 1.0, 0, 1.0, 1, 0.5), parameter_error);
    CHECK_THROWS_AS(theorem1_bound(1.0, 1.0, 1.0, 1, 0.0, 1, 0.5), parameter_error);
    CHECK_THROWS_AS(theorem1_bound(1.0, 1.0, 1.0, 1, 1.0, 0, 0.5), parameter_error);
    CHECK_THROWS_AS(theorem1_bound(1.0, 1.0, 1.0, 1, 1.0, 1, 0.0), parameter_error);
    CHECK_THROWS_AS(theorem1_bound(1.0, 1.0, 1.0, 1, 1.0, 1, 1.0), parameter_error);
  }

  TEST_CASE("second-moment H matches its closed forms") {
    // all-zero gradients: H = I, both norms are Euclidean
    std::vector<Eigen::VectorXd> zeros(4, Eigen::VectorXd::Zero(3));
    auto [m0, h0] = empirical_H(zeros, 0.5, 0.25);
    CHECK(m0.M == Eigen::MatrixXd::Zero(3, 3));
    CHECK(m0.n_samples == 4);
    CHECK(h0.matrix() == Eigen::MatrixXd::Identity(3, 3));
    Eigen::VectorXd v(3);
    v << 1.0, -2.0, 2.0;
    CHECK(h0.norm(v) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(h0.dual_norm(v) == doctest::Approx(3.0).epsilon(1e-14));

    // single gradient e1 with sigma = alpha: H = diag(2, 1)
    std::vector<Eigen::VectorXd> one{Eigen::VectorXd::Unit(2, 0)};
    auto [m1, h1] = empirical_H(one, 0.3, 0.3);
    CHECK(m1.M(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m1.M(1, 1) == 0.0);
    CHECK(h1.matrix()(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(h1.matrix()(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h1.norm(Eigen::VectorXd::Unit(2, 0)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(h1.dual_norm(Eigen::VectorXd::Unit(2, 0)) ==
          doctest::Approx(1.0 / std::sqrt(2.0)));
  }

  TEST_CASE("second-moment H is symmetric PSD and satisfies the norm duality") {
    Rng rng(mix_seed(5, 20, 25));
    std::vector<Eigen::VectorXd> grads;
    for (int i = 0; i < 40; ++i) grads.push_back(rng.uniform_in_ball(4, 3.0));
    auto [mm, hn] = empirical_H(grads, 0.4, 0.1);

    CHECK((mm.M - mm.M.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mm.M);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd a = rng.uniform_in_ball(4, 2.0);
      const Eigen::VectorXd b = rng.uniform_in_ball(4, 2.0);
      CHECK(std::abs(a.dot(b)) <= hn.norm(a) * hn.dual_norm(b) + 1e-12);
      // the dual norm inverts the primal one through H
      CHECK(hn.dual_norm(hn.matrix() * a) == doctest::Approx(hn.norm(a)).epsilon(1e-10));
    }
  }

  TEST_CASE("weighted second moments match the finite-support average") {
    std::vector<Eigen::VectorXd> grads{Eigen::VectorXd::Unit(2, 0),
                                       Eigen::VectorXd::Unit(2, 1)};
    auto [mm, hn] = empirical_H(grads, 1.0, 1.0, {3.0, 1.0});
    CHECK(mm.M(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(mm.M(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(mm.M(0, 1) == 0.0);
    CHECK(hn.matrix()(0, 0) == doctest::Approx(1.75).epsilon(1e-14));
  }

  TEST_CASE("second-moment inputs are validated") {
    CHECK_THROWS_AS(empirical_H({}, 1.0, 1.0), usage_error);
    std::vector<Eigen::VectorXd> one{Eigen::VectorXd::Unit(2, 0)};
    CHECK_THROWS_AS(empirical_H(one, 0.0, 1.0), parameter_error);
    CHECK_THROWS_AS(empirical_H(one, 1.0, 0.0), parameter_error);
    CHECK_THROWS_AS(empirical_H(one, 1.0, 1.0, {1.0, 2.0}), parameter_error);
    CHECK_THROWS_AS(empirical_H(one, 1.0, 1.0, {0.0}), parameter_error);
    CHECK_THROWS_AS(HNorm(-Eigen::MatrixXd::Identity(2, 2)), numeric_error);
    HNorm h(Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(h.norm(Eigen::VectorXd::Zero(3)), parameter_error);
  }
}
