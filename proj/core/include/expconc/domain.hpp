#pragma once

#include <Eigen/Core>

#include "expconc/errors.hpp"

namespace expconc {

// Euclidean ball {w : ||w||_2 <= radius} in R^dim. All bound formulas in this
// library are specialized to ball enclosure, so the ball is the only domain.
struct Domain {
  double radius = 1.0;
  int dim = 1;

  Domain() = default;
  Domain(double radius_, int dim_) : radius(radius_), dim(dim_) {
    if (radius <= 0.0) throw parameter_error("Domain: radius must be positive");
    if (dim < 1) throw parameter_error("Domain: dim must be >= 1");
  }

  bool contains(const Eigen::VectorXd& w, double slack = 0.0) const {
    return w.size() == dim && w.norm() <= radius + slack;
  }
};

// One observation z = (x, y). Generators keep ||x||_2 <= 1 and |y| bounded.
struct Sample {
  Eigen::VectorXd x;
  double y = 0.0;

  Sample() = default;
  Sample(Eigen::VectorXd x_, double y_) : x(std::move(x_)), y(y_) {}
};

}  // namespace expconc
