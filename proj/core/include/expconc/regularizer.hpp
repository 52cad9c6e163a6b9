#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

#include "expconc/domain.hpp"

namespace expconc {

enum class RegKind { zero, l1, l2_squared, custom };

std::string to_string(RegKind k);
RegKind reg_kind_from_string(const std::string& s);

/// Convex regularizer R(w).
///
///   zero:       0
///   l1:         lambda * ||w||_1
///   l2_squared: (lambda/2) * ||w||_2^2
/// Custom regularizers supply eval/subgrad and optionally a prox callable.
class Regularizer {
 public:
  using EvalFn = std::function<double(const Eigen::VectorXd&)>;
  using SubgradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  // prox(v, eta) = argmin_u (1/(2 eta)) ||u - v||^2 + R(u)
  using ProxFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

  static Regularizer zero() { return Regularizer(RegKind::zero, 0.0); }
  static Regularizer l1(double lambda);
  static Regularizer l2_squared(double lambda);
  static Regularizer custom(EvalFn eval, SubgradFn subgrad, ProxFn prox = nullptr);

  RegKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  bool has_prox() const { return kind_ != RegKind::custom || static_cast<bool>(prox_); }

  double eval(const Eigen::VectorXd& w) const;
  Eigen::VectorXd subgrad(const Eigen::VectorXd& w) const;
  // Throws capability_error for a custom regularizer without a prox.
  Eigen::VectorXd prox(const Eigen::VectorXd& v, double eta) const;

  // factor * R(w); used to wrap g(w)/n as the regularizer of a penalized ERM.
  Regularizer scaled(double factor) const;

 private:
  Regularizer(RegKind k, double lambda) : kind_(k), lambda_(lambda) {}

  RegKind kind_;
  double lambda_;
  EvalFn eval_;
  SubgradFn subgrad_;
  ProxFn prox_;
};

// Exact sup - inf of R over the Euclidean ball (the range constant B of a
// bounded penalty): 0, lambda R sqrt(d), and (lambda/2) R^2 for the built-in
// kinds. Custom regularizers have no closed form and throw capability_error.
double penalty_range_bound(const Regularizer& reg, const Domain& domain);

}  // namespace expconc
