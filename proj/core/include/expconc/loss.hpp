#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

#include "expconc/domain.hpp"

namespace expconc {

enum class LossKind { square, logistic, squared_hinge, custom };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

/// Per-sample loss f(w, z) with gradient and Hessian in w.
///
/// Built-ins are margin losses f(w, (x, y)) = phi(w'x, y):
///   square:        (w'x - y)^2
///   logistic:      log(1 + exp(-y w'x))
///   squared_hinge: max(0, 1 - y w'x)^2
/// Immutable after construction; eval/grad/hess are pure.
class Loss {
 public:
  using EvalFn = std::function<double(const Eigen::VectorXd&, const Sample&)>;
  using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Sample&)>;
  using HessFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Sample&)>;

  static Loss square() { return Loss(LossKind::square); }
  static Loss logistic() { return Loss(LossKind::logistic); }
  static Loss squared_hinge() { return Loss(LossKind::squared_hinge); }
  static Loss custom(EvalFn eval, GradFn grad, HessFn hess = nullptr);

  LossKind kind() const { return kind_; }
  bool has_hess() const { return kind_ != LossKind::custom || static_cast<bool>(hess_); }

  double eval(const Eigen::VectorXd& w, const Sample& z) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& w, const Sample& z) const;
  // Throws capability_error for a custom loss constructed without a Hessian.
  Eigen::MatrixXd hess(const Eigen::VectorXd& w, const Sample& z) const;

 private:
  explicit Loss(LossKind k) : kind_(k) {}

  LossKind kind_;
  EvalFn eval_;
  GradFn grad_;
  HessFn hess_;
};

}  // namespace expconc
