#include "expconc/loss.hpp"

#include <cmath>

#include "expconc/errors.hpp"

namespace expconc {

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::square: return "square";
    case LossKind::logistic: return "logistic";
    case LossKind::squared_hinge: return "squared_hinge";
    case LossKind::custom: return "custom";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "square") return LossKind::square;
  if (s == "logistic") return LossKind::logistic;
  if (s == "squared_hinge") return LossKind::squared_hinge;
  if (s == "custom") return LossKind::custom;
  throw parameter_error("unknown loss kind: " + s);
}

Loss Loss::custom(EvalFn eval, GradFn grad, HessFn hess) {
  if (!eval || !grad) throw parameter_error("custom loss needs eval and grad");
  Loss l(LossKind::custom);
  l.eval_ = std::move(eval);
  l.grad_ = std::move(grad);
  l.hess_ = std::move(hess);
  return l;
}

namespace {
// sigmoid(t) = 1/(1+exp(-t)), stable for large |t|
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log1p_exp(double t) {
  // log(1 + exp(t))
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}
}  // namespace

double Loss::eval(const Eigen::VectorXd& w, const Sample& z) const {
  switch (kind_) {
    case LossKind::square: {
      const double r = w.dot(z.x) - z.y;
      return r * r;
    }
    case LossKind::logistic:
      return log1p_exp(-z.y * w.dot(z.x));
    case LossKind::squared_hinge: {
      const double m = std::max(0.0, 1.0 - z.y * w.dot(z.x));
      return m * m;
    }
    case LossKind::custom:
      return eval_(w, z);
  }
  throw capability_error("loss eval: unreachable kind");
}

Eigen::VectorXd Loss::grad(const Eigen::VectorXd& w, const Sample& z) const {
  switch (kind_) {
    case LossKind::square:
      return 2.0 * (w.dot(z.x) - z.y) * z.x;
    case LossKind::logistic: {
      const double s = sigmoid(-z.y * w.dot(z.x));
      return (-z.y * s) * z.x;
    }
    case LossKind::squared_hinge: {
      const double m = std::max(0.0, 1.0 - z.y * w.dot(z.x));
      return (-2.0 * z.y * m) * z.x;
    }
    case LossKind::custom:
      return grad_(w, z);
  }
  throw capability_error("loss grad: unreachable kind");
}

Eigen::MatrixXd Loss::hess(const Eigen::VectorXd& w, const Sample& z) const {
  switch (kind_) {
    case LossKind::square:
      return 2.0 * z.x * z.x.transpose();
    case LossKind::logistic: {
      const double s = sigmoid(-z.y * w.dot(z.x));
      return (z.y * z.y * s * (1.0 - s)) * z.x * z.x.transpose();
    }
    case LossKind::squared_hinge: {
      // a.e. second derivative; 0 on the inactive side of the hinge
      const double c = (z.y * w.dot(z.x) < 1.0) ? 2.0 * z.y * z.y : 0.0;
      return c * z.x * z.x.transpose();
    }
    case LossKind::custom:
      if (!hess_) throw capability_error("custom loss has no Hessian");
      return hess_(w, z);
  }
  throw capability_error("loss hess: unreachable kind");
}

}  // namespace expconc
