#include "expconc/regularizer.hpp"

#include <cmath>

#include "expconc/errors.hpp"

namespace expconc {

std::string to_string(RegKind k) {
  switch (k) {
    case RegKind::zero: return "zero";
    case RegKind::l1: return "l1";
    case RegKind::l2_squared: return "l2_squared";
    case RegKind::custom: return "custom";
  }
  return "unknown";
}

RegKind reg_kind_from_string(const std::string& s) {
  if (s == "zero") return RegKind::zero;
  if (s == "l1") return RegKind::l1;
  if (s == "l2_squared") return RegKind::l2_squared;
  if (s == "custom") return RegKind::custom;
  throw parameter_error("unknown regularizer kind: " + s);
}

Regularizer Regularizer::l1(double lambda) {
  if (lambda < 0.0) throw parameter_error("l1: lambda must be >= 0");
  return Regularizer(RegKind::l1, lambda);
}

Regularizer Regularizer::l2_squared(double lambda) {
  if (lambda < 0.0) throw parameter_error("l2_squared: lambda must be >= 0");
  return Regularizer(RegKind::l2_squared, lambda);
}

Regularizer Regularizer::custom(EvalFn eval, SubgradFn subgrad, ProxFn prox) {
  if (!eval || !subgrad) throw parameter_error("custom regularizer needs eval and subgrad");
  Regularizer r(RegKind::custom, 0.0);
  r.eval_ = std::move(eval);
  r.subgrad_ = std::move(subgrad);
  r.prox_ = std::move(prox);
  return r;
}

double Regularizer::eval(const Eigen::VectorXd& w) const {
  switch (kind_) {
    case RegKind::zero: return 0.0;
    case RegKind::l1: return lambda_ * w.lpNorm<1>();
    case RegKind::l2_squared: return 0.5 * lambda_ * w.squaredNorm();
    case RegKind::custom: return eval_(w);
  }
  return 0.0;
}

Eigen::VectorXd Regularizer::subgrad(const Eigen::VectorXd& w) const {
  switch (kind_) {
    case RegKind::zero:
      return Eigen::VectorXd::Zero(w.size());
    case RegKind::l1: {
      Eigen::VectorXd g(w.size());
      for (Eigen::Index i = 0; i < w.size(); ++i)
        g[i] = lambda_ * (w[i] > 0.0 ? 1.0 : (w[i] < 0.0 ? -1.0 : 0.0));
      return g;
    }
    case RegKind::l2_squared:
      return lambda_ * w;
    case RegKind::custom:
      return subgrad_(w);
  }
  return Eigen::VectorXd::Zero(w.size());
}

Eigen::VectorXd Regularizer::prox(const Eigen::VectorXd& v, double eta) const {
  if (eta <= 0.0) throw parameter_error("prox: eta must be positive");
  switch (kind_) {
    case RegKind::zero:
      return v;
    case RegKind::l1: {
      if (lambda_ == 0.0) return v;
      const double t = eta * lambda_;
      Eigen::VectorXd u(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]) - t;
        u[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
      }
      return u;
    }
    case RegKind::l2_squared:
      return v / (1.0 + eta * lambda_);
    case RegKind::custom:
      if (!prox_) throw capability_error("custom regularizer has no prox");
      return prox_(v, eta);
  }
  return v;
}

Regularizer Regularizer::scaled(double factor) const {
  if (factor < 0.0) throw parameter_error("scaled: factor must be >= 0");
  switch (kind_) {
    case RegKind::zero:
      return zero();
    case RegKind::l1:
      return factor == 0.0 ? zero() : l1(lambda_ * factor);
    case RegKind::l2_squared:
      return factor == 0.0 ? zero() : l2_squared(lambda_ * factor);
    case RegKind::custom: {
      if (factor == 0.0) return zero();
      auto e = eval_;
      auto s = subgrad_;
      ProxFn p;
      if (prox_) {
        // prox of factor*R at step eta is prox of R at step factor*eta
        auto base = prox_;
        p = [base, factor](const Eigen::VectorXd& v, double eta) {
          return base(v, factor * eta);
        };
      }
      return custom([e, factor](const Eigen::VectorXd& w) { return factor * e(w); },
                    [s, factor](const Eigen::VectorXd& w) {
                      return (factor * s(w)).eval();
                    },
                    p);
    }
  }
  return zero();
}

double penalty_range_bound(const Regularizer& reg, const Domain& domain) {
  const double R = domain.radius;
  switch (reg.kind()) {
    case RegKind::zero:
      return 0.0;
    case RegKind::l1:
      // sup of ||w||_1 over ||w||_2 <= R is R sqrt(d); inf is 0 at the origin.
      return reg.lambda() * R * std::sqrt(static_cast<double>(domain.dim));
    case RegKind::l2_squared:
      return 0.5 * reg.lambda() * R * R;
    case RegKind::custom:
      throw capability_error("no closed-form range for a custom regularizer");
  }
  throw parameter_error("unknown regularizer kind");
}

}  // namespace expconc
