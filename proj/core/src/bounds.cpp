#include "expconc/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "expconc/errors.hpp"

namespace expconc {

std::string to_string(ConfidenceNote c) {
  switch (c) {
    case ConfidenceNote::one_minus_delta:
      return "1-delta";
    case ConfidenceNote::one_minus_two_delta:
      return "1-2delta";
  }
  throw parameter_error("unknown confidence note");
}

namespace {

void require_confidence(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw parameter_error("delta must lie in (0, 1)");
  }
}

void require_count(long m, const char* name) {
  if (m < 1) throw parameter_error(std::string(name) + " must be >= 1");
}

}  // namespace

double covering_number_bound(double R, double eps, int d) {
  if (!(R > 0.0)) throw parameter_error("radius must be positive");
  if (!(eps > 0.0)) throw parameter_error("eps must be positive");
  if (d < 1) throw parameter_error("dimension must be >= 1");
  return std::max(0.0, static_cast<double>(d) * std::log(6.0 * R / eps));
}

double c_epsilon(double delta, int d, double R, double eps) {
  require_confidence(delta);
  return 4.0 * (std::log(2.0 / delta) + covering_number_bound(R, eps, d));
}

double vector_bernstein(double M, double variance, long m, double delta) {
  require_confidence(delta);
  require_count(m, "sample count");
  if (!(M >= 0.0)) throw parameter_error("range bound must be nonnegative");
  if (!(variance >= 0.0)) throw parameter_error("variance bound must be nonnegative");
  const double log_term = std::log(2.0 / delta);
  const double md = static_cast<double>(m);
  return 2.0 * M * log_term / md + std::sqrt(2.0 * variance * log_term / md);
}

double grad_concentration_bound(double G, double alpha, int d, double sigma, long n,
                                double delta) {
  if (!(sigma > 0.0)) throw parameter_error("sigma must be positive");
  if (!(alpha > 0.0)) throw parameter_error("alpha must be positive");
  if (d < 1) throw parameter_error("dimension must be >= 1");
  return vector_bernstein(G, alpha * static_cast<double>(d) / sigma, n, delta);
}

double net_deviation_bound(double L, double G, double delta, int d, double R, double eps,
                           long n, double dist, double excess) {
  require_count(n, "sample count");
  if (!(L > 0.0)) throw parameter_error("smoothness constant must be positive");
  if (!(G >= 0.0)) throw parameter_error("gradient bound must be nonnegative");
  if (!(dist >= 0.0)) throw parameter_error("distance must be nonnegative");
  if (!(excess >= 0.0)) throw parameter_error("excess must be nonnegative");
  const double C = c_epsilon(delta, d, R, eps);
  const double nd = static_cast<double>(n);
  return L * C * dist / nd + L * C * eps / nd + std::sqrt(L * C * excess / nd) +
         std::sqrt(L * G * C * eps / nd) + 2.0 * L * eps;
}

std::pair<double, ConfidenceNote> theorem1_bound(double L, double G, double R, int d,
                                                 double sigma, long n, double delta,
                                                 bool honest) {
  require_confidence(delta);
  require_count(n, "sample count");
  if (!(L > 0.0)) throw parameter_error("smoothness constant must be positive");
  if (!(G > 0.0)) throw parameter_error("gradient bound must be positive");
  if (!(R > 0.0)) throw parameter_error("radius must be positive");
  if (!(sigma > 0.0)) throw parameter_error("sigma must be positive");
  if (d < 1) throw parameter_error("dimension must be >= 1");

  const double eff_delta = honest ? delta / 2.0 : delta;
  const double nd = static_cast<double>(n);
  const double log_term = std::log(2.0 / eff_delta);
  const double net_log = log_term + static_cast<double>(d) * std::log(6.0 * R * nd);

  const double value = 64.0 * L * R * R * net_log / nd +
                       8.0 * L * R * net_log / (nd * nd) +
                       12.0 * static_cast<double>(d) * log_term / (nd * sigma) +
                       24.0 * G * G * log_term / nd + G / (2.0 * nd) + 8.0 * L * R / nd +
                       4.0 * R * R * log_term / (3.0 * nd);
  return {value, honest ? ConfidenceNote::one_minus_delta
                        : ConfidenceNote::one_minus_two_delta};
}

std::pair<double, ConfidenceNote> theorem2_bound(double L, double G, double R, int d,
                                                 double sigma, long n, double delta, double B,
                                                 bool honest) {
  if (!(B >= 0.0)) throw parameter_error("penalty range must be nonnegative");
  auto [base, note] = theorem1_bound(L, G, R, d, sigma, n, delta, honest);
  return {base + B / static_cast<double>(n), note};
}

HNorm::HNorm(Eigen::MatrixXd H) : H_(std::move(H)) {
  if (H_.rows() != H_.cols() || H_.rows() < 1) {
    throw parameter_error("H must be square and nonempty");
  }
  llt_.compute(H_);
  if (llt_.info() != Eigen::Success) {
    throw numeric_error("H is not positive definite",
                        std::vector<double>(H_.data(), H_.data() + H_.size()));
  }
}

double HNorm::norm(const Eigen::VectorXd& v) const {
  if (v.size() != H_.rows()) throw parameter_error("vector dimension mismatch with H");
  return std::sqrt(v.dot(H_ * v));
}

double HNorm::dual_norm(const Eigen::VectorXd& v) const {
  if (v.size() != H_.rows()) throw parameter_error("vector dimension mismatch with H");
  return std::sqrt(v.dot(llt_.solve(v)));
}

std::pair<SecondMomentMatrix, HNorm> empirical_H(const std::vector<Eigen::VectorXd>& grads,
                                                 double sigma, double alpha,
                                                 const std::vector<double>& weights) {
  if (grads.empty()) throw usage_error("empirical_H needs at least one gradient");
  if (!(sigma > 0.0)) throw parameter_error("sigma must be positive");
  if (!(alpha > 0.0)) throw parameter_error("alpha must be positive");
  if (!weights.empty() && weights.size() != grads.size()) {
    throw parameter_error("weights must match gradients in length");
  }
  const auto dim = grads.front().size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  double total = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != dim) throw parameter_error("gradient dimensions disagree");
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0)) throw parameter_error("weights must be nonnegative");
    M.noalias() += w * grads[i] * grads[i].transpose();
    total += w;
  }
  if (!(total > 0.0)) throw parameter_error("weights must not all vanish");
  M /= total;
  SecondMomentMatrix out{M, static_cast<long>(grads.size())};
  Eigen::MatrixXd H =
      Eigen::MatrixXd::Identity(dim, dim) + (sigma / alpha) * M;
  return {std::move(out), HNorm(std::move(H))};
}

}  // namespace expconc
