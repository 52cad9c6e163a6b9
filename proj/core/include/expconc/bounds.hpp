#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace expconc {

// The excess-risk bound's proof unions two delta-events, so its natural
// confidence is 1 - 2 delta; the honest mode substitutes delta/2 to report a
// plain 1 - delta statement.
enum class ConfidenceNote { one_minus_delta, one_minus_two_delta };

std::string to_string(ConfidenceNote c);

struct BoundReport {
  long n = 0;
  int d = 0;
  double delta = 0.0;
  double sigma = 0.0;
  double covering_log = 0.0;  // log N bound at the report's eps
  double c_eps = 0.0;
  double lemma4 = 0.0;  // gradient concentration at w*
  double lemma5 = 0.0;  // net deviation at (eps, dist, excess)
  double thm1 = 0.0;
  std::optional<double> thm2;
  ConfidenceNote confidence_note = ConfidenceNote::one_minus_two_delta;
};

// log N(W, eps) <= d log(6R/eps), clamped below at 0 (a one-point net
// always exists, so negative logs would corrupt C(eps)).
double covering_number_bound(double R, double eps, int d);

// C(eps) = 4 (log(2/delta) + d log(6R/eps)), with the clamped covering log.
double c_epsilon(double delta, int d, double R, double eps);

// Norm concentration of a centered i.i.d. vector average:
//   2 M log(2/delta)/m + sqrt(2 variance log(2/delta)/m).
double vector_bernstein(double M, double variance, long m, double delta);

// ||grad P(w*) - grad P_n(w*)||_{H^-1} bound:
//   2 G log(2/delta)/n + sqrt(2 alpha d log(2/delta)/(n sigma)).
// Identical to vector_bernstein(G, alpha d / sigma, n, delta).
double grad_concentration_bound(double G, double alpha, int d, double sigma, long n,
                                double delta);

// Uniform deviation of gradient differences over the ball via an eps-net:
//   L C dist/n + L C eps/n + sqrt(L C excess/n) + sqrt(L G C eps/n) + 2 L eps,
// with C = c_epsilon(delta, d, R, eps).
double net_deviation_bound(double L, double G, double delta, int d, double R, double eps,
                           long n, double dist, double excess);

// The excess-risk bound as the explicit seven-term sum:
//   64 L R^2 (log(2/delta) + d log(6Rn))/n
// + 8 L R (log(2/delta) + d log(6Rn))/n^2
// + 12 d log(2/delta)/(n sigma)
// + 24 G^2 log(2/delta)/n
// + G/(2n) + 8 L R/n + 4 R^2 log(2/delta)/(3n).
// Holds with probability 1 - 2 delta (the proof's union of two events);
// honest = true substitutes delta/2 and labels the result 1 - delta.
std::pair<double, ConfidenceNote> theorem1_bound(double L, double G, double R, int d,
                                                 double sigma, long n, double delta,
                                                 bool honest = false);

// theorem1_bound + B/n, for a penalty g with sup-inf range B over the ball.
std::pair<double, ConfidenceNote> theorem2_bound(double L, double G, double R, int d,
                                                 double sigma, long n, double delta, double B,
                                                 bool honest = false);

struct SecondMomentMatrix {
  Eigen::MatrixXd M;  // estimate of E[grad f(w*,z) grad f(w*,z)']
  long n_samples = 0;
};

// H = I + (sigma/alpha) M with the norm pair it induces.
class HNorm {
 public:
  HNorm(Eigen::MatrixXd H);

  const Eigen::MatrixXd& matrix() const { return H_; }
  double norm(const Eigen::VectorXd& v) const;       // sqrt(v' H v)
  double dual_norm(const Eigen::VectorXd& v) const;  // sqrt(v' H^-1 v)

 private:
  Eigen::MatrixXd H_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// M = weighted mean of gradient outer products; H = I + (sigma/alpha) M.
// Uniform weights when weights is empty; exact population H when the
// gradients and weights enumerate a finite support.
std::pair<SecondMomentMatrix, HNorm> empirical_H(const std::vector<Eigen::VectorXd>& grads,
                                                 double sigma, double alpha,
                                                 const std::vector<double>& weights = {});

}  // namespace expconc
