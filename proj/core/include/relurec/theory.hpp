#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relurec/numerics.hpp"

namespace relurec {

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Monte-Carlo mean of |g_+|^2 for g ~ N(0, I_n): the statistical dimension of
// the nonnegative orthant, which equals n/2.
McEstimate orthant_statdim_mc(int n, long samples, std::uint64_t seed);

enum class Regime { success_whp, failure_whp, critical };
const char* to_string(Regime r);

// alpha = (n/2 - d)^2 / (64 n^2); bound = 4 exp(-n alpha). Above n = 2d the
// all-ones pattern is absent with probability >= 1 - bound, below it present.
struct KinematicEstimate {
  int n = 0;
  int d = 0;
  double alpha = 0.0;
  double bound = 0.0;
  Regime regime = Regime::critical;
};

KinematicEstimate kinematic_bound(int n, int d);

// Fraction of Gaussian draws X (n x d) admitting h != 0 with Xh >= 0.
double allones_frequency(int n, int d, int draws, std::uint64_t seed);

// g(theta) = 1/2 + q theta + 1/2 int_q^inf S(r) dr + theta with q = S^{-1}(2 theta),
// S the chi-square(1) survival function. g(0) = 1/2 and g(1/2) = 3/2.
double theta_g(double theta);
double solve_theta_star(double tol = 1e-10);

// Second moments M(u, v) = E[x x^T 1{u.x >= 0} 1{v.x >= 0}] for x ~ N(0, I).
// In the frame e1 = u, e2 = (v - gamma u)/s with gamma = u.v, s = sqrt(1 - gamma^2):
//   M = a e1e1^T + b (e1e2^T + e2e1^T) + m22 e2e2^T + c1 (I - e1e1^T - e2e2^T).
struct OrthantMoments {
  double c1 = 0.0;   // P(both half-spaces)
  double a = 0.0;
  double b = 0.0;
  double m22 = 0.0;
};

OrthantMoments orthant_moments(double gamma);
Mat orthant_moment_matrix(const Vec& u, const Vec& v);

// M(u, v) = c1 I + c2 (u v^T + v u^T) + c3 (u u^T + v v^T) for |gamma| < 1.
struct CurveCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

CurveCoefficients curve_coefficients(double gamma);

double curve_g_single(double gamma);
double curve_g1(double gamma);
double curve_g2(double gamma1, double gamma2);

// The 2x2 matrix expressing the Gram-inverse coefficients of two orthogonal
// planted neurons: beta_i = sum_k A_ik w_k.
Eigen::Matrix2d two_neuron_coefficients();

// Evaluates f on each grid point, optionally in parallel; output order follows the input.
std::vector<double> curve_grid(double (*f)(double), const std::vector<double>& gammas, unsigned threads = 1);

struct BetaInterval {
  double lo = 0.0;
  double hi = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double noise_norm = 0.0;
  bool empty = false;
  std::string reason;

  // beta eta / (eta - |z|) + |z|
  double distance_bound(double beta) const;
};

// lo = |z| (eta - |z|) / (gamma eta - |z|), hi = eta - |z|; requires |z| <= gamma eta / 2.
BetaInterval noisy_beta_interval(double eta, double noise_norm, double gamma);

// n >= max{4000 sigma^2 d log(54 n), 1024 d}.
struct ThresholdReport {
  bool satisfied = false;
  double noise_term = 0.0;
  double dimension_term = 0.0;
  std::string binding;  // "noise" or "dimension": the larger of the two terms
};

ThresholdReport threshold_check(double n, double d, double sigma2);

}  // namespace relurec
