#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "relurec/errors.hpp"

namespace relurec {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct CompactSvd {
  Mat u;       // n x r, orthonormal columns
  Vec sigma;   // r values, nonincreasing, all above the rank threshold
  Mat v;       // d x r, orthonormal columns
  int rank = 0;
};

// Singular values at or below rank_tol * sigma_max are dropped. Each right
// singular vector is signed so that its largest-magnitude entry is positive,
// which makes the factors a deterministic function of the input.
CompactSvd compact_svd(const Mat& m, double rank_tol = 1e-10);

// Minimum-norm solution of [B_1; B_2; ...] lambda = target, where the B_i are
// stacked vertically. Throws degenerate_stack if the stack lacks full row rank.
Vec stacked_pinv_apply(const std::vector<Mat>& blocks, const Vec& target,
                       double rank_tol = 1e-10);

// Pseudo-inverse of a symmetric positive semidefinite matrix, dropping
// eigenvalues at or below rel_tol * lambda_max.
Mat psd_pinv(const Mat& g, double rel_tol = 1e-12);

double normal_pdf(double x);
double normal_cdf(double x);

// Chi-square with one degree of freedom. chi2_quantile inverts chi2_survival:
// chi2_quantile(chi2_survival(r)) == r.
double chi2_survival(double r);
double chi2_quantile(double p);

// Integral of f over [a, inf). The integrand must decay at least exponentially.
double integrate_tail(const std::function<double(double)>& f, double a);

bool all_finite(const Mat& m);

}  // namespace relurec
