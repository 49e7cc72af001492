#include "relurec/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace relurec {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::invalid_shape: return "invalid-shape";
    case ErrorCode::degenerate_stack: return "degenerate-stack";
    case ErrorCode::accuracy_not_reached: return "accuracy-not-reached";
    case ErrorCode::size_limit: return "size-limit";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::missing_plant: return "missing-plant";
    case ErrorCode::degenerate_plant: return "degenerate-plant";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::inconsistent_solution: return "inconsistent-solution";
    case ErrorCode::schema: return "schema";
  }
  return "unknown";
}

bool all_finite(const Mat& m) { return m.allFinite(); }

CompactSvd compact_svd(const Mat& m, double rank_tol) {
  if (!(rank_tol > 0.0)) throw Error(ErrorCode::invalid_input, "rank_tol must be positive");
  if (!m.allFinite()) throw Error(ErrorCode::invalid_input, "matrix has non-finite entries");

  CompactSvd out;
  const Eigen::Index n = m.rows();
  const Eigen::Index d = m.cols();
  if (n == 0 || d == 0) {
    out.u = Mat(n, 0);
    out.v = Mat(d, 0);
    out.sigma = Vec(0);
    return out;
  }

  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  int r = 0;
  if (smax > 0.0) {
    while (r < s.size() && s(r) > rank_tol * smax) ++r;
  }
  out.rank = r;
  out.sigma = s.head(r);
  out.u = svd.matrixU().leftCols(r);
  out.v = svd.matrixV().leftCols(r);

  for (int k = 0; k < r; ++k) {
    Eigen::Index arg = 0;
    out.v.col(k).cwiseAbs().maxCoeff(&arg);
    if (out.v(arg, k) < 0.0) {
      out.v.col(k) *= -1.0;
      out.u.col(k) *= -1.0;
    }
  }
  return out;
}

Vec stacked_pinv_apply(const std::vector<Mat>& blocks, const Vec& target, double rank_tol) {
  if (blocks.empty()) throw Error(ErrorCode::invalid_input, "no blocks to stack");
  const Eigen::Index cols = blocks.front().cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw Error(ErrorCode::invalid_shape, "stacked blocks disagree in width");
    rows += b.rows();
  }
  if (target.size() != rows) throw Error(ErrorCode::invalid_shape, "target length does not match stack");

  Mat stack(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    stack.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  const CompactSvd svd = compact_svd(stack, rank_tol);
  if (svd.rank < rows) {
    throw Error(ErrorCode::degenerate_stack,
                "stack of " + std::to_string(rows) + " rows has rank " + std::to_string(svd.rank));
  }
  const Vec coef = (svd.u.transpose() * target).cwiseQuotient(svd.sigma);
  return svd.v * coef;
}

Mat psd_pinv(const Mat& g, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  const Vec& ev = es.eigenvalues();
  const double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
  Vec inv = Vec::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > rel_tol * top && ev(i) > 0.0) inv(i) = 1.0 / ev(i);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi2_survival(double r) {
  if (!(r >= 0.0)) throw Error(ErrorCode::invalid_input, "chi-square argument must be nonnegative");
  // 2 (1 - Phi(sqrt r)) written through erfc to keep relative accuracy deep in the tail.
  return std::erfc(std::sqrt(0.5 * r));
}

double chi2_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::invalid_input, "probability must lie in (0,1)");
  double lo = 0.0;
  double hi = 1.0;
  while (chi2_survival(hi) > p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) break;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_survival(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double integrate_tail(const std::function<double(double)>& f, double a) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double kTarget = 1e-9;
  constexpr double kNegligible = 1e-14;

  double total = 0.0;
  double err_total = 0.0;
  double lo = a;
  double width = 0.5;
  for (int panel = 0; panel < 400; ++panel) {
    const double hi = lo + width;
    double err = 0.0;
    const double v = gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-13, &err);
    total += v;
    err_total += err;
    if (std::abs(f(hi)) < kNegligible && std::abs(v) < 1e-12) {
      if (err_total > kTarget) {
        throw AccuracyError("tail quadrature error estimate above target", err_total);
      }
      return total;
    }
    lo = hi;
    width = std::min(width * 1.5, 8.0);
  }
  throw AccuracyError("tail quadrature did not reach a negligible integrand", err_total);
}

}  // namespace relurec
