#include <gtest/gtest.h>

#include <cmath>

#include "relurec/numerics.hpp"
#include "relurec/theory.hpp"

#include "oracles.hpp"

using namespace relurec;

namespace {

// Closed-form second moments of a standard Gaussian over the intersection of
// two half-spaces with unit normals u, v (Rosenbaum's bivariate orthant formulas).
Mat moments_closed_form(const Vec& u, const Vec& v) {
  const double g = std::clamp(u.dot(v), -1.0, 1.0);
  const double s = std::sqrt(1.0 - g * g);
  const double p = (M_PI - std::acos(g)) / (2.0 * M_PI);
  const Eigen::Index d = u.size();
  if (s < 1e-12) return g > 0 ? Mat(0.5 * Mat::Identity(d, d)) : Mat(Mat::Zero(d, d));
  const Vec e2 = (v - g * u) / s;
  const double a = p + g * s / (2.0 * M_PI);
  const double b = s * s / (2.0 * M_PI);
  const double m22 = p - g * s / (2.0 * M_PI);
  Mat m = p * Mat::Identity(d, d);
  m += (a - p) * u * u.transpose() + b * (u * e2.transpose() + e2 * u.transpose()) + (m22 - p) * e2 * e2.transpose();
  return m;
}

double planted_lhs_reference(const std::vector<Vec>& ws, const Vec& h) {
  const auto k = static_cast<Eigen::Index>(ws.size());
  const Eigen::Index d = h.size();
  Mat gram(k * d, k * d);
  Vec rhs(k * d);
  for (Eigen::Index i = 0; i < k; ++i) {
    rhs.segment(i * d, d) = ws[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j)
      gram.block(i * d, j * d, d, d) = moments_closed_form(ws[static_cast<std::size_t>(i)], ws[static_cast<std::size_t>(j)]);
  }
  const Vec beta = gram.fullPivLu().solve(rhs);
  Vec acc = Vec::Zero(d);
  for (Eigen::Index i = 0; i < k; ++i) acc += moments_closed_form(h, ws[static_cast<std::size_t>(i)]) * beta.segment(i * d, d);
  return acc.norm();
}

Vec unit(double g, Eigen::Index d = 3) {
  Vec h = Vec::Zero(d);
  h(0) = g;
  h(1) = std::sqrt(std::max(0.0, 1.0 - g * g));
  return h;
}

}  // namespace

TEST(Theory, ThetaFunctionEndpointsAndRoot) {
  EXPECT_DOUBLE_EQ(theta_g(0.0), 0.5);
  EXPECT_NEAR(theta_g(0.5), 1.5, 1e-12);
  const double t = solve_theta_star();
  EXPECT_NEAR(theta_g(t), 1.0, 1e-8);
  // The same root by a crude independent bisection on the defining expression,
  // with the tail integral written as E[(g^2 - q)_+] for g standard normal.
  auto g_ref = [](double th) {
    const double q = chi2_quantile(2.0 * th);
    const double r = std::sqrt(q);
    // E[(g^2 - q)_+] = 2 [(1 - q) (1 - Phi(r)) + r phi(r)]
    const double tail = 2.0 * ((1.0 - q) * (1.0 - normal_cdf(r)) + r * normal_pdf(r));
    return 0.5 + q * th + 0.5 * tail + th;
  };
  double lo = 1e-4, hi = 0.4999;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g_ref(mid) < 1.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(t, 0.5 * (lo + hi), 1e-8);
  EXPECT_THROW(theta_g(0.7), Error);
}

TEST(Theory, StatisticalDimensionOfOrthant) {
  const McEstimate e = orthant_statdim_mc(8, 20000, 3);
  EXPECT_NEAR(e.mean, 4.0, 4.0 * e.stderr_);
  EXPECT_GT(e.stderr_, 0.0);
  EXPECT_THROW(orthant_statdim_mc(8, 10, 3), Error);
}

TEST(Theory, KinematicBoundFormula) {
  const KinematicEstimate k = kinematic_bound(200, 40);
  const double alpha = (100.0 - 40.0) * (100.0 - 40.0) / (64.0 * 200.0 * 200.0);
  EXPECT_NEAR(k.alpha, alpha, 1e-15);
  EXPECT_NEAR(k.bound, std::min(1.0, 4.0 * std::exp(-200.0 * alpha)), 1e-15);
  EXPECT_EQ(k.regime, Regime::success_whp);
  EXPECT_EQ(kinematic_bound(10, 10).regime, Regime::failure_whp);
  EXPECT_EQ(kinematic_bound(20, 10).regime, Regime::critical);
}

TEST(Theory, AllOnesFrequencyFollowsTheHalfwayThreshold) {
  // Wendel: P(all-ones cell exists) = 2^{1-n} sum_{k<d} C(n-1, k).
  auto wendel = [](int n, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += std::exp(std::lgamma(n) - std::lgamma(k + 1) - std::lgamma(n - k));
    return s * std::pow(2.0, 1 - n);
  };
  for (auto [n, d] : {std::pair{10, 3}, std::pair{12, 6}, std::pair{14, 9}}) {
    const int draws = 400;
    const double f = allones_frequency(n, d, draws, 5);
    const double p = wendel(n, d);
    EXPECT_NEAR(f, p, 4.0 * std::sqrt(p * (1 - p) / draws) + 1e-9) << n << "x" << d;
  }
}

TEST(Theory, OrthantMomentsMatchClosedForms) {
  for (double g : {-0.9, -0.4, 0.0, 0.3, 0.8, 0.99}) {
    const Vec u = Vec::Unit(4, 0);
    const Vec v = unit(g, 4);
    EXPECT_LT((orthant_moment_matrix(u, v) - moments_closed_form(u, v)).norm(), 1e-9) << g;
  }
  const Vec u = Vec::Unit(3, 0);
  EXPECT_LT((orthant_moment_matrix(u, u) - 0.5 * Mat::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT(orthant_moment_matrix(u, Vec(-u)).norm(), 1e-12);
}

TEST(Theory, CoefficientsAtOrthogonality) {
  const CurveCoefficients c = curve_coefficients(0.0);
  EXPECT_NEAR(c.c1, 0.25, 1e-10);
  EXPECT_NEAR(c.c2, 1.0 / (2.0 * M_PI), 1e-10);
  EXPECT_NEAR(c.c3, 0.0, 1e-10);
  EXPECT_THROW(curve_coefficients(1.0), Error);
}

TEST(Theory, CurvesMatchClosedFormReference) {
  for (double g = -1.0; g <= 1.0 + 1e-12; g += 0.125) {
    const double gc = std::clamp(g, -1.0, 1.0);
    EXPECT_NEAR(curve_g_single(gc), planted_lhs_reference({Vec::Unit(3, 0)}, unit(gc)), 1e-8) << gc;
    EXPECT_NEAR(curve_g1(gc), planted_lhs_reference({Vec::Unit(3, 0), Vec(-Vec::Unit(3, 0))}, unit(gc)), 1e-8) << gc;
  }
  for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.5}, std::pair{-0.3, 0.6}, std::pair{0.9, -0.1}}) {
    Vec h(3);
    h << a, b, std::sqrt(1.0 - a * a - b * b);
    EXPECT_NEAR(curve_g2(a, b), planted_lhs_reference({Vec::Unit(3, 0), Vec::Unit(3, 1)}, h), 1e-8);
  }
  EXPECT_NEAR(curve_g_single(0.0), std::sqrt(0.25 + 1.0 / (M_PI * M_PI)), 1e-10);
  EXPECT_NEAR(curve_g1(0.0), 2.0 / M_PI, 1e-10);
}

TEST(Theory, TwoNeuronCoefficientMatrix) {
  const Mat e0 = Vec::Unit(3, 0);
  const Mat e1 = Vec::Unit(3, 1);
  Mat gram(6, 6);
  gram << moments_closed_form(e0, e0), moments_closed_form(e0, e1), moments_closed_form(e1, e0),
      moments_closed_form(e1, e1);
  Vec rhs(6);
  rhs << e0, e1;
  const Vec beta = gram.fullPivLu().solve(rhs);
  const Eigen::Matrix2d a = two_neuron_coefficients();
  EXPECT_NEAR(a(0, 0), beta(0), 1e-9);
  EXPECT_NEAR(a(0, 1), beta(1), 1e-9);
  EXPECT_NEAR(a(1, 0), beta(3), 1e-9);
  EXPECT_NEAR(a(1, 1), beta(4), 1e-9);
}

TEST(Theory, CurveGridParallelMatchesSerial) {
  const std::vector<double> g{-0.9, -0.2, 0.0, 0.4, 0.95};
  EXPECT_EQ(curve_grid(&curve_g_single, g, 1), curve_grid(&curve_g_single, g, 4));
}

TEST(Theory, NoisyBetaInterval) {
  const BetaInterval b = noisy_beta_interval(2.0, 0.1, 0.5);
  ASSERT_FALSE(b.empty);
  EXPECT_NEAR(b.lo, 0.1 * 1.9 / (1.0 - 0.1), 1e-14);
  EXPECT_NEAR(b.hi, 1.9, 1e-14);
  EXPECT_NEAR(b.distance_bound(1.0), 1.0 * 2.0 / 1.9 + 0.1, 1e-14);
  EXPECT_TRUE(noisy_beta_interval(1.0, 0.4, 0.5).empty);
  const BetaInterval clean = noisy_beta_interval(1.0, 0.0, 0.3);
  EXPECT_EQ(clean.lo, 0.0);
  EXPECT_EQ(clean.hi, 1.0);
}

TEST(Theory, ThresholdTerms) {
  const ThresholdReport r = threshold_check(10240, 10, 1.0);
  EXPECT_NEAR(r.noise_term, 4000.0 * 10.0 * std::log(54.0 * 10240.0), 1e-6);
  EXPECT_NEAR(r.dimension_term, 10240.0, 1e-12);
  EXPECT_EQ(r.binding, "noise");
  EXPECT_FALSE(r.satisfied);
  const ThresholdReport q = threshold_check(10240, 10, 0.0);
  EXPECT_TRUE(q.satisfied);
  EXPECT_EQ(q.binding, "dimension");
}
