#include "relurec/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relurec/arrangements.hpp"
#include "relurec/ensembles.hpp"
#include "relurec/parallel.hpp"
#include "relurec/rng.hpp"

namespace relurec {

namespace {

// Below this the frame e2 is numerically meaningless and the limits apply.
constexpr double kMinSine = 1e-9;

void require_unit_interval(double gamma) {
  if (!(std::abs(gamma) <= 1.0 + 1e-12)) throw Error(ErrorCode::invalid_input, "gamma must lie in [-1, 1]");
}

// |sum_i M(h, w_i) beta_i| with beta solving the Gram system sum_k M(w_i, w_k) beta_k = w_i.
// This is the limit of the condition's left-hand side for planted unit directions w_i.
double planted_lhs(const std::vector<Vec>& ws, const Vec& h, Vec* beta_out = nullptr) {
  const auto k = static_cast<Eigen::Index>(ws.size());
  const Eigen::Index d = h.size();
  Mat gram(k * d, k * d);
  Vec rhs(k * d);
  for (Eigen::Index i = 0; i < k; ++i) {
    rhs.segment(i * d, d) = ws[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) {
      gram.block(i * d, j * d, d, d) =
          orthant_moment_matrix(ws[static_cast<std::size_t>(i)], ws[static_cast<std::size_t>(j)]);
    }
  }
  const Vec beta = gram.colPivHouseholderQr().solve(rhs);
  Vec acc = Vec::Zero(d);
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += orthant_moment_matrix(h, ws[static_cast<std::size_t>(i)]) * beta.segment(i * d, d);
  }
  if (beta_out) *beta_out = beta;
  return acc.norm();
}

Vec e(Eigen::Index i, Eigen::Index d = 3) { return Vec::Unit(d, i); }

}  // namespace

McEstimate orthant_statdim_mc(int n, long samples, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_input, "n must be positive");
  if (samples < 100) throw Error(ErrorCode::invalid_input, "need at least 100 samples");
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double sum = 0.0;
  double sum2 = 0.0;
  for (long s = 0; s < samples; ++s) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = g(rng);
      if (x > 0.0) v += x * x;
    }
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / static_cast<double>(samples);
  const double var = std::max(0.0, sum2 / static_cast<double>(samples) - m * m);
  return {m, std::sqrt(var / static_cast<double>(samples - 1))};
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::success_whp: return "success_whp";
    case Regime::failure_whp: return "failure_whp";
    case Regime::critical: return "critical";
  }
  return "critical";
}

KinematicEstimate kinematic_bound(int n, int d) {
  if (n < 1 || d < 1) throw Error(ErrorCode::invalid_input, "n and d must be positive");
  KinematicEstimate k;
  k.n = n;
  k.d = d;
  const double gap = 0.5 * n - d;
  k.alpha = gap * gap / (64.0 * n * static_cast<double>(n));
  k.bound = std::min(1.0, 4.0 * std::exp(-n * k.alpha));
  k.regime = n > 2 * d ? Regime::success_whp : (n < 2 * d ? Regime::failure_whp : Regime::critical);
  return k;
}

double allones_frequency(int n, int d, int draws, std::uint64_t seed) {
  if (draws < 1) throw Error(ErrorCode::invalid_input, "need at least one draw");
  int hits = 0;
  for (int t = 0; t < draws; ++t) {
    const DataMatrix x = gen_matrix(MatrixKind::gaussian, n, d, derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    if (allones_margin(x.mat).t_star > 1e-9) ++hits;
  }
  return static_cast<double>(hits) / draws;
}

double theta_g(double theta) {
  if (!(theta >= 0.0 && theta <= 0.5)) throw Error(ErrorCode::invalid_input, "theta must lie in [0, 1/2]");
  if (theta == 0.0) return 0.5;
  const double q = 2.0 * theta >= 1.0 ? 0.0 : chi2_quantile(2.0 * theta);
  // From 0 the tail integral is the chi-square(1) mean; quadrature struggles with the cusp there.
  const double tail = q == 0.0 ? 1.0 : integrate_tail([](double r) { return chi2_survival(r); }, q);
  return 0.5 + q * theta + 0.5 * tail + theta;
}

double solve_theta_star(double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_input, "tolerance must be positive");
  double lo = 1e-4;
  double hi = 0.4999;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (theta_g(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

OrthantMoments orthant_moments(double gamma) {
  require_unit_interval(gamma);
  gamma = std::clamp(gamma, -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));
  if (s < kMinSine) {
    if (gamma > 0.0) return {0.5, 0.5, 0.0, 0.5};
    return {0.0, 0.0, 0.0, 0.0};
  }
  const double k = gamma / s;
  OrthantMoments m;
  m.c1 = integrate_tail([k](double x) { return normal_pdf(x) * normal_cdf(k * x); }, 0.0);
  m.a = integrate_tail([k](double x) { return x * x * normal_pdf(x) * normal_cdf(k * x); }, 0.0);
  m.b = integrate_tail([k](double x) { return x * normal_pdf(x) * normal_pdf(k * x); }, 0.0);
  m.m22 = integrate_tail(
      [k](double x) { return normal_pdf(x) * (normal_cdf(k * x) - k * x * normal_pdf(k * x)); }, 0.0);
  return m;
}

Mat orthant_moment_matrix(const Vec& u, const Vec& v) {
  if (u.size() != v.size() || u.size() < 2) throw Error(ErrorCode::invalid_shape, "need two vectors of equal dimension >= 2");
  const Vec e1 = u / u.norm();
  const Vec vh = v / v.norm();
  const double gamma = std::clamp(e1.dot(vh), -1.0, 1.0);
  const Eigen::Index d = u.size();
  const Vec perp = vh - gamma * e1;
  const double s = perp.norm();
  if (s < kMinSine) return gamma > 0.0 ? Mat(0.5 * Mat::Identity(d, d)) : Mat(Mat::Zero(d, d));
  const Vec e2 = perp / s;
  const OrthantMoments m = orthant_moments(gamma);
  Mat out = m.c1 * Mat::Identity(d, d);
  out += (m.a - m.c1) * e1 * e1.transpose();
  out += m.b * (e1 * e2.transpose() + e2 * e1.transpose());
  out += (m.m22 - m.c1) * e2 * e2.transpose();
  return out;
}

CurveCoefficients curve_coefficients(double gamma) {
  require_unit_interval(gamma);
  const double s = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));
  if (s < kMinSine) throw Error(ErrorCode::invalid_input, "coefficients are undefined for collinear directions");
  const OrthantMoments m = orthant_moments(gamma);
  CurveCoefficients c;
  c.c1 = m.c1;
  c.c3 = (m.m22 - m.c1) / (s * s);
  c.c2 = (m.b - gamma * s * c.c3) / s;
  return c;
}

double curve_g_single(double gamma) {
  require_unit_interval(gamma);
  gamma = std::clamp(gamma, -1.0, 1.0);
  const Vec h = gamma * e(0) + std::sqrt(std::max(0.0, 1.0 - gamma * gamma)) * e(1);
  return planted_lhs({e(0)}, h);
}

double curve_g1(double gamma) {
  require_unit_interval(gamma);
  gamma = std::clamp(gamma, -1.0, 1.0);
  const Vec h = gamma * e(0) + std::sqrt(std::max(0.0, 1.0 - gamma * gamma)) * e(1);
  return planted_lhs({e(0), Vec(-e(0))}, h);
}

double curve_g2(double gamma1, double gamma2) {
  const double r2 = gamma1 * gamma1 + gamma2 * gamma2;
  if (!(r2 <= 1.0 + 1e-12)) throw Error(ErrorCode::invalid_input, "(gamma1, gamma2) must lie in the unit disk");
  Vec h(3);
  h << gamma1, gamma2, std::sqrt(std::max(0.0, 1.0 - r2));
  return planted_lhs({e(0), e(1)}, h);
}

Eigen::Matrix2d two_neuron_coefficients() {
  Vec beta;
  planted_lhs({e(0), e(1)}, e(2), &beta);
  Eigen::Matrix2d a;
  a << beta(0), beta(1), beta(3), beta(4);
  return a;
}

std::vector<double> curve_grid(double (*f)(double), const std::vector<double>& gammas, unsigned threads) {
  std::vector<double> out(gammas.size());
  parallel_for(gammas.size(), threads, [&](std::size_t i) { out[i] = f(gammas[i]); });
  return out;
}

double BetaInterval::distance_bound(double beta) const { return beta * eta / (eta - noise_norm) + noise_norm; }

BetaInterval noisy_beta_interval(double eta, double noise_norm, double gamma) {
  if (!(eta > 0.0) || !(noise_norm >= 0.0) || !(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::invalid_input, "need eta > 0, noise_norm >= 0 and gamma in (0, 1]");
  }
  BetaInterval b;
  b.eta = eta;
  b.noise_norm = noise_norm;
  b.gamma = gamma;
  const double slack = 1e-12 * eta;
  if (noise_norm > 0.5 * gamma * eta + slack) {
    b.empty = true;
    b.reason = "noise norm exceeds gamma * eta / 2";
    b.lo = std::numeric_limits<double>::quiet_NaN();
    b.hi = std::numeric_limits<double>::quiet_NaN();
    return b;
  }
  b.hi = eta - noise_norm;
  b.lo = noise_norm * (eta - noise_norm) / (gamma * eta - noise_norm);
  // At |z| = gamma eta / 2 the interval is a single point; absorb rounding.
  if (b.lo > b.hi && b.lo - b.hi <= slack) b.lo = b.hi;
  return b;
}

ThresholdReport threshold_check(double n, double d, double sigma2) {
  if (!(n > 0.0 && d > 0.0 && sigma2 >= 0.0)) throw Error(ErrorCode::invalid_input, "need n, d > 0 and sigma2 >= 0");
  ThresholdReport r;
  r.noise_term = 4000.0 * sigma2 * d * std::log(54.0 * n);
  r.dimension_term = 1024.0 * d;
  r.binding = r.noise_term > r.dimension_term ? "noise" : "dimension";
  r.satisfied = n >= std::max(r.noise_term, r.dimension_term);
  return r;
}

}  // namespace relurec
