#include "relurec/isometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "relurec/parallel.hpp"

namespace relurec {

namespace {

std::atomic<unsigned> g_threads{1};

Mat masked_rows(const Mat& x, const Mask& mask) {
  Mat out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) out.row(i).setZero();
  }
  return out;
}

// |X^T D_j t| summed over the rows selected by the mask.
double masked_xt_norm(const Mat& x, const Mask& mask, const Vec& t) {
  Vec acc = Vec::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) acc += t(i) * x.row(i).transpose();
  }
  return acc.norm();
}

std::size_t planted_index(const PatternSet& patterns, const Mat& x, const Vec& w) {
  const auto idx = patterns.find(mask_of(x, w));
  if (!idx) throw Error(ErrorCode::missing_plant, "planted pattern is not in the supplied set");
  return *idx;
}

template <class Lhs>
NicReport assemble(NicKind kind, const PatternSet& patterns, std::vector<std::size_t> planted, Lhs&& lhs_of) {
  NicReport rep;
  rep.kind = kind;
  rep.masks.reserve(patterns.size());
  for (const auto& p : patterns.patterns) rep.masks.push_back(p.mask);
  rep.lhs.assign(patterns.size(), 0.0);
  parallel_for(patterns.size(), g_threads.load(), [&](std::size_t j) { rep.lhs[j] = lhs_of(j); });
  std::sort(planted.begin(), planted.end());
  rep.planted_indices = planted;
  rep.max_lhs = 0.0;
  for (std::size_t j = 0; j < patterns.size(); ++j) {
    if (std::binary_search(planted.begin(), planted.end(), j)) continue;
    rep.max_lhs = std::max(rep.max_lhs, rep.lhs[j]);
  }
  rep.holds = rep.max_lhs < 1.0 - kNicMargin;
  rep.marginal = std::abs(rep.max_lhs - 1.0) <= kNicMargin;
  return rep;
}

void require_full_column_rank(const Mat& m, const char* what) {
  if (compact_svd(m).rank < m.cols()) throw Error(ErrorCode::rank_deficient, what);
}

}  // namespace

void set_isometry_threads(unsigned threads) { g_threads.store(std::max(1u, threads)); }

const char* to_string(NicKind kind) {
  switch (kind) {
    case NicKind::nic_l: return "nic_l";
    case NicKind::nic_1: return "nic_1";
    case NicKind::nnic_1: return "nnic_1";
    case NicKind::nic_k: return "nic_k";
    case NicKind::nnic_k: return "nnic_k";
    case NicKind::snic_orth: return "snic_orth";
  }
  return "nic";
}

NicReport nic_linear(const Mat& x, const Vec& w_star, const PatternSet& patterns) {
  if (x.rows() <= x.cols()) throw Error(ErrorCode::rank_deficient, "linear condition needs n > d");
  require_full_column_rank(x, "X^T X is singular");
  const Vec w_hat = w_star / w_star.norm();
  const Vec t = x * (x.transpose() * x).ldlt().solve(w_hat);
  return assemble(NicKind::nic_l, patterns, {}, [&](std::size_t j) { return masked_xt_norm(x, patterns[j].mask, t); });
}

NicReport nic_relu_single(const Mat& x, const Vec& w_star, const PatternSet& patterns) {
  const std::size_t istar = planted_index(patterns, x, w_star);
  const Mat dx = masked_rows(x, patterns[istar].mask);
  require_full_column_rank(dx, "X^T D X of the planted pattern is singular");
  const Vec w_hat = w_star / w_star.norm();
  const Vec t = dx * (dx.transpose() * dx).ldlt().solve(w_hat);
  return assemble(NicKind::nic_1, patterns, {istar},
                  [&](std::size_t j) { return masked_xt_norm(x, patterns[j].mask, t); });
}

NicReport nnic_single(const Mat& x, const Vec& w_star, const PatternSet& patterns) {
  return nic_multi(x, {w_star}, {1.0}, patterns, true);
}

NicReport nic_multi(const Mat& x, const std::vector<Vec>& ws, const std::vector<double>& rs,
                    const PatternSet& patterns, bool normalized) {
  if (ws.empty() || ws.size() != rs.size()) throw Error(ErrorCode::invalid_input, "need matching w and r lists");
  std::vector<std::size_t> planted;
  for (const Vec& w : ws) planted.push_back(planted_index(patterns, x, w));
  if (std::set<std::size_t>(planted.begin(), planted.end()).size() != planted.size()) {
    throw Error(ErrorCode::degenerate_stack, "planted neurons share an arrangement pattern");
  }

  std::vector<Mat> stack;
  Eigen::Index total = 0;
  std::vector<Vec> targets;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const Mat dx = masked_rows(x, patterns[planted[i]].mask);
    const double sgn = rs[i] < 0.0 ? -1.0 : 1.0;
    if (normalized) {
      const CompactSvd svd = compact_svd(dx);
      if (svd.rank == 0) throw Error(ErrorCode::rank_deficient, "planted pattern selects no data");
      const Vec wt = svd.sigma.asDiagonal() * (svd.v.transpose() * ws[i]);
      stack.push_back(svd.u.transpose());
      targets.push_back(sgn * wt / wt.norm());
    } else {
      stack.push_back(dx.transpose());
      targets.push_back(sgn * ws[i] / ws[i].norm());
    }
    total += targets.back().size();
  }
  Vec target(total);
  Eigen::Index at = 0;
  for (const Vec& t : targets) {
    target.segment(at, t.size()) = t;
    at += t.size();
  }
  const Vec lambda = stacked_pinv_apply(stack, target);

  const NicKind kind = normalized ? (ws.size() == 1 ? NicKind::nnic_1 : NicKind::nnic_k)
                                  : (ws.size() == 1 ? NicKind::nic_1 : NicKind::nic_k);
  if (!normalized) {
    return assemble(kind, patterns, planted,
                    [&](std::size_t j) { return masked_xt_norm(x, patterns[j].mask, lambda); });
  }
  return assemble(kind, patterns, planted, [&](std::size_t j) {
    const CompactSvd svd = compact_svd(masked_rows(x, patterns[j].mask));
    if (svd.rank == 0) return 0.0;
    return (svd.u.transpose() * lambda).norm();
  });
}

NicReport snic_orth(const Mat& x, const PatternSet& patterns) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double dev = (x.transpose() * x - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > 1e-6) throw Error(ErrorCode::invalid_input, "matrix does not have orthonormal columns");
  const double room = static_cast<double>(n - d);
  NicReport rep = assemble(NicKind::snic_orth, patterns, {}, [&](std::size_t j) {
    const double tr = patterns[j].trace();
    if (room <= 0.0) return tr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return tr / room;
  });
  int max_trace = 0;
  for (const auto& p : patterns.patterns) max_trace = std::max(max_trace, p.trace());
  rep.holds = max_trace <= n - d;
  rep.marginal = false;
  return rep;
}

void write_nic_csv(std::ostream& os, const NicReport& report) {
  os << "kind,mask,lhs,holds\n";
  os.precision(12);
  for (std::size_t j = 0; j < report.masks.size(); ++j) {
    os << to_string(report.kind) << ',' << mask_string(report.masks[j]) << ',' << report.lhs[j] << ','
       << (report.holds ? 1 : 0) << '\n';
  }
}

}  // namespace relurec
