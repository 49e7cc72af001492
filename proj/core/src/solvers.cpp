#include "relurec/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace relurec {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kTiny = 1e-300;

struct Layout {
  std::vector<Eigen::Index> off;  // block j occupies [off[j], off[j+1])
  Eigen::Index total() const { return off.back(); }
  Eigen::Index size(std::size_t j) const { return off[j + 1] - off[j]; }
};

Layout layout_of(const std::vector<Mat>& blocks) {
  Layout l;
  l.off.assign(blocks.size() + 1, 0);
  for (std::size_t j = 0; j < blocks.size(); ++j) l.off[j + 1] = l.off[j] + blocks[j].cols();
  return l;
}

Mat concat(const std::vector<Mat>& blocks, const Layout& l, Eigen::Index n) {
  Mat a(n, l.total());
  for (std::size_t j = 0; j < blocks.size(); ++j) a.middleCols(l.off[j], l.size(j)) = blocks[j];
  return a;
}

std::vector<Vec> split(const Vec& v, const Layout& l) {
  std::vector<Vec> out(l.off.size() - 1);
  for (std::size_t j = 0; j + 1 < l.off.size(); ++j) out[j] = v.segment(l.off[j], l.size(j));
  return out;
}

// Proximal map of thr * sum_j |v_j|; blocks below the threshold become exact zeros.
void block_soft_threshold(Vec& v, const Layout& l, double thr) {
  for (std::size_t j = 0; j + 1 < l.off.size(); ++j) {
    auto seg = v.segment(l.off[j], l.size(j));
    const double nrm = seg.norm();
    if (nrm <= thr) {
      seg.setZero();
    } else {
      seg *= (1.0 - thr / nrm);
    }
  }
}

double sum_norms(const Vec& v, const Layout& l) {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < l.off.size(); ++j) s += v.segment(l.off[j], l.size(j)).norm();
  return s;
}

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Newton's method on the optimality system of the minimum-norm problem
// restricted to the current support:
//   A_j^T lambda = w_j / |w_j|  (j in S),   A_S w_S = y.
// Accepted only when the refined point satisfies every optimality condition,
// including dual feasibility on the blocks outside S.
bool polish_min_norm(const Mat& a, const Layout& l, const Vec& y, double zero_threshold, Vec& w, Vec& lambda) {
  const std::size_t nb = l.off.size() - 1;
  double wmax = 0.0;
  for (std::size_t j = 0; j < nb; ++j) wmax = std::max(wmax, w.segment(l.off[j], l.size(j)).norm());
  if (wmax <= 0.0) return false;

  std::vector<std::size_t> support;
  Eigen::Index m = 0;
  for (std::size_t j = 0; j < nb; ++j) {
    if (w.segment(l.off[j], l.size(j)).norm() > zero_threshold * wmax) {
      support.push_back(j);
      m += l.size(j);
    }
  }
  const Eigen::Index n = a.rows();
  if (m + n > 900) return false;

  Mat as(n, m);
  Vec ws(m);
  std::vector<Eigen::Index> soff{0};
  for (std::size_t j : support) {
    const Eigen::Index r = l.size(j);
    as.middleCols(soff.back(), r) = a.middleCols(l.off[j], r);
    ws.segment(soff.back(), r) = w.segment(l.off[j], r);
    soff.push_back(soff.back() + r);
  }
  Vec lam = lambda;
  const double ynorm = std::max(y.norm(), kTiny);

  auto residual = [&](const Vec& wv, const Vec& lv, Vec& f) {
    f.resize(m + n);
    for (std::size_t k = 0; k < support.size(); ++k) {
      const Eigen::Index o = soff[k];
      const Eigen::Index r = soff[k + 1] - o;
      const double nrm = wv.segment(o, r).norm();
      if (nrm <= 0.0) return std::numeric_limits<double>::infinity();
      f.segment(o, r) = as.middleCols(o, r).transpose() * lv - wv.segment(o, r) / nrm;
    }
    f.tail(n) = (as * wv - y) / ynorm;
    return f.lpNorm<Eigen::Infinity>();
  };

  Vec f;
  double fnorm = residual(ws, lam, f);
  for (int it = 0; it < 40 && fnorm > 1e-14; ++it) {
    Mat jac = Mat::Zero(m + n, m + n);
    for (std::size_t k = 0; k < support.size(); ++k) {
      const Eigen::Index o = soff[k];
      const Eigen::Index r = soff[k + 1] - o;
      const Vec wk = ws.segment(o, r);
      const double nrm = wk.norm();
      const Vec u = wk / nrm;
      jac.block(o, o, r, r) = -(Mat::Identity(r, r) - u * u.transpose()) / nrm;
    }
    jac.topRightCorner(m, n) = as.transpose();
    jac.bottomLeftCorner(n, m) = as / ynorm;
    const Vec step = jac.completeOrthogonalDecomposition().solve(-f);
    double t = 1.0;
    Vec wn, ln, fn;
    double fnew = std::numeric_limits<double>::infinity();
    for (int bt = 0; bt < 30; ++bt) {
      wn = ws + t * step.head(m);
      ln = lam + t * step.tail(n);
      fnew = residual(wn, ln, fn);
      if (fnew < (1.0 - 1e-4 * t) * fnorm) break;
      t *= 0.5;
    }
    if (!(fnew < fnorm)) break;
    ws = wn;
    lam = ln;
    f = fn;
    fnorm = fnew;
  }
  if (!(fnorm < 1e-10)) return false;

  Vec wfull = Vec::Zero(l.total());
  for (std::size_t k = 0; k < support.size(); ++k) {
    wfull.segment(l.off[support[k]], l.size(support[k])) = ws.segment(soff[k], soff[k + 1] - soff[k]);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    if (std::find(support.begin(), support.end(), j) != support.end()) continue;
    const double dn = (a.middleCols(l.off[j], l.size(j)).transpose() * lam).norm();
    if (dn > 1.0 + 1e-9) return false;
  }
  w = wfull;
  lambda = lam;
  return true;
}

BlockSolution finish(const GroupProblem& p, const Layout& l, const Vec& w, const Vec& lambda, const SolverOptions& opts) {
  BlockSolution s;
  s.weights = split(w, l);
  s.dual = lambda;
  s.objective = group_objective(p, s.weights);
  s.active_blocks = active_set(s.weights, opts.zero_threshold);
  return s;
}

}  // namespace

bool GroupProblem::has_cones() const {
  return std::any_of(cones.begin(), cones.end(), [](const Mat& c) { return c.rows() > 0; });
}

void GroupProblem::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::invalid_input, "beta must be finite and >= 0");
  if (!y.allFinite()) throw Error(ErrorCode::invalid_input, "target has non-finite entries");
  for (const Mat& b : blocks) {
    if (b.rows() != y.size()) throw Error(ErrorCode::invalid_shape, "block row count differs from target length");
    if (!b.allFinite()) throw Error(ErrorCode::invalid_input, "block has non-finite entries");
  }
  if (!cones.empty()) {
    if (cones.size() != blocks.size()) throw Error(ErrorCode::invalid_shape, "need one cone per block");
    for (std::size_t j = 0; j < cones.size(); ++j) {
      if (cones[j].rows() > 0 && cones[j].cols() != blocks[j].cols()) {
        throw Error(ErrorCode::invalid_shape, "cone width differs from block width");
      }
    }
  }
}

double KktReport::max() const {
  return std::max({stationarity, dual_feasibility, primal_feasibility, cone_feasibility});
}

Vec group_apply(const GroupProblem& p, const std::vector<Vec>& weights) {
  Vec out = Vec::Zero(p.n());
  for (std::size_t j = 0; j < p.blocks.size(); ++j) out += p.blocks[j] * weights[j];
  return out;
}

double group_objective(const GroupProblem& p, const std::vector<Vec>& weights) {
  double reg = 0.0;
  for (const Vec& w : weights) reg += w.norm();
  if (p.beta > 0.0) return 0.5 * (group_apply(p, weights) - p.y).squaredNorm() + p.beta * reg;
  return reg;
}

std::vector<std::size_t> active_set(const std::vector<Vec>& weights, double zero_threshold) {
  double wmax = 0.0;
  for (const Vec& w : weights) wmax = std::max(wmax, w.norm());
  std::vector<std::size_t> act;
  if (wmax <= 0.0) return act;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j].norm() > zero_threshold * wmax) act.push_back(j);
  }
  return act;
}

BlockSolution solve_group_min_norm(const GroupProblem& p, const SolverOptions& opts) {
  p.validate();
  if (p.beta != 0.0) throw Error(ErrorCode::invalid_input, "minimum-norm solver needs beta == 0");
  if (p.has_cones()) throw Error(ErrorCode::invalid_input, "minimum-norm solver does not take cones");
  const auto t0 = Clock::now();
  const Layout l = layout_of(p.blocks);
  const Eigen::Index n = p.n();
  const Eigen::Index big_n = l.total();
  const double ynorm = p.y.norm();

  if (ynorm == 0.0) {
    BlockSolution s = finish(p, l, Vec::Zero(big_n), Vec::Zero(n), opts);
    s.converged = true;
    s.status = "zero target";
    return s;
  }

  const Mat a = concat(p.blocks, l, n);
  const Mat k = psd_pinv(a * a.transpose(), 1e-12);
  const Mat m = a.transpose() * k;
  const Vec x0 = m * p.y;
  const double infeas = (a * x0 - p.y).norm() / ynorm;
  if (infeas > 1e-6) {
    throw Error(ErrorCode::infeasible, "target outside the span of the blocks (relative residual " +
                                           std::to_string(infeas) + ")");
  }

  const double relax = opts.accel ? 1.6 : 1.0;
  double rho = opts.rho_init;
  Vec z = x0;
  Vec u = Vec::Zero(big_n);
  Vec x(big_n), xh(big_n), zold(big_n);
  double rp = 1.0, rd = 1.0;
  long it = 0;
  long next_polish = 100;
  bool converged = false;

  auto dual_of = [&](const Vec& uu, double r) -> Vec { return k * (a * (r * uu)); };

  for (it = 1; it <= opts.max_iter; ++it) {
    const Vec v = z - u;
    x = v - m * (a * v) + x0;
    xh = relax * x + (1.0 - relax) * z;
    zold = z;
    z = xh + u;
    block_soft_threshold(z, l, 1.0 / rho);
    u += xh - z;

    rp = (x - z).norm() / std::max({x.norm(), z.norm(), kTiny});
    rd = rho * (z - zold).norm() / std::max(rho * u.norm(), kTiny);
    if (rp < opts.tol && rd < opts.tol) {
      converged = true;
      break;
    }
    if (it % 50 == 0) {
      if (rp > 10.0 * rd) {
        rho *= 2.0;
        u *= 0.5;
      } else if (rd > 10.0 * rp) {
        rho *= 0.5;
        u *= 2.0;
      }
    }
    if (opts.polish && it >= next_polish && std::max(rp, rd) < 1e-4) {
      Vec wp = z;
      Vec lp = dual_of(u, rho);
      if (polish_min_norm(a, l, p.y, opts.zero_threshold, wp, lp)) {
        BlockSolution s = finish(p, l, wp, lp, opts);
        s.iterations = it;
        s.converged = true;
        s.polished = true;
        s.primal_residual = (a * wp - p.y).norm() / ynorm;
        s.dual_residual = verify_kkt(p, s).stationarity;
        s.status = "optimal (polished)";
        return s;
      }
      next_polish = it + std::max<long>(100, it);
    }
    if (opts.time_budget_s > 0.0 && it % 100 == 0 && elapsed_s(t0) > opts.time_budget_s) break;
  }

  Vec w = z;
  Vec lambda = dual_of(u, rho);
  if (opts.polish) {
    Vec wp = w;
    Vec lp = lambda;
    if (polish_min_norm(a, l, p.y, opts.zero_threshold, wp, lp)) {
      BlockSolution s = finish(p, l, wp, lp, opts);
      s.iterations = std::min(it, opts.max_iter);
      s.converged = true;
      s.polished = true;
      s.primal_residual = (a * wp - p.y).norm() / ynorm;
      s.dual_residual = verify_kkt(p, s).stationarity;
      s.status = "optimal (polished)";
      return s;
    }
  }
  BlockSolution s = finish(p, l, w, lambda, opts);
  s.iterations = std::min(it, opts.max_iter);
  s.converged = converged;
  s.primal_residual = rp;
  s.dual_residual = rd;
  s.status = converged ? "optimal" : "not converged";
  return s;
}

BlockSolution solve_group_lasso(const GroupProblem& p, const SolverOptions& opts) {
  p.validate();
  if (!(p.beta > 0.0)) throw Error(ErrorCode::invalid_input, "group lasso needs beta > 0");
  if (p.has_cones()) throw Error(ErrorCode::invalid_input, "group lasso solver does not take cones");
  const auto t0 = Clock::now();
  const Layout l = layout_of(p.blocks);
  const Eigen::Index n = p.n();
  const Eigen::Index big_n = l.total();
  const Mat a = concat(p.blocks, l, n);
  const Vec aty = a.transpose() * p.y;

  // Power iteration for |A|^2 from a fixed start vector.
  Vec v = Vec::Ones(big_n) / std::sqrt(static_cast<double>(std::max<Eigen::Index>(big_n, 1)));
  double lip = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Vec nv = a.transpose() * (a * v);
    const double est = nv.norm();
    if (est == 0.0) break;
    nv /= est;
    const bool done = std::abs(est - lip) <= 1e-12 * est;
    lip = est;
    v = nv;
    if (done) break;
  }
  lip = std::max(lip * 1.02, kTiny);
  const double step = 1.0 / lip;

  auto objective = [&](const Vec& w) {
    return 0.5 * (a * w - p.y).squaredNorm() + p.beta * sum_norms(w, l);
  };
  auto kkt = [&](const Vec& w) {
    const Vec g = a.transpose() * (p.y - a * w);
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < l.off.size(); ++j) {
      const auto wj = w.segment(l.off[j], l.size(j));
      const auto gj = g.segment(l.off[j], l.size(j));
      const double nrm = wj.norm();
      if (nrm > 0.0) {
        worst = std::max(worst, (gj - p.beta * wj / nrm).norm() / p.beta);
      } else {
        worst = std::max(worst, std::max(0.0, gj.norm() - p.beta) / p.beta);
      }
    }
    return worst;
  };

  Vec w = Vec::Zero(big_n);
  Vec yk = w;
  double t = 1.0;
  std::deque<double> history;
  history.push_back(objective(w));
  long it = 0;
  bool converged = false;
  double last_kkt = kkt(w);
  if (last_kkt < opts.tol) converged = true;

  for (it = 1; it <= opts.max_iter && !converged; ++it) {
    Vec wn = yk - step * (a.transpose() * (a * yk) - aty);
    block_soft_threshold(wn, l, step * p.beta);
    if (opts.accel) {
      // Gradient-based adaptive restart keeps the momentum from overshooting.
      if ((yk - wn).dot(wn - w) > 0.0) t = 1.0;
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      yk = wn + ((t - 1.0) / tn) * (wn - w);
      t = tn;
    } else {
      yk = wn;
    }
    w = wn;
    history.push_back(objective(w));
    if (history.size() > 51) history.pop_front();
    if (it % 50 == 0) {
      const double drop = (history.front() - history.back()) / std::max(std::abs(history.back()), kTiny);
      last_kkt = kkt(w);
      if (drop < 1e-12 && last_kkt < opts.tol) converged = true;
      if (opts.time_budget_s > 0.0 && elapsed_s(t0) > opts.time_budget_s) break;
    }
  }
  BlockSolution s = finish(p, l, w, p.y - a * w, opts);
  s.iterations = std::min(it, opts.max_iter);
  s.converged = converged;
  s.primal_residual = 0.0;
  s.dual_residual = kkt(w);
  s.status = converged ? "optimal" : "not converged";
  return s;
}

namespace {

// Freezes the active blocks and the tight cone rows of an approximate solution.
// What is left is a plain minimum-norm problem on subspaces, and that solver's
// Newton polish gets much closer to the optimum than the splitting tail does.
bool polish_cone(const GroupProblem& p, const std::vector<Vec>& w, const SolverOptions& opts, BlockSolution& out) {
  double wmax = 0.0;
  for (const Vec& v : w) wmax = std::max(wmax, v.norm());
  if (wmax <= 0.0) return false;
  GroupProblem r;
  r.y = p.y;
  std::vector<std::size_t> idx;
  std::vector<Mat> basis;
  for (std::size_t j = 0; j < p.blocks.size(); ++j) {
    if (w[j].norm() <= opts.zero_threshold * wmax) continue;
    const Eigen::Index cols = p.blocks[j].cols();
    Mat nb = Mat::Identity(cols, cols);
    if (j < p.cones.size() && p.cones[j].rows() > 0) {
      const Mat& c = p.cones[j];
      const Vec cw = c * w[j];
      const double cs = std::max(cw.cwiseAbs().maxCoeff(), kTiny);
      std::vector<Eigen::Index> tight;
      for (Eigen::Index i = 0; i < cw.size(); ++i) {
        if (cw(i) <= 1e-6 * cs) tight.push_back(i);
      }
      if (!tight.empty()) {
        Mat ct(static_cast<Eigen::Index>(tight.size()), cols);
        for (std::size_t a = 0; a < tight.size(); ++a) ct.row(static_cast<Eigen::Index>(a)) = c.row(tight[a]);
        Eigen::FullPivLU<Mat> lu(ct);
        if (lu.rank() == cols) continue;
        const Mat ker = lu.kernel();
        Eigen::HouseholderQR<Mat> qr(ker);
        nb = qr.householderQ() * Mat::Identity(cols, ker.cols());
      }
    }
    r.blocks.push_back(p.blocks[j] * nb);
    basis.push_back(nb);
    idx.push_back(j);
  }
  if (idx.empty()) return false;
  BlockSolution s;
  try {
    s = solve_group_min_norm(r, opts);
  } catch (const Error&) {
    return false;
  }
  if (!s.converged) return false;
  out = BlockSolution{};
  out.weights.resize(p.blocks.size());
  for (std::size_t j = 0; j < p.blocks.size(); ++j) out.weights[j] = Vec::Zero(p.blocks[j].cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.weights[idx[k]] = basis[k] * s.weights[k];
  out.dual = s.dual;
  out.objective = group_objective(p, out.weights);
  out.active_blocks = active_set(out.weights, opts.zero_threshold);
  out.converged = true;
  out.polished = true;
  out.status = "optimal (polished)";
  return true;
}

}  // namespace

BlockSolution solve_cone_constrained(const GroupProblem& p, const SolverOptions& opts) {
  p.validate();
  if (p.beta != 0.0) throw Error(ErrorCode::invalid_input, "cone-constrained solver handles beta == 0 only");
  const auto t0 = Clock::now();
  const Layout l = layout_of(p.blocks);
  const std::size_t nb = p.blocks.size();
  const Eigen::Index n = p.n();
  const Eigen::Index big_n = l.total();
  const double ynorm = p.y.norm();

  std::vector<Mat> cones(nb);
  std::vector<Eigen::Index> coff(nb + 1, 0);
  for (std::size_t j = 0; j < nb; ++j) {
    cones[j] = (j < p.cones.size()) ? p.cones[j] : Mat(0, p.blocks[j].cols());
    coff[j + 1] = coff[j] + cones[j].rows();
  }
  const Eigen::Index big_s = coff[nb];

  if (ynorm == 0.0) {
    BlockSolution s = finish(p, l, Vec::Zero(big_n), Vec::Zero(n), opts);
    s.converged = true;
    s.status = "zero target";
    return s;
  }

  const Mat a = concat(p.blocks, l, n);
  // H = I + C^T C is block diagonal; factor each block once.
  std::vector<Eigen::LLT<Mat>> hfac;
  hfac.reserve(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const Eigen::Index r = l.size(j);
    hfac.emplace_back(Mat::Identity(r, r) + cones[j].transpose() * cones[j]);
  }
  auto hsolve = [&](const Vec& q) {
    Vec out(big_n);
    for (std::size_t j = 0; j < nb; ++j) out.segment(l.off[j], l.size(j)) = hfac[j].solve(q.segment(l.off[j], l.size(j)));
    return out;
  };
  Mat hinv_at(big_n, n);
  for (std::size_t j = 0; j < nb; ++j) {
    hinv_at.middleRows(l.off[j], l.size(j)) = hfac[j].solve(a.middleCols(l.off[j], l.size(j)).transpose());
  }
  const Mat schur_pinv = psd_pinv(a * hinv_at, 1e-12);
  const Mat k = psd_pinv(a * a.transpose(), 1e-12);

  auto apply_c = [&](const Vec& w) {
    Vec s(big_s);
    for (std::size_t j = 0; j < nb; ++j) {
      if (cones[j].rows() > 0) s.segment(coff[j], cones[j].rows()) = cones[j] * w.segment(l.off[j], l.size(j));
    }
    return s;
  };
  auto apply_ct = [&](const Vec& s) {
    Vec w = Vec::Zero(big_n);
    for (std::size_t j = 0; j < nb; ++j) {
      if (cones[j].rows() > 0) w.segment(l.off[j], l.size(j)) = cones[j].transpose() * s.segment(coff[j], cones[j].rows());
    }
    return w;
  };
  // Projection of (aw, as) onto {(w, s) : A w = y, s = C w}.
  auto project = [&](const Vec& aw, const Vec& as, Vec& w, Vec& s) {
    const Vec h = hsolve(aw + apply_ct(as));
    const Vec nu = schur_pinv * (a * h - p.y);
    w = h - hinv_at * nu;
    s = apply_c(w);
  };

  {
    Vec w0, s0;
    project(Vec::Zero(big_n), Vec::Zero(big_s), w0, s0);
    const double infeas = (a * w0 - p.y).norm() / ynorm;
    if (infeas > 1e-6) throw Error(ErrorCode::infeasible, "target outside the span of the blocks");
  }

  const double relax = opts.accel ? 1.6 : 1.0;
  double rho = opts.rho_init;
  Vec zw = Vec::Zero(big_n), zs = Vec::Zero(big_s);
  Vec uw = Vec::Zero(big_n), us = Vec::Zero(big_s);
  Vec xw, xs;
  double rp = 1.0, rd = 1.0;
  long it = 0;
  long next_polish = 100;
  bool converged = false;
  for (it = 1; it <= opts.max_iter; ++it) {
    project(zw - uw, zs - us, xw, xs);
    const Vec hw = relax * xw + (1.0 - relax) * zw;
    const Vec hs = relax * xs + (1.0 - relax) * zs;
    const Vec zw_old = zw;
    const Vec zs_old = zs;
    zw = hw + uw;
    block_soft_threshold(zw, l, 1.0 / rho);
    zs = (hs + us).cwiseMax(0.0);
    uw += hw - zw;
    us += hs - zs;

    const double xnorm = std::sqrt(xw.squaredNorm() + xs.squaredNorm());
    const double znorm = std::sqrt(zw.squaredNorm() + zs.squaredNorm());
    const double unorm = std::sqrt(uw.squaredNorm() + us.squaredNorm());
    rp = std::sqrt((xw - zw).squaredNorm() + (xs - zs).squaredNorm()) / std::max({xnorm, znorm, kTiny});
    rd = rho * std::sqrt((zw - zw_old).squaredNorm() + (zs - zs_old).squaredNorm()) / std::max(rho * unorm, kTiny);
    if (rp < opts.tol && rd < opts.tol) {
      converged = true;
      break;
    }
    if (it % 50 == 0) {
      if (rp > 10.0 * rd) {
        rho *= 2.0;
        uw *= 0.5;
        us *= 0.5;
      } else if (rd > 10.0 * rp) {
        rho *= 0.5;
        uw *= 2.0;
        us *= 2.0;
      }
    }
    if (opts.polish && it >= next_polish && std::max(rp, rd) < 1e-4) {
      BlockSolution cand;
      if (polish_cone(p, split(zw, l), opts, cand) && verify_kkt(p, cand).max() < 1e-9) {
        cand.iterations = it;
        cand.primal_residual = verify_kkt(p, cand).primal_feasibility;
        cand.dual_residual = verify_kkt(p, cand).stationarity;
        cand.cone_violation = verify_kkt(p, cand).cone_feasibility;
        return cand;
      }
      next_polish = it + std::max<long>(100, it);
    }
    if (opts.time_budget_s > 0.0 && it % 100 == 0 && elapsed_s(t0) > opts.time_budget_s) break;
  }

  const Vec lambda = k * (a * (rho * uw + apply_ct(rho * us)));
  BlockSolution s = finish(p, l, zw, lambda, opts);
  if (opts.polish) {
    BlockSolution cand;
    if (polish_cone(p, s.weights, opts, cand)) {
      const double kc = verify_kkt(p, cand).max();
      if (kc < verify_kkt(p, s).max() && kc < 1e-7) {
        cand.iterations = std::min(it, opts.max_iter);
        cand.primal_residual = verify_kkt(p, cand).primal_feasibility;
        cand.dual_residual = verify_kkt(p, cand).stationarity;
        cand.cone_violation = verify_kkt(p, cand).cone_feasibility;
        return cand;
      }
    }
  }
  s.iterations = std::min(it, opts.max_iter);
  s.converged = converged;
  s.primal_residual = rp;
  s.dual_residual = rd;
  double viol = 0.0;
  const Vec cz = apply_c(zw);
  if (cz.size() > 0) viol = std::max(0.0, -cz.minCoeff());
  s.cone_violation = viol;
  s.status = converged ? "optimal" : "not converged";
  return s;
}

BlockSolution solve(const GroupProblem& p, const SolverOptions& opts) {
  if (p.has_cones()) return solve_cone_constrained(p, opts);
  if (p.beta > 0.0) return solve_group_lasso(p, opts);
  return solve_group_min_norm(p, opts);
}

KktReport verify_kkt(const GroupProblem& p, const BlockSolution& s, double tol) {
  p.validate();
  KktReport rep;
  const double scale = p.beta > 0.0 ? p.beta : 1.0;
  const Vec fit = group_apply(p, s.weights);
  const double ynorm = std::max(p.y.norm(), kTiny);
  const Vec& lambda = s.dual;

  if (p.beta > 0.0) {
    // The dual of the penalized problem is the residual itself.
    rep.primal_feasibility = (lambda - (p.y - fit)).norm() / ynorm;
  } else {
    rep.primal_feasibility = (fit - p.y).norm() / ynorm;
  }

  double wmax = 0.0;
  for (const Vec& w : s.weights) wmax = std::max(wmax, w.norm());

  for (std::size_t j = 0; j < p.blocks.size(); ++j) {
    const Vec& w = s.weights[j];
    const Vec g = p.blocks[j].transpose() * lambda;
    const bool has_cone = j < p.cones.size() && p.cones[j].rows() > 0;
    const double nrm = w.norm();
    const bool active = nrm > 0.0 && nrm > 1e-12 * wmax;

    if (has_cone) {
      const Mat& c = p.cones[j];
      const Vec cw = c * w;
      if (cw.size() > 0) rep.cone_feasibility = std::max(rep.cone_feasibility, std::max(0.0, -cw.minCoeff()));
      if (active) {
        // Multipliers may only sit on constraints that are (numerically) tight.
        std::vector<Eigen::Index> tight;
        const double cscale = std::max(cw.cwiseAbs().maxCoeff(), kTiny);
        for (Eigen::Index i = 0; i < cw.size(); ++i) {
          if (cw(i) <= std::max(tol, 1e-7) * cscale) tight.push_back(i);
        }
        const Vec target = scale * w / nrm - g;
        double res = target.norm();
        if (!tight.empty()) {
          Mat ct(c.cols(), static_cast<Eigen::Index>(tight.size()));
          for (std::size_t a = 0; a < tight.size(); ++a) ct.col(static_cast<Eigen::Index>(a)) = c.row(tight[a]).transpose();
          const Vec mu = nnls(ct, target);
          res = (ct * mu - target).norm();
        }
        rep.stationarity = std::max(rep.stationarity, res / scale);
      } else {
        const Vec mu = nnls(c.transpose(), -g);
        const double best = (g + c.transpose() * mu).norm();
        rep.dual_feasibility = std::max(rep.dual_feasibility, std::max(0.0, best - scale) / scale);
      }
      continue;
    }

    if (active) {
      rep.stationarity = std::max(rep.stationarity, (g - scale * w / nrm).norm() / scale);
    } else {
      rep.dual_feasibility = std::max(rep.dual_feasibility, std::max(0.0, g.norm() - scale) / scale);
    }
  }
  return rep;
}

DualCertificate certificate_for_blocks(const GroupProblem& p, const std::vector<std::size_t>& planted,
                                       const std::vector<Vec>& planted_targets) {
  if (planted.size() != planted_targets.size() || planted.empty()) {
    throw Error(ErrorCode::invalid_input, "planted blocks and targets must match and be nonempty");
  }
  const double scale = p.beta > 0.0 ? p.beta : 1.0;
  std::vector<Mat> rows;
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    rows.push_back(p.blocks.at(planted[i]).transpose());
    total += rows.back().rows();
  }
  Vec target(total);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    const Vec& t = planted_targets[i];
    const double nrm = t.norm();
    if (nrm == 0.0) throw Error(ErrorCode::invalid_input, "planted target is zero");
    target.segment(at, t.size()) = scale * t / nrm;
    at += t.size();
  }

  DualCertificate cert;
  try {
    cert.lambda = stacked_pinv_apply(rows, target);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::degenerate_stack) throw Error(ErrorCode::rank_deficient, e.what());
    throw;
  }
  cert.planted_indices = planted;
  cert.block_norms.resize(p.blocks.size());
  bool strict = true;
  for (std::size_t j = 0; j < p.blocks.size(); ++j) {
    const double v = (p.blocks[j].transpose() * cert.lambda).norm() / scale;
    cert.block_norms[j] = v;
    const bool is_planted = std::find(planted.begin(), planted.end(), j) != planted.end();
    if (is_planted) {
      if (std::abs(v - 1.0) > 1e-8) strict = false;
    } else if (!(v < 1.0 - 1e-8)) {
      strict = false;
    }
  }
  cert.is_strict = strict;
  return cert;
}

Vec nnls(const Mat& a, const Vec& b, int max_iter) {
  const Eigen::Index m = a.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(3 * m + 30);
  Vec x = Vec::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());

  for (int outer = 0; outer < max_iter; ++outer) {
    const Vec grad = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double gmax = tol;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > gmax) {
        gmax = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
      }
      Mat ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
      const Vec sp = ap.completeOrthogonalDecomposition().solve(b);
      bool all_pos = true;
      for (Eigen::Index k = 0; k < sp.size(); ++k) {
        if (sp(k) <= 0.0) all_pos = false;
      }
      if (all_pos) {
        x.setZero();
        for (std::size_t k = 0; k < idx.size(); ++k) x(idx[k]) = sp(static_cast<Eigen::Index>(k));
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double s = sp(static_cast<Eigen::Index>(k));
        const double xv = x(idx[k]);
        if (s <= 0.0 && xv - s > 0.0) alpha = std::min(alpha, xv / (xv - s));
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        x(idx[k]) += alpha * (sp(static_cast<Eigen::Index>(k)) - x(idx[k]));
        if (x(idx[k]) <= 1e-15) {
          x(idx[k]) = 0.0;
          passive[static_cast<std::size_t>(idx[k])] = false;
        }
      }
    }
  }
  return x;
}

}  // namespace relurec
