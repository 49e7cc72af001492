#include "relurec/arrangements.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "relurec/rng.hpp"

namespace relurec {

namespace {

constexpr double kStrictMargin = 1e-9;

// Wolfe's algorithm for the point of minimum norm in conv(rows of p).
Vec wolfe_min_norm(const Mat& p) {
  const Eigen::Index m = p.rows();
  const Vec sq = p.rowwise().squaredNorm();
  const double scale = std::max(sq.maxCoeff(), 1e-300);

  Eigen::Index start = 0;
  sq.minCoeff(&start);
  std::vector<Eigen::Index> corral{start};
  std::vector<double> lam{1.0};
  Vec x = p.row(start).transpose();

  const int max_major = static_cast<int>(50 * m + 200);
  for (int major = 0; major < max_major; ++major) {
    const double xx = x.squaredNorm();
    if (xx <= 1e-26 * scale) break;
    const Vec dots = p * x;
    Eigen::Index j = 0;
    const double best = dots.minCoeff(&j);
    if (xx - best <= 1e-13 * scale) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
    corral.push_back(j);
    lam.push_back(0.0);

    for (int minor = 0; minor < static_cast<int>(corral.size()) + 2; ++minor) {
      const auto k = static_cast<Eigen::Index>(corral.size());
      Mat ps(k, p.cols());
      for (Eigen::Index a = 0; a < k; ++a) ps.row(a) = p.row(corral[static_cast<std::size_t>(a)]);
      Mat kkt = Mat::Zero(k + 1, k + 1);
      kkt.topLeftCorner(k, k) = ps * ps.transpose();
      kkt.block(0, k, k, 1).setOnes();
      kkt.block(k, 0, 1, k).setOnes();
      Vec rhs = Vec::Zero(k + 1);
      rhs(k) = 1.0;
      const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      const Vec alpha = sol.head(k);

      if ((alpha.array() > 1e-15).all()) {
        for (Eigen::Index a = 0; a < k; ++a) lam[static_cast<std::size_t>(a)] = alpha(a);
        break;
      }
      // Step from lam toward alpha until the first weight hits zero.
      double theta = 1.0;
      for (Eigen::Index a = 0; a < k; ++a) {
        const double la = lam[static_cast<std::size_t>(a)];
        if (alpha(a) <= 1e-15 && la - alpha(a) > 0.0) theta = std::min(theta, la / (la - alpha(a)));
      }
      std::vector<Eigen::Index> next_corral;
      std::vector<double> next_lam;
      double total = 0.0;
      for (Eigen::Index a = 0; a < k; ++a) {
        const double v = (1.0 - theta) * lam[static_cast<std::size_t>(a)] + theta * alpha(a);
        if (v > 1e-15) {
          next_corral.push_back(corral[static_cast<std::size_t>(a)]);
          next_lam.push_back(v);
          total += v;
        }
      }
      if (next_corral.empty()) {
        next_corral.push_back(j);
        next_lam.push_back(1.0);
        total = 1.0;
      }
      for (double& v : next_lam) v /= total;
      corral = std::move(next_corral);
      lam = std::move(next_lam);
    }
    x.setZero(p.cols());
    for (std::size_t a = 0; a < corral.size(); ++a) x += lam[a] * p.row(corral[a]).transpose();
  }
  return x;
}

MarginResult margin_of_rows(const Mat& rows, Eigen::Index d) {
  MarginResult out;
  out.w = Vec::Zero(d);
  if (rows.rows() == 0) {
    // No constraints: any unit direction attains an unbounded margin; report 1 with e1.
    out.t_star = 1.0;
    out.upper = 1.0;
    if (d > 0) out.w(0) = 1.0;
    return out;
  }
  const Vec x = wolfe_min_norm(rows);
  const double nrm = x.norm();
  out.upper = nrm;
  if (nrm <= 0.0) return out;
  const Vec w = x / nrm;
  const double lower = (rows * w).minCoeff();
  if (lower > 0.0) {
    out.t_star = lower;
    out.w = w;
  }
  return out;
}

}  // namespace

int ArrangementPattern::trace() const {
  int t = 0;
  for (auto b : mask) t += b;
  return t;
}

bool ArrangementPattern::all_ones() const {
  return std::all_of(mask.begin(), mask.end(), [](auto b) { return b == 1; });
}

bool ArrangementPattern::all_zeros() const {
  return std::all_of(mask.begin(), mask.end(), [](auto b) { return b == 0; });
}

std::optional<std::size_t> PatternSet::find(const Mask& mask) const {
  auto it = std::lower_bound(patterns.begin(), patterns.end(), mask,
                             [](const ArrangementPattern& p, const Mask& m) { return p.mask < m; });
  if (it != patterns.end() && it->mask == mask) return static_cast<std::size_t>(it - patterns.begin());
  return std::nullopt;
}

std::size_t PatternSet::insert(ArrangementPattern p) {
  auto it = std::lower_bound(patterns.begin(), patterns.end(), p.mask,
                             [](const ArrangementPattern& a, const Mask& m) { return a.mask < m; });
  if (it != patterns.end() && it->mask == p.mask) return static_cast<std::size_t>(it - patterns.begin());
  if (p.all_ones()) contains_all_ones = true;
  it = patterns.insert(it, std::move(p));
  return static_cast<std::size_t>(it - patterns.begin());
}

Mask mask_of(const Mat& x, const Vec& h) {
  if (h.size() != x.cols()) throw Error(ErrorCode::invalid_shape, "direction width does not match data");
  if (h.norm() == 0.0) throw Error(ErrorCode::invalid_input, "zero direction induces no arrangement");
  const Vec xh = x * h;
  Mask m(static_cast<std::size_t>(xh.size()));
  for (Eigen::Index i = 0; i < xh.size(); ++i) m[static_cast<std::size_t>(i)] = xh(i) >= 0.0 ? 1 : 0;
  return m;
}

ArrangementPattern pattern_of(const Mat& x, const Vec& h) { return {mask_of(x, h), h}; }
ArrangementPattern pattern_of(const DataMatrix& x, const Vec& h) { return pattern_of(x.mat, h); }

int default_sample_count(int n) { return std::max(n, 50); }

PatternSet sample_patterns(const DataMatrix& x, int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::invalid_input, "sample count must be at least one");
  Rng rng(seed);
  std::map<Mask, Vec> first_seen;
  for (int s = 0; s < count; ++s) {
    Vec h = normal_vector(rng, x.d());
    if (h.norm() == 0.0) continue;
    Mask m = mask_of(x.mat, h);
    if (std::all_of(m.begin(), m.end(), [](auto b) { return b == 0; })) continue;
    first_seen.try_emplace(std::move(m), std::move(h));
  }
  PatternSet set;
  set.patterns.reserve(first_seen.size() + 1);
  for (auto& [mask, h] : first_seen) {
    set.patterns.push_back({mask, h});
    if (set.patterns.back().all_ones()) set.contains_all_ones = true;
  }
  const MarginResult margin = allones_margin(x.mat);
  if (margin.t_star > kStrictMargin) {
    set.insert({Mask(static_cast<std::size_t>(x.n()), 1), margin.w});
  }
  return set;
}

MarginResult allones_margin(const Mat& x) { return margin_of_rows(x, x.cols()); }

MarginResult signed_margin(const Mat& x, const Mask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != x.rows()) throw Error(ErrorCode::invalid_shape, "mask length");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (x.row(i).squaredNorm() > 0.0) keep.push_back(i);
  }
  Mat rows(static_cast<Eigen::Index>(keep.size()), x.cols());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    const double s = mask[static_cast<std::size_t>(keep[a])] ? 1.0 : -1.0;
    rows.row(static_cast<Eigen::Index>(a)) = s * x.row(keep[a]);
  }
  return margin_of_rows(rows, x.cols());
}

PatternSet enumerate_exact(const DataMatrix& x, int max_n) {
  const auto n = static_cast<int>(x.n());
  if (n > max_n) {
    throw Error(ErrorCode::size_limit,
                "exact enumeration limited to n <= " + std::to_string(max_n) + ", got " + std::to_string(n));
  }
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < x.n(); ++i) {
    if (x.mat.row(i).squaredNorm() > 0.0) live.push_back(i);
  }

  PatternSet out;
  // Rows that vanish satisfy x_i . h = 0 >= 0 for every h, so their bit is 1.
  Mask base(static_cast<std::size_t>(n), 1);
  std::vector<double> signs;
  signs.reserve(live.size());

  auto feasible = [&](std::size_t depth, Vec* witness) {
    Mat rows(static_cast<Eigen::Index>(depth), x.d());
    for (std::size_t a = 0; a < depth; ++a) rows.row(static_cast<Eigen::Index>(a)) = signs[a] * x.mat.row(live[a]);
    const MarginResult r = margin_of_rows(rows, x.d());
    if (witness) *witness = r.w;
    return r.t_star > kStrictMargin;
  };

  // A prefix whose signed rows admit no strict direction cannot be extended.
  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == live.size()) {
      Vec w;
      if (!feasible(depth, &w)) return;
      if (depth == 0) {
        w = Vec::Zero(x.d());
        if (x.d() > 0) w(0) = 1.0;
      }
      Mask m = base;
      for (std::size_t a = 0; a < depth; ++a) m[static_cast<std::size_t>(live[a])] = signs[a] > 0 ? 1 : 0;
      out.patterns.push_back({std::move(m), w});
      return;
    }
    for (double s : {-1.0, 1.0}) {
      signs.push_back(s);
      if (feasible(depth + 1, nullptr)) self(self, depth + 1);
      signs.pop_back();
    }
  };
  recurse(recurse, 0);

  std::sort(out.patterns.begin(), out.patterns.end(),
            [](const ArrangementPattern& a, const ArrangementPattern& b) { return a.mask < b.mask; });
  out.contains_all_ones = std::any_of(out.patterns.begin(), out.patterns.end(),
                                      [](const ArrangementPattern& p) { return p.all_ones(); });
  return out;
}

bool is_maximal(const PatternSet& set, std::size_t i) {
  if (i >= set.size()) throw Error(ErrorCode::invalid_input, "pattern index out of range");
  const Mask& di = set[i].mask;
  for (std::size_t j = 0; j < set.size(); ++j) {
    if (j == i) continue;
    const Mask& dj = set[j].mask;
    bool dominated = true;
    for (std::size_t b = 0; b < di.size(); ++b) {
      if ((di[b] & dj[b]) != di[b]) {
        dominated = false;
        break;
      }
    }
    if (dominated) return false;
  }
  return true;
}

std::uint64_t cover_bound(int n, int r) {
  std::uint64_t total = 0;
  for (int k = 0; k < r; ++k) {
    // C(n - 1, k) by the multiplicative formula, exact for the sizes used here.
    std::uint64_t c = 1;
    if (k > n - 1) break;
    for (int t = 1; t <= k; ++t) c = c * static_cast<std::uint64_t>(n - 1 - k + t) / static_cast<std::uint64_t>(t);
    total += c;
  }
  return 2 * total;
}

std::string mask_string(const Mask& mask) {
  std::string s(mask.size(), '0');
  for (std::size_t i = 0; i < mask.size(); ++i) s[i] = mask[i] ? '1' : '0';
  return s;
}

Mask parse_mask(const std::string& bits) {
  Mask m(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw Error(ErrorCode::schema, "mask must be a 0/1 string");
    m[i] = bits[i] == '1' ? 1 : 0;
  }
  return m;
}

void write_patterns(std::ostream& os, const PatternSet& set) {
  os.precision(17);
  for (const auto& p : set.patterns) {
    os << mask_string(p.mask);
    if (p.witness) {
      for (Eigen::Index k = 0; k < p.witness->size(); ++k) os << ' ' << (*p.witness)(k);
    }
    os << '\n';
  }
}

PatternSet read_patterns(std::istream& is) {
  PatternSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string bits;
    ls >> bits;
    ArrangementPattern p;
    try {
      p.mask = parse_mask(bits);
    } catch (const Error&) {
      throw Error(ErrorCode::schema, "bad mask on line " + std::to_string(lineno));
    }
    std::vector<double> coords;
    double v = 0.0;
    while (ls >> v) coords.push_back(v);
    if (!coords.empty()) p.witness = Eigen::Map<Vec>(coords.data(), static_cast<Eigen::Index>(coords.size()));
    set.insert(std::move(p));
  }
  return set;
}

std::pair<PatternSet, std::size_t> ensure_pattern(const PatternSet& set, const Mat& x, const Vec& w) {
  PatternSet copy = set;
  ArrangementPattern p = pattern_of(x, w);
  const std::size_t idx = copy.insert(std::move(p));
  return {std::move(copy), idx};
}

}  // namespace relurec
