#pragma once

#include <iosfwd>
#include <vector>

#include "relurec/arrangements.hpp"
#include "relurec/numerics.hpp"

namespace relurec {

enum class NicKind { nic_l, nic_1, nnic_1, nic_k, nnic_k, snic_orth };

const char* to_string(NicKind kind);

// holds <=> every non-planted lhs < 1 - 1e-8. Values within 1e-8 of 1 are
// flagged as marginal rather than certified. For snic_orth, lhs = tr(D_j)/(n-d)
// and holds <=> max tr(D_j) <= n - d.
struct NicReport {
  NicKind kind = NicKind::nic_l;
  std::vector<Mask> masks;
  std::vector<double> lhs;
  double max_lhs = 0.0;
  bool holds = false;
  bool marginal = false;
  std::vector<std::size_t> planted_indices;
};

constexpr double kNicMargin = 1e-8;

NicReport nic_linear(const Mat& x, const Vec& w_star, const PatternSet& patterns);
NicReport nic_relu_single(const Mat& x, const Vec& w_star, const PatternSet& patterns);
NicReport nnic_single(const Mat& x, const Vec& w_star, const PatternSet& patterns);
// Planted unit targets carry the sign of r_i.
NicReport nic_multi(const Mat& x, const std::vector<Vec>& ws, const std::vector<double>& rs,
                    const PatternSet& patterns, bool normalized);
NicReport snic_orth(const Mat& x, const PatternSet& patterns);

void write_nic_csv(std::ostream& os, const NicReport& report);

void set_isometry_threads(unsigned threads);

}  // namespace relurec
