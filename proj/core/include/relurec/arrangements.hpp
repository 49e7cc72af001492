#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relurec/ensembles.hpp"
#include "relurec/numerics.hpp"

namespace relurec {

using Mask = std::vector<std::uint8_t>;

struct ArrangementPattern {
  Mask mask;
  std::optional<Vec> witness;

  int trace() const;
  bool all_ones() const;
  bool all_zeros() const;
};

// Patterns are kept sorted lexicographically by mask bits and free of duplicates.
struct PatternSet {
  std::vector<ArrangementPattern> patterns;
  bool contains_all_ones = false;

  std::size_t size() const { return patterns.size(); }
  const ArrangementPattern& operator[](std::size_t i) const { return patterns[i]; }
  std::optional<std::size_t> find(const Mask& mask) const;
  // Inserts in sorted position unless the mask is already present; returns its index.
  std::size_t insert(ArrangementPattern p);
};

Mask mask_of(const Mat& x, const Vec& h);
ArrangementPattern pattern_of(const DataMatrix& x, const Vec& h);
ArrangementPattern pattern_of(const Mat& x, const Vec& h);

int default_sample_count(int n);

// Samples directions h ~ N(0, I), keeps the first witness per mask, drops the
// all-zeros mask, then appends the all-ones mask iff the margin problem has a
// strictly positive optimum.
PatternSet sample_patterns(const DataMatrix& x, int count, std::uint64_t seed);

// Every mask with an open cell, found by a depth-first search over row signs
// that prunes any prefix whose signed system has no strictly feasible direction.
PatternSet enumerate_exact(const DataMatrix& x, int max_n = 18);

struct MarginResult {
  double t_star = 0.0;  // certified achievable margin, always >= 0
  double upper = 0.0;   // certified upper bound on the optimum
  Vec w;                // unit maximizer, or zero when the optimum is 0
};

// max t s.t. |w| <= 1, x w >= t 1. The optimum equals the distance from the
// origin to the convex hull of the rows; it is computed with Wolfe's
// minimum-norm-point method, which brackets the optimum between t_star and upper.
MarginResult allones_margin(const Mat& x);

// Margin of the signed system (2D - I) x restricted to nonzero rows.
MarginResult signed_margin(const Mat& x, const Mask& mask);

bool is_maximal(const PatternSet& set, std::size_t i);

// 2 * sum_{k < r} C(n - 1, k): the maximal number of cells cut by n hyperplanes
// through the origin in a rank-r arrangement.
std::uint64_t cover_bound(int n, int r);

std::string mask_string(const Mask& mask);
Mask parse_mask(const std::string& bits);

void write_patterns(std::ostream& os, const PatternSet& set);
PatternSet read_patterns(std::istream& is);

// Returns a copy of set that contains the pattern of x w, inserted with w as
// its witness when missing, together with the index of that pattern.
std::pair<PatternSet, std::size_t> ensure_pattern(const PatternSet& set, const Mat& x, const Vec& w);

}  // namespace relurec
