#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "relurec/numerics.hpp"

namespace relurec {

using Rng = std::mt19937_64;

// splitmix64 finalizer. Seeds for sub-streams are obtained by folding each
// coordinate into the running state with this mixer, so a cell's stream depends
// only on its coordinates and never on scheduling.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

inline std::uint64_t seed_part(double x) { return std::bit_cast<std::uint64_t>(x); }

// FNV-1a over the label, then mixed with the master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(master, {h});
}

inline Mat normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Mat m(rows, cols);
  // Row-major fill order so that a matrix and its leading rows share draws.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

inline Vec normal_vector(Rng& rng, Eigen::Index size, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Vec v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = nd(rng);
  return v;
}

}  // namespace relurec
