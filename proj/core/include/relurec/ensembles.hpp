#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "relurec/numerics.hpp"

namespace relurec {

enum class MatrixKind { gaussian, cubic_gaussian, haar, whitened_cubic, custom };

const char* to_string(MatrixKind kind);
MatrixKind parse_matrix_kind(std::string_view name);

struct DataMatrix {
  Mat mat;
  MatrixKind kind = MatrixKind::custom;
  std::uint64_t seed = 0;

  DataMatrix() = default;
  explicit DataMatrix(Mat m, MatrixKind k = MatrixKind::custom, std::uint64_t s = 0)
      : mat(std::move(m)), kind(k), seed(s) {}

  Eigen::Index n() const { return mat.rows(); }
  Eigen::Index d() const { return mat.cols(); }
};

// gaussian: iid N(0, 1/n). cubic_gaussian: entrywise cube of such draws.
// haar / whitened_cubic: left singular factor of a gaussian / cubic draw (n >= d).
DataMatrix gen_matrix(MatrixKind kind, int n, int d, std::uint64_t seed);

enum class PlantVariant { linear, relu, normalized_relu_sum };

struct PlantedModel {
  PlantVariant variant = PlantVariant::linear;
  std::vector<Vec> w;      // one direction per planted neuron (exactly one for linear)
  std::vector<double> r;   // output weights, one per neuron
  double noise_sigma = 0.0;

  static PlantedModel linear(Vec w_star, double sigma = 0.0);
  static PlantedModel relu(Vec w_star, double sigma = 0.0);
  static PlantedModel relu_sum(std::vector<Vec> ws, std::vector<double> rs, double sigma = 0.0);
  static PlantedModel normalized(std::vector<Vec> ws, std::vector<double> rs, double sigma = 0.0);

  std::size_t k() const { return w.size(); }
};

struct Observation {
  Vec y;      // clean + z
  Vec z;      // additive noise, zero when noise_sigma == 0
  Vec clean;  // noiseless plant output
};

// Noiseless plant output on an arbitrary matrix with the plant's input width.
Vec plant_output(const PlantedModel& model, const Mat& x);

// Validates the plant against x (dead neurons, duplicate masks for sums) and
// draws z ~ N(0, sigma^2 / n) from the given seed.
Observation gen_observation(const PlantedModel& model, const DataMatrix& x, std::uint64_t seed);

struct GmmSample {
  DataMatrix x;
  std::vector<std::uint8_t> q;  // 1 on rows drawn from the first component
};

GmmSample gen_gmm(int n1, int n2, const Vec& mu1, const Vec& mu2, double sigma, std::uint64_t seed);

// mu1/|mu1| - mu2/|mu2|: separates the two mixture components when noise is small.
Vec gmm_separator(const Vec& mu1, const Vec& mu2);

Vec random_direction(int d, std::uint64_t seed);
Vec smallest_right_singular_vector(const Mat& x);

}  // namespace relurec
