#include "relurec/ensembles.hpp"

#include <cmath>
#include <set>

#include "relurec/rng.hpp"

namespace relurec {

const char* to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::gaussian: return "gaussian";
    case MatrixKind::cubic_gaussian: return "cubic_gaussian";
    case MatrixKind::haar: return "haar";
    case MatrixKind::whitened_cubic: return "whitened_cubic";
    case MatrixKind::custom: return "custom";
  }
  return "custom";
}

MatrixKind parse_matrix_kind(std::string_view name) {
  if (name == "gaussian") return MatrixKind::gaussian;
  if (name == "cubic_gaussian" || name == "cubic") return MatrixKind::cubic_gaussian;
  if (name == "haar") return MatrixKind::haar;
  if (name == "whitened_cubic" || name == "whitened") return MatrixKind::whitened_cubic;
  throw Error(ErrorCode::invalid_input, "unknown ensemble '" + std::string(name) + "'");
}

DataMatrix gen_matrix(MatrixKind kind, int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw Error(ErrorCode::invalid_input, "n and d must be positive");
  if ((kind == MatrixKind::haar || kind == MatrixKind::whitened_cubic) && n < d) {
    throw Error(ErrorCode::invalid_shape, "orthonormal ensembles need n >= d");
  }
  if (kind == MatrixKind::custom) throw Error(ErrorCode::invalid_input, "cannot generate a custom matrix");

  Rng rng(seed);
  Mat g = normal_matrix(rng, n, d, 1.0 / std::sqrt(static_cast<double>(n)));
  if (kind == MatrixKind::cubic_gaussian || kind == MatrixKind::whitened_cubic) {
    g = g.array().cube().matrix();
  }
  if (kind == MatrixKind::haar || kind == MatrixKind::whitened_cubic) {
    const CompactSvd svd = compact_svd(g);
    if (svd.rank < d) throw Error(ErrorCode::rank_deficient, "draw is rank deficient");
    g = svd.u;
  }
  return DataMatrix(std::move(g), kind, seed);
}

PlantedModel PlantedModel::linear(Vec w_star, double sigma) {
  PlantedModel m;
  m.variant = PlantVariant::linear;
  m.w = {std::move(w_star)};
  m.r = {1.0};
  m.noise_sigma = sigma;
  return m;
}

PlantedModel PlantedModel::relu(Vec w_star, double sigma) {
  PlantedModel m = linear(std::move(w_star), sigma);
  m.variant = PlantVariant::relu;
  return m;
}

PlantedModel PlantedModel::relu_sum(std::vector<Vec> ws, std::vector<double> rs, double sigma) {
  if (ws.size() != rs.size() || ws.empty()) {
    throw Error(ErrorCode::invalid_input, "relu plant needs matching, nonempty w and r lists");
  }
  PlantedModel m;
  m.variant = PlantVariant::relu;
  m.w = std::move(ws);
  m.r = std::move(rs);
  m.noise_sigma = sigma;
  return m;
}

PlantedModel PlantedModel::normalized(std::vector<Vec> ws, std::vector<double> rs, double sigma) {
  if (ws.size() != rs.size() || ws.empty()) {
    throw Error(ErrorCode::invalid_input, "normalized plant needs matching, nonempty w and r lists");
  }
  PlantedModel m;
  m.variant = PlantVariant::normalized_relu_sum;
  m.w = std::move(ws);
  m.r = std::move(rs);
  m.noise_sigma = sigma;
  return m;
}

Vec plant_output(const PlantedModel& model, const Mat& x) {
  switch (model.variant) {
    case PlantVariant::linear:
      return x * model.w.at(0);
    case PlantVariant::relu: {
      Vec y = Vec::Zero(x.rows());
      for (std::size_t i = 0; i < model.k(); ++i) y += model.r.at(i) * (x * model.w[i]).cwiseMax(0.0);
      return y;
    }
    case PlantVariant::normalized_relu_sum: {
      Vec y = Vec::Zero(x.rows());
      for (std::size_t i = 0; i < model.k(); ++i) {
        const Vec act = (x * model.w[i]).cwiseMax(0.0);
        const double nrm = act.norm();
        if (nrm <= 0.0) throw Error(ErrorCode::degenerate_plant, "planted neuron is dead on this data");
        y += model.r[i] * act / nrm;
      }
      return y;
    }
  }
  return Vec();
}

Observation gen_observation(const PlantedModel& model, const DataMatrix& x, std::uint64_t seed) {
  for (const Vec& w : model.w) {
    if (w.size() != x.d()) throw Error(ErrorCode::invalid_shape, "plant width does not match data");
    if (w.norm() == 0.0) throw Error(ErrorCode::invalid_input, "planted direction must be nonzero");
  }
  if (model.k() > 1) {
    std::set<std::vector<bool>> masks;
    for (const Vec& w : model.w) {
      const Vec xw = x.mat * w;
      std::vector<bool> mask(static_cast<std::size_t>(xw.size()));
      for (Eigen::Index i = 0; i < xw.size(); ++i) mask[static_cast<std::size_t>(i)] = xw(i) >= 0.0;
      if (!masks.insert(mask).second) {
        throw Error(ErrorCode::degenerate_plant, "two planted neurons share an activation mask");
      }
    }
  }

  Observation obs;
  obs.clean = plant_output(model, x.mat);
  obs.z = Vec::Zero(x.n());
  if (model.noise_sigma > 0.0) {
    Rng rng(seed);
    obs.z = normal_vector(rng, x.n(), model.noise_sigma / std::sqrt(static_cast<double>(x.n())));
  }
  obs.y = obs.clean + obs.z;
  return obs;
}

GmmSample gen_gmm(int n1, int n2, const Vec& mu1, const Vec& mu2, double sigma, std::uint64_t seed) {
  if (mu1.norm() == 0.0 || mu2.norm() == 0.0) throw Error(ErrorCode::invalid_input, "means must be nonzero");
  if (mu1.size() != mu2.size()) throw Error(ErrorCode::invalid_shape, "means differ in dimension");
  if (n1 < 0 || n2 < 0 || n1 + n2 == 0) throw Error(ErrorCode::invalid_input, "need at least one row");
  Rng rng(seed);
  const Eigen::Index d = mu1.size();
  Mat x = normal_matrix(rng, n1 + n2, d, sigma > 0.0 ? sigma : 1.0);
  if (sigma <= 0.0) x.setZero();
  GmmSample out;
  out.q.assign(static_cast<std::size_t>(n1 + n2), 0);
  for (int i = 0; i < n1 + n2; ++i) {
    const bool first = i < n1;
    x.row(i) += (first ? mu1 : mu2).transpose();
    out.q[static_cast<std::size_t>(i)] = first ? 1 : 0;
  }
  out.x = DataMatrix(std::move(x), MatrixKind::custom, seed);
  return out;
}

Vec gmm_separator(const Vec& mu1, const Vec& mu2) { return mu1 / mu1.norm() - mu2 / mu2.norm(); }

Vec random_direction(int d, std::uint64_t seed) {
  Rng rng(seed);
  Vec w = normal_vector(rng, d);
  while (w.norm() == 0.0) w = normal_vector(rng, d);
  return w / w.norm();
}

Vec smallest_right_singular_vector(const Mat& x) {
  Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeFullV);
  Vec v = svd.matrixV().col(x.cols() - 1);
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
  return v;
}

}  // namespace relurec
