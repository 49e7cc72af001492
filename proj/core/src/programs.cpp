#include "relurec/programs.hpp"

#include <cmath>
#include <string>

namespace relurec {

namespace {

Mat masked_rows(const Mat& x, const Mask& mask) {
  Mat out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) out.row(i).setZero();
  }
  return out;
}

Mat signed_rows(const Mat& x, const Mask& mask) {
  Mat out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) out.row(i) *= -1.0;
  }
  return out;
}

bool is_cone_kind(ProgramKind k) {
  return k == ProgramKind::relu_cone || k == ProgramKind::relu_skip_cone || k == ProgramKind::relu_normal_cone;
}

std::size_t find_block(const ConvexProgram& prog, int pattern, int sign) {
  for (std::size_t b = 0; b < prog.info.size(); ++b) {
    if (prog.info[b].pattern == pattern && prog.info[b].sign == sign) return b;
  }
  throw Error(ErrorCode::missing_plant, "planted pattern has no block in this program");
}

// Output coefficient of each planted neuron in y = sum_i c_i (X w_i)_+.
std::vector<double> neuron_coefficients(const Mat& x, const PlantedModel& plant) {
  std::vector<double> c(plant.k());
  for (std::size_t i = 0; i < plant.k(); ++i) {
    if (plant.variant == PlantVariant::normalized_relu_sum) {
      const double nrm = (x * plant.w[i]).cwiseMax(0.0).norm();
      if (nrm <= 0.0) throw Error(ErrorCode::degenerate_plant, "planted neuron is dead on this data");
      c[i] = plant.r[i] / nrm;
    } else {
      c[i] = plant.r.empty() ? 1.0 : plant.r[i];
    }
  }
  return c;
}

}  // namespace

const char* to_string(ProgramKind kind) {
  switch (kind) {
    case ProgramKind::grelu: return "grelu";
    case ProgramKind::grelu_skip: return "grelu_skip";
    case ProgramKind::grelu_normal: return "grelu_normal";
    case ProgramKind::relu_cone: return "relu_cone";
    case ProgramKind::relu_skip_cone: return "relu_skip_cone";
    case ProgramKind::relu_normal_cone: return "relu_normal_cone";
    case ProgramKind::reg_grelu_skip: return "reg_grelu_skip";
  }
  return "grelu";
}

ProgramKind parse_program_kind(std::string_view name) {
  for (ProgramKind k : {ProgramKind::grelu, ProgramKind::grelu_skip, ProgramKind::grelu_normal, ProgramKind::relu_cone,
                        ProgramKind::relu_skip_cone, ProgramKind::relu_normal_cone, ProgramKind::reg_grelu_skip}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::invalid_input, "unknown program '" + std::string(name) + "'");
}

bool is_normalized(ProgramKind kind) {
  return kind == ProgramKind::grelu_normal || kind == ProgramKind::relu_normal_cone;
}

bool has_skip(ProgramKind kind) {
  return kind == ProgramKind::grelu_skip || kind == ProgramKind::relu_skip_cone || kind == ProgramKind::reg_grelu_skip;
}

ConvexProgram build_program(ProgramKind kind, const Mat& x, const PatternSet& patterns, const Vec& y, double beta) {
  if (y.size() != x.rows()) throw Error(ErrorCode::invalid_shape, "target length differs from row count");
  // The penalized program also accepts beta = 0, its minimum-norm limit.
  if (!(beta >= 0.0) || (kind != ProgramKind::reg_grelu_skip && beta != 0.0)) {
    throw Error(ErrorCode::invalid_input, "only the penalized program takes beta > 0");
  }
  ConvexProgram prog;
  prog.kind = kind;
  prog.patterns = patterns;
  prog.x = x;
  prog.problem.y = y;
  prog.problem.beta = beta;
  const Eigen::Index d = x.cols();
  const Mat eye = Mat::Identity(d, d);
  const bool cones = is_cone_kind(kind);

  auto push = [&](Mat block, BlockInfo info, Mat cone) {
    prog.problem.blocks.push_back(std::move(block));
    prog.info.push_back(std::move(info));
    prog.problem.cones.push_back(std::move(cone));
  };

  if (kind == ProgramKind::reg_grelu_skip) {
    const CompactSvd svd = compact_svd(x);
    const Mat to = svd.v * svd.sigma.cwiseInverse().asDiagonal();
    const Mat from = svd.sigma.asDiagonal() * svd.v.transpose();
    push(svd.u, {-1, 1, to, from}, Mat(0, svd.rank));
    for (std::size_t j = 0; j < patterns.size(); ++j) {
      push(masked_rows(svd.u, patterns[j].mask), {static_cast<int>(j), 1, to, from}, Mat(0, svd.rank));
    }
    if (!cones) prog.problem.cones.clear();
    return prog;
  }

  if (has_skip(kind)) push(x, {-1, 1, eye, eye}, Mat(0, d));

  for (std::size_t j = 0; j < patterns.size(); ++j) {
    const Mask& mask = patterns[j].mask;
    const int pj = static_cast<int>(j);
    if (is_normalized(kind)) {
      const CompactSvd svd = compact_svd(masked_rows(x, mask));
      if (svd.rank == 0) continue;
      const Mat to = svd.v * svd.sigma.cwiseInverse().asDiagonal();
      const Mat from = svd.sigma.asDiagonal() * svd.v.transpose();
      if (cones) {
        const Mat c = signed_rows(x, mask) * to;
        push(svd.u, {pj, 1, to, from}, c);
        push(-svd.u, {pj, -1, to, from}, c);
      } else {
        push(svd.u, {pj, 1, to, from}, Mat(0, svd.rank));
      }
    } else {
      const Mat dx = masked_rows(x, mask);
      if (cones) {
        const Mat c = signed_rows(x, mask);
        push(dx, {pj, 1, eye, eye}, c);
        push(-dx, {pj, -1, eye, eye}, c);
      } else {
        push(dx, {pj, 1, eye, eye}, Mat(0, d));
      }
    }
  }
  if (!cones) prog.problem.cones.clear();
  return prog;
}

PlantedSupport planted_support(const ConvexProgram& prog, const PlantedModel& plant) {
  PlantedSupport sup;
  if (plant.variant == PlantVariant::linear) {
    if (!has_skip(prog.kind)) throw Error(ErrorCode::missing_plant, "linear plant needs a program with a skip block");
    sup.blocks.push_back(0);
    sup.targets.push_back(prog.info[0].from_direction * plant.w.at(0));
    return sup;
  }
  const bool cones = is_cone_kind(prog.kind);
  const std::vector<double> coef = neuron_coefficients(prog.x, plant);
  for (std::size_t i = 0; i < plant.k(); ++i) {
    const Mask mask = mask_of(prog.x, plant.w[i]);
    const auto idx = prog.patterns.find(mask);
    if (!idx) throw Error(ErrorCode::missing_plant, "planted pattern missing from the pattern set");
    const int sign = (cones && coef[i] < 0.0) ? -1 : 1;
    const std::size_t b = find_block(prog, static_cast<int>(*idx), sign);
    const double c = cones ? std::abs(coef[i]) : coef[i];
    sup.blocks.push_back(b);
    sup.targets.push_back(c * (prog.info[b].from_direction * plant.w[i]));
  }
  return sup;
}

PatternSet with_planted_patterns(const PatternSet& set, const Mat& x, const PlantedModel& plant) {
  if (plant.variant == PlantVariant::linear) return set;
  PatternSet out = set;
  for (const Vec& w : plant.w) out.insert(pattern_of(x, w));
  return out;
}

DualCertificate build_certificate(const Mat& x, const PatternSet& patterns, const PlantedModel& plant,
                                  CertificateKind kind) {
  ProgramKind pk = ProgramKind::grelu;
  if (kind == CertificateKind::linear_skip) pk = ProgramKind::grelu_skip;
  if (kind == CertificateKind::normalized) pk = ProgramKind::grelu_normal;
  const ConvexProgram prog = build_program(pk, x, patterns, plant_output(plant, x));
  const PlantedSupport sup = planted_support(prog, plant);
  return certificate_for_blocks(prog.problem, sup.blocks, sup.targets);
}

}  // namespace relurec
