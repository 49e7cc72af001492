#pragma once

#include <string_view>
#include <vector>

#include "relurec/arrangements.hpp"
#include "relurec/ensembles.hpp"
#include "relurec/solvers.hpp"

namespace relurec {

// The convex programs assembled from a data matrix and a pattern set.
//   grelu            blocks D_j X
//   grelu_skip       X, then D_j X
//   grelu_normal     U_j from the compact SVD of D_j X
//   relu_cone        +D_j X and -D_j X, each with cone (2D_j - I) X
//   relu_skip_cone   X, then the relu_cone pairs
//   relu_normal_cone +U_j and -U_j, each with cone (2D_j - I) X V_j S_j^{-1}
//   reg_grelu_skip   U, then D_j U, penalized with beta >= 0 (U from the SVD of X)
enum class ProgramKind { grelu, grelu_skip, grelu_normal, relu_cone, relu_skip_cone, relu_normal_cone, reg_grelu_skip };

const char* to_string(ProgramKind kind);
ProgramKind parse_program_kind(std::string_view name);
bool is_normalized(ProgramKind kind);
bool has_skip(ProgramKind kind);

struct BlockInfo {
  int pattern = -1;    // index into the pattern set; -1 for the linear block
  int sign = 1;        // -1 for the negated copy of a sign-split pair
  Mat to_direction;    // maps block weights to a first-layer direction in R^d
  Mat from_direction;  // maps a direction w to the block weights reproducing D_j X w
};

struct ConvexProgram {
  ProgramKind kind = ProgramKind::grelu;
  GroupProblem problem;
  std::vector<BlockInfo> info;
  PatternSet patterns;
  Mat x;
};

ConvexProgram build_program(ProgramKind kind, const Mat& x, const PatternSet& patterns, const Vec& y,
                            double beta = 0.0);

// Blocks and weights that the planted model occupies in a program's coordinates.
struct PlantedSupport {
  std::vector<std::size_t> blocks;
  std::vector<Vec> targets;
};

// Throws missing_plant if a planted pattern is not in the program's set.
PlantedSupport planted_support(const ConvexProgram& prog, const PlantedModel& plant);

// Returns the pattern set extended so that every planted neuron's own pattern is present.
PatternSet with_planted_patterns(const PatternSet& set, const Mat& x, const PlantedModel& plant);

// The program matching each condition: linear plant on grelu_skip, relu plant
// on grelu, normalized plant on grelu_normal.
enum class CertificateKind { linear_skip, relu, normalized };

DualCertificate build_certificate(const Mat& x, const PatternSet& patterns, const PlantedModel& plant,
                                  CertificateKind kind);

}  // namespace relurec
