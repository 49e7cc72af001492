#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "relurec/ensembles.hpp"
#include "relurec/programs.hpp"
#include "relurec/solvers.hpp"

namespace relurec {

// plain:            sum_i (X w1_i)_+ w2_i
// skip:             X w1_0 w2_0 + plain
// normalized:       sum_i alpha_i N((X w1_i)_+) w2_i,           N(v) = v / |v|
// normalized_skip:  alpha_0 N(X w1_0) w2_0 + sum_i (alpha_i N(X w1_i))_+ w2_i
enum class Arch { plain, skip, normalized, normalized_skip };

const char* to_string(Arch arch);
Arch parse_arch(std::string_view name);
Arch arch_of(ProgramKind kind);

struct NetworkWeights {
  Arch arch = Arch::plain;
  std::vector<Vec> first_layer;
  std::vector<double> second_layer;
  std::vector<double> alphas;  // present for the normalized architectures

  // The linear neuron of the skip architectures.
  std::optional<Vec> linear_first;
  double linear_second = 0.0;
  double linear_alpha = 1.0;

  std::size_t width() const { return first_layer.size(); }
  void validate() const;
};

Vec forward(const NetworkWeights& net, const Mat& x);

struct RecoveryVerdict {
  bool success = false;
  double abs_distance = 0.0;
  double rel_distance = 0.0;
  bool support_match = false;
  int extras = 0;   // active blocks outside the planted set
  int missing = 0;  // planted blocks that came out inactive
};

constexpr double kDefaultSuccessTol = 1e-4;

RecoveryVerdict assess_recovery(const BlockSolution& sol, const ConvexProgram& prog, const PlantedModel& plant,
                                double tol = kDefaultSuccessTol);

// |y_hat - y*| on x_test, where y_hat evaluates every block of the solution as
// a neuron (negated blocks subtract) and y* is the noiseless plant output.
double test_distance(const BlockSolution& sol, const ConvexProgram& prog, const PlantedModel& plant,
                     const Mat& x_test);

// Turns active blocks into neurons with balanced scaling. Throws
// inconsistent_solution when a block's sign pattern contradicts its mask.
NetworkWeights reconstruct_network(const BlockSolution& sol, const ConvexProgram& prog);

NetworkWeights split_network(const NetworkWeights& net, std::size_t neuron, const std::vector<double>& gammas);
NetworkWeights canonicalize(const NetworkWeights& net, double zero_tol = 1e-12);
bool is_equivalent(const NetworkWeights& a, const NetworkWeights& b, double tol = 1e-8);

void write_network(std::ostream& os, const NetworkWeights& net);
NetworkWeights read_network(std::istream& is);

}  // namespace relurec
