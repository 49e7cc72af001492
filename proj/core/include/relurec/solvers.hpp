#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "relurec/numerics.hpp"

namespace relurec {

// min sum_j |w_j|  s.t. sum_j A_j w_j = y                    (beta == 0)
// min 1/2 |sum_j A_j w_j - y|^2 + beta sum_j |w_j|           (beta > 0)
// Optional per-block cones require C_j w_j >= 0; a cone with zero rows is
// unconstrained.
struct GroupProblem {
  std::vector<Mat> blocks;
  Vec y;
  double beta = 0.0;
  std::vector<Mat> cones;

  Eigen::Index n() const { return y.size(); }
  std::size_t num_blocks() const { return blocks.size(); }
  bool has_cones() const;
  void validate() const;
};

struct SolverOptions {
  double tol = 1e-8;
  long max_iter = 200000;
  double rho_init = 1.0;
  bool accel = true;            // over-relaxation for splitting, momentum for proximal gradient
  bool polish = true;           // active-set Newton refinement of the splitting iterate
  double zero_threshold = 1e-6; // block is active iff |w_j| > zero_threshold * max_k |w_k|
  double time_budget_s = 0.0;   // 0 disables the wall-clock budget
};

struct BlockSolution {
  std::vector<Vec> weights;
  Vec dual;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double cone_violation = 0.0;
  long iterations = 0;
  std::vector<std::size_t> active_blocks;
  bool converged = false;
  bool polished = false;
  std::string status;
};

struct KktReport {
  double stationarity = 0.0;
  double dual_feasibility = 0.0;
  double primal_feasibility = 0.0;
  double cone_feasibility = 0.0;
  double max() const;
};

BlockSolution solve_group_min_norm(const GroupProblem& p, const SolverOptions& opts = {});
BlockSolution solve_group_lasso(const GroupProblem& p, const SolverOptions& opts = {});
BlockSolution solve_cone_constrained(const GroupProblem& p, const SolverOptions& opts = {});

// Picks the solver matching beta and the presence of cones.
BlockSolution solve(const GroupProblem& p, const SolverOptions& opts = {});

// Residuals are scale-free: stationarity and dual feasibility are measured in
// units of beta (or 1 when beta == 0), primal feasibility relative to |y|.
KktReport verify_kkt(const GroupProblem& p, const BlockSolution& s, double tol = 1e-8);

double group_objective(const GroupProblem& p, const std::vector<Vec>& weights);
Vec group_apply(const GroupProblem& p, const std::vector<Vec>& weights);
std::vector<std::size_t> active_set(const std::vector<Vec>& weights, double zero_threshold);

// Least-norm lambda with A_i^T lambda = u_i on the planted blocks, where u_i is
// the unit direction of the i-th planted target.
struct DualCertificate {
  Vec lambda;
  std::vector<double> block_norms;
  std::vector<std::size_t> planted_indices;
  bool is_strict = false;
};

DualCertificate certificate_for_blocks(const GroupProblem& p, const std::vector<std::size_t>& planted,
                                       const std::vector<Vec>& planted_targets);

// Nonnegative least squares min |A x - b| s.t. x >= 0 (Lawson-Hanson active set).
Vec nnls(const Mat& a, const Vec& b, int max_iter = 0);

}  // namespace relurec
