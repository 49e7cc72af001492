#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "relurec/arrangements.hpp"
#include "relurec/ensembles.hpp"
#include "relurec/programs.hpp"
#include "relurec/solvers.hpp"

namespace relurec {

enum class Metric { success, abs_distance, test_distance, nic_rate };
const char* to_string(Metric m);
Metric parse_metric(std::string_view name);

// Planted directions are random unit vectors; with k >= 2 they are made
// orthonormal. Output weights are all +1. smallest_singular replaces a single
// direction by the smallest right singular vector of the realized X.
struct PlantSpec {
  PlantVariant variant = PlantVariant::linear;
  int k = 1;
  bool smallest_singular = false;
};

struct GridConfig {
  std::vector<int> d_values{10};
  std::vector<int> n_values{10, 20, 30};
  int trials = 5;
  MatrixKind ensemble = MatrixKind::gaussian;
  PlantSpec plant;
  std::vector<double> sigmas{0.0};
  ProgramKind program = ProgramKind::grelu_skip;
  Metric metric = Metric::success;
  std::uint64_t master_seed = 1;
  SolverOptions solver;
  double success_tol = 1e-4;
  int pattern_samples = 0;       // 0 selects the default count
  double cell_budget_s = 60.0;
  bool compute_nic = true;
  bool record_wall_time = false; // wall_ms is 0 unless enabled, which keeps reruns byte-identical
  unsigned threads = 1;
  std::vector<double> betas;     // used by run_beta_sweep
  std::string output;

  void validate() const;
};

struct CellResult {
  int d = 0;
  int n = 0;
  double sigma = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  int success = 0;
  double abs_distance = 0.0;
  double test_distance = 0.0;
  double nic_max_lhs = -1.0;  // -1 when the condition could not be evaluated
  long solver_iterations = 0;
  double wall_ms = 0.0;
  std::string note;

  // Filled by the beta sweep.
  double beta = 0.0;
  int active_blocks = 0;
};

std::uint64_t cell_seed(std::uint64_t master, int d, int n, double sigma, int trial);

std::vector<Vec> planted_directions(const PlantSpec& ps, int d, std::uint64_t seed);
PlantedModel make_plant(const PlantSpec& ps, int d, double sigma, std::uint64_t seed);

// Everything a cell needs before a program is assembled. Sub-seeds are
// derive_seed(seed, label) with labels "data", "plant", "noise", "patterns", "test".
struct ExperimentInstance {
  DataMatrix x;
  PlantedModel plant;
  Observation obs;
  PatternSet patterns;  // sampled set extended by the planted patterns
  Mat x_test;
};

ExperimentInstance build_instance(const GridConfig& cfg, int d, int n, double sigma, std::uint64_t seed);

// One cell of the grid: data, plant, observation, sampled patterns, program, solve, verdict.
CellResult run_cell(const GridConfig& cfg, int d, int n, double sigma, int trial);

// Runs every (d, n, sigma, trial) cell; failures are recorded in the row.
// Results are sorted by (d, n, sigma, trial) whatever the scheduling.
std::vector<CellResult> run_grid(const GridConfig& cfg);

// Fixed (n, d) from the first grid entries; for each sigma, trial and beta the
// penalized program is solved. success = exactly one active block, the linear one.
std::vector<CellResult> run_beta_sweep(const GridConfig& cfg);

extern const char* const kGridCsvHeader;
extern const char* const kSweepCsvHeader;

void write_grid_csv(std::ostream& os, const std::vector<CellResult>& rows);
void write_sweep_csv(std::ostream& os, const std::vector<CellResult>& rows);

// Parses a grid CSV; throws schema errors naming the offending line.
std::vector<CellResult> read_grid_csv(std::istream& is);

// Writes one plotting script per metric next to the CSV and returns their paths.
// The scripts are never executed.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv_path);

}  // namespace relurec
