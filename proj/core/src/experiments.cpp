#include "relurec/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "relurec/arrangements.hpp"
#include "relurec/isometry.hpp"
#include "relurec/parallel.hpp"
#include "relurec/recovery.hpp"
#include "relurec/rng.hpp"

namespace relurec {

const char* const kGridCsvHeader =
    "d,n,sigma,trial,seed,success,abs_distance,test_distance,nic_max_lhs,solver_iterations,wall_ms,note";
const char* const kSweepCsvHeader =
    "d,n,sigma,trial,seed,beta,active_blocks,success,abs_distance,test_distance,solver_iterations,wall_ms,note";

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

void append_note(std::string& note, const std::string& what) {
  if (!note.empty()) note += ' ';
  note += sanitize(what);
}

double nic_lhs(const Mat& x, const PlantedModel& plant, const PatternSet& patterns) {
  switch (plant.variant) {
    case PlantVariant::linear:
      return nic_linear(x, plant.w[0], patterns).max_lhs;
    case PlantVariant::relu:
      if (plant.k() == 1) return nic_relu_single(x, plant.w[0], patterns).max_lhs;
      return nic_multi(x, plant.w, plant.r, patterns, false).max_lhs;
    case PlantVariant::normalized_relu_sum:
      return nic_multi(x, plant.w, plant.r, patterns, true).max_lhs;
  }
  return -1.0;
}

SolverOptions cell_solver_options(const GridConfig& cfg) {
  SolverOptions opts = cfg.solver;
  opts.time_budget_s = cfg.cell_budget_s;
  return opts;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

const char* to_string(Metric m) {
  switch (m) {
    case Metric::success: return "success";
    case Metric::abs_distance: return "abs_distance";
    case Metric::test_distance: return "test_distance";
    case Metric::nic_rate: return "nic_rate";
  }
  return "success";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : {Metric::success, Metric::abs_distance, Metric::test_distance, Metric::nic_rate}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::invalid_input, "unknown metric '" + std::string(name) + "'");
}

void GridConfig::validate() const {
  if (d_values.empty() || n_values.empty() || sigmas.empty()) throw Error(ErrorCode::invalid_input, "grids must be nonempty");
  if (trials < 1) throw Error(ErrorCode::invalid_input, "trials must be >= 1");
  for (int d : d_values) {
    if (d < 1) throw Error(ErrorCode::invalid_input, "d values must be positive");
  }
  for (int n : n_values) {
    if (n < 1) throw Error(ErrorCode::invalid_input, "n values must be positive");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorCode::invalid_input, "noise levels must be finite and >= 0");
  }
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw Error(ErrorCode::invalid_input, "beta values must be finite and >= 0");
  }
  if (plant.k < 1) throw Error(ErrorCode::invalid_input, "plant needs at least one neuron");
  if (!(success_tol > 0.0)) throw Error(ErrorCode::invalid_input, "success tolerance must be positive");
  if (!(cell_budget_s >= 0.0)) throw Error(ErrorCode::invalid_input, "cell budget must be >= 0");
}

std::vector<Vec> planted_directions(const PlantSpec& ps, int d, std::uint64_t seed) {
  if (ps.k == 1) return {random_direction(d, seed)};
  if (ps.k > d) throw Error(ErrorCode::invalid_input, "cannot plant more orthogonal neurons than dimensions");
  Rng rng(seed);
  const Mat g = normal_matrix(rng, d, ps.k, 1.0);
  const Mat q = g.householderQr().householderQ() * Mat::Identity(d, ps.k);
  std::vector<Vec> ws;
  for (int i = 0; i < ps.k; ++i) ws.emplace_back(q.col(i));
  return ws;
}

PlantedModel make_plant(const PlantSpec& ps, int d, double sigma, std::uint64_t seed) {
  std::vector<Vec> ws = planted_directions(ps, d, seed);
  std::vector<double> rs(ws.size(), 1.0);
  switch (ps.variant) {
    case PlantVariant::linear:
      if (ps.k != 1) throw Error(ErrorCode::invalid_input, "a linear plant has exactly one direction");
      return PlantedModel::linear(ws[0], sigma);
    case PlantVariant::relu:
      return PlantedModel::relu_sum(std::move(ws), std::move(rs), sigma);
    case PlantVariant::normalized_relu_sum:
      return PlantedModel::normalized(std::move(ws), std::move(rs), sigma);
  }
  return PlantedModel::linear(ws[0], sigma);
}

ExperimentInstance build_instance(const GridConfig& cfg, int d, int n, double sigma, std::uint64_t seed) {
  ExperimentInstance in;
  in.x = gen_matrix(cfg.ensemble, n, d, derive_seed(seed, "data"));
  in.plant = make_plant(cfg.plant, d, sigma, derive_seed(seed, "plant"));
  if (cfg.plant.smallest_singular) {
    if (in.plant.k() != 1) throw Error(ErrorCode::invalid_input, "smallest singular direction needs a single neuron");
    in.plant.w[0] = smallest_right_singular_vector(in.x.mat);
  }
  in.obs = gen_observation(in.plant, in.x, derive_seed(seed, "noise"));
  const int count = cfg.pattern_samples > 0 ? cfg.pattern_samples : default_sample_count(n);
  in.patterns = with_planted_patterns(sample_patterns(in.x, count, derive_seed(seed, "patterns")), in.x.mat, in.plant);
  in.x_test = gen_matrix(cfg.ensemble, n, d, derive_seed(seed, "test")).mat;
  return in;
}

std::uint64_t cell_seed(std::uint64_t master, int d, int n, double sigma, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n), seed_part(sigma),
                              static_cast<std::uint64_t>(trial)});
}

CellResult run_cell(const GridConfig& cfg, int d, int n, double sigma, int trial) {
  const auto t0 = Clock::now();
  CellResult r;
  r.d = d;
  r.n = n;
  r.sigma = sigma;
  r.trial = trial;
  r.seed = cell_seed(cfg.master_seed, d, n, sigma, trial);
  try {
    const ExperimentInstance in = build_instance(cfg, d, n, sigma, r.seed);
    if (cfg.compute_nic) {
      try {
        r.nic_max_lhs = nic_lhs(in.x.mat, in.plant, in.patterns);
      } catch (const Error& e) {
        r.nic_max_lhs = -1.0;
        append_note(r.note, std::string("nic: ") + e.what());
      }
    }
    const ConvexProgram prog = build_program(cfg.program, in.x.mat, in.patterns, in.obs.y);
    const BlockSolution sol = solve(prog.problem, cell_solver_options(cfg));
    r.solver_iterations = sol.iterations;
    const RecoveryVerdict v = assess_recovery(sol, prog, in.plant, cfg.success_tol);
    r.abs_distance = v.abs_distance;
    r.test_distance = test_distance(sol, prog, in.plant, in.x_test);
    r.active_blocks = static_cast<int>(sol.active_blocks.size());
    const bool ok = sigma == 0.0 ? v.success : v.support_match;
    r.success = (ok && sol.converged) ? 1 : 0;
    if (!sol.converged) append_note(r.note, "solver " + sol.status);
  } catch (const std::exception& e) {
    r.success = 0;
    append_note(r.note, e.what());
  }
  if (cfg.record_wall_time) r.wall_ms = elapsed_ms(t0);
  return r;
}

std::vector<CellResult> run_grid(const GridConfig& cfg) {
  cfg.validate();
  struct Key {
    int d, n, trial;
    double sigma;
  };
  std::vector<Key> keys;
  for (int d : cfg.d_values) {
    for (int n : cfg.n_values) {
      for (double s : cfg.sigmas) {
        for (int t = 0; t < cfg.trials; ++t) keys.push_back({d, n, t, s});
      }
    }
  }
  std::vector<CellResult> rows(keys.size());
  parallel_for(keys.size(), cfg.threads, [&](std::size_t i) {
    rows[i] = run_cell(cfg, keys[i].d, keys[i].n, keys[i].sigma, keys[i].trial);
  });
  std::sort(rows.begin(), rows.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.d, a.n, a.sigma, a.trial) < std::tie(b.d, b.n, b.sigma, b.trial);
  });
  return rows;
}

std::vector<CellResult> run_beta_sweep(const GridConfig& cfg_in) {
  GridConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.betas.empty()) throw Error(ErrorCode::invalid_input, "beta sweep needs a beta grid");
  if (cfg.plant.variant != PlantVariant::linear) throw Error(ErrorCode::invalid_input, "beta sweep plants a linear neuron");
  cfg.program = ProgramKind::reg_grelu_skip;
  const int d = cfg.d_values.front();
  const int n = cfg.n_values.front();

  struct Key {
    double sigma;
    int trial;
    double beta;
  };
  std::vector<Key> keys;
  for (double s : cfg.sigmas) {
    for (int t = 0; t < cfg.trials; ++t) {
      for (double b : cfg.betas) keys.push_back({s, t, b});
    }
  }
  std::vector<CellResult> rows(keys.size());
  parallel_for(keys.size(), cfg.threads, [&](std::size_t i) {
    const auto t0 = Clock::now();
    CellResult& r = rows[i];
    r.d = d;
    r.n = n;
    r.sigma = keys[i].sigma;
    r.trial = keys[i].trial;
    r.beta = keys[i].beta;
    r.seed = cell_seed(cfg.master_seed, d, n, r.sigma, r.trial);
    try {
      const ExperimentInstance in = build_instance(cfg, d, n, r.sigma, r.seed);
      const ConvexProgram prog = build_program(cfg.program, in.x.mat, in.patterns, in.obs.y, r.beta);
      const BlockSolution sol = solve(prog.problem, cell_solver_options(cfg));
      r.solver_iterations = sol.iterations;
      r.active_blocks = static_cast<int>(sol.active_blocks.size());
      const RecoveryVerdict v = assess_recovery(sol, prog, in.plant, cfg.success_tol);
      r.abs_distance = v.abs_distance;
      r.test_distance = test_distance(sol, prog, in.plant, in.x_test);
      const bool only_linear = sol.active_blocks.size() == 1 && sol.active_blocks[0] == 0;
      r.success = (only_linear && sol.converged) ? 1 : 0;
      if (!sol.converged) append_note(r.note, "solver " + sol.status);
    } catch (const std::exception& e) {
      r.success = 0;
      append_note(r.note, e.what());
    }
    if (cfg.record_wall_time) r.wall_ms = elapsed_ms(t0);
  });
  std::sort(rows.begin(), rows.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.sigma, a.trial, a.beta) < std::tie(b.sigma, b.trial, b.beta);
  });
  return rows;
}

void write_grid_csv(std::ostream& os, const std::vector<CellResult>& rows) {
  os << kGridCsvHeader << '\n';
  for (const CellResult& r : rows) {
    os << r.d << ',' << r.n << ',' << fmt(r.sigma, 17) << ',' << r.trial << ',' << r.seed << ',' << r.success << ','
       << fmt(r.abs_distance) << ',' << fmt(r.test_distance) << ',' << fmt(r.nic_max_lhs) << ','
       << r.solver_iterations << ',' << fmt(r.wall_ms, 6) << ',' << sanitize(r.note) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<CellResult>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const CellResult& r : rows) {
    os << r.d << ',' << r.n << ',' << fmt(r.sigma, 17) << ',' << r.trial << ',' << r.seed << ',' << fmt(r.beta, 17)
       << ',' << r.active_blocks << ',' << r.success << ',' << fmt(r.abs_distance) << ',' << fmt(r.test_distance)
       << ',' << r.solver_iterations << ',' << fmt(r.wall_ms, 6) << ',' << sanitize(r.note) << '\n';
  }
}

std::vector<CellResult> read_grid_csv(std::istream& is) {
  std::string line;
  long lineno = 1;
  if (!std::getline(is, line)) throw Error(ErrorCode::schema, "line 1: empty file, expected the grid header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kGridCsvHeader) throw Error(ErrorCode::schema, "line 1: header does not match the grid schema");
  std::vector<CellResult> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (f.size() != 12) throw Error(ErrorCode::schema, where + "expected 12 fields, found " + std::to_string(f.size()));
    CellResult r;
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& s) {
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
      };
      auto integer = [&](const std::string& s) {
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      r.d = static_cast<int>(integer(f[0]));
      r.n = static_cast<int>(integer(f[1]));
      r.sigma = num(f[2]);
      r.trial = static_cast<int>(integer(f[3]));
      r.seed = std::stoull(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
      r.success = static_cast<int>(integer(f[5]));
      r.abs_distance = num(f[6]);
      r.test_distance = num(f[7]);
      r.nic_max_lhs = num(f[8]);
      r.solver_iterations = static_cast<long>(integer(f[9]));
      r.wall_ms = num(f[10]);
      r.note = f[11];
    } catch (const std::exception& e) {
      throw Error(ErrorCode::schema, where + "malformed value '" + e.what() + "'");
    }
    if (r.success != 0 && r.success != 1) throw Error(ErrorCode::schema, where + "success must be 0 or 1");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::schema, "line " + std::to_string(lineno + 1) + ": no data rows");
  return rows;
}

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot open " + csv_path.string());
  read_grid_csv(in);  // schema check only

  std::vector<std::filesystem::path> written;
  for (const char* metric : {"success", "abs_distance", "test_distance", "nic_max_lhs"}) {
    std::filesystem::path script = csv_path;
    script.replace_filename(csv_path.stem().string() + "_" + metric + ".py");
    std::ofstream os(script);
    if (!os) throw Error(ErrorCode::invalid_input, "cannot write " + script.string());
    os << "#!/usr/bin/env python3\n"
          "# Heat map of the mean '"
       << metric
       << "' per (d, n) cell, one panel per noise level, with the n = 2d line overlaid.\n"
          "import csv\n"
          "import sys\n"
          "from collections import defaultdict\n\n"
          "import matplotlib\n"
          "matplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n\n"
          "CSV = sys.argv[1] if len(sys.argv) > 1 else \""
       << csv_path.filename().string()
       << "\"\n"
          "METRIC = \""
       << metric
       << "\"\n\n"
          "cells = defaultdict(list)\n"
          "with open(CSV, newline=\"\") as fh:\n"
          "    for row in csv.DictReader(fh):\n"
          "        key = (float(row[\"sigma\"]), int(row[\"d\"]), int(row[\"n\"]))\n"
          "        cells[key].append(float(row[METRIC]))\n\n"
          "sigmas = sorted({k[0] for k in cells})\n"
          "ds = sorted({k[1] for k in cells})\n"
          "ns = sorted({k[2] for k in cells})\n"
          "fig, axes = plt.subplots(1, len(sigmas), figsize=(5 * len(sigmas), 4), squeeze=False)\n"
          "for ax, sigma in zip(axes[0], sigmas):\n"
          "    grid = [[sum(cells[(sigma, d, n)]) / len(cells[(sigma, d, n)]) if cells.get((sigma, d, n)) else float(\"nan\")\n"
          "             for n in ns] for d in ds]\n"
          "    im = ax.imshow(grid, origin=\"lower\", aspect=\"auto\", cmap=\"coolwarm\",\n"
          "                   extent=[ns[0], ns[-1], ds[0], ds[-1]])\n"
          "    ax.plot([2 * d for d in ds], ds, \"k--\", label=\"n = 2d\")\n"
          "    ax.set_xlabel(\"n\")\n"
          "    ax.set_ylabel(\"d\")\n"
          "    ax.set_title(f\"{METRIC}, sigma = {sigma:g}\")\n"
          "    ax.legend(loc=\"upper left\")\n"
          "    fig.colorbar(im, ax=ax)\n"
          "fig.tight_layout()\n"
          "fig.savefig(CSV.rsplit(\".\", 1)[0] + \"_\" + METRIC + \".png\", dpi=120)\n";
    written.push_back(script);
  }
  return written;
}

}  // namespace relurec
