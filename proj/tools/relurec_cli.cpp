// Command-line front end. Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "relurec/arrangements.hpp"
#include "relurec/config.hpp"
#include "relurec/ensembles.hpp"
#include "relurec/experiments.hpp"
#include "relurec/isometry.hpp"
#include "relurec/parallel.hpp"
#include "relurec/programs.hpp"
#include "relurec/recovery.hpp"
#include "relurec/rng.hpp"
#include "relurec/solvers.hpp"
#include "relurec/theory.hpp"

using namespace relurec;

namespace {

// Flags every subcommand accepts. Values given on the command line win over
// the config file, which wins over the defaults below.
struct Shared {
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  double tol = 1e-8;
  unsigned threads = default_threads();

  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  KeyValueConfig file;

  void attach(CLI::App* app) {
    seed_opt = app->add_option("--seed", seed, "Master seed; sub-seeds are derived from it by label");
    out_opt = app->add_option("--out", out, "Output path (stdout when omitted)");
    app->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
    tol_opt = app->add_option("--tol", tol, "Solver tolerance")->check(CLI::PositiveNumber);
    threads_opt = app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  }

  // Loads the config and fills the shared values the command line left unset.
  void resolve() {
    if (config.empty()) return;
    file = load_config(config);
    auto pick = [&](const char* key) -> const std::string* {
      if (const std::string* v = file.find(key)) return v;
      return file.find(std::string("grid.") + key);
    };
    if (!seed_opt->count()) {
      if (const std::string* v = pick("seed")) seed = std::stoull(*v);
    }
    if (!out_opt->count()) {
      if (const std::string* v = pick("out")) out = *v;
    }
    if (!tol_opt->count()) {
      if (const std::string* v = pick("tol")) tol = std::stod(*v);
    }
    if (!threads_opt->count()) {
      if (const std::string* v = pick("threads")) threads = static_cast<unsigned>(std::stoul(*v));
    }
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::invalid_input, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

const std::map<std::string, MatrixKind> kEnsembles{{"gaussian", MatrixKind::gaussian},
                                                   {"cubic_gaussian", MatrixKind::cubic_gaussian},
                                                   {"haar", MatrixKind::haar},
                                                   {"whitened_cubic", MatrixKind::whitened_cubic}};

const std::map<std::string, ProgramKind> kPrograms{
    {"grelu", ProgramKind::grelu},
    {"grelu_skip", ProgramKind::grelu_skip},
    {"grelu_normal", ProgramKind::grelu_normal},
    {"relu_cone", ProgramKind::relu_cone},
    {"relu_skip_cone", ProgramKind::relu_skip_cone},
    {"relu_normal_cone", ProgramKind::relu_normal_cone},
    {"reg_grelu_skip", ProgramKind::reg_grelu_skip}};

const std::map<std::string, PlantVariant> kPlants{
    {"linear", PlantVariant::linear}, {"relu", PlantVariant::relu}, {"normalized", PlantVariant::normalized_relu_sum}};

// Options shared by the single-instance commands (solve, reconstruct).
struct InstanceFlags {
  MatrixKind ensemble = MatrixKind::gaussian;
  int n = 40;
  int d = 10;
  PlantVariant plant = PlantVariant::linear;
  int k = 1;
  double sigma = 0.0;
  double beta = 0.0;
  int samples = 0;
  ProgramKind program = ProgramKind::grelu_skip;
  double success_tol = kDefaultSuccessTol;

  void attach(CLI::App* app) {
    app->add_option("--ensemble", ensemble, "Data ensemble")->transform(CLI::CheckedTransformer(kEnsembles));
    app->add_option("--n", n, "Rows")->check(CLI::PositiveNumber);
    app->add_option("--d", d, "Columns")->check(CLI::PositiveNumber);
    app->add_option("--plant", plant, "Planted model")->transform(CLI::CheckedTransformer(kPlants));
    app->add_option("--k", k, "Planted neurons")->check(CLI::PositiveNumber);
    app->add_option("--sigma", sigma, "Noise level")->check(CLI::NonNegativeNumber);
    app->add_option("--beta", beta, "Penalty weight (reg_grelu_skip only)")->check(CLI::NonNegativeNumber);
    app->add_option("--samples", samples, "Sampled directions (0 = max(n, 50))")->check(CLI::NonNegativeNumber);
    app->add_option("--program", program, "Convex program")->transform(CLI::CheckedTransformer(kPrograms));
    app->add_option("--success-tol", success_tol, "Relative distance for success")->check(CLI::PositiveNumber);
  }

  GridConfig grid(const Shared& sh) const {
    GridConfig g;
    g.ensemble = ensemble;
    g.plant.variant = plant;
    g.plant.k = k;
    g.pattern_samples = samples;
    g.program = program;
    g.solver.tol = sh.tol;
    g.success_tol = success_tol;
    return g;
  }
};

struct SolvedInstance {
  ExperimentInstance inst;
  ConvexProgram prog;
  BlockSolution sol;
};

SolvedInstance solve_instance(const InstanceFlags& f, const Shared& sh) {
  const GridConfig g = f.grid(sh);
  SolvedInstance s;
  s.inst = build_instance(g, f.d, f.n, f.sigma, sh.seed);
  s.prog = build_program(f.program, s.inst.x.mat, s.inst.patterns, s.inst.obs.y, f.beta);
  s.sol = solve(s.prog.problem, g.solver);
  return s;
}

// Grid flags; each overrides the matching config key when given.
struct GridFlags {
  std::string d_values, n_values, sigmas, betas, ensemble, plant, program, metric, plant_direction;
  int trials = 0;
  int k = 0;
  int samples = -1;
  double success_tol = 0.0;
  double budget = -1.0;
  bool timing = false;
  bool plots = false;

  void attach(CLI::App* app, bool sweep) {
    app->add_option("--d-values", d_values, "d grid, e.g. 10,20 or 10:5:40");
    app->add_option("--n-values", n_values, "n grid, e.g. 10:5:120");
    app->add_option("--sigmas", sigmas, "Noise levels, e.g. 0,0.125,0.25");
    if (sweep) app->add_option("--betas", betas, "Penalty grid, e.g. 0:0.05:2");
    app->add_option("--trials", trials, "Trials per cell")->check(CLI::PositiveNumber);
    app->add_option("--ensemble", ensemble, "gaussian, cubic_gaussian, haar or whitened_cubic");
    app->add_option("--plant", plant, "linear, relu or normalized");
    app->add_option("--plant-direction", plant_direction, "random or smallest_singular");
    app->add_option("--k", k, "Planted neurons")->check(CLI::PositiveNumber);
    if (!sweep) app->add_option("--program", program, "Convex program");
    app->add_option("--metric", metric, "success, abs_distance, test_distance or nic_rate");
    app->add_option("--samples", samples, "Sampled directions per cell (0 = max(n, 50))")->check(CLI::NonNegativeNumber);
    app->add_option("--success-tol", success_tol, "Relative distance for success")->check(CLI::PositiveNumber);
    app->add_option("--budget", budget, "Per-cell wall-clock budget in seconds")->check(CLI::NonNegativeNumber);
    app->add_flag("--timing", timing, "Record wall_ms (rows then vary between runs)");
    if (!sweep) app->add_flag("--plots", plots, "Write plotting scripts next to the CSV");
  }

  GridConfig resolve(const Shared& sh) const {
    GridConfig g = grid_config_from(sh.file);
    KeyValueConfig over;
    auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) over.values[key] = v;
    };
    put("d_values", d_values);
    put("n_values", n_values);
    put("sigmas", sigmas);
    put("betas", betas);
    put("ensemble", ensemble);
    put("plant", plant);
    put("plant_direction", plant_direction);
    put("program", program);
    put("metric", metric);
    g = grid_config_from(over, g);
    if (trials > 0) g.trials = trials;
    if (k > 0) g.plant.k = k;
    if (samples >= 0) g.pattern_samples = samples;
    if (success_tol > 0.0) g.success_tol = success_tol;
    if (budget >= 0.0) g.cell_budget_s = budget;
    if (timing) g.record_wall_time = true;
    g.master_seed = sh.seed;
    g.solver.tol = sh.tol;
    g.threads = sh.threads;
    g.output = sh.out;
    return g;
  }
};

void print_grid_summary(const std::vector<CellResult>& rows) {
  std::map<std::tuple<int, int, double>, std::pair<int, int>> agg;
  for (const CellResult& r : rows) {
    auto& a = agg[{r.d, r.n, r.sigma}];
    a.first += r.success;
    a.second += 1;
  }
  for (const auto& [key, v] : agg) {
    std::cerr << "d=" << std::get<0>(key) << " n=" << std::get<1>(key) << " sigma=" << std::get<2>(key)
              << " success_rate=" << static_cast<double>(v.first) / v.second << '\n';
  }
}

void write_solution(std::ostream& os, const SolvedInstance& s) {
  os.precision(17);
  for (std::size_t b = 0; b < s.sol.weights.size(); ++b) {
    const BlockInfo& info = s.prog.info[b];
    os << "block " << b << ' '
       << (info.pattern < 0 ? std::string("linear")
                            : mask_string(s.prog.patterns[static_cast<std::size_t>(info.pattern)].mask))
       << ' ' << info.sign;
    for (Eigen::Index i = 0; i < s.sol.weights[b].size(); ++i) os << ' ' << s.sol.weights[b](i);
    os << '\n';
  }
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = count == 1 ? a : a + (b - a) * i / (count - 1);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex ReLU-network recovery toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto make = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    return sub;
  };

  // arrangements
  Shared arr_sh;
  MatrixKind arr_ens = MatrixKind::gaussian;
  int arr_n = 10, arr_d = 3, arr_samples = 0;
  std::string arr_mode = "sample";
  CLI::App* arr = make("arrangements", "Sample or enumerate arrangement patterns");
  arr_sh.attach(arr);
  arr->add_option("--ensemble", arr_ens, "Data ensemble")->transform(CLI::CheckedTransformer(kEnsembles));
  arr->add_option("--n", arr_n, "Rows")->check(CLI::PositiveNumber);
  arr->add_option("--d", arr_d, "Columns")->check(CLI::PositiveNumber);
  arr->add_option("--mode", arr_mode, "sample or exact")->check(CLI::IsMember({"sample", "exact"}));
  arr->add_option("--samples", arr_samples, "Sampled directions (0 = max(n, 50))")->check(CLI::NonNegativeNumber);
  arr->callback([&] {
    arr_sh.resolve();
    const DataMatrix x = gen_matrix(arr_ens, arr_n, arr_d, derive_seed(arr_sh.seed, "data"));
    const int count = arr_samples > 0 ? arr_samples : default_sample_count(arr_n);
    const PatternSet set = arr_mode == "exact" ? enumerate_exact(x) : sample_patterns(x, count, derive_seed(arr_sh.seed, "patterns"));
    const int rank = compact_svd(x.mat).rank;
    std::cout << "patterns=" << set.size() << " contains_all_ones=" << (set.contains_all_ones ? 1 : 0)
              << " cover_bound=" << cover_bound(arr_n, rank) << '\n';
    if (!arr_sh.out.empty()) {
      Output o(arr_sh.out);
      write_patterns(o.stream(), set);
    }
  });

  // nic
  Shared nic_sh;
  std::string nic_kind = "nic-l";
  MatrixKind nic_ens = MatrixKind::gaussian;
  int nic_n = 60, nic_d = 10, nic_k = 2, nic_samples = 0;
  std::string nic_patterns;
  CLI::App* nic = make("nic", "Evaluate a neural isometry condition");
  nic_sh.attach(nic);
  nic->add_option("--kind", nic_kind, "nic-l, nic-1, nnic-1, nic-k, nnic-k or snic-orth")
      ->check(CLI::IsMember({"nic-l", "nic-1", "nnic-1", "nic-k", "nnic-k", "snic-orth"}));
  nic->add_option("--ensemble", nic_ens, "Data ensemble")->transform(CLI::CheckedTransformer(kEnsembles));
  nic->add_option("--n", nic_n, "Rows")->check(CLI::PositiveNumber);
  nic->add_option("--d", nic_d, "Columns")->check(CLI::PositiveNumber);
  nic->add_option("--k", nic_k, "Planted neurons for nic-k / nnic-k")->check(CLI::PositiveNumber);
  nic->add_option("--samples", nic_samples, "Sampled directions (0 = max(n, 50))")->check(CLI::NonNegativeNumber);
  nic->add_option("--patterns", nic_patterns, "Pattern file to use instead of sampling")->check(CLI::ExistingFile);
  nic->callback([&] {
    nic_sh.resolve();
    set_isometry_threads(nic_sh.threads);
    const DataMatrix x = gen_matrix(nic_ens, nic_n, nic_d, derive_seed(nic_sh.seed, "data"));
    PatternSet set;
    if (!nic_patterns.empty()) {
      std::ifstream in(nic_patterns);
      set = read_patterns(in);
    } else {
      const int count = nic_samples > 0 ? nic_samples : default_sample_count(nic_n);
      set = sample_patterns(x, count, derive_seed(nic_sh.seed, "patterns"));
    }
    const bool multi = nic_kind == "nic-k" || nic_kind == "nnic-k";
    PlantSpec ps;
    ps.k = multi ? nic_k : 1;
    const std::vector<Vec> ws = planted_directions(ps, nic_d, derive_seed(nic_sh.seed, "plant"));
    NicReport rep;
    if (nic_kind == "nic-l") {
      rep = nic_linear(x.mat, ws[0], set);
    } else if (nic_kind == "snic-orth") {
      rep = snic_orth(x.mat, set);
    } else {
      for (const Vec& w : ws) set.insert(pattern_of(x, w));
      const std::vector<double> rs(ws.size(), 1.0);
      if (nic_kind == "nic-1") rep = nic_relu_single(x.mat, ws[0], set);
      else if (nic_kind == "nnic-1") rep = nnic_single(x.mat, ws[0], set);
      else rep = nic_multi(x.mat, ws, rs, set, nic_kind == "nnic-k");
    }
    std::cout << "kind=" << to_string(rep.kind) << " patterns=" << set.size() << " max_lhs=" << rep.max_lhs
              << " holds=" << (rep.holds ? 1 : 0) << " marginal=" << (rep.marginal ? 1 : 0) << '\n';
    if (!nic_sh.out.empty()) {
      Output o(nic_sh.out);
      write_nic_csv(o.stream(), rep);
    }
  });

  // solve
  Shared solve_sh;
  InstanceFlags solve_f;
  CLI::App* solve_cmd = make("solve", "Build one instance, solve its convex program and assess recovery");
  solve_sh.attach(solve_cmd);
  solve_f.attach(solve_cmd);
  solve_cmd->callback([&] {
    solve_sh.resolve();
    const SolvedInstance s = solve_instance(solve_f, solve_sh);
    const RecoveryVerdict v = assess_recovery(s.sol, s.prog, s.inst.plant, solve_f.success_tol);
    const KktReport kkt = verify_kkt(s.prog.problem, s.sol, solve_sh.tol);
    std::cout << "status=" << s.sol.status << " objective=" << s.sol.objective << " iterations=" << s.sol.iterations
              << " blocks=" << s.prog.problem.num_blocks() << " active_blocks=" << s.sol.active_blocks.size()
              << " kkt=" << kkt.max() << " success=" << (v.success ? 1 : 0) << " abs_distance=" << v.abs_distance
              << " rel_distance=" << v.rel_distance
              << " test_distance=" << test_distance(s.sol, s.prog, s.inst.plant, s.inst.x_test) << '\n';
    if (!solve_sh.out.empty()) {
      Output o(solve_sh.out);
      write_solution(o.stream(), s);
    }
  });

  // reconstruct
  Shared rec_sh;
  InstanceFlags rec_f;
  CLI::App* rec = make("reconstruct", "Solve one instance and turn the active blocks into network weights");
  rec_sh.attach(rec);
  rec_f.attach(rec);
  rec->callback([&] {
    rec_sh.resolve();
    const SolvedInstance s = solve_instance(rec_f, rec_sh);
    const NetworkWeights net = reconstruct_network(s.sol, s.prog);
    const double gap = (forward(net, s.inst.x.mat) - group_apply(s.prog.problem, s.sol.weights)).norm();
    std::cout << "arch=" << to_string(net.arch) << " width=" << net.width()
              << " linear=" << (net.linear_first ? 1 : 0) << " output_gap=" << gap << '\n';
    Output o(rec_sh.out);
    if (!rec_sh.out.empty()) write_network(o.stream(), net);
  });

  // phase
  Shared phase_sh;
  GridFlags phase_f;
  CLI::App* phase = make("phase", "Run a recovery phase-transition grid and write CSV");
  phase_sh.attach(phase);
  phase_f.attach(phase, false);
  phase->callback([&] {
    phase_sh.resolve();
    const GridConfig g = phase_f.resolve(phase_sh);
    const std::vector<CellResult> rows = run_grid(g);
    {
      Output o(g.output);
      write_grid_csv(o.stream(), rows);
    }
    print_grid_summary(rows);
    if (phase_f.plots) {
      if (g.output.empty()) throw Error(ErrorCode::invalid_input, "--plots needs --out");
      for (const auto& p : emit_plots(g.output)) std::cerr << "wrote " << p.string() << '\n';
    }
  });

  // beta-sweep
  Shared sweep_sh;
  GridFlags sweep_f;
  CLI::App* sweep = make("beta-sweep", "Sweep the penalty of the regularized program on a noisy linear plant");
  sweep_sh.attach(sweep);
  sweep_f.attach(sweep, true);
  sweep->callback([&] {
    sweep_sh.resolve();
    GridConfig g = sweep_f.resolve(sweep_sh);
    if (g.betas.empty()) g.betas = parse_double_list("0:0.05:2");
    const std::vector<CellResult> rows = run_beta_sweep(g);
    Output o(g.output);
    write_sweep_csv(o.stream(), rows);
  });

  // theory
  Shared th_sh;
  CLI::App* th = make("theory", "Closed-form and semi-analytic predictions");
  th_sh.attach(th);
  th->require_subcommand(1);

  th->add_subcommand("theta-star", "Solve the scalar threshold equation")->callback([&] {
    th_sh.resolve();
    const double t = solve_theta_star(1e-10);
    std::cout.precision(10);
    std::cout << "theta_star=" << t << "\ninverse=" << 1.0 / t << "\ng_at_0=" << theta_g(0.0)
              << "\ng_at_half=" << theta_g(0.5) << '\n';
  });

  int sd_n = 10;
  long sd_samples = 100000;
  CLI::App* sd = th->add_subcommand("statdim", "Monte-Carlo statistical dimension of the nonnegative orthant");
  sd->add_option("--n", sd_n, "Dimension")->check(CLI::PositiveNumber);
  sd->add_option("--samples", sd_samples, "Draws")->check(CLI::Range(100L, 1000000000L));
  sd->callback([&] {
    th_sh.resolve();
    const McEstimate e = orthant_statdim_mc(sd_n, sd_samples, derive_seed(th_sh.seed, "statdim"));
    std::cout << "statdim=" << e.mean << "\nstderr=" << e.stderr_ << "\nexact=" << 0.5 * sd_n << '\n';
  });

  int kb_n = 40, kb_d = 10;
  CLI::App* kb = th->add_subcommand("kinematic", "Kinematic probability bound for the all-ones pattern");
  kb->add_option("--n", kb_n, "Rows")->check(CLI::PositiveNumber);
  kb->add_option("--d", kb_d, "Columns")->check(CLI::PositiveNumber);
  kb->callback([&] {
    const KinematicEstimate k = kinematic_bound(kb_n, kb_d);
    std::cout << "alpha=" << k.alpha << "\nbound=" << k.bound << "\nregime=" << to_string(k.regime) << '\n';
  });

  std::string cv_which = "g_single";
  int cv_points = 101;
  CLI::App* cv = th->add_subcommand("curve", "Asymptotic condition curves as CSV");
  cv->add_option("--which", cv_which, "g_single, g1 or g2")->check(CLI::IsMember({"g_single", "g1", "g2"}));
  cv->add_option("--points", cv_points, "Grid points per axis")->check(CLI::Range(2, 100000));
  cv->callback([&] {
    th_sh.resolve();
    Output o(th_sh.out);
    std::ostream& os = o.stream();
    os.precision(12);
    const std::vector<double> grid = linspace(-1.0, 1.0, cv_points);
    if (cv_which == "g2") {
      os << "gamma1,gamma2,value\n";
      for (double a : grid) {
        for (double b : grid) {
          if (a * a + b * b <= 1.0) os << a << ',' << b << ',' << curve_g2(a, b) << '\n';
        }
      }
      return;
    }
    const std::vector<double> vals = curve_grid(cv_which == "g1" ? &curve_g1 : &curve_g_single, grid, th_sh.threads);
    os << "gamma,value\n";
    for (std::size_t i = 0; i < grid.size(); ++i) os << grid[i] << ',' << vals[i] << '\n';
  });

  double cf_gamma = 0.0;
  CLI::App* cf = th->add_subcommand("coefficients", "Coefficients of the orthant moment matrix");
  cf->add_option("--gamma", cf_gamma, "Cosine between the two directions")->check(CLI::Range(-1.0, 1.0));
  cf->callback([&] {
    const CurveCoefficients c = curve_coefficients(cf_gamma);
    std::cout.precision(12);
    std::cout << "c1=" << c.c1 << "\nc2=" << c.c2 << "\nc3=" << c.c3 << '\n';
  });

  double bi_eta = 1.0, bi_noise = 0.0, bi_gamma = 1.0 / 7.0;
  CLI::App* bi = th->add_subcommand("beta-interval", "Admissible penalty interval under noise");
  bi->add_option("--eta", bi_eta, "Planted norm")->check(CLI::PositiveNumber);
  bi->add_option("--noise", bi_noise, "Noise norm")->check(CLI::NonNegativeNumber);
  bi->add_option("--gamma", bi_gamma, "Condition slack")->check(CLI::PositiveNumber);
  bi->callback([&] {
    const BetaInterval b = noisy_beta_interval(bi_eta, bi_noise, bi_gamma);
    if (b.empty) {
      std::cout << "empty=1\nreason=" << b.reason << '\n';
      return;
    }
    std::cout << "empty=0\nlo=" << b.lo << "\nhi=" << b.hi << "\ndistance_bound_at_hi=" << b.distance_bound(b.hi) << '\n';
  });

  double tc_n = 1000, tc_d = 10, tc_s2 = 1.0;
  CLI::App* tc = th->add_subcommand("threshold", "Sample-size condition of the noisy recovery guarantee");
  tc->add_option("--n", tc_n, "Rows")->check(CLI::PositiveNumber);
  tc->add_option("--d", tc_d, "Columns")->check(CLI::PositiveNumber);
  tc->add_option("--sigma2", tc_s2, "Noise variance")->check(CLI::NonNegativeNumber);
  tc->callback([&] {
    const ThresholdReport r = threshold_check(tc_n, tc_d, tc_s2);
    std::cout << "satisfied=" << (r.satisfied ? 1 : 0) << "\nnoise_term=" << r.noise_term
              << "\ndimension_term=" << r.dimension_term << "\nbinding=" << r.binding << '\n';
  });

  // gmm-check
  Shared gmm_sh;
  int gmm_n1 = 50, gmm_n2 = 50, gmm_d = 20, gmm_trials = 20;
  double gmm_mu = 1.0;
  std::string gmm_sigmas = "0.1";
  CLI::App* gmm = make("gmm-check", "Check that a two-component mixture realizes its label pattern");
  gmm_sh.attach(gmm);
  gmm->add_option("--n1", gmm_n1, "Rows from the first component")->check(CLI::NonNegativeNumber);
  gmm->add_option("--n2", gmm_n2, "Rows from the second component")->check(CLI::NonNegativeNumber);
  gmm->add_option("--d", gmm_d, "Dimension")->check(CLI::PositiveNumber);
  gmm->add_option("--mu", gmm_mu, "Means are +mu * 1 and -mu * 1 scaled by 1/sqrt(d)")->check(CLI::PositiveNumber);
  gmm->add_option("--sigmas", gmm_sigmas, "Noise levels, e.g. 0.05:0.05:1");
  gmm->add_option("--trials", gmm_trials, "Draws per noise level")->check(CLI::PositiveNumber);
  gmm->callback([&] {
    gmm_sh.resolve();
    const Vec mu1 = Vec::Constant(gmm_d, gmm_mu / std::sqrt(static_cast<double>(gmm_d)));
    const Vec mu2 = -mu1;
    const Vec sep = gmm_separator(mu1, mu2);
    Output o(gmm_sh.out);
    o.stream() << "sigma,match_rate\n";
    for (double s : parse_double_list(gmm_sigmas)) {
      int hits = 0;
      for (int t = 0; t < gmm_trials; ++t) {
        const GmmSample g = gen_gmm(gmm_n1, gmm_n2, mu1, mu2, s,
                                    derive_seed(gmm_sh.seed, {seed_part(s), static_cast<std::uint64_t>(t)}));
        if (mask_of(g.x.mat, sep) == g.q) ++hits;
      }
      o.stream() << s << ',' << static_cast<double>(hits) / gmm_trials << '\n';
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const relurec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
