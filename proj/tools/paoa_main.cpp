#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paoa/analysis.hpp"
#include "paoa/array_emulator.hpp"
#include "paoa/io.hpp"
#include "paoa/pcircuit.hpp"
#include "paoa/problems.hpp"
#include "paoa/variational.hpp"

namespace fs = std::filesystem;
using namespace paoa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;

std::string default_out_dir() {
  if (const char* env = std::getenv("PAOA_OUT")) return env;
  return ".";
}

void write_snapshot(const CLI::App& app, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream snap(out_dir / "resolved_config.toml");
  snap << app.config_to_str(true, true);
}

Activation make_activation(const std::string& kind, double alpha, double kappa) {
  if (kind == "tanh") return Activation::tanh_kind();
  if (kind == "gompertz") return Activation::gompertz(alpha, kappa);
  throw std::invalid_argument("unknown activation: " + kind);
}

std::string activation_name(const Activation& act) {
  return act.kind == Activation::Kind::SymmetricTanh ? "tanh" : "gompertz";
}

fs::path sidecar_path(const fs::path& instance_file) {
  fs::path p = instance_file;
  p.replace_extension(".gs.json");
  return p;
}

std::vector<SolvedInstance> load_solved(const std::vector<std::string>& files) {
  std::vector<SolvedInstance> out;
  for (const auto& f : files) {
    SolvedInstance si;
    si.instance = load_instance(f);
    si.e_sol = load_ground_state(sidecar_path(f)).e_sol;
    out.push_back(std::move(si));
  }
  return out;
}

void check_disjoint_seeds(const ScheduleFile& sched,
                          const std::vector<SolvedInstance>& test) {
  const std::set<std::uint64_t> train(sched.provenance.instance_seeds.begin(),
                                      sched.provenance.instance_seeds.end());
  for (const auto& si : test)
    if (train.count(si.instance.seed))
      throw std::invalid_argument(
          "test instance seed " + std::to_string(si.instance.seed) +
          " appears in the schedule's training set");
}

void write_trace_csv(const fs::path& file, std::uint64_t seed,
                     const std::vector<TracePoint>& trace) {
  CsvWriter w(file, seed, {"iteration", "evaluations", "best_cost"});
  for (const auto& tp : trace)
    w.row({CsvWriter::num(tp.iteration), CsvWriter::num(tp.evaluations),
           CsvWriter::num(tp.cost)});
}

struct OptimizerFlags {
  int max_iterations = 300;
  double eps_step = 1e-4;
  double initial_step = 0.5;
  int runs_per_eval = 10000;
  std::uint64_t cost_seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-iterations", max_iterations,
                    "cost evaluation budget");
    cmd->add_option("--eps-step", eps_step, "trust-radius stop threshold");
    cmd->add_option("--initial-step", initial_step, "initial trust radius");
    cmd->add_option("--runs-per-eval", runs_per_eval,
                    "samples per cost evaluation");
    cmd->add_option("--cost-seed", cost_seed, "sampling seed per evaluation");
  }

  OptimizerConfig build() const {
    OptimizerConfig c;
    c.max_iterations = max_iterations;
    c.eps_step = eps_step;
    c.initial_step = initial_step;
    c.runs_per_eval = runs_per_eval;
    c.cost_seed = cost_seed;
    c.validate();
    return c;
  }
};

std::string optimizer_json(const OptimizerConfig& c) {
  return std::string("{\"max_iterations\":") + std::to_string(c.max_iterations) +
         ",\"eps_step\":" + CsvWriter::num(c.eps_step) +
         ",\"initial_step\":" + CsvWriter::num(c.initial_step) +
         ",\"runs_per_eval\":" + std::to_string(c.runs_per_eval) +
         ",\"cost_seed\":" + std::to_string(c.cost_seed) + "}";
}

std::vector<double> make_grid(double lo, double hi, int points) {
  if (points < 3 || !(hi > lo))
    throw std::invalid_argument("bad sweep grid");
  std::vector<double> grid(points);
  for (int k = 0; k < points; ++k)
    grid[k] = lo + (hi - lo) * k / (points - 1);
  return grid;
}

int run(int argc, char** argv) {
  CLI::App app{"Layered p-bit annealing toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file with per-subcommand sections");

  std::string out_dir = default_out_dir();
  int workers = 1;
  app.add_option("--out", out_dir, "output directory")
      ->envname("PAOA_OUT")
      ->capture_default_str();
  app.add_option("--workers", workers, "sampling threads")
      ->capture_default_str();

  // gen-instances
  auto* gen = app.add_subcommand("gen-instances", "generate SK instances");
  int gen_n = 26, gen_count = 1;
  std::uint64_t gen_seed = 0;
  gen->add_option("--n", gen_n, "spins per instance")->capture_default_str();
  gen->add_option("--count", gen_count, "number of instances")
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "base seed")->capture_default_str();

  // solve-exact
  auto* solve = app.add_subcommand("solve-exact", "exhaustive ground states");
  std::vector<std::string> solve_files;
  solve->add_option("instances", solve_files, "instance JSON files")
      ->required();

  // train
  auto* train = app.add_subcommand("train", "optimize annealing schedules");
  std::vector<std::string> train_files;
  int train_p = 3;
  std::string train_act = "tanh";
  double train_alpha = 1.4, train_kappa = std::log(2.0);
  OptimizerFlags train_opt;
  train->add_option("instances", train_files, "training instance files")
      ->required();
  train->add_option("--p", train_p, "circuit depth")->capture_default_str();
  train->add_option("--activation", train_act, "tanh or gompertz")
      ->capture_default_str();
  train->add_option("--alpha", train_alpha, "gompertz exponent")
      ->capture_default_str();
  train->add_option("--kappa", train_kappa, "gompertz exposure")
      ->capture_default_str();
  train_opt.attach(train);

  // infer
  auto* infer = app.add_subcommand("infer", "evaluate schedules on a test set");
  std::vector<std::string> infer_files, infer_schedules;
  std::string infer_act = "same", infer_array, infer_grouping = "per-instance";
  double infer_alpha = 1.4, infer_kappa = std::log(2.0);
  int infer_runs = 1000, infer_resamples = 2000;
  std::uint64_t infer_seed = 0;
  infer->add_option("instances", infer_files, "test instance files")
      ->required();
  infer->add_option("--schedule", infer_schedules, "schedule files (one per depth)")
      ->required();
  infer->add_option("--activation", infer_act,
                    "same, tanh or gompertz (inference backend)")
      ->capture_default_str();
  infer->add_option("--alpha", infer_alpha, "gompertz exponent")
      ->capture_default_str();
  infer->add_option("--kappa", infer_kappa, "gompertz exposure")
      ->capture_default_str();
  infer->add_option("--array", infer_array,
                    "calibrated array file; switches to the emulator backend");
  infer->add_option("--runs", infer_runs, "runs per instance")
      ->capture_default_str();
  infer->add_option("--seed", infer_seed, "sampling seed")->capture_default_str();
  infer->add_option("--ci-grouping", infer_grouping, "pooled or per-instance")
      ->capture_default_str();
  infer->add_option("--resamples", infer_resamples, "bootstrap resamples")
      ->capture_default_str();

  // extrapolate
  auto* extrap = app.add_subcommand("extrapolate",
                                    "fit a schedule model and extend the depth");
  std::string extrap_schedule;
  std::vector<int> extrap_targets;
  std::vector<std::string> extrap_files;
  int extrap_runs = 1000, extrap_resamples = 2000;
  std::uint64_t extrap_seed = 0;
  std::string extrap_grouping = "per-instance";
  extrap->add_option("--schedule", extrap_schedule, "source schedule file")
      ->required();
  extrap->add_option("--targets", extrap_targets, "target depths")->required();
  extrap->add_option("instances", extrap_files,
                     "optional test instances for a results CSV");
  extrap->add_option("--runs", extrap_runs, "runs per instance")
      ->capture_default_str();
  extrap->add_option("--seed", extrap_seed, "sampling seed")
      ->capture_default_str();
  extrap->add_option("--ci-grouping", extrap_grouping, "pooled or per-instance")
      ->capture_default_str();
  extrap->add_option("--resamples", extrap_resamples, "bootstrap resamples")
      ->capture_default_str();

  // majority
  auto* maj = app.add_subcommand("majority", "train the 4-node majority gate");
  std::vector<int> maj_depths = {1, 2, 3, 4};
  std::string maj_mode = "tanh_tanh";
  double maj_alpha = 1.4, maj_kappa = std::log(2.0), maj_epsilon = 0.5;
  long maj_infer_runs = 100000;
  std::uint64_t maj_infer_seed = 1;
  OptimizerFlags maj_opt;
  maj_opt.max_iterations = 1000;
  maj_opt.eps_step = 1e-7;
  maj_opt.runs_per_eval = 100000;
  maj->add_option("--depths", maj_depths, "depths to train")
      ->capture_default_str();
  maj->add_option("--mode", maj_mode,
                  "tanh_tanh, tanh_gompertz or gompertz_gompertz")
      ->capture_default_str();
  maj->add_option("--alpha", maj_alpha, "gompertz exponent")
      ->capture_default_str();
  maj->add_option("--kappa", maj_kappa, "gompertz exposure")
      ->capture_default_str();
  maj->add_option("--epsilon", maj_epsilon, "histogram smoothing")
      ->capture_default_str();
  maj->add_option("--infer-runs", maj_infer_runs, "samples for the final histogram")
      ->capture_default_str();
  maj->add_option("--infer-seed", maj_infer_seed, "seed for the final histogram")
      ->capture_default_str();
  maj_opt.attach(maj);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "sweep and fit every pixel");
  std::string cal_array;
  int cal_rows = 64, cal_cols = 64, cal_grid_points = 61;
  long cal_windows = 10000;
  std::uint64_t cal_seed = 0, cal_sweep_seed = 1;
  double cal_grid_lo = -3.0, cal_grid_hi = 3.0;
  VariabilitySpec cal_spec;
  cal->add_option("--array", cal_array, "raw array file; omitted => synthesize");
  cal->add_option("--rows", cal_rows)->capture_default_str();
  cal->add_option("--cols", cal_cols)->capture_default_str();
  cal->add_option("--array-seed", cal_seed, "synthesis seed")
      ->capture_default_str();
  cal->add_option("--alpha-sigma", cal_spec.alpha_rel_sigma)
      ->capture_default_str();
  cal->add_option("--kappa-sigma", cal_spec.kappa_rel_sigma)
      ->capture_default_str();
  cal->add_option("--windows", cal_windows, "windows per grid point")
      ->capture_default_str();
  cal->add_option("--sweep-seed", cal_sweep_seed)->capture_default_str();
  cal->add_option("--grid-lo", cal_grid_lo)->capture_default_str();
  cal->add_option("--grid-hi", cal_grid_hi)->capture_default_str();
  cal->add_option("--grid-points", cal_grid_points)->capture_default_str();

  // synth-array
  auto* synth = app.add_subcommand("synth-array", "write a raw array model");
  int synth_rows = 64, synth_cols = 64;
  std::uint64_t synth_seed = 0;
  VariabilitySpec synth_spec;
  synth->add_option("--rows", synth_rows)->capture_default_str();
  synth->add_option("--cols", synth_cols)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--alpha-mean", synth_spec.alpha_mean)
      ->capture_default_str();
  synth->add_option("--alpha-sigma", synth_spec.alpha_rel_sigma)
      ->capture_default_str();
  synth->add_option("--kappa-mean", synth_spec.kappa_mean)
      ->capture_default_str();
  synth->add_option("--kappa-sigma", synth_spec.kappa_rel_sigma)
      ->capture_default_str();
  synth->add_option("--zeta", synth_spec.zeta)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  const fs::path out(out_dir);
  write_snapshot(app, out);

  if (gen->parsed()) {
    for (int k = 0; k < gen_count; ++k) {
      const auto inst = gen_sk_instance(gen_n, derive_seed(gen_seed, k));
      char name[32];
      std::snprintf(name, sizeof(name), "instance_%04d.json", k);
      save_instance(inst, out / name);
    }
    return kExitOk;
  }

  if (solve->parsed()) {
    for (const auto& f : solve_files) {
      const auto inst = load_instance(f);
      save_ground_state(exact_ground_state(inst), sidecar_path(f));
    }
    return kExitOk;
  }

  if (train->parsed()) {
    const auto config = train_opt.build();
    const auto act = make_activation(train_act, train_alpha, train_kappa);
    std::vector<TwoSchedule> schedules;
    std::vector<std::uint64_t> seeds;
    bool exhausted = false;
    for (const auto& f : train_files) {
      const auto inst = load_instance(f);
      const auto res = train_instance(inst, train_p, act, config, workers);
      exhausted |= res.opt.reason == Termination::MaxIterations;
      seeds.push_back(inst.seed);
      ScheduleProvenance prov;
      prov.instance_seeds = {inst.seed};
      prov.config_json = optimizer_json(config);
      const auto stem = fs::path(f).stem().string();
      save_schedule(res.schedule, act, prov, out / ("schedule_" + stem + ".json"));
      write_trace_csv(out / ("trace_" + stem + ".csv"), config.cost_seed,
                      res.opt.trace);
      schedules.push_back(res.schedule);
    }
    ScheduleProvenance avg_prov;
    avg_prov.instance_seeds = seeds;
    avg_prov.config_json = optimizer_json(config);
    save_schedule(average_schedules(schedules), act, avg_prov,
                  out / "schedule_avg.json");
    return exhausted ? kExitBudget : kExitOk;
  }

  if (infer->parsed()) {
    const auto solved = load_solved(infer_files);
    std::map<int, TwoSchedule> by_depth;
    std::string train_name;
    Activation act = Activation::tanh_kind();
    for (const auto& sf : infer_schedules) {
      const auto sched = load_schedule(sf);
      check_disjoint_seeds(sched, solved);
      if (by_depth.count(sched.schedule.depth()))
        throw std::invalid_argument("duplicate schedule depth");
      by_depth[sched.schedule.depth()] = sched.schedule;
      train_name = activation_name(sched.activation);
      act = sched.activation;
    }
    if (infer_act != "same")
      act = make_activation(infer_act, infer_alpha, infer_kappa);
    CalibratedArray array;
    const CalibratedArray* emulator = nullptr;
    if (!infer_array.empty()) {
      array = load_array(infer_array);
      array.validate();
      emulator = &array;
    }
    const CiGrouping grouping = infer_grouping == "pooled"
                                    ? CiGrouping::PooledRuns
                                    : CiGrouping::PerInstance;
    const auto curve =
        metric_curve(solved, by_depth, act, emulator, infer_runs, infer_seed,
                     grouping, infer_resamples, workers);
    std::vector<ResultRow> rows;
    double e_sol_mean = 0.0;
    for (const auto& si : solved) e_sol_mean += si.e_sol;
    e_sol_mean /= static_cast<double>(solved.size());
    for (const auto& pt : curve) {
      ResultRow r;
      r.depth = pt.depth;
      r.activation_train = train_name;
      r.activation_infer = emulator ? "emulator" : activation_name(act);
      r.mean_energy = pt.mean_energy;
      r.e_sol = e_sol_mean;
      r.residual_energy = pt.residual;
      r.approx_ratio = pt.ratio.mean;
      r.ci_low = pt.ratio.ci_low;
      r.ci_high = pt.ratio.ci_high;
      r.n_runs = pt.n_runs;
      r.n_instances = pt.n_instances;
      r.seed = infer_seed;
      rows.push_back(std::move(r));
    }
    write_results_csv(out / "results.csv", infer_seed, rows);
    return kExitOk;
  }

  if (extrap->parsed()) {
    const auto source = load_schedule(extrap_schedule);
    const auto m1 = fit_schedule_model(source.schedule.beta1);
    const auto m2 = fit_schedule_model(source.schedule.beta2);
    const double rss = schedule_fit_residual(m1, source.schedule.beta1) +
                       schedule_fit_residual(m2, source.schedule.beta2);
    std::map<int, TwoSchedule> by_depth;
    for (int target : extrap_targets) {
      TwoSchedule ext;
      ext.beta1 = extrapolate_schedule(m1, target);
      ext.beta2 = extrapolate_schedule(m2, target);
      ext.validate();
      save_schedule(ext, source.activation, source.provenance,
                    out / ("schedule_p" + std::to_string(target) + ".json"),
                    rss);
      by_depth[target] = std::move(ext);
    }
    if (!extrap_files.empty()) {
      const auto solved = load_solved(extrap_files);
      const CiGrouping grouping = extrap_grouping == "pooled"
                                      ? CiGrouping::PooledRuns
                                      : CiGrouping::PerInstance;
      by_depth[source.schedule.depth()] = source.schedule;  // baseline row
      const auto curve = metric_curve(solved, by_depth, source.activation,
                                      nullptr, extrap_runs, extrap_seed,
                                      grouping, extrap_resamples, workers);
      std::vector<ResultRow> rows;
      double e_sol_mean = 0.0;
      for (const auto& si : solved) e_sol_mean += si.e_sol;
      e_sol_mean /= static_cast<double>(solved.size());
      for (const auto& pt : curve) {
        ResultRow r;
        r.depth = pt.depth;
        r.activation_train = activation_name(source.activation);
        r.activation_infer = r.activation_train;
        r.mean_energy = pt.mean_energy;
        r.e_sol = e_sol_mean;
        r.residual_energy = pt.residual;
        r.approx_ratio = pt.ratio.mean;
        r.ci_low = pt.ratio.ci_low;
        r.ci_high = pt.ratio.ci_high;
        r.n_runs = pt.n_runs;
        r.n_instances = pt.n_instances;
        r.seed = extrap_seed;
        rows.push_back(std::move(r));
      }
      write_results_csv(out / "results.csv", extrap_seed, rows);
    }
    return kExitOk;
  }

  if (maj->parsed()) {
    const auto config = maj_opt.build();
    const auto bar = maj_mode.find('_');
    if (bar == std::string::npos)
      throw std::invalid_argument("bad mode: " + maj_mode);
    const auto act_train =
        make_activation(maj_mode.substr(0, bar), maj_alpha, maj_kappa);
    const auto act_infer =
        make_activation(maj_mode.substr(bar + 1), maj_alpha, maj_kappa);
    const auto target = majority_target_distribution();
    bool exhausted = false;
    CsvWriter kl_csv(out / "kl_vs_depth.csv", maj_infer_seed,
                     {"depth", "kl", "n_runs"});
    for (int p : maj_depths) {
      const auto res =
          train_majority(p, act_train, config, workers, maj_epsilon);
      exhausted |= res.opt.reason == Termination::MaxIterations;
      write_trace_csv(out / ("trace_p" + std::to_string(p) + ".csv"),
                      config.cost_seed, res.opt.trace);
      const auto hist = sample_coupling_histogram(
          res.ansatz, act_infer, maj_infer_runs, maj_infer_seed, workers);
      std::vector<double> emp(16, 0.0);
      for (int k = 0; k < 16; ++k)
        emp[k] = static_cast<double>(hist[k]) /
                 static_cast<double>(maj_infer_runs);
      CsvWriter dist(out / ("dist_p" + std::to_string(p) + ".csv"),
                     maj_infer_seed, {"state", "probability"});
      for (int k = 0; k < 16; ++k)
        dist.row({CsvWriter::num(k), CsvWriter::num(emp[k])});
      kl_csv.row({CsvWriter::num(p),
                  CsvWriter::num(kl_divergence(target, emp, maj_epsilon /
                                               static_cast<double>(maj_infer_runs))),
                  CsvWriter::num(static_cast<long>(maj_infer_runs))});
    }
    return exhausted ? kExitBudget : kExitOk;
  }

  if (cal->parsed()) {
    ArrayModel model;
    if (!cal_array.empty()) {
      model = load_array(cal_array).array;
    } else {
      model = synthesize_array(cal_spec, cal_rows, cal_cols, cal_seed);
    }
    const auto grid = make_grid(cal_grid_lo, cal_grid_hi, cal_grid_points);
    const auto ca = calibrate_array(model, grid, cal_windows, cal_sweep_seed);
    save_array(ca, out / "array_calibrated.json");
    CsvWriter report(out / "calibration_report.csv", cal_sweep_seed,
                     {"pixel", "row", "col", "alpha", "kappa", "v_bias", "k"});
    for (int px = 0; px < model.size(); ++px)
      report.row({CsvWriter::num(px), CsvWriter::num(px / model.cols),
                  CsvWriter::num(px % model.cols),
                  CsvWriter::num(ca.cal[px].fitted_alpha),
                  CsvWriter::num(ca.cal[px].fitted_kappa),
                  CsvWriter::num(ca.cal[px].v_bias),
                  CsvWriter::num(ca.cal[px].gain_k)});
    return kExitOk;
  }

  if (synth->parsed()) {
    CalibratedArray raw;
    raw.array = synthesize_array(synth_spec, synth_rows, synth_cols, synth_seed);
    save_array(raw, out / "array.json");
    return kExitOk;
  }

  return kExitValidation;  // unreachable with require_subcommand
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
