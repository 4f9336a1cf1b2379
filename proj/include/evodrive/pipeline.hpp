#pragma once

#include "evodrive/experiment.hpp"

namespace evodrive {

// ---------------------------------------------------------------------------
// Stats recomputation
// ---------------------------------------------------------------------------

inline std::vector<std::filesystem::path> list_run_dirs(const std::filesystem::path& exp_dir) {
  std::vector<std::filesystem::path> dirs;
  for (int i = 0;; ++i) {
    const std::filesystem::path dir = run_dir(exp_dir, i);
    if (!std::filesystem::exists(dir / "result.txt")) break;
    dirs.push_back(dir);
  }
  config_check(!dirs.empty(), "no run directories under " + exp_dir.string());
  return dirs;
}

// Rebuilds the summary from the persisted per-run results; byte-identical to
// the stored summary.txt when nothing was tampered with.
inline std::string recompute_summary(const std::filesystem::path& exp_dir) {
  const ExperimentConfig cfg = load_experiment_config(exp_dir / "config.cfg");
  std::vector<RunLine> lines;
  int i = 0;
  for (const auto& dir : list_run_dirs(exp_dir)) {
    const ResultFile f = load_result_file(dir / "result.txt");
    lines.push_back({i++, f.seed, f.best_fitness, f.initial_best_fitness, f.best_generation});
  }
  return summary_text(cfg.name, to_string(cfg.controller), cfg.fitness_id, lines);
}

// ---------------------------------------------------------------------------
// Generalization variants
// ---------------------------------------------------------------------------

enum class Variant { Identity, LargerArena, WithObstacles, SlowRecharge };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Identity: return "identity";
    case Variant::LargerArena: return "larger_arena";
    case Variant::WithObstacles: return "with_obstacles";
    case Variant::SlowRecharge: return "slow_recharge";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "identity") return Variant::Identity;
  if (s == "larger_arena") return Variant::LargerArena;
  if (s == "with_obstacles") return Variant::WithObstacles;
  if (s == "slow_recharge") return Variant::SlowRecharge;
  throw ConfigError("unknown generalization variant: " + s);
}

// Rebuilds the environment for the chosen variant:
//   larger_arena    dimensions and positions scaled by 3; recharge disc
//                   radius and robot unchanged
//   with_obstacles  three blocks ringing the recharge area
//   slow_recharge   net in-area energy gain halved
inline void apply_variant(Experiment& ex, Variant v) {
  switch (v) {
    case Variant::Identity:
      return;
    case Variant::LargerArena: {
      const double k = 3.0;
      Arena big = Arena::open(ex.arena.width * k, ex.arena.height * k);
      for (const auto& r : ex.arena.interior_obstacles())
        big.add_obstacle({r.x0 * k, r.y0 * k, r.x1 * k, r.y1 * k});
      if (ex.arena.light)
        big.light = Light{{ex.arena.light->pos.x * k, ex.arena.light->pos.y * k},
                          ex.arena.light->intensity};
      if (ex.arena.recharge)
        big.recharge = Disc{{ex.arena.recharge->center.x * k, ex.arena.recharge->center.y * k},
                            ex.arena.recharge->radius};
      big.grid = ex.arena.grid;
      ex.arena = big;
      break;
    }
    case Variant::WithObstacles: {
      config_check(ex.arena.recharge.has_value(),
                   "with_obstacles variant needs a recharge area");
      const Disc& d = *ex.arena.recharge;
      const double dist = d.radius + 120.0;
      for (double deg : {90.0, 210.0, 330.0}) {
        const double a = deg_to_rad(deg);
        const double cx = d.center.x + dist * std::cos(a);
        const double cy = d.center.y + dist * std::sin(a);
        ex.arena.add_obstacle({cx - 50.0, cy - 15.0, cx + 50.0, cy + 15.0});
      }
      break;
    }
    case Variant::SlowRecharge:
      ex.params.recharge_slowdown *= 2;
      ex.model = EnergyModel::from(ex.params);
      break;
  }
  ex.arena.validate();
}

struct VariantRunReport {
  int run = 0;
  Aggregate base;
  Aggregate variant;
  double rel_change = 0.0;
  bool continued = false;
  double continued_best = 0.0;
};

struct GeneralizationResult {
  Variant variant = Variant::Identity;
  int reevals = 0;
  std::vector<VariantRunReport> runs;
  double mean_rel_change = 0.0;
};

// Re-evaluates each run's stored best in the base and variant environments on
// shared streams, and optionally resumes evolution from the stored
// checkpoints in the variant environment.
inline GeneralizationResult run_generalization(const std::filesystem::path& exp_dir, Variant v,
                                               int reevals, int continue_gens,
                                               const std::filesystem::path& out_dir,
                                               const ProgressFn& progress = {}) {
  config_check(reevals >= 0, "reevals must be non-negative");
  config_check(continue_gens >= 0, "continued generations must be non-negative");
  const ExperimentConfig cfg = load_experiment_config(exp_dir / "config.cfg");
  const Experiment base = assemble_experiment(cfg);
  Experiment var = assemble_experiment(cfg);
  apply_variant(var, v);

  GeneralizationResult res;
  res.variant = v;
  res.reevals = reevals;
  int run_index = 0;
  for (const auto& dir : list_run_dirs(exp_dir)) {
    const ResultFile rf = load_result_file(dir / "result.txt");
    const SavedController sc = load_controller_file(dir / "best.genotype");
    config_check(static_cast<int>(sc.genotype.weights.size()) == base.n_weights,
                 dir.string() + ": stored genotype does not match the configured controller");
    VariantRunReport rep;
    rep.run = run_index;
    if (reevals > 0) {
      std::vector<double> base_vals, var_vals;
      for (int r = 0; r < reevals; ++r) {
        RngStream sb = RngStream::derive(rf.seed, {0xF, static_cast<std::uint64_t>(r)});
        base_vals.push_back(evaluate_genotype(base, sc.genotype, sb).fitness.total);
        RngStream sv = RngStream::derive(rf.seed, {0xF, static_cast<std::uint64_t>(r)});
        var_vals.push_back(evaluate_genotype(var, sc.genotype, sv).fitness.total);
      }
      rep.base = aggregate_of(base_vals);
      rep.variant = aggregate_of(var_vals);
      rep.rel_change =
          rep.base.mean != 0.0 ? (rep.variant.mean - rep.base.mean) / std::abs(rep.base.mean)
                               : 0.0;
    }
    if (continue_gens > 0) {
      EvolutionState st = load_checkpoint(dir / "checkpoint.pop");
      config_check(!st.parents.empty() && st.parents[0].size() == var.n_weights,
                   dir.string() + ": checkpoint does not match the configured controller");
      config_check(static_cast<int>(st.parents.size()) == cfg.evo.mu,
                   dir.string() + ": checkpoint population does not match mu");
      EvolutionConfig evo = cfg.evo;
      evo.seed = st.seed;
      const EvalFn eval = make_eval_fn(var, st.seed);
      std::vector<GenerationStats> hist;
      if (progress) {
        const MutationParams mp =
            MutationParams::standard(var.n_weights, evo.weight_min, evo.weight_max);
        for (int g = 0; g < continue_gens; ++g) {
          hist.push_back(es_generation(st, evo, mp, eval));
          progress(rep.run, hist.back());
        }
      } else {
        advance_evolution(st, evo, eval, continue_gens, hist);
      }
      const std::filesystem::path cdir = run_dir(out_dir, rep.run);
      write_evolution_log(cdir / "log.csv", hist);
      write_checkpoint(cdir / "checkpoint.pop", st);
      write_controller_file(cdir / "best.genotype", var.blueprint, st.best);
      RunResult rr;
      rr.index = rep.run;
      rr.seed = st.seed;
      rr.state = st;
      write_result_file(cdir / "result.txt", rr);
      rep.continued = true;
      rep.continued_best = st.best_fitness;
    }
    res.runs.push_back(rep);
    ++run_index;
  }

  double acc = 0.0;
  for (const auto& r : res.runs) acc += r.rel_change;
  res.mean_rel_change = res.runs.empty() ? 0.0 : acc / static_cast<double>(res.runs.size());

  std::ofstream out = open_out(out_dir / "report.txt");
  out << "schema_version 1\n";
  out << "variant " << to_string(v) << '\n';
  out << "reevals " << reevals << '\n';
  for (const auto& r : res.runs) {
    out << "run " << r.run << " base_mean " << fmt_g17(r.base.mean) << " base_std "
        << fmt_g17(r.base.sample_std) << " variant_mean " << fmt_g17(r.variant.mean)
        << " variant_std " << fmt_g17(r.variant.sample_std) << " rel_change "
        << fmt_g17(r.rel_change);
    if (r.continued) out << " continued_best " << fmt_g17(r.continued_best);
    out << '\n';
  }
  out << "aggregate_rel_change_mean " << fmt_g17(res.mean_rel_change) << '\n';
  config_check(out.good(), "failed writing generalization report");
  return res;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

struct ReplaySetup {
  std::filesystem::path genotype_path;
  std::filesystem::path arena_path;
  std::string fitness_id = "obstacle_original";
  std::uint64_t seed = 1;
  int generation = 0;  // replay coordinates from result.txt
  int index = 0;
  int epochs = 10;
  int epoch_steps = 0;  // 0 picks the fitness suite's default
  std::string library_override;
  int drain_steps = 285;
  int recharge_steps = 100;
  bool drain_while_recharging = true;
  int recharge_slowdown = 1;
};

struct ReplayResult {
  EvalOutcome outcome;
  std::vector<std::string> behavior_names;
};

// Rebuilds the evaluation of (seed, generation, index) for a stored
// controller. With the training run's coordinates the fitness matches the
// logged value exactly.
inline ReplayResult run_replay(const ReplaySetup& rs) {
  const SavedController sc = load_controller_file(rs.genotype_path);
  Experiment ex;
  ex.cfg.name = "replay";
  ex.cfg.fitness_id = rs.fitness_id;
  ex.cfg.controller = sc.blueprint.kind;
  ex.cfg.evo.epochs_per_eval = rs.epochs;
  config_check(rs.epochs >= 1, "replay needs at least one epoch");
  ex.arena = load_arena(rs.arena_path.string());
  ex.fit = fitness_spec(rs.fitness_id);
  ex.params.drain_steps = rs.drain_steps;
  ex.params.recharge_steps = rs.recharge_steps;
  ex.params.drain_while_recharging = rs.drain_while_recharging;
  ex.params.recharge_slowdown = rs.recharge_slowdown;
  ex.model = EnergyModel::from(ex.params);
  ex.epoch_steps = rs.epoch_steps == 0 ? ex.fit.default_epoch_steps : rs.epoch_steps;
  ex.blueprint = sc.blueprint;
  if (sc.blueprint.kind == ControllerKind::Supervisor) {
    const std::string lib =
        rs.library_override.empty() ? sc.blueprint.library_path : rs.library_override;
    config_check(!lib.empty(), "supervisor replay needs a library path");
    ex.library = load_library(lib);
    config_check(ex.library.size() == sc.blueprint.n_outputs,
                 "library does not match the supervisor output layer");
  }
  ex.n_weights = weight_count(ex.blueprint.network_spec());
  ex.arena.validate();
  check_env_compat(ex);

  RngStream rng = eval_stream(rs.seed, rs.generation, rs.index);
  ReplayResult rr;
  rr.outcome = evaluate_genotype(ex, sc.genotype, rng);
  for (const auto& e : ex.library.entries) rr.behavior_names.push_back(e.name);
  return rr;
}

inline void write_replay_artifacts(const std::filesystem::path& out_dir, const ReplayResult& rr) {
  std::filesystem::create_directories(out_dir);
  for (std::size_t e = 0; e < rr.outcome.traces.size(); ++e)
    write_trace_csv(out_dir / ("epoch_" + std::to_string(e) + ".csv"), rr.outcome.traces[e]);
  std::ofstream out = open_out(out_dir / "replay.txt");
  out << "schema_version 1\n";
  out << "fitness " << fmt_g17(rr.outcome.fitness.total) << '\n';
  for (std::size_t e = 0; e < rr.outcome.traces.size(); ++e) {
    const EpochTrace& tr = rr.outcome.traces[e];
    out << "epoch " << e << " fitness " << fmt_g17(rr.outcome.fitness.per_epoch[e]) << " steps "
        << tr.steps.size() << " termination " << to_string(tr.termination) << '\n';
  }
  if (!rr.behavior_names.empty()) {
    for (std::size_t b = 0; b < rr.behavior_names.size(); ++b)
      out << "behavior " << rr.behavior_names[b] << " calls " << rr.outcome.calls[b] << '\n';
    out << "total_steps " << rr.outcome.supervised_steps << '\n';
  }
  config_check(out.good(), "failed writing replay report");
}

// ---------------------------------------------------------------------------
// Behavior library construction
// ---------------------------------------------------------------------------
// Config keys:
//   schema_version 1
//   family classical|symbolic
//   arena <path>            obstacle course for avoidance/stop/sweeping
//   light_arena <path>      lit arena for light following
//   runs <n>                independent runs per behavior; best one is kept
//   mu/lambda/generations/epochs_per_eval/epoch_steps/weight_min/weight_max/
//   sigma_init/seed         as in experiment configs

struct LibraryBuildConfig {
  bool symbolic = true;
  std::string arena_path;
  std::string light_arena_path;
  int runs = 3;
  EvolutionConfig evo;
  int epoch_steps = 300;
};

inline LibraryBuildConfig parse_library_config(std::istream& in, const std::string& origin) {
  TokenReader r(in, origin);
  LibraryBuildConfig c;
  std::string key;
  while (r.next(key)) {
    if (key == "schema_version") {
      config_check(r.expect_int("schema_version") == 1, origin + ": unsupported schema");
    } else if (key == "family") {
      const std::string fam = r.expect("family");
      config_check(fam == "classical" || fam == "symbolic", origin + ": unknown family " + fam);
      c.symbolic = fam == "symbolic";
    } else if (key == "arena") {
      c.arena_path = r.expect("arena path");
    } else if (key == "light_arena") {
      c.light_arena_path = r.expect("light arena path");
    } else if (key == "runs") {
      c.runs = static_cast<int>(r.expect_int("runs"));
    } else if (key == "mu") {
      c.evo.mu = static_cast<int>(r.expect_int("mu"));
    } else if (key == "lambda") {
      c.evo.lambda = static_cast<int>(r.expect_int("lambda"));
    } else if (key == "generations") {
      c.evo.generations = static_cast<int>(r.expect_int("generations"));
    } else if (key == "epochs_per_eval") {
      c.evo.epochs_per_eval = static_cast<int>(r.expect_int("epochs_per_eval"));
    } else if (key == "epoch_steps") {
      c.epoch_steps = static_cast<int>(r.expect_int("epoch_steps"));
    } else if (key == "weight_min") {
      c.evo.weight_min = r.expect_double("weight_min");
    } else if (key == "weight_max") {
      c.evo.weight_max = r.expect_double("weight_max");
    } else if (key == "sigma_init") {
      c.evo.sigma_init = r.expect_double("sigma_init");
    } else if (key == "seed") {
      c.evo.seed = r.expect_u64("seed");
    } else {
      throw ConfigError(origin + ": unknown key: " + key);
    }
  }
  return c;
}

inline LibraryBuildConfig load_library_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  config_check(in.good(), "cannot open config: " + path.string());
  LibraryBuildConfig c = parse_library_config(in, path.string());
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  resolve(c.arena_path);
  resolve(c.light_arena_path);
  return c;
}

struct LibraryPlanItem {
  std::string name;
  std::string fitness_id;
  InputSelect inputs;
  std::vector<int> hidden;
};

// The four basic behaviors a supervisor chooses between, in output order.
// Hidden sizes put the two families near weight parity (8-14-6 vs 8-20-2).
inline std::vector<LibraryPlanItem> library_plan(bool symbolic) {
  const std::vector<int> wide = symbolic ? std::vector<int>{14} : std::vector<int>{20};
  return {
      {"obstacle_avoidance", "obstacle_gated", InputSelect::IrActive, wide},
      {"light_following", "light_following", InputSelect::IrPassive, {}},
      {"stop", "stop", InputSelect::IrActive, {}},
      {"area_sweeping", "area_sweeping", InputSelect::IrActive, wide},
  };
}

struct LibraryBuildResult {
  BehaviorLibrary library;
  std::filesystem::path manifest;
  struct ItemReport {
    std::string name;
    std::vector<double> run_bests;
    int chosen_run = 0;
  };
  std::vector<ItemReport> items;
};

// Evolves each basic behavior independently and keeps the best run's best
// genotype; writes the library plus per-behavior training artifacts.
inline LibraryBuildResult build_library(const LibraryBuildConfig& cfg,
                                        const std::filesystem::path& out_dir,
                                        const ProgressFn& progress = {}) {
  config_check(!cfg.arena_path.empty(), "library build needs an arena");
  config_check(!cfg.light_arena_path.empty(), "library build needs a light arena");
  LibraryBuildResult res;
  const auto plan = library_plan(cfg.symbolic);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const LibraryPlanItem& item = plan[i];
    ExperimentConfig ec;
    ec.name = "behavior_" + item.name;
    ec.arena_path = item.fitness_id == "light_following" ? cfg.light_arena_path : cfg.arena_path;
    ec.fitness_id = item.fitness_id;
    ec.controller = cfg.symbolic ? ControllerKind::Symbolic : ControllerKind::Classical;
    if (cfg.symbolic) ec.actions = degraded_action_set();
    ec.inputs = item.inputs;
    ec.hidden = item.hidden;
    ec.recurrent = false;
    ec.runs = cfg.runs;
    ec.evo = cfg.evo;
    ec.evo.seed = derive_seed(cfg.evo.seed, 0x100 + i);
    ec.epoch_steps = cfg.epoch_steps;
    const Experiment ex = assemble_experiment(ec);
    const ExperimentResult r = run_experiment(ex, progress);
    write_experiment_artifacts(ex, r, out_dir / "build" / item.name);

    BehaviorEntry e;
    e.name = item.name;
    e.handcoded = false;
    e.spec = ex.blueprint.network_spec();
    e.inputs = item.inputs;
    e.symbolic = cfg.symbolic;
    e.actions = ex.blueprint.actions;
    e.genotype = r.runs[r.best_run].state.best;
    res.library.add(std::move(e));

    LibraryBuildResult::ItemReport rep;
    rep.name = item.name;
    for (const auto& rr : r.runs) rep.run_bests.push_back(rr.state.best_fitness);
    rep.chosen_run = r.best_run;
    res.items.push_back(std::move(rep));
  }
  res.manifest = write_library(out_dir, res.library);
  std::ofstream out = open_out(out_dir / "build_report.txt");
  out << "schema_version 1\n";
  out << "family " << (cfg.symbolic ? "symbolic" : "classical") << '\n';
  for (const auto& item : res.items) {
    out << "behavior " << item.name << " chosen_run " << item.chosen_run << " bests";
    for (double b : item.run_bests) out << ' ' << fmt_g17(b);
    out << '\n';
  }
  config_check(out.good(), "failed writing library build report");
  return res;
}

}  // namespace evodrive
