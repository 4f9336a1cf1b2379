#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "evodrive/fitness.hpp"
#include "evodrive/io.hpp"

namespace evodrive {

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------
// Config file: whitespace-separated key/value text, '#' comments. Keys:
//   schema_version 1
//   experiment <name>
//   arena <path>                        relative to the config file
//   fitness <id>                        see the fitness registry
//   controller classical|symbolic|supervisor
//   action_set full|degraded            symbolic controllers
//   inputs ir_active|ir_passive|full
//   hidden <k> <h1> ... <hk>
//   recurrent 0|1
//   library <path>                      supervisors; relative to the config
//   runs <n>
//   mu <n>  lambda <n>  generations <n>  epochs_per_eval <n>
//   epoch_steps <n>                     0 picks the fitness suite's default
//   weight_min <x>  weight_max <x>  sigma_init <x>
//   seed <n>
//   drain_steps <n>  recharge_steps <n>  drain_while_recharging 0|1
//   recharge_slowdown <n>
//   extra_behaviors <k> <rule> ...      sensitivity runs; hand-coded rules
//   replication <n>                     copies of each extra behavior

struct ExperimentConfig {
  std::string name = "experiment";
  std::string arena_path;
  std::string fitness_id = "obstacle_original";
  ControllerKind controller = ControllerKind::Classical;
  ActionSet actions = full_action_set();
  InputSelect inputs = InputSelect::IrActive;
  std::vector<int> hidden;
  bool recurrent = false;
  std::string library_path;
  int runs = 1;
  EvolutionConfig evo;
  int epoch_steps = 0;
  int drain_steps = 285;
  int recharge_steps = 100;
  bool drain_while_recharging = true;
  int recharge_slowdown = 1;
  std::vector<std::string> extra_behaviors;
  int replication = 1;
};

inline ExperimentConfig parse_experiment_config(std::istream& in, const std::string& origin) {
  TokenReader r(in, origin);
  ExperimentConfig c;
  std::string key;
  while (r.next(key)) {
    if (key == "schema_version") {
      config_check(r.expect_int("schema_version") == 1, origin + ": unsupported schema");
    } else if (key == "experiment") {
      c.name = r.expect("experiment name");
    } else if (key == "arena") {
      c.arena_path = r.expect("arena path");
    } else if (key == "fitness") {
      c.fitness_id = r.expect("fitness id");
    } else if (key == "controller") {
      c.controller = controller_kind_from_string(r.expect("controller kind"));
    } else if (key == "action_set") {
      c.actions = action_set_from_string(r.expect("action set"));
    } else if (key == "inputs") {
      c.inputs = input_select_from_string(r.expect("inputs"));
    } else if (key == "hidden") {
      const int k = static_cast<int>(r.expect_int("hidden layer count"));
      config_check(k >= 0 && k <= 8, origin + ": implausible hidden layer count");
      c.hidden.clear();
      for (int i = 0; i < k; ++i)
        c.hidden.push_back(static_cast<int>(r.expect_int("hidden size")));
    } else if (key == "recurrent") {
      c.recurrent = r.expect_int("recurrent flag") != 0;
    } else if (key == "library") {
      c.library_path = r.expect("library path");
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
    } else if (key == "drain_steps") {
      c.drain_steps = static_cast<int>(r.expect_int("drain_steps"));
    } else if (key == "recharge_steps") {
      c.recharge_steps = static_cast<int>(r.expect_int("recharge_steps"));
    } else if (key == "drain_while_recharging") {
      c.drain_while_recharging = r.expect_int("drain_while_recharging") != 0;
    } else if (key == "recharge_slowdown") {
      c.recharge_slowdown = static_cast<int>(r.expect_int("recharge_slowdown"));
    } else if (key == "extra_behaviors") {
      const int k = static_cast<int>(r.expect_int("extra behavior count"));
      config_check(k >= 0 && k <= 64, origin + ": implausible extra behavior count");
      c.extra_behaviors.clear();
      for (int i = 0; i < k; ++i) c.extra_behaviors.push_back(r.expect("behavior rule"));
    } else if (key == "replication") {
      c.replication = static_cast<int>(r.expect_int("replication"));
    } else {
      throw ConfigError(origin + ": unknown key: " + key);
    }
  }
  return c;
}

// Loads a config and resolves its file references against its own directory.
inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  config_check(in.good(), "cannot open config: " + path.string());
  ExperimentConfig c = parse_experiment_config(in, path.string());
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  resolve(c.arena_path);
  resolve(c.library_path);
  return c;
}

inline std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  config_check(in.good(), "cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Canonical config text for a programmatically built config; parsing it back
// reproduces the config exactly.
inline std::string render_config(const ExperimentConfig& c) {
  for (const std::string* p : {&c.name, &c.arena_path, &c.library_path})
    config_check(p->find_first_of(" \t") == std::string::npos,
                 "config strings must not contain whitespace: " + *p);
  std::ostringstream out;
  out << "schema_version 1\n";
  out << "experiment " << c.name << '\n';
  out << "arena " << c.arena_path << '\n';
  out << "fitness " << c.fitness_id << '\n';
  out << "controller " << to_string(c.controller) << '\n';
  if (c.controller == ControllerKind::Symbolic)
    out << "action_set " << action_set_name(c.actions) << '\n';
  out << "inputs " << to_string(c.inputs) << '\n';
  out << "hidden " << c.hidden.size();
  for (int h : c.hidden) out << ' ' << h;
  out << '\n';
  out << "recurrent " << (c.recurrent ? 1 : 0) << '\n';
  if (!c.library_path.empty()) out << "library " << c.library_path << '\n';
  out << "runs " << c.runs << '\n';
  out << "mu " << c.evo.mu << '\n';
  out << "lambda " << c.evo.lambda << '\n';
  out << "generations " << c.evo.generations << '\n';
  out << "epochs_per_eval " << c.evo.epochs_per_eval << '\n';
  out << "epoch_steps " << c.epoch_steps << '\n';
  out << "weight_min " << fmt_g17(c.evo.weight_min) << '\n';
  out << "weight_max " << fmt_g17(c.evo.weight_max) << '\n';
  out << "sigma_init " << fmt_g17(c.evo.sigma_init) << '\n';
  out << "seed " << c.evo.seed << '\n';
  out << "drain_steps " << c.drain_steps << '\n';
  out << "recharge_steps " << c.recharge_steps << '\n';
  out << "drain_while_recharging " << (c.drain_while_recharging ? 1 : 0) << '\n';
  out << "recharge_slowdown " << c.recharge_slowdown << '\n';
  if (!c.extra_behaviors.empty()) {
    out << "extra_behaviors " << c.extra_behaviors.size();
    for (const auto& b : c.extra_behaviors) out << ' ' << b;
    out << '\n';
    out << "replication " << c.replication << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Assembled experiment
// ---------------------------------------------------------------------------

// Everything run-ready: validated config, loaded arena and library, derived
// simulation constants. Compatibility problems surface here, before any
// simulation step.
struct Experiment {
  ExperimentConfig cfg;
  Arena arena;
  SimParams params;
  EnergyModel model;
  FitnessSpec fit;
  BehaviorLibrary library;
  ControllerBlueprint blueprint;
  int epoch_steps = 0;
  int n_weights = 0;
};

// Controller/fitness/arena pairing rules, applied before any simulation.
inline void check_env_compat(const Experiment& ex) {
  config_check(ex.epoch_steps >= 150 && ex.epoch_steps <= 1000,
               "epoch_steps must lie in [150, 1000]");
  if (ex.fit.needs_light || ex.fit.relocate)
    config_check(ex.arena.light.has_value(),
                 ex.cfg.fitness_id + " fitness needs a light source");
  if (ex.fit.needs_energy) {
    config_check(ex.arena.recharge.has_value(), "energy fitness needs a recharge area");
    config_check(ex.arena.light.has_value(), "energy fitness needs a light source");
    config_check(distance(ex.arena.light->pos, ex.arena.recharge->center) <=
                     ex.arena.recharge->radius,
                 "energy fitness needs the light inside the recharge area");
    config_check(ex.blueprint.inputs == InputSelect::Full,
                 "energy fitness needs full (17-input) controllers");
  }
}

inline Experiment assemble_experiment(const ExperimentConfig& cfg) {
  Experiment ex;
  ex.cfg = cfg;
  cfg.evo.validate();
  config_check(cfg.runs >= 1, "runs must be at least 1");
  config_check(cfg.replication >= 1, "replication must be at least 1");
  config_check(!cfg.arena_path.empty(), "config needs an arena");
  ex.arena = load_arena(cfg.arena_path);
  ex.fit = fitness_spec(cfg.fitness_id);

  ex.params.drain_steps = cfg.drain_steps;
  ex.params.recharge_steps = cfg.recharge_steps;
  ex.params.drain_while_recharging = cfg.drain_while_recharging;
  ex.params.recharge_slowdown = cfg.recharge_slowdown;
  ex.model = EnergyModel::from(ex.params);

  ex.epoch_steps = cfg.epoch_steps == 0 ? ex.fit.default_epoch_steps : cfg.epoch_steps;

  ex.blueprint.kind = cfg.controller;
  ex.blueprint.hidden = cfg.hidden;
  ex.blueprint.recurrent = cfg.recurrent;
  switch (cfg.controller) {
    case ControllerKind::Classical:
      ex.blueprint.inputs = cfg.inputs;
      ex.blueprint.n_outputs = 2;
      break;
    case ControllerKind::Symbolic:
      ex.blueprint.inputs = cfg.inputs;
      config_check(!cfg.actions.empty(), "symbolic controller needs an action set");
      ex.blueprint.actions = cfg.actions;
      ex.blueprint.n_outputs = 2 * static_cast<int>(cfg.actions.size());
      break;
    case ControllerKind::Supervisor: {
      config_check(!cfg.library_path.empty(), "supervisor needs a library");
      ex.library = load_library(cfg.library_path);
      for (const std::string& rule_name : cfg.extra_behaviors) {
        HandcodedRule rule;
        config_check(handcoded_rule_from_string(rule_name, rule),
                     "unknown hand-coded rule: " + rule_name);
      }
      for (int copy = 1; copy <= cfg.replication; ++copy) {
        for (const std::string& rule_name : cfg.extra_behaviors) {
          HandcodedRule rule;
          handcoded_rule_from_string(rule_name, rule);
          const std::string name =
              copy == 1 ? rule_name : rule_name + "_" + std::to_string(copy);
          ex.library.add(BehaviorEntry::fixed(name, rule));
        }
      }
      ex.blueprint.inputs = InputSelect::Full;
      ex.blueprint.library_path = cfg.library_path;
      ex.blueprint.n_outputs = ex.library.size();
      break;
    }
  }
  ex.blueprint.validate();
  ex.n_weights = weight_count(ex.blueprint.network_spec());
  ex.arena.validate();
  check_env_compat(ex);
  return ex;
}

inline Experiment load_experiment(const std::filesystem::path& config_path) {
  return assemble_experiment(load_experiment_config(config_path));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalOutcome {
  FitnessValue fitness;
  std::vector<EpochTrace> traces;
  std::vector<long long> calls;  // per-behavior counts; empty unless supervisor
  long long supervised_steps = 0;
  int energy_deaths = 0;
  int collisions = 0;
  int step_limits = 0;
};

// One full evaluation: epochs_per_eval epochs from random start poses, all
// randomness drawn from the given stream.
inline EvalOutcome evaluate_genotype(const Experiment& ex, const Genotype& g, RngStream& rng) {
  auto controller = make_controller(ex.blueprint, g, &ex.library);
  auto* supervisor = dynamic_cast<SupervisorController*>(controller.get());
  EpochOptions opts;
  opts.energy_enabled = ex.fit.needs_energy;
  opts.relocate_on_light_reach = ex.fit.relocate;
  EvalOutcome out;
  for (int e = 0; e < ex.cfg.evo.epochs_per_eval; ++e) {
    const Pose start = random_start_pose(ex.arena, ex.params, rng);
    EpochTrace tr =
        run_epoch(*controller, ex.arena, ex.params, ex.model, start, ex.epoch_steps, opts, rng);
    switch (tr.termination) {
      case Termination::Collision: ++out.collisions; break;
      case Termination::EnergyExhausted: ++out.energy_deaths; break;
      case Termination::StepLimit: ++out.step_limits; break;
    }
    out.traces.push_back(std::move(tr));
  }
  out.fitness = compute_fitness(ex.cfg.fitness_id, out.traces, ex.arena, ex.params);
  if (supervisor) {
    out.calls = supervisor->calls();
    out.supervised_steps = supervisor->total_calls();
  }
  return out;
}

// Stream for offspring `index` of `generation` in the run seeded `run_seed`;
// replaying the same triple reproduces the evaluation bit-exactly.
inline RngStream eval_stream(std::uint64_t run_seed, int generation, int index) {
  return RngStream::derive(run_seed, {0xE, static_cast<std::uint64_t>(generation),
                                      static_cast<std::uint64_t>(index)});
}

// The Experiment must outlive the returned function.
inline EvalFn make_eval_fn(const Experiment& ex, std::uint64_t run_seed) {
  const Experiment* px = &ex;
  return [px, run_seed](const Genotype& g, int generation, int index) {
    RngStream rng = eval_stream(run_seed, generation, index);
    return evaluate_genotype(*px, g, rng).fitness.total;
  };
}

// ---------------------------------------------------------------------------
// Multi-run experiments
// ---------------------------------------------------------------------------

struct RunResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::vector<GenerationStats> history;
  EvolutionState state;
};

struct Aggregate {
  double mean = 0.0;
  double sample_std = 0.0;  // n-1 denominator; 0 for a single value
};

inline Aggregate aggregate_of(const std::vector<double>& v) {
  contract_check(!v.empty(), "aggregate of empty sample");
  Aggregate a;
  for (double x : v) a.mean += x;
  a.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - a.mean) * (x - a.mean);
    a.sample_std = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return a;
}

struct ExperimentResult {
  std::vector<RunResult> runs;
  Aggregate best;
  Aggregate initial_best;
  int best_run = 0;
};

using ProgressFn = std::function<void(int run, const GenerationStats&)>;

inline std::uint64_t run_seed_for(std::uint64_t master, int run) {
  return derive_seed(master, static_cast<std::uint64_t>(run));
}

inline ExperimentResult run_experiment(const Experiment& ex, const ProgressFn& progress = {}) {
  ExperimentResult res;
  for (int r = 0; r < ex.cfg.runs; ++r) {
    EvolutionConfig evo = ex.cfg.evo;
    evo.seed = run_seed_for(ex.cfg.evo.seed, r);
    const EvalFn eval = make_eval_fn(ex, evo.seed);
    RunResult rr;
    rr.index = r;
    rr.seed = evo.seed;
    rr.state = init_evolution(evo, ex.n_weights, eval);
    if (progress) {
      const MutationParams mp =
          MutationParams::standard(ex.n_weights, evo.weight_min, evo.weight_max);
      for (int g = 0; g < evo.generations; ++g) {
        rr.history.push_back(es_generation(rr.state, evo, mp, eval));
        progress(r, rr.history.back());
      }
    } else {
      advance_evolution(rr.state, evo, eval, evo.generations, rr.history);
    }
    res.runs.push_back(std::move(rr));
  }
  std::vector<double> bests, initials;
  for (const auto& rr : res.runs) {
    bests.push_back(rr.state.best_fitness);
    initials.push_back(rr.state.initial_best_fitness);
    if (rr.state.best_fitness > res.runs[res.best_run].state.best_fitness)
      res.best_run = rr.index;
  }
  res.best = aggregate_of(bests);
  res.initial_best = aggregate_of(initials);
  return res;
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

struct RunLine {
  int index = 0;
  std::uint64_t seed = 0;
  double best = 0.0;
  double initial = 0.0;
  int generation = 0;
};

// Shared by the experiment writer and the stats recomputation so that the
// recomputed aggregate block is byte-identical to the stored one.
inline std::string summary_text(const std::string& name, const std::string& controller,
                                const std::string& fitness_id, const std::vector<RunLine>& runs) {
  std::ostringstream out;
  out << "schema_version 1\n";
  out << "experiment " << name << '\n';
  out << "controller " << controller << '\n';
  out << "fitness " << fitness_id << '\n';
  out << "runs " << runs.size() << '\n';
  std::vector<double> bests, initials;
  int best_run = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunLine& r = runs[i];
    out << "run " << r.index << " seed " << r.seed << " best " << fmt_g17(r.best) << " initial "
        << fmt_g17(r.initial) << " generation " << r.generation << '\n';
    bests.push_back(r.best);
    initials.push_back(r.initial);
    if (r.best > runs[best_run].best) best_run = static_cast<int>(i);
  }
  const Aggregate b = aggregate_of(bests);
  const Aggregate ini = aggregate_of(initials);
  out << "aggregate_best_mean " << fmt_g17(b.mean) << '\n';
  out << "aggregate_best_std " << fmt_g17(b.sample_std) << '\n';
  out << "aggregate_initial_best_mean " << fmt_g17(ini.mean) << '\n';
  out << "best_run " << runs[best_run].index << '\n';
  return out.str();
}

inline void write_result_file(const std::filesystem::path& path, const RunResult& rr) {
  std::ofstream out = open_out(path);
  out << "schema_version 1\n";
  out << "seed " << rr.seed << '\n';
  out << "generations " << rr.state.next_generation << '\n';
  out << "best_fitness " << fmt_g17(rr.state.best_fitness) << '\n';
  out << "best_generation " << rr.state.best_generation << '\n';
  out << "best_index " << rr.state.best_index << '\n';
  out << "initial_best_fitness " << fmt_g17(rr.state.initial_best_fitness) << '\n';
  config_check(out.good(), "failed writing " + path.string());
}

struct ResultFile {
  std::uint64_t seed = 0;
  int generations = 0;
  double best_fitness = 0.0;
  int best_generation = 0;
  int best_index = 0;
  double initial_best_fitness = 0.0;
};

inline ResultFile load_result_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  config_check(in.good(), "cannot open result file: " + path.string());
  TokenReader r(in, path.string());
  ResultFile f;
  std::string key;
  while (r.next(key)) {
    if (key == "schema_version") {
      config_check(r.expect_int("schema_version") == 1, path.string() + ": unsupported schema");
    } else if (key == "seed") {
      f.seed = r.expect_u64("seed");
    } else if (key == "generations") {
      f.generations = static_cast<int>(r.expect_int("generations"));
    } else if (key == "best_fitness") {
      f.best_fitness = r.expect_double("best_fitness");
    } else if (key == "best_generation") {
      f.best_generation = static_cast<int>(r.expect_int("best_generation"));
    } else if (key == "best_index") {
      f.best_index = static_cast<int>(r.expect_int("best_index"));
    } else if (key == "initial_best_fitness") {
      f.initial_best_fitness = r.expect_double("initial_best_fitness");
    } else {
      throw ConfigError(path.string() + ": unknown key: " + key);
    }
  }
  return f;
}

inline std::filesystem::path run_dir(const std::filesystem::path& out_dir, int run) {
  return out_dir / ("run_" + std::to_string(run));
}

// Per-generation behavior usage of each generation's best supervisor,
// re-evaluated on a fixed stream. Raw counts sum to the supervised steps.
struct CallReportRow {
  int generation = 0;
  long long total = 0;
  std::vector<long long> calls;
};

inline std::vector<CallReportRow> behavior_call_report(const Experiment& ex,
                                                       const RunResult& rr) {
  contract_check(ex.blueprint.kind == ControllerKind::Supervisor,
                 "call report needs a supervisor experiment");
  std::vector<CallReportRow> rows;
  auto add_row = [&](int generation, const Genotype& g) {
    RngStream rng = RngStream::derive(rr.seed, {0xD, static_cast<std::uint64_t>(generation)});
    EvalOutcome o = evaluate_genotype(ex, g, rng);
    rows.push_back({generation, o.supervised_steps, o.calls});
  };
  add_row(0, rr.state.initial_best);
  for (const auto& gs : rr.history) add_row(gs.generation, gs.best_genotype);
  return rows;
}

// CSV in per-10000-step units plus the raw counts backing them.
inline void write_call_report(const std::filesystem::path& path,
                              const std::vector<std::string>& names,
                              const std::vector<CallReportRow>& rows) {
  std::ofstream out = open_out(path);
  out << "generation,total_steps";
  for (const auto& n : names) out << ",per10k_" << n;
  for (const auto& n : names) out << ",calls_" << n;
  out << '\n';
  for (const auto& row : rows) {
    out << row.generation << ',' << row.total;
    for (long long c : row.calls)
      out << ','
          << fmt_g17(row.total > 0 ? 10000.0 * static_cast<double>(c) /
                                         static_cast<double>(row.total)
                                   : 0.0);
    for (long long c : row.calls) out << ',' << c;
    out << '\n';
  }
  config_check(out.good(), "failed writing " + path.string());
}

// Writes the full artifact tree for a finished experiment. The tree is
// self-contained: the stored config references the arena and library copies
// inside the tree, so the experiment can be reloaded from any directory.
//   out/config.cfg             materialized config
//   out/arena.arena            the arena the runs used
//   out/library/               behavior library copy (supervisors only)
//   out/summary.txt            per-run lines plus aggregates
//   out/run_<i>/log.csv        per-generation best/mean/std
//   out/run_<i>/result.txt     final numbers and replay coordinates
//   out/run_<i>/best.genotype  best controller of the run
//   out/run_<i>/checkpoint.pop resumable population state
//   out/run_<i>/calls.csv      supervisor behavior usage per generation
inline void write_experiment_artifacts(const Experiment& ex, const ExperimentResult& res,
                                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  ExperimentConfig stored = ex.cfg;
  stored.arena_path = "arena.arena";
  stored.library_path.clear();
  {
    std::ofstream out = open_out(out_dir / "arena.arena");
    write_arena(out, ex.arena);
    config_check(out.good(), "failed writing arena copy");
  }
  if (ex.blueprint.kind == ControllerKind::Supervisor) {
    // The stored config keeps its extra_behaviors keys, so the library copy
    // holds only the base entries; reloading appends the extras again.
    BehaviorLibrary base_lib = ex.library;
    const std::size_t extras = ex.cfg.extra_behaviors.size() *
                               static_cast<std::size_t>(std::max(1, ex.cfg.replication));
    base_lib.entries.resize(base_lib.entries.size() - extras);
    write_library(out_dir / "library", base_lib);
    stored.library_path = "library/library.manifest";
  }
  {
    std::ofstream out = open_out(out_dir / "config.cfg");
    out << render_config(stored);
    config_check(out.good(), "failed writing config copy");
  }
  std::vector<RunLine> lines;
  for (const auto& rr : res.runs) {
    const std::filesystem::path dir = run_dir(out_dir, rr.index);
    write_evolution_log(dir / "log.csv", rr.history);
    write_result_file(dir / "result.txt", rr);
    write_controller_file(dir / "best.genotype", ex.blueprint, rr.state.best);
    write_checkpoint(dir / "checkpoint.pop", rr.state);
    if (ex.blueprint.kind == ControllerKind::Supervisor) {
      std::vector<std::string> names;
      for (const auto& e : ex.library.entries) names.push_back(e.name);
      write_call_report(dir / "calls.csv", names, behavior_call_report(ex, rr));
    }
    lines.push_back({rr.index, rr.seed, rr.state.best_fitness, rr.state.initial_best_fitness,
                     rr.state.best_generation});
  }
  std::ofstream out = open_out(out_dir / "summary.txt");
  out << summary_text(ex.cfg.name, to_string(ex.blueprint.kind), ex.cfg.fitness_id, lines);
  config_check(out.good(), "failed writing summary");
}

}  // namespace evodrive
