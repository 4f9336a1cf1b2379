#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "evodrive/evodrive.hpp"

namespace {

using namespace evodrive;

ProgressFn progress_printer(bool quiet) {
  if (quiet) return {};
  return [](int run, const GenerationStats& gs) {
    std::fprintf(stderr, "[run %d] gen %d best %.6g mean %.6g std %.6g\n", run, gs.generation,
                 gs.best, gs.mean, gs.stddev);
  };
}

int cmd_evolve(const std::string& config_path, const std::string& out_dir, bool quiet,
               bool require_supervisor) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  if (require_supervisor)
    config_check(cfg.controller == ControllerKind::Supervisor,
                 "sensitivity runs need a supervisor config");
  const Experiment ex = assemble_experiment(cfg);
  const ExperimentResult res = run_experiment(ex, progress_printer(quiet));
  write_experiment_artifacts(ex, res, out_dir);
  std::cout << recompute_summary(out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolution workbench for differential-drive robot controllers"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool quiet = false;

  auto* evolve = app.add_subcommand("evolve", "Run a configured evolution experiment");
  evolve->add_option("config", config_path, "experiment config file")->required();
  evolve->add_option("--out", out_dir, "output directory")->required();
  evolve->add_flag("--quiet", quiet, "suppress per-generation progress");

  auto* sensitivity =
      app.add_subcommand("sensitivity", "Supervisor run with extra library behaviors");
  std::string extras;
  int replication = 0;
  sensitivity->add_option("config", config_path, "supervisor experiment config")->required();
  sensitivity->add_option("--out", out_dir, "output directory")->required();
  sensitivity->add_option("--extras", extras,
                          "comma-separated hand-coded rules overriding the config");
  sensitivity->add_option("--replication", replication,
                          "copies of each extra behavior (overrides the config)");
  sensitivity->add_flag("--quiet", quiet, "suppress per-generation progress");

  auto* build = app.add_subcommand("build-library", "Evolve the four basic behaviors");
  build->add_option("config", config_path, "library build config")->required();
  build->add_option("--out", out_dir, "output directory")->required();
  build->add_flag("--quiet", quiet, "suppress per-generation progress");

  auto* generalize =
      app.add_subcommand("generalize", "Re-evaluate stored bests in a modified environment");
  std::string exp_dir, variant_name = "identity";
  int continue_gens = 0, reevals = 20;
  generalize->add_option("exp_dir", exp_dir, "experiment output directory")->required();
  generalize->add_option("--variant", variant_name,
                         "identity|larger_arena|with_obstacles|slow_recharge");
  generalize->add_option("--continue", continue_gens, "resume evolution for N generations");
  generalize->add_option("--reevals", reevals, "re-evaluations per stored best");
  generalize->add_option("--out", out_dir, "output directory")->required();
  generalize->add_flag("--quiet", quiet, "suppress per-generation progress");

  auto* replay = app.add_subcommand("replay", "Re-run a stored controller and dump traces");
  ReplaySetup rs;
  std::string genotype_path, arena_path, library_path;
  bool no_drain_inside = false;
  replay->add_option("--genotype", genotype_path, "stored controller file")->required();
  replay->add_option("--arena", arena_path, "arena file")->required();
  replay->add_option("--fitness", rs.fitness_id, "fitness id")->required();
  replay->add_option("--seed", rs.seed, "run seed (see result.txt)")->required();
  replay->add_option("--gen", rs.generation, "replay generation coordinate");
  replay->add_option("--index", rs.index, "replay index coordinate");
  replay->add_option("--epochs", rs.epochs, "epochs to run");
  replay->add_option("--steps", rs.epoch_steps, "steps per epoch (0: fitness default)");
  replay->add_option("--library", library_path, "behavior library manifest override");
  replay->add_option("--drain-steps", rs.drain_steps, "full-to-empty steps");
  replay->add_option("--recharge-steps", rs.recharge_steps, "empty-to-full steps");
  replay->add_option("--recharge-slowdown", rs.recharge_slowdown, "divide the in-area gain");
  replay->add_flag("--no-drain-while-recharging", no_drain_inside,
                   "pause draining inside the recharge area");
  replay->add_option("--out", out_dir, "output directory")->required();

  auto* stats = app.add_subcommand("stats", "Recompute summaries from stored run artifacts");
  std::vector<std::string> stat_dirs;
  bool check = false;
  stats->add_option("exp_dirs", stat_dirs, "experiment output directories")->required();
  stats->add_flag("--check", check, "fail if a stored summary.txt disagrees");

  CLI11_PARSE(app, argc, argv);

  try {
    if (evolve->parsed()) return cmd_evolve(config_path, out_dir, quiet, false);

    if (sensitivity->parsed()) {
      ExperimentConfig cfg = load_experiment_config(config_path);
      config_check(cfg.controller == ControllerKind::Supervisor,
                   "sensitivity runs need a supervisor config");
      if (!extras.empty()) {
        cfg.extra_behaviors.clear();
        std::istringstream ss(extras);
        std::string name;
        while (std::getline(ss, name, ',')) cfg.extra_behaviors.push_back(name);
      }
      if (replication > 0) cfg.replication = replication;
      const Experiment ex = assemble_experiment(cfg);
      const ExperimentResult res = run_experiment(ex, progress_printer(quiet));
      write_experiment_artifacts(ex, res, out_dir);
      std::cout << recompute_summary(out_dir);
      return 0;
    }

    if (build->parsed()) {
      const LibraryBuildConfig cfg = load_library_config(config_path);
      const LibraryBuildResult res = build_library(cfg, out_dir, progress_printer(quiet));
      std::cout << "library " << res.manifest.string() << '\n';
      for (const auto& item : res.items) {
        std::cout << "behavior " << item.name << " best "
                  << fmt_g17(item.run_bests[item.chosen_run]) << '\n';
      }
      return 0;
    }

    if (generalize->parsed()) {
      run_generalization(exp_dir, variant_from_string(variant_name), reevals, continue_gens,
                         out_dir, progress_printer(quiet));
      std::cout << read_file_text(std::filesystem::path(out_dir) / "report.txt");
      return 0;
    }

    if (replay->parsed()) {
      rs.genotype_path = genotype_path;
      rs.arena_path = arena_path;
      rs.library_override = library_path;
      rs.drain_while_recharging = !no_drain_inside;
      const ReplayResult rr = run_replay(rs);
      write_replay_artifacts(out_dir, rr);
      std::cout << read_file_text(std::filesystem::path(out_dir) / "replay.txt");
      return 0;
    }

    if (stats->parsed()) {
      int bad = 0;
      for (const auto& dir : stat_dirs) {
        const std::string recomputed = recompute_summary(dir);
        std::cout << recomputed;
        if (check) {
          const std::string stored = read_file_text(std::filesystem::path(dir) / "summary.txt");
          if (stored != recomputed) {
            std::cerr << "mismatch: " << dir << "/summary.txt disagrees with run artifacts\n";
            ++bad;
          }
        }
      }
      return bad == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
