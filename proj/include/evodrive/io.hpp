#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evodrive/behaviors.hpp"
#include "evodrive/evolution.hpp"

namespace evodrive {

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  config_check(out.good(), "cannot open for writing: " + path.string());
  return out;
}

// ---------------------------------------------------------------------------
// Token reader
// ---------------------------------------------------------------------------

// Whitespace-separated tokens with '#' line comments; numeric blocks
// (weight vectors) may wrap freely across lines.
class TokenReader {
public:
  TokenReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  bool next(std::string& tok) {
    while (pos_ >= tokens_.size()) {
      std::string line;
      if (!std::getline(in_, line)) return false;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      tokens_.clear();
      pos_ = 0;
      std::istringstream ls(line);
      std::string t;
      while (ls >> t) tokens_.push_back(t);
    }
    tok = tokens_[pos_++];
    return true;
  }

  std::string expect(const std::string& what) {
    std::string tok;
    config_check(next(tok), origin_ + ": unexpected end of file, expected " + what);
    return tok;
  }

  double expect_double(const std::string& what) {
    const std::string tok = expect(what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    config_check(end && *end == '\0', origin_ + ": bad number for " + what + ": " + tok);
    return v;
  }

  long long expect_int(const std::string& what) {
    const std::string tok = expect(what);
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    config_check(end && *end == '\0' && !tok.empty(),
                 origin_ + ": bad integer for " + what + ": " + tok);
    return v;
  }

  std::uint64_t expect_u64(const std::string& what) {
    const std::string tok = expect(what);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    config_check(end && *end == '\0' && !tok.empty() && errno == 0 && tok[0] != '-',
                 origin_ + ": bad unsigned integer for " + what + ": " + tok);
    return static_cast<std::uint64_t>(v);
  }

  const std::string& origin() const { return origin_; }

private:
  std::istream& in_;
  std::string origin_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

namespace detail {

inline void write_vector(std::ostream& out, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << fmt_g17(v[i]);
    out << (((i + 1) % 8 == 0 || i + 1 == v.size()) ? '\n' : ' ');
  }
}

inline std::vector<double> read_vector(TokenReader& r, int n, const std::string& what) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = r.expect_double(what);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Controller files
// ---------------------------------------------------------------------------

enum class ControllerKind { Classical, Symbolic, Supervisor };

inline const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Classical: return "classical";
    case ControllerKind::Symbolic: return "symbolic";
    case ControllerKind::Supervisor: return "supervisor";
  }
  return "?";
}

inline ControllerKind controller_kind_from_string(const std::string& s) {
  if (s == "classical") return ControllerKind::Classical;
  if (s == "symbolic") return ControllerKind::Symbolic;
  if (s == "supervisor") return ControllerKind::Supervisor;
  throw ConfigError("unknown controller kind: " + s);
}

inline InputSelect input_select_from_string(const std::string& s) {
  if (s == "ir_active") return InputSelect::IrActive;
  if (s == "ir_passive") return InputSelect::IrPassive;
  if (s == "full") return InputSelect::Full;
  throw ConfigError("unknown input selection: " + s);
}

inline std::string action_set_name(const ActionSet& a) {
  if (a == full_action_set()) return "full";
  if (a == degraded_action_set()) return "degraded";
  if (a.empty()) return "none";
  throw ConfigError("action set is not one of the named sets");
}

inline ActionSet action_set_from_string(const std::string& s) {
  if (s == "full") return full_action_set();
  if (s == "degraded") return degraded_action_set();
  if (s == "none") return {};
  throw ConfigError("unknown action set: " + s);
}

// Everything needed to rebuild a controller around a weight vector.
struct ControllerBlueprint {
  ControllerKind kind = ControllerKind::Classical;
  InputSelect inputs = InputSelect::IrActive;
  ActionSet actions;  // symbolic only
  std::vector<int> hidden;
  bool recurrent = false;
  int n_outputs = 2;
  std::string library_path;  // supervisor only

  NetworkSpec network_spec() const {
    return {input_count(inputs), hidden, n_outputs, recurrent};
  }

  void validate() const {
    switch (kind) {
      case ControllerKind::Classical:
        config_check(n_outputs == 2, "classical controller needs 2 outputs");
        break;
      case ControllerKind::Symbolic:
        config_check(!actions.empty(), "symbolic controller needs an action set");
        config_check(n_outputs == 2 * static_cast<int>(actions.size()),
                     "symbolic controller needs 2 outputs per action");
        break;
      case ControllerKind::Supervisor:
        config_check(inputs == InputSelect::Full,
                     "supervisor reads the full input vector");
        config_check(!library_path.empty(), "supervisor needs a behavior library");
        config_check(n_outputs >= 1, "supervisor needs at least one output");
        break;
    }
    network_spec().validate();
  }
};

inline std::unique_ptr<ControllerStepper> make_controller(const ControllerBlueprint& bp,
                                                          const Genotype& g,
                                                          const BehaviorLibrary* library) {
  bp.validate();
  switch (bp.kind) {
    case ControllerKind::Classical:
      return std::make_unique<ClassicalController>(bp.network_spec(), g, bp.inputs);
    case ControllerKind::Symbolic:
      return std::make_unique<SymbolicController>(bp.network_spec(), g, bp.inputs, bp.actions);
    case ControllerKind::Supervisor:
      contract_check(library != nullptr, "supervisor construction needs its library");
      return std::make_unique<SupervisorController>(bp.network_spec(), g, *library);
  }
  throw ConfigError("unreachable controller kind");
}

inline void write_controller_file(const std::filesystem::path& path,
                                  const ControllerBlueprint& bp, const Genotype& g) {
  bp.validate();
  contract_check(static_cast<int>(g.weights.size()) == weight_count(bp.network_spec()),
                 "genotype length does not match blueprint");
  contract_check(g.weights.size() == g.sigmas.size(), "weights and sigmas differ in length");
  std::ofstream out = open_out(path);
  out << "schema_version 1\n";
  out << "controller " << to_string(bp.kind) << '\n';
  out << "inputs " << to_string(bp.inputs) << '\n';
  out << "action_set " << action_set_name(bp.actions) << '\n';
  out << "hidden " << bp.hidden.size();
  for (int h : bp.hidden) out << ' ' << h;
  out << '\n';
  out << "recurrent " << (bp.recurrent ? 1 : 0) << '\n';
  out << "n_outputs " << bp.n_outputs << '\n';
  if (!bp.library_path.empty()) {
    config_check(bp.library_path.find_first_of(" \t") == std::string::npos,
                 "library path must not contain whitespace");
    out << "library " << bp.library_path << '\n';
  }
  out << "weights " << g.weights.size() << '\n';
  detail::write_vector(out, g.weights);
  out << "sigmas " << g.sigmas.size() << '\n';
  detail::write_vector(out, g.sigmas);
  config_check(out.good(), "failed writing " + path.string());
}

struct SavedController {
  ControllerBlueprint blueprint;
  Genotype genotype;
};

inline SavedController load_controller_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  config_check(in.good(), "cannot open controller file: " + path.string());
  TokenReader r(in, path.string());
  SavedController sc;
  bool have_weights = false, have_sigmas = false;
  std::string key;
  while (r.next(key)) {
    if (key == "schema_version") {
      config_check(r.expect_int("schema_version") == 1, path.string() + ": unsupported schema");
    } else if (key == "controller") {
      sc.blueprint.kind = controller_kind_from_string(r.expect("controller kind"));
    } else if (key == "inputs") {
      sc.blueprint.inputs = input_select_from_string(r.expect("inputs"));
    } else if (key == "action_set") {
      sc.blueprint.actions = action_set_from_string(r.expect("action_set"));
    } else if (key == "hidden") {
      const int k = static_cast<int>(r.expect_int("hidden layer count"));
      config_check(k >= 0 && k <= 8, path.string() + ": implausible hidden layer count");
      sc.blueprint.hidden.clear();
      for (int i = 0; i < k; ++i)
        sc.blueprint.hidden.push_back(static_cast<int>(r.expect_int("hidden size")));
    } else if (key == "recurrent") {
      sc.blueprint.recurrent = r.expect_int("recurrent flag") != 0;
    } else if (key == "n_outputs") {
      sc.blueprint.n_outputs = static_cast<int>(r.expect_int("n_outputs"));
    } else if (key == "library") {
      sc.blueprint.library_path = r.expect("library path");
    } else if (key == "weights") {
      const int n = static_cast<int>(r.expect_int("weight count"));
      sc.genotype.weights = detail::read_vector(r, n, "weight");
      have_weights = true;
    } else if (key == "sigmas") {
      const int n = static_cast<int>(r.expect_int("sigma count"));
      sc.genotype.sigmas = detail::read_vector(r, n, "sigma");
      have_sigmas = true;
    } else {
      throw ConfigError(path.string() + ": unknown key: " + key);
    }
  }
  config_check(have_weights && have_sigmas, path.string() + ": missing weights or sigmas");
  config_check(sc.genotype.weights.size() == sc.genotype.sigmas.size(),
               path.string() + ": weights and sigmas differ in length");
  sc.blueprint.validate();
  config_check(static_cast<int>(sc.genotype.weights.size()) ==
                   weight_count(sc.blueprint.network_spec()),
               path.string() + ": genotype length does not match blueprint");
  return sc;
}

// ---------------------------------------------------------------------------
// Behavior library files
// ---------------------------------------------------------------------------

// Manifest lines: `behavior <name> handcoded <rule>` or
// `behavior <name> genotype <relative-path>`. Order fixes the supervisor's
// output wiring.
inline std::filesystem::path write_library(const std::filesystem::path& dir,
                                           const BehaviorLibrary& lib) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path manifest = dir / "library.manifest";
  std::ofstream out = open_out(manifest);
  out << "schema_version 1\n";
  for (const auto& e : lib.entries) {
    config_check(e.name.find_first_of(" \t") == std::string::npos,
                 "behavior name must not contain whitespace: " + e.name);
    if (e.handcoded) {
      out << "behavior " << e.name << " handcoded " << to_string(e.rule) << '\n';
    } else {
      const std::string file = e.name + ".genotype";
      ControllerBlueprint bp;
      bp.kind = e.symbolic ? ControllerKind::Symbolic : ControllerKind::Classical;
      bp.inputs = e.inputs;
      bp.actions = e.actions;
      bp.hidden = e.spec.hidden_sizes;
      bp.recurrent = e.spec.recurrent;
      bp.n_outputs = e.spec.n_outputs;
      write_controller_file(dir / file, bp, e.genotype);
      out << "behavior " << e.name << " genotype " << file << '\n';
    }
  }
  config_check(out.good(), "failed writing " + manifest.string());
  return manifest;
}

inline BehaviorLibrary load_library(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  config_check(in.good(), "cannot open library manifest: " + manifest.string());
  const std::filesystem::path base = manifest.parent_path();
  TokenReader r(in, manifest.string());
  BehaviorLibrary lib;
  std::string key;
  while (r.next(key)) {
    if (key == "schema_version") {
      config_check(r.expect_int("schema_version") == 1,
                   manifest.string() + ": unsupported schema");
      continue;
    }
    config_check(key == "behavior", manifest.string() + ": unknown key: " + key);
    const std::string name = r.expect("behavior name");
    const std::string kind = r.expect("behavior kind");
    if (kind == "handcoded") {
      HandcodedRule rule;
      const std::string rule_name = r.expect("rule name");
      config_check(handcoded_rule_from_string(rule_name, rule),
                   manifest.string() + ": unknown rule: " + rule_name);
      lib.add(BehaviorEntry::fixed(name, rule));
    } else if (kind == "genotype") {
      const std::filesystem::path file = base / r.expect("genotype path");
      SavedController sc = load_controller_file(file);
      config_check(sc.blueprint.kind != ControllerKind::Supervisor,
                   manifest.string() + ": a library cannot contain a supervisor");
      BehaviorEntry e;
      e.name = name;
      e.handcoded = false;
      e.spec = sc.blueprint.network_spec();
      e.inputs = sc.blueprint.inputs;
      e.symbolic = sc.blueprint.kind == ControllerKind::Symbolic;
      e.actions = sc.blueprint.actions;
      e.genotype = std::move(sc.genotype);
      lib.add(std::move(e));
    } else {
      throw ConfigError(manifest.string() + ": unknown behavior kind: " + kind);
    }
  }
  config_check(lib.size() > 0, manifest.string() + ": empty library");
  return lib;
}

// ---------------------------------------------------------------------------
// Evolution checkpoints
// ---------------------------------------------------------------------------

namespace detail {

inline void write_genotype_block(std::ostream& out, const std::string& name, const Genotype& g) {
  out << name << ' ' << g.weights.size() << '\n';
  write_vector(out, g.weights);
  write_vector(out, g.sigmas);
}

inline Genotype read_genotype_block(TokenReader& r, int expect_n, const std::string& what) {
  const int n = static_cast<int>(r.expect_int(what + " length"));
  config_check(n == expect_n, r.origin() + ": " + what + " length mismatch");
  Genotype g;
  g.weights = read_vector(r, n, what + " weight");
  g.sigmas = read_vector(r, n, what + " sigma");
  return g;
}

}  // namespace detail

inline void write_checkpoint(const std::filesystem::path& path, const EvolutionState& st) {
  contract_check(!st.parents.empty(), "cannot checkpoint an uninitialized run");
  const int n = st.parents[0].size();
  std::ofstream out = open_out(path);
  out << "schema_version 1\n";
  out << "seed " << st.seed << '\n';
  out << "next_generation " << st.next_generation << '\n';
  out << "best_generation " << st.best_generation << '\n';
  out << "best_index " << st.best_index << '\n';
  out << "best_fitness " << fmt_g17(st.best_fitness) << '\n';
  out << "initial_best_fitness " << fmt_g17(st.initial_best_fitness) << '\n';
  out << "n_weights " << n << '\n';
  out << "mu " << st.parents.size() << '\n';
  out << "parent_fitness";
  for (double f : st.parent_fitness) out << ' ' << fmt_g17(f);
  out << '\n';
  detail::write_genotype_block(out, "best", st.best);
  detail::write_genotype_block(out, "initial_best", st.initial_best);
  for (std::size_t i = 0; i < st.parents.size(); ++i)
    detail::write_genotype_block(out, "parent", st.parents[i]);
  config_check(out.good(), "failed writing " + path.string());
}

inline EvolutionState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  config_check(in.good(), "cannot open checkpoint: " + path.string());
  TokenReader r(in, path.string());
  EvolutionState st;
  config_check(r.expect("key") == "schema_version" && r.expect_int("schema_version") == 1,
               path.string() + ": unsupported schema");
  int n = 0, mu = 0;
  std::string key;
  while (r.next(key)) {
    if (key == "seed") {
      st.seed = r.expect_u64("seed");
    } else if (key == "next_generation") {
      st.next_generation = static_cast<int>(r.expect_int("next_generation"));
    } else if (key == "best_generation") {
      st.best_generation = static_cast<int>(r.expect_int("best_generation"));
    } else if (key == "best_index") {
      st.best_index = static_cast<int>(r.expect_int("best_index"));
    } else if (key == "best_fitness") {
      st.best_fitness = r.expect_double("best_fitness");
    } else if (key == "initial_best_fitness") {
      st.initial_best_fitness = r.expect_double("initial_best_fitness");
    } else if (key == "n_weights") {
      n = static_cast<int>(r.expect_int("n_weights"));
      config_check(n > 0, path.string() + ": n_weights must be positive");
    } else if (key == "mu") {
      mu = static_cast<int>(r.expect_int("mu"));
      config_check(mu > 0, path.string() + ": mu must be positive");
    } else if (key == "parent_fitness") {
      config_check(mu > 0, path.string() + ": parent_fitness before mu");
      st.parent_fitness = detail::read_vector(r, mu, "parent fitness");
    } else if (key == "best") {
      st.best = detail::read_genotype_block(r, n, "best");
    } else if (key == "initial_best") {
      st.initial_best = detail::read_genotype_block(r, n, "initial_best");
    } else if (key == "parent") {
      st.parents.push_back(detail::read_genotype_block(r, n, "parent"));
    } else {
      throw ConfigError(path.string() + ": unknown key: " + key);
    }
  }
  config_check(static_cast<int>(st.parents.size()) == mu,
               path.string() + ": parent count does not match mu");
  config_check(static_cast<int>(st.parent_fitness.size()) == mu,
               path.string() + ": parent fitness count does not match mu");
  return st;
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

inline void write_evolution_log(const std::filesystem::path& path,
                                const std::vector<GenerationStats>& history) {
  std::ofstream out = open_out(path);
  out << "generation,best,mean,std\n";
  for (const auto& g : history)
    out << g.generation << ',' << fmt_g17(g.best) << ',' << fmt_g17(g.mean) << ','
        << fmt_g17(g.stddev) << '\n';
  config_check(out.good(), "failed writing " + path.string());
}

inline void write_trace_csv(const std::filesystem::path& path, const EpochTrace& trace) {
  std::ofstream out = open_out(path);
  out << "step,x,y,theta,v,delta_v,energy,in_recharge,behavior\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const StepRecord& s = trace.steps[i];
    out << i << ',' << fmt_g17(s.pose.x) << ',' << fmt_g17(s.pose.y) << ','
        << fmt_g17(s.pose.theta) << ',' << fmt_g17(s.v) << ',' << fmt_g17(s.delta_v) << ','
        << fmt_g17(s.energy) << ',' << (s.in_recharge ? 1 : 0) << ',' << s.behavior << '\n';
  }
  config_check(out.good(), "failed writing " + path.string());
}

}  // namespace evodrive
