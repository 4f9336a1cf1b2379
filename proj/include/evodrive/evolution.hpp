#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <vector>

#include "evodrive/network.hpp"
#include "evodrive/rng.hpp"

namespace evodrive {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct EvolutionConfig {
  int mu = 30;
  int lambda = 150;
  int generations = 250;
  double weight_min = -1.0;
  double weight_max = 1.0;
  int epochs_per_eval = 10;
  double sigma_init = -1.0;  // <0: 0.3 * half the weight range
  std::uint64_t seed = 1;

  double initial_sigma() const {
    return sigma_init >= 0.0 ? sigma_init : 0.3 * (weight_max - weight_min) / 2.0;
  }

  void validate() const {
    config_check(mu >= 2, "mu must be at least 2");
    config_check(lambda >= mu, "lambda must be at least mu");
    config_check(lambda % mu == 0, "lambda must be a multiple of mu");
    config_check(generations >= 0, "generations must be non-negative");
    config_check(weight_min < weight_max, "weight bounds must be ordered");
    config_check(epochs_per_eval >= 1, "epochs_per_eval must be positive");
  }
};

// Self-adaptive step-size control. The two learning rates follow the usual
// schedule for n object variables: tau' = 1/sqrt(2n), tau = 1/sqrt(2 sqrt(n)).
struct MutationParams {
  double tau_prime;
  double tau;
  double sigma_min = 1e-6;
  double sigma_max;

  static MutationParams standard(int n_weights, double weight_min, double weight_max) {
    contract_check(n_weights > 0, "mutation needs at least one gene");
    MutationParams p{};
    p.tau_prime = 1.0 / std::sqrt(2.0 * n_weights);
    p.tau = 1.0 / std::sqrt(2.0 * std::sqrt(static_cast<double>(n_weights)));
    p.sigma_min = 1e-6;
    p.sigma_max = weight_max - weight_min;
    return p;
  }
};

// ---------------------------------------------------------------------------
// Variation operators
// ---------------------------------------------------------------------------

inline Genotype random_genotype(int n, double weight_min, double weight_max, double sigma,
                                RngStream& rng) {
  Genotype g;
  g.weights.resize(n);
  g.sigmas.assign(n, sigma);
  for (double& w : g.weights) w = rng.uniform(weight_min, weight_max);
  return g;
}

inline std::vector<Genotype> init_population(int mu, int n, const EvolutionConfig& cfg,
                                             RngStream& rng) {
  std::vector<Genotype> pop;
  pop.reserve(mu);
  for (int i = 0; i < mu; ++i)
    pop.push_back(random_genotype(n, cfg.weight_min, cfg.weight_max, cfg.initial_sigma(), rng));
  return pop;
}

// Gene-wise mean of both parents, step sizes included.
inline Genotype intermediate_crossover(const Genotype& a, const Genotype& b) {
  contract_check(a.size() == b.size(), "crossover parents differ in length");
  Genotype c;
  c.weights.resize(a.size());
  c.sigmas.resize(a.size());
  for (int i = 0; i < a.size(); ++i) {
    c.weights[i] = 0.5 * (a.weights[i] + b.weights[i]);
    c.sigmas[i] = 0.5 * (a.sigmas[i] + b.sigmas[i]);
  }
  return c;
}

// Log-normal step-size update with one shared draw per genotype plus one per
// gene, then Gaussian perturbation of each weight by its fresh step size.
inline void self_adaptive_mutate(Genotype& g, const MutationParams& p, double weight_min,
                                 double weight_max, RngStream& rng) {
  const double shared = rng.normal();
  for (int i = 0; i < g.size(); ++i) {
    double s = g.sigmas[i] * std::exp(p.tau_prime * shared + p.tau * rng.normal());
    s = std::clamp(s, p.sigma_min, p.sigma_max);
    g.sigmas[i] = s;
    g.weights[i] = std::clamp(g.weights[i] + s * rng.normal(), weight_min, weight_max);
  }
}

// ---------------------------------------------------------------------------
// Generation loop
// ---------------------------------------------------------------------------

// Offspring fitness summary for one generation; stats run over the lambda
// offspring only.
struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  Genotype best_genotype;
};

// Evaluator: genotype -> fitness. Generation and offspring index key the
// deterministic stream used for evaluation noise. Throwing marks the
// individual non-viable; the engine scores it -inf and keeps going.
using EvalFn = std::function<double(const Genotype&, int generation, int index)>;

namespace detail {

inline double safe_eval(const EvalFn& eval, const Genotype& g, int gen, int idx) {
  try {
    return eval(g, gen, idx);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "evaluation failed (gen %d, individual %d): %s\n", gen, idx, e.what());
    return -std::numeric_limits<double>::infinity();
  }
}

inline double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace detail

// Running state of one evolution run; enough to continue from any generation
// boundary.
struct EvolutionState {
  int next_generation = 0;
  std::vector<Genotype> parents;
  std::vector<double> parent_fitness;  // comma selection: offspring scores of the kept mu
  double best_fitness = -std::numeric_limits<double>::infinity();
  Genotype best;
  int best_generation = -1;
  int best_index = -1;  // evaluation index within its generation, for exact replay
  double initial_best_fitness = -std::numeric_limits<double>::infinity();
  Genotype initial_best;
  std::uint64_t seed = 0;
};

inline EvolutionState init_evolution(const EvolutionConfig& cfg, int n_weights,
                                     const EvalFn& eval) {
  cfg.validate();
  contract_check(n_weights > 0, "evolution needs at least one gene");
  EvolutionState st;
  st.seed = cfg.seed;
  RngStream init_rng = RngStream::derive(cfg.seed, {0xA});
  st.parents = init_population(cfg.mu, n_weights, cfg, init_rng);
  st.parent_fitness.resize(cfg.mu);
  int initial_best_index = 0;
  for (int i = 0; i < cfg.mu; ++i) {
    st.parent_fitness[i] = detail::safe_eval(eval, st.parents[i], 0, i);
    if (st.parent_fitness[i] > st.initial_best_fitness) {
      st.initial_best_fitness = st.parent_fitness[i];
      st.initial_best = st.parents[i];
      initial_best_index = i;
    }
  }
  // all evaluations may have failed; keep the champion well-formed anyway
  if (st.initial_best.weights.empty()) st.initial_best = st.parents[0];
  st.best_fitness = st.initial_best_fitness;
  st.best = st.initial_best;
  st.best_generation = 0;
  st.best_index = initial_best_index;
  return st;
}

// One comma-selection generation: lambda offspring from recombination plus
// mutation, parents replaced by the best mu offspring.
inline GenerationStats es_generation(EvolutionState& st, const EvolutionConfig& cfg,
                                     const MutationParams& mp, const EvalFn& eval) {
  const int gen = ++st.next_generation;
  const int mu = cfg.mu;
  RngStream breed = RngStream::derive(st.seed, {0xB, static_cast<std::uint64_t>(gen)});

  std::vector<Genotype> offspring;
  offspring.reserve(cfg.lambda);
  for (int k = 0; k < cfg.lambda; ++k) {
    const int i = breed.uniform_int(mu);
    int j = breed.uniform_int(mu - 1);
    if (j >= i) ++j;
    Genotype child = intermediate_crossover(st.parents[i], st.parents[j]);
    self_adaptive_mutate(child, mp, cfg.weight_min, cfg.weight_max, breed);
    offspring.push_back(std::move(child));
  }

  std::vector<double> fitness(cfg.lambda);
  for (int k = 0; k < cfg.lambda; ++k)
    fitness[k] = detail::safe_eval(eval, offspring[k], gen, k);

  std::vector<int> order(cfg.lambda);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitness[a] > fitness[b]; });

  st.parents.clear();
  st.parent_fitness.clear();
  for (int r = 0; r < mu; ++r) {
    st.parents.push_back(offspring[order[r]]);
    st.parent_fitness.push_back(fitness[order[r]]);
  }

  GenerationStats gs;
  gs.generation = gen;
  gs.best = fitness[order[0]];
  gs.mean = detail::mean_of(fitness);
  gs.stddev = detail::stddev_of(fitness, gs.mean);
  gs.best_genotype = st.parents[0];
  if (gs.best > st.best_fitness) {
    st.best_fitness = gs.best;
    st.best = st.parents[0];
    st.best_generation = gen;
    st.best_index = order[0];
  }
  return gs;
}

inline void advance_evolution(EvolutionState& st, const EvolutionConfig& cfg, const EvalFn& eval,
                              int n_generations, std::vector<GenerationStats>& history) {
  contract_check(!st.parents.empty(), "cannot advance an uninitialized run");
  const MutationParams mp =
      MutationParams::standard(st.parents[0].size(), cfg.weight_min, cfg.weight_max);
  for (int g = 0; g < n_generations; ++g) history.push_back(es_generation(st, cfg, mp, eval));
}

struct EvolutionResult {
  std::vector<GenerationStats> history;
  EvolutionState state;
};

inline EvolutionResult run_evolution(const EvolutionConfig& cfg, int n_weights,
                                     const EvalFn& eval) {
  EvolutionResult r;
  r.state = init_evolution(cfg, n_weights, eval);
  advance_evolution(r.state, cfg, eval, cfg.generations, r.history);
  return r;
}

}  // namespace evodrive
