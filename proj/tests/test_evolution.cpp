#include <catch_amalgamated.hpp>

#include <evodrive/evolution.hpp>

#include <cmath>
#include <map>

using namespace evodrive;

TEST_CASE("config validation enforces the comma-selection shape") {
    EvolutionConfig cfg;
    cfg.validate();
    EvolutionConfig bad = cfg;
    bad.mu = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.lambda = 7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.weight_min = 1.0;
    bad.weight_max = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(cfg.initial_sigma() == Catch::Approx(0.3));
    EvolutionConfig fixed = cfg;
    fixed.sigma_init = 0.05;
    CHECK(fixed.initial_sigma() == 0.05);
}

TEST_CASE("mutation parameters follow the standard schedule") {
    MutationParams p = MutationParams::standard(216, -1.0, 1.0);
    CHECK(p.tau_prime == Catch::Approx(1.0 / std::sqrt(432.0)));
    CHECK(p.tau == Catch::Approx(1.0 / std::sqrt(2.0 * std::sqrt(216.0))));
    CHECK(p.sigma_min == 1e-6);
    CHECK(p.sigma_max == 2.0);
}

TEST_CASE("initial population is uniform inside the bounds") {
    EvolutionConfig cfg;
    cfg.weight_min = -1.0;
    cfg.weight_max = 1.0;
    RngStream rng = RngStream::derive(17, {0xA});
    auto pop = init_population(1000, 100, cfg, rng);
    double sum = 0.0;
    int n = 0;
    for (const auto& g : pop) {
        REQUIRE(g.sigmas.size() == 100);
        for (double s : g.sigmas) REQUIRE(s == Catch::Approx(0.3));
        for (double w : g.weights) {
            REQUIRE(w >= -1.0);
            REQUIRE(w < 1.0);
            sum += w;
            ++n;
        }
    }
    // mean of 1e5 uniforms on [-1,1): SE = (2/sqrt(12))/sqrt(n)
    const double se = (2.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sum / n) < 3.0 * se);
}

TEST_CASE("intermediate crossover takes gene-wise means including step sizes") {
    Genotype a{{0.2, -0.4, 1.0}, {0.1, 0.2, 0.3}};
    Genotype b{{0.6, 0.4, -1.0}, {0.3, 0.2, 0.1}};
    Genotype c = intermediate_crossover(a, b);
    CHECK(c.weights[0] == Catch::Approx(0.4));
    CHECK(c.weights[1] == 0.0);
    CHECK(c.weights[2] == 0.0);
    CHECK(c.sigmas[0] == Catch::Approx(0.2));
    CHECK(c.sigmas[1] == Catch::Approx(0.2));
    CHECK(c.sigmas[2] == Catch::Approx(0.2));
    Genotype d{{1.0}, {0.1}};
    CHECK_THROWS_AS(intermediate_crossover(a, d), std::invalid_argument);
}

TEST_CASE("mutation keeps weights and step sizes inside their bounds") {
    MutationParams p = MutationParams::standard(50, -1.0, 1.0);
    RngStream rng = RngStream::derive(23, {1});
    Genotype g;
    g.weights.assign(50, 0.9);
    g.sigmas.assign(50, 1.5);
    for (int rep = 0; rep < 200; ++rep) {
        self_adaptive_mutate(g, p, -1.0, 1.0, rng);
        for (double w : g.weights) {
            REQUIRE(w >= -1.0);
            REQUIRE(w <= 1.0);
        }
        for (double s : g.sigmas) {
            REQUIRE(s >= p.sigma_min);
            REQUIRE(s <= p.sigma_max);
        }
    }
}

TEST_CASE("with frozen learning rates the perturbation std matches sigma") {
    MutationParams p{};
    p.tau_prime = 0.0;
    p.tau = 0.0;
    p.sigma_min = 1e-6;
    p.sigma_max = 10.0;
    RngStream rng = RngStream::derive(31, {2});
    const int n = 100000;
    Genotype g;
    g.weights.assign(n, 0.0);
    g.sigmas.assign(n, 0.1);
    self_adaptive_mutate(g, p, -50.0, 50.0, rng);
    double sumsq = 0.0;
    for (double w : g.weights) sumsq += w * w;
    const double sd = std::sqrt(sumsq / n);
    CHECK(std::abs(sd - 0.1) < 0.003);
    for (double s : g.sigmas) REQUIRE(s == 0.1);
}

TEST_CASE("mutation is deterministic for a fixed stream") {
    MutationParams p = MutationParams::standard(8, -1.0, 1.0);
    Genotype a{{0.1, 0.2, 0.3, 0.4, -0.1, -0.2, -0.3, -0.4},
               {0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3}};
    Genotype b = a;
    RngStream r1 = RngStream::derive(77, {5});
    RngStream r2 = RngStream::derive(77, {5});
    self_adaptive_mutate(a, p, -1.0, 1.0, r1);
    self_adaptive_mutate(b, p, -1.0, 1.0, r2);
    CHECK(a.weights == b.weights);
    CHECK(a.sigmas == b.sigmas);
}

TEST_CASE("comma selection keeps exactly the top offspring") {
    EvolutionConfig cfg;
    cfg.mu = 5;
    cfg.lambda = 25;
    cfg.generations = 1;
    cfg.seed = 9;
    std::map<std::pair<int, int>, double> seen;
    EvalFn eval = [&](const Genotype& g, int gen, int idx) {
        double f = g.weights[0] + 0.01 * g.weights[1];
        seen[{gen, idx}] = f;
        return f;
    };
    EvolutionState st = init_evolution(cfg, 4, eval);
    CHECK(st.parents.size() == 5);
    CHECK(st.next_generation == 0);

    MutationParams mp = MutationParams::standard(4, cfg.weight_min, cfg.weight_max);
    GenerationStats gs = es_generation(st, cfg, mp, eval);
    CHECK(gs.generation == 1);
    REQUIRE(st.parents.size() == 5);

    std::vector<double> gen1;
    for (const auto& [key, f] : seen)
        if (key.first == 1) gen1.push_back(f);
    REQUIRE(gen1.size() == 25);
    std::sort(gen1.rbegin(), gen1.rend());
    for (int r = 0; r < 5; ++r) CHECK(st.parent_fitness[r] == gen1[r]);
    CHECK(gs.best == gen1[0]);
    for (int r = 1; r < 5; ++r) CHECK(st.parent_fitness[r] <= st.parent_fitness[r - 1]);
}

TEST_CASE("generation stats run over the offspring scores") {
    EvolutionConfig cfg;
    cfg.mu = 5;
    cfg.lambda = 25;
    cfg.seed = 3;
    EvalFn eval = [](const Genotype&, int gen, int idx) {
        return gen == 0 ? -100.0 : static_cast<double>(idx);
    };
    EvolutionState st = init_evolution(cfg, 3, eval);
    MutationParams mp = MutationParams::standard(3, cfg.weight_min, cfg.weight_max);
    GenerationStats gs = es_generation(st, cfg, mp, eval);
    CHECK(gs.best == 24.0);
    CHECK(gs.mean == Catch::Approx(12.0));
    CHECK(gs.stddev == Catch::Approx(std::sqrt(52.0)));
    CHECK(st.best_fitness == 24.0);
    CHECK(st.best_generation == 1);
    CHECK(st.best_index == 24);
}

TEST_CASE("comma selection has no elitism but the best tracker is global") {
    EvolutionConfig cfg;
    cfg.mu = 3;
    cfg.lambda = 6;
    cfg.seed = 5;
    EvalFn eval = [](const Genotype&, int gen, int) { return gen == 0 ? 100.0 : 1.0; };
    EvolutionState st = init_evolution(cfg, 2, eval);
    CHECK(st.initial_best_fitness == 100.0);
    std::vector<GenerationStats> hist;
    advance_evolution(st, cfg, eval, 2, hist);
    CHECK(st.parent_fitness[0] == 1.0);        // parents fully replaced
    CHECK(st.best_fitness == 100.0);           // global best remembers gen 0
    CHECK(st.best_generation == 0);
    CHECK(hist.size() == 2);
    CHECK(hist[0].generation == 1);
    CHECK(hist[1].generation == 2);
}

TEST_CASE("a throwing evaluation scores minus infinity and the run continues") {
    EvolutionConfig cfg;
    cfg.mu = 2;
    cfg.lambda = 4;
    cfg.seed = 8;
    EvalFn eval = [](const Genotype&, int gen, int idx) -> double {
        if (gen == 1 && idx == 3) throw std::runtime_error("boom");
        return 1.0 + idx;
    };
    EvolutionState st = init_evolution(cfg, 3, eval);
    std::vector<GenerationStats> hist;
    advance_evolution(st, cfg, eval, 1, hist);
    CHECK(std::isfinite(st.best_fitness));
    CHECK(st.parent_fitness[0] == 3.0);  // idx 2 is the best non-throwing offspring
    CHECK(std::isinf(hist[0].mean));     // the -inf score still enters the stats
}

TEST_CASE("zero generations leave the initial champion in place") {
    EvolutionConfig cfg;
    cfg.mu = 4;
    cfg.lambda = 8;
    cfg.generations = 0;
    cfg.seed = 2;
    EvalFn eval = [](const Genotype& g, int, int) { return g.weights[0]; };
    EvolutionResult r = run_evolution(cfg, 2, eval);
    CHECK(r.history.empty());
    CHECK(r.state.best_fitness == r.state.initial_best_fitness);
    CHECK(r.state.best_generation == 0);
}

TEST_CASE("different seeds give different initial populations") {
    EvolutionConfig a;
    a.seed = 1;
    EvolutionConfig b;
    b.seed = 2;
    EvalFn eval = [](const Genotype&, int, int) { return 0.0; };
    a.mu = 2;
    a.lambda = 2;
    b.mu = 2;
    b.lambda = 2;
    EvolutionState sa = init_evolution(a, 10, eval);
    EvolutionState sb = init_evolution(b, 10, eval);
    CHECK(sa.parents[0].weights != sb.parents[0].weights);
    EvolutionState sa2 = init_evolution(a, 10, eval);
    CHECK(sa.parents[0].weights == sa2.parents[0].weights);
}

TEST_CASE("the es minimizes a small sphere via self-adaptation") {
    for (std::uint64_t seed : {101ULL, 202ULL}) {
        EvolutionConfig cfg;
        cfg.mu = 5;
        cfg.lambda = 25;
        cfg.generations = 200;
        cfg.seed = seed;
        EvalFn eval = [](const Genotype& g, int, int) {
            double s = 0.0;
            for (double w : g.weights) s -= w * w;
            return s;
        };
        EvolutionResult r = run_evolution(cfg, 20, eval);
        CHECK(r.state.best_fitness >= -1e-2);
    }
}
