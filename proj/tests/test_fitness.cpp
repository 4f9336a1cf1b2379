#include <catch_amalgamated.hpp>

#include <evodrive/behaviors.hpp>
#include <evodrive/fitness.hpp>
#include <evodrive/simulation.hpp>

#include <cmath>

using namespace evodrive;

namespace {

EpochTrace synthetic_line(double y, int cells, double cell_w) {
    EpochTrace tr;
    tr.start_pose = {cell_w / 2, y, 0.0};
    for (int i = 1; i < cells; ++i) {
        StepRecord s;
        s.v = 1.0;
        s.pose = {cell_w / 2 + i * cell_w, y, 0.0};
        tr.steps.push_back(s);
    }
    return tr;
}

}  // namespace

TEST_CASE("oscillation scores fully on the original measure and half when gated") {
    Arena arena = Arena::open(4000.0, 800.0);
    SimParams p;
    EnergyModel model = EnergyModel::from(p);
    HandcodedController ctrl(HandcodedRule::OscillateFB);
    RngStream rng = RngStream::derive(1, {0});
    EpochTrace tr =
        run_epoch(ctrl, arena, p, model, {2000.0, 400.0, 0.0}, 500, EpochOptions{}, rng);
    REQUIRE(tr.termination == Termination::StepLimit);
    REQUIRE(tr.steps.size() == 500);
    std::vector<EpochTrace> traces{tr};
    CHECK(fitness_obstacle_original(traces).total == 500.0);
    CHECK(fitness_obstacle_gated(traces).total == 250.0);
    // the robot never strays more than one step length from its start
    for (const auto& s : tr.steps)
        CHECK(std::abs(s.pose.x - 2000.0) <= p.step_length() + 1e-9);
}

TEST_CASE("turning in place scores zero on both obstacle measures") {
    std::vector<EpochTrace> traces(1);
    StepRecord s;
    s.v = 0.0;
    s.delta_v = 1.0;
    traces[0].steps.assign(50, s);
    CHECK(fitness_obstacle_original(traces).total == 0.0);
    CHECK(fitness_obstacle_gated(traces).total == 0.0);
}

TEST_CASE("swerving discounts the speed score by the square root") {
    std::vector<EpochTrace> traces(1);
    StepRecord s;
    s.v = 0.5;
    s.delta_v = 0.25;
    traces[0].steps.assign(10, s);
    CHECK(fitness_obstacle_original(traces).total == Catch::Approx(10 * 0.5 * 0.5));
    s.v = -0.5;
    traces[0].steps.assign(10, s);
    CHECK(fitness_obstacle_original(traces).total == Catch::Approx(2.5));
    CHECK(fitness_obstacle_gated(traces).total == 0.0);
}

TEST_CASE("stop fitness is the negated path length") {
    Arena arena = Arena::open(4000.0, 800.0);
    SimParams p;
    EnergyModel model = EnergyModel::from(p);
    HandcodedController ctrl(HandcodedRule::FullForward);
    RngStream rng = RngStream::derive(1, {0});
    EpochTrace tr =
        run_epoch(ctrl, arena, p, model, {200.0, 400.0, 0.0}, 100, EpochOptions{}, rng);
    REQUIRE(tr.steps.size() == 100);
    std::vector<EpochTrace> traces{tr};
    CHECK(fitness_stop(traces).total == -800.0);
    HandcodedController still(HandcodedRule::StopRule);
    EpochTrace tr2 =
        run_epoch(still, arena, p, model, {200.0, 400.0, 0.0}, 100, EpochOptions{}, rng);
    std::vector<EpochTrace> parked{tr2};
    CHECK(fitness_stop(parked).total == 0.0);
}

TEST_CASE("light reach count matches a straight-line geometric oracle") {
    Arena arena = Arena::open(1000.0, 800.0);
    arena.light = Light{{500.0, 400.0}, 1.0};
    SimParams p;
    EnergyModel model = EnergyModel::from(p);
    HandcodedController ctrl(HandcodedRule::FullForward);
    RngStream rng = RngStream::derive(21, {4});
    EpochOptions opts;
    opts.relocate_on_light_reach = true;
    EpochTrace tr = run_epoch(ctrl, arena, p, model, {200.0, 400.0, 0.0}, 400, opts, rng);
    std::vector<EpochTrace> traces{tr};

    FitnessValue f = fitness_light_following(traces, arena.light->pos, p.light_reach_radius);
    CHECK(f.total == static_cast<double>(tr.relocations.size()));
    REQUIRE_FALSE(tr.relocations.empty());
    CHECK(tr.relocations[0].first == 24);

    // geometric prediction per straight segment: first step whose endpoint
    // enters the reach disc, unless a wall cuts the segment short
    const int last = static_cast<int>(tr.steps.size()) - 1;
    std::size_t k = 0;
    Pose seg = tr.start_pose;
    int base = -1;  // seg is the pose before step base+1
    while (true) {
        const Vec2 dir{std::cos(seg.theta), std::sin(seg.theta)};
        int predicted = -1;
        for (int n = 1; base + n <= last; ++n) {
            Vec2 q = seg.position() + dir * (8.0 * n);
            if (q.x <= p.robot_radius || q.x >= arena.width - p.robot_radius ||
                q.y <= p.robot_radius || q.y >= arena.height - p.robot_radius)
                break;  // wall collision ends the epoch first
            if (distance(q, arena.light->pos) <= p.light_reach_radius) {
                predicted = base + n;
                break;
            }
        }
        if (predicted < 0) break;
        REQUIRE(k < tr.relocations.size());
        CHECK(tr.relocations[k].first == predicted);
        seg = tr.relocations[k].second;
        base = predicted;
        ++k;
    }
    CHECK(k == tr.relocations.size());
}

TEST_CASE("area sweeping counts fresh cells per epoch and sums to the union") {
    Arena arena = Arena::open(1000.0, 800.0);
    std::vector<EpochTrace> traces;
    traces.push_back(synthetic_line(50.0, 10, 100.0));
    traces.push_back(synthetic_line(50.0, 10, 100.0));   // nothing new
    traces.push_back(synthetic_line(150.0, 10, 100.0));  // second row
    FitnessValue f = fitness_area_sweeping(traces, arena);
    REQUIRE(f.per_epoch.size() == 3);
    CHECK(f.per_epoch[0] == 10.0);
    CHECK(f.per_epoch[1] == 0.0);
    CHECK(f.per_epoch[2] == 10.0);
    CHECK(f.total == 20.0);
    CHECK(f.total <= arena.grid.cell_count());
}

TEST_CASE("energy fitness rewards forward motion outside the recharge area only") {
    std::vector<EpochTrace> traces(1);
    StepRecord outside;
    outside.v = 1.0;
    StepRecord inside = outside;
    inside.in_recharge = true;
    StepRecord backward;
    backward.v = -1.0;
    traces[0].steps = {outside, inside, outside, backward, inside};
    CHECK(fitness_energy(traces).total == 2.0);
}

TEST_CASE("the sustainable recharge cycle scores the closed-form value") {
    SimParams p;
    EnergyModel m = EnergyModel::from(p);

    // longest safe stretch outside on a full accumulator
    const std::int64_t outside_max = m.full / m.drain - 1;
    REQUIRE(outside_max == 284);
    const std::int64_t low = m.full - outside_max * m.drain;
    const std::int64_t refill =
        (m.full - low + m.inside_gain - 1) / m.inside_gain;  // ceil division
    REQUIRE(refill == 154);

    const int epoch_steps = 1000;
    const int epochs = 10;
    std::vector<EpochTrace> traces;
    for (int e = 0; e < epochs; ++e) {
        EpochTrace tr;
        std::int64_t units = m.full;
        int phase = 0;  // steps spent in the current cycle
        for (int t = 0; t < epoch_steps; ++t) {
            StepRecord s;
            bool in = phase >= outside_max;
            if (in) {
                units = std::min(m.full, units + m.inside_gain);
                s.in_recharge = true;
                s.v = 0.0;
            } else {
                units -= m.drain;
                s.v = 1.0;
            }
            REQUIRE(units > 0);
            ++phase;
            if (phase == outside_max + refill) {
                REQUIRE(units == m.full);
                phase = 0;
            }
            tr.steps.push_back(s);
        }
        traces.push_back(std::move(tr));
    }
    FitnessValue f = fitness_energy(traces);
    // two full cycles of 438 steps earn 284 each, the tail runs 124 safe steps
    CHECK(f.per_epoch[0] == 692.0);
    CHECK(f.total == 6920.0);
}

TEST_CASE("fitness registry flags and defaults") {
    CHECK(fitness_spec("energy").needs_energy);
    CHECK(fitness_spec("energy").needs_light);
    CHECK_FALSE(fitness_spec("energy").relocate);
    CHECK(fitness_spec("energy").default_epoch_steps == 1000);
    CHECK(fitness_spec("light_following").relocate);
    CHECK(fitness_spec("light_following").needs_light);
    CHECK(fitness_spec("obstacle_gated").default_epoch_steps == 500);
    CHECK_THROWS_AS(fitness_spec("nope"), ConfigError);
    CHECK(fitness_registry().size() == 6);
}

TEST_CASE("computing a fitness twice over the same traces is bit-exact") {
    Arena arena = Arena::open(1000.0, 800.0);
    SimParams p;
    EnergyModel model = EnergyModel::from(p);
    HandcodedController ctrl(HandcodedRule::Random);
    RngStream rng = RngStream::derive(5, {6});
    std::vector<EpochTrace> traces;
    for (int e = 0; e < 3; ++e) {
        Pose start = random_start_pose(arena, p, rng);
        traces.push_back(run_epoch(ctrl, arena, p, model, start, 200, EpochOptions{}, rng));
    }
    for (const char* id : {"obstacle_original", "obstacle_gated", "stop", "area_sweeping"}) {
        FitnessValue a = compute_fitness(id, traces, arena, p);
        FitnessValue b = compute_fitness(id, traces, arena, p);
        CHECK(a.total == b.total);
        CHECK(a.per_epoch == b.per_epoch);
        double sum = 0.0;
        for (double e : a.per_epoch) sum += e;
        CHECK(a.total == Catch::Approx(sum).margin(1e-12));
    }
}

TEST_CASE("light following requires a light in the arena") {
    Arena arena = Arena::open(1000.0, 800.0);
    SimParams p;
    std::vector<EpochTrace> traces(1);
    CHECK_THROWS_AS(compute_fitness("light_following", traces, arena, p), ConfigError);
}
