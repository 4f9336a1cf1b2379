#pragma once

#include <set>
#include <string>
#include <vector>

#include "evodrive/arena.hpp"
#include "evodrive/simulation.hpp"

namespace evodrive {

// Score of one evaluation: per-epoch contributions and their sum.
struct FitnessValue {
  double total = 0.0;
  std::vector<double> per_epoch;
};

namespace detail {

template <typename StepScore>
FitnessValue sum_over_steps(const std::vector<EpochTrace>& traces, StepScore score) {
  FitnessValue f;
  for (const auto& tr : traces) {
    double e = 0.0;
    for (const auto& s : tr.steps) e += score(s);
    f.per_epoch.push_back(e);
    f.total += e;
  }
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-task measures
// ---------------------------------------------------------------------------

// Classic straight-fast measure: |v| * (1 - sqrt(delta_v)) per step. Rewards
// speed in either direction, so forward/backward oscillation scores fully.
inline FitnessValue fitness_obstacle_original(const std::vector<EpochTrace>& traces) {
  return detail::sum_over_steps(traces, [](const StepRecord& s) {
    return std::abs(s.v) * (1.0 - std::sqrt(std::min(1.0, s.delta_v)));
  });
}

// Same measure gated on strictly forward motion; backward steps score zero.
inline FitnessValue fitness_obstacle_gated(const std::vector<EpochTrace>& traces) {
  return detail::sum_over_steps(traces, [](const StepRecord& s) {
    return s.v > 0.0 ? s.v * (1.0 - std::sqrt(std::min(1.0, s.delta_v))) : 0.0;
  });
}

// Steps spent within reach of the light. With in-run relocation each arrival
// counts once before the robot is moved, so the score is the number of times
// the light was reached.
inline FitnessValue fitness_light_following(const std::vector<EpochTrace>& traces,
                                            const Vec2& light_pos, double reach_radius) {
  return detail::sum_over_steps(traces, [&](const StepRecord& s) {
    return distance(s.pose.position(), light_pos) <= reach_radius ? 1.0 : 0.0;
  });
}

// Negated path length in mm, first step measured from the epoch start pose.
// The best possible score is zero: no translation at all.
inline FitnessValue fitness_stop(const std::vector<EpochTrace>& traces) {
  FitnessValue f;
  for (const auto& tr : traces) {
    double e = 0.0;
    Vec2 prev = tr.start_pose.position();
    for (const auto& s : tr.steps) {
      e -= distance(s.pose.position(), prev);
      prev = s.pose.position();
    }
    f.per_epoch.push_back(e);
    f.total += e;
  }
  return f;
}

// Distinct coverage cells visited across all epochs; each epoch contributes
// the cells it is first to reach, so the per-epoch scores sum to the union.
inline FitnessValue fitness_area_sweeping(const std::vector<EpochTrace>& traces,
                                          const Arena& arena) {
  FitnessValue f;
  std::set<int> seen;
  auto visit = [&](const Vec2& p, int& fresh) {
    if (auto c = arena.grid.cell_index(p, arena.width, arena.height))
      if (seen.insert(*c).second) ++fresh;
  };
  for (const auto& tr : traces) {
    int fresh = 0;
    visit(tr.start_pose.position(), fresh);
    for (const auto& s : tr.steps) visit(s.pose.position(), fresh);
    f.per_epoch.push_back(static_cast<double>(fresh));
    f.total += fresh;
  }
  return f;
}

// Straight-fast measure restricted to forward motion outside the recharge
// area. Sitting on the charger earns nothing; it only buys time to earn more.
inline FitnessValue fitness_energy(const std::vector<EpochTrace>& traces) {
  return detail::sum_over_steps(traces, [](const StepRecord& s) {
    if (s.in_recharge || s.v <= 0.0) return 0.0;
    return s.v * (1.0 - std::sqrt(std::min(1.0, s.delta_v)));
  });
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct FitnessSpec {
  std::string id;
  bool needs_energy = false;
  bool needs_light = false;
  bool relocate = false;  // move the robot when it reaches the light
  int default_epoch_steps = 500;
};

inline const std::vector<FitnessSpec>& fitness_registry() {
  static const std::vector<FitnessSpec> specs = {
      {"obstacle_original", false, false, false, 500},
      {"obstacle_gated", false, false, false, 500},
      {"light_following", false, true, true, 500},
      {"stop", false, false, false, 500},
      {"area_sweeping", false, false, false, 500},
      {"energy", true, true, false, 1000},
  };
  return specs;
}

inline const FitnessSpec& fitness_spec(const std::string& id) {
  for (const auto& s : fitness_registry())
    if (s.id == id) return s;
  throw ConfigError("unknown fitness id: " + id);
}

inline FitnessValue compute_fitness(const std::string& id, const std::vector<EpochTrace>& traces,
                                    const Arena& arena, const SimParams& params) {
  if (id == "obstacle_original") return fitness_obstacle_original(traces);
  if (id == "obstacle_gated") return fitness_obstacle_gated(traces);
  if (id == "light_following") {
    config_check(arena.light.has_value(), "light_following fitness needs a light source");
    return fitness_light_following(traces, arena.light->pos, params.light_reach_radius);
  }
  if (id == "stop") return fitness_stop(traces);
  if (id == "area_sweeping") return fitness_area_sweeping(traces, arena);
  if (id == "energy") return fitness_energy(traces);
  throw ConfigError("unknown fitness id: " + id);
}

}  // namespace evodrive
