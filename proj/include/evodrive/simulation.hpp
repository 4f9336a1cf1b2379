#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <vector>

#include "evodrive/arena.hpp"
#include "evodrive/common.hpp"
#include "evodrive/geometry.hpp"
#include "evodrive/rng.hpp"

namespace evodrive {

// Khepera-like robot and world constants. Distances in mm, time in seconds,
// angles in radians.
struct SimParams {
  double robot_radius = 27.5;
  double wheel_base = 52.0;
  double max_speed = 80.0;  // mm/s at command 1.0
  double dt = 0.1;

  // Mounting angles relative to heading, left to right across the front,
  // then the two rear sensors.
  std::array<double, 8> sensor_angles = {
      deg_to_rad(90.0),  deg_to_rad(45.0),  deg_to_rad(10.0),  deg_to_rad(-10.0),
      deg_to_rad(-45.0), deg_to_rad(-90.0), deg_to_rad(-150.0), deg_to_rad(150.0)};

  // Active IR: linear ramp from 1 at contact to 0 at ir_range, sampled with
  // ir_rays rays spread across a +-ir_cone_half cone.
  double ir_range = 50.0;
  double ir_cone_half = deg_to_rad(15.0);
  int ir_rays = 5;

  // Passive (ambient light): intensity * max(0, cos(bearing)) / (1 + (d/d0)^2).
  double light_falloff_d0 = 200.0;
  double light_reach_radius = 100.0;

  // Accumulator: full-to-empty in drain_steps outside the recharge area;
  // empty-to-full recharge component takes recharge_steps inside it.
  int drain_steps = 285;
  int recharge_steps = 100;
  bool drain_while_recharging = true;  // keep draining inside the recharge area
  int recharge_slowdown = 1;           // divides the net in-area gain

  double start_clearance = 30.0;  // wall clearance for random start poses

  double step_length() const { return max_speed * dt; }
};

// Accumulator bookkeeping in exact integer units so that epoch termination
// and conservation checks are free of float drift. One unit is
// 1 / (4 * drain_steps * recharge_steps) of a full accumulator.
struct EnergyModel {
  std::int64_t full = 1;
  std::int64_t drain = 0;        // per step, everywhere (when draining applies)
  std::int64_t inside_gain = 0;  // net per-step change inside the recharge area

  static EnergyModel from(const SimParams& p) {
    config_check(p.drain_steps > 0 && p.recharge_steps > 0, "energy: steps must be positive");
    config_check(p.recharge_slowdown >= 1, "energy: recharge_slowdown must be >= 1");
    EnergyModel m;
    m.full = 4LL * p.drain_steps * p.recharge_steps;
    m.drain = 4LL * p.recharge_steps;
    std::int64_t recharge = 4LL * p.drain_steps;
    std::int64_t net = p.drain_while_recharging ? recharge - m.drain : recharge;
    config_check(net % p.recharge_slowdown == 0, "energy: slowdown does not divide net gain");
    m.inside_gain = net / p.recharge_slowdown;
    config_check(m.inside_gain > 0, "energy: recharge area never gains energy");
    return m;
  }

  std::int64_t units_for_fraction(double f) const {
    return static_cast<std::int64_t>(std::llround(f * static_cast<double>(full)));
  }
  double fraction(std::int64_t units) const {
    if (units < 0) units = 0;
    return static_cast<double>(units) / static_cast<double>(full);
  }
};

struct MotorCommand {
  double left = 0.0;
  double right = 0.0;

  MotorCommand clamped() const {
    return {std::clamp(left, -1.0, 1.0), std::clamp(right, -1.0, 1.0)};
  }
};

struct SensorFrame {
  std::array<double, 8> ir_active{};   // obstacle proximity, 1 at contact
  std::array<double, 8> ir_passive{};  // ambient light
  double energy_level = 1.0;
};

struct RobotState {
  Pose pose;
  std::int64_t energy_units = 0;
  bool collided = false;
  int elapsed_steps = 0;

  double energy(const EnergyModel& m) const { return m.fraction(energy_units); }
};

// One simulation step as seen by every fitness function. v is the signed
// mean wheel command in [-1,1]; delta_v is |left-right|/2 in [0,1].
struct StepRecord {
  double v = 0.0;
  double delta_v = 0.0;
  Pose pose;
  bool in_recharge = false;
  int behavior = -1;  // supervisor-selected behavior, -1 otherwise
  double energy = 1.0;
};

enum class Termination { Collision, EnergyExhausted, StepLimit };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Collision: return "collision";
    case Termination::EnergyExhausted: return "energy_exhausted";
    case Termination::StepLimit: return "step_limit";
  }
  return "?";
}

struct EpochTrace {
  std::vector<StepRecord> steps;
  Termination termination = Termination::StepLimit;
  Pose start_pose;
  // Teleports performed on light reach: (index of the reaching step, new pose).
  std::vector<std::pair<int, Pose>> relocations;
};

struct StepDecision {
  MotorCommand cmd;
  int behavior = -1;
};

// A controller evaluated once per simulation step. reset() is called at the
// start of every epoch and clears any recurrent state.
class ControllerStepper {
public:
  virtual ~ControllerStepper() = default;
  virtual void reset() = 0;
  virtual StepDecision step(const SensorFrame& frame, RngStream& rng) = 0;
};

// ---------------------------------------------------------------------------
// Kinematics
// ---------------------------------------------------------------------------

// Exact differential-drive update over one time step: wheel speeds are
// cmd * max_speed with no inertia, so the robot follows a circular arc (or a
// straight line) determined purely by the current command.
inline Pose step_kinematics(const Pose& pose, const MotorCommand& cmd_in, const SimParams& p,
                            double dt) {
  const MotorCommand cmd = cmd_in.clamped();
  const double vl = cmd.left * p.max_speed;
  const double vr = cmd.right * p.max_speed;
  const double v = 0.5 * (vl + vr);
  const double omega = (vr - vl) / p.wheel_base;
  Pose out = pose;
  if (std::abs(omega) < 1e-9) {
    out.x += v * std::cos(pose.theta) * dt;
    out.y += v * std::sin(pose.theta) * dt;
  } else {
    const double radius = v / omega;
    const double th1 = pose.theta + omega * dt;
    out.x += radius * (std::sin(th1) - std::sin(pose.theta));
    out.y -= radius * (std::cos(th1) - std::cos(pose.theta));
    out.theta = th1;
  }
  return out.normalized();
}

inline Pose step_kinematics(const Pose& pose, const MotorCommand& cmd, const SimParams& p) {
  return step_kinematics(pose, cmd, p, p.dt);
}

// ---------------------------------------------------------------------------
// Collision and recharge membership
// ---------------------------------------------------------------------------

inline bool collides(const Pose& pose, const Arena& arena, const SimParams& p) {
  for (const auto& r : arena.obstacles)
    if (circle_intersects_rect(pose.position(), p.robot_radius, r)) return true;
  return false;
}

// Closed disc: the boundary counts as inside.
inline bool in_recharge(const Pose& pose, const Arena& arena) {
  contract_check(arena.recharge.has_value(), "in_recharge: arena has no recharge area");
  return distance(pose.position(), arena.recharge->center) <= arena.recharge->radius;
}

// ---------------------------------------------------------------------------
// Sensing
// ---------------------------------------------------------------------------

// Distance from a sensor mount point to the nearest obstacle across the
// sensor cone; +inf when nothing lies within any ray.
inline double nearest_obstacle_along_cone(const Pose& pose, int sensor, const Arena& arena,
                                          const SimParams& p) {
  const double axis = pose.theta + p.sensor_angles[sensor];
  const Vec2 mount{pose.x + p.robot_radius * std::cos(axis),
                   pose.y + p.robot_radius * std::sin(axis)};
  double best = kInf;
  const int rays = std::max(1, p.ir_rays);
  for (int k = 0; k < rays; ++k) {
    const double off = rays == 1 ? 0.0 : -p.ir_cone_half + 2.0 * p.ir_cone_half * k / (rays - 1);
    const Vec2 dir{std::cos(axis + off), std::sin(axis + off)};
    for (const auto& r : arena.obstacles) best = std::min(best, ray_rect_distance(mount, dir, r));
  }
  return best;
}

inline double active_ir_reading(double obstacle_distance, const SimParams& p) {
  if (obstacle_distance >= p.ir_range) return 0.0;
  return std::clamp(1.0 - obstacle_distance / p.ir_range, 0.0, 1.0);
}

inline double passive_ir_reading(const Pose& pose, int sensor, const Light& light,
                                 const SimParams& p) {
  const Vec2 to_light = light.pos - pose.position();
  const double d = to_light.norm();
  if (d < 1e-9) return std::clamp(light.intensity, 0.0, 1.0);
  const double bearing = std::atan2(to_light.y, to_light.x);
  const double off = wrap_angle(bearing - (pose.theta + p.sensor_angles[sensor]));
  const double cosw = std::max(0.0, std::cos(off));
  const double falloff = 1.0 / (1.0 + (d / p.light_falloff_d0) * (d / p.light_falloff_d0));
  return std::clamp(light.intensity * cosw * falloff, 0.0, 1.0);
}

inline SensorFrame sense(const RobotState& state, const Arena& arena, const SimParams& p,
                         const EnergyModel& model) {
  SensorFrame f;
  for (int i = 0; i < 8; ++i) {
    f.ir_active[i] = active_ir_reading(nearest_obstacle_along_cone(state.pose, i, arena, p), p);
    f.ir_passive[i] = arena.light ? passive_ir_reading(state.pose, i, *arena.light, p) : 0.0;
  }
  f.energy_level = state.energy(model);
  return f;
}

// ---------------------------------------------------------------------------
// Energy update
// ---------------------------------------------------------------------------

// Apply one step of accumulator drain/recharge based on the state's position.
inline RobotState update_energy(const RobotState& state, const Arena& arena,
                                const EnergyModel& model) {
  RobotState out = state;
  const bool inside = arena.recharge && in_recharge(state.pose, arena);
  if (inside) {
    out.energy_units = std::min(model.full, state.energy_units + model.inside_gain);
  } else {
    out.energy_units = state.energy_units - model.drain;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Start poses
// ---------------------------------------------------------------------------

// Uniform collision-free pose with wall clearance and uniform heading.
// keep_away_from/keep_away_radius excludes a disc (used to relocate the robot
// away from the light after a reach).
inline Pose random_start_pose(const Arena& arena, const SimParams& p, RngStream& rng,
                              Vec2 keep_away_from = {}, double keep_away_radius = -1.0) {
  const double margin = p.robot_radius + p.start_clearance;
  config_check(arena.width > 2 * margin && arena.height > 2 * margin,
               "arena too small for start poses");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Pose pose{rng.uniform(margin, arena.width - margin), rng.uniform(margin, arena.height - margin),
              rng.uniform(-kPi, kPi)};
    if (collides(pose, arena, p)) continue;
    if (keep_away_radius > 0 && distance(pose.position(), keep_away_from) <= keep_away_radius)
      continue;
    return pose;
  }
  throw ConfigError("no collision-free start pose found");
}

// ---------------------------------------------------------------------------
// Epoch execution
// ---------------------------------------------------------------------------

struct EpochOptions {
  bool energy_enabled = false;
  bool relocate_on_light_reach = false;
  double initial_energy = 1.0;
};

// Run one epoch: sense -> controller -> kinematics -> collision check ->
// energy update, until collision, energy exhaustion or the step limit.
inline EpochTrace run_epoch(ControllerStepper& controller, const Arena& arena, const SimParams& p,
                            const EnergyModel& model, const Pose& start, int max_steps,
                            const EpochOptions& opts, RngStream& rng) {
  config_check(!collides(start, arena, p), "epoch start pose intersects an obstacle");
  config_check(max_steps > 0, "epoch needs a positive step limit");
  if (opts.relocate_on_light_reach)
    config_check(arena.light.has_value(), "light-reach relocation needs a light");

  EpochTrace trace;
  trace.start_pose = start.normalized();
  trace.steps.reserve(static_cast<std::size_t>(max_steps));

  controller.reset();
  RobotState state;
  state.pose = trace.start_pose;
  state.energy_units = model.units_for_fraction(opts.initial_energy);

  for (int t = 0; t < max_steps; ++t) {
    const SensorFrame frame = sense(state, arena, p, model);
    const StepDecision decision = controller.step(frame, rng);
    const MotorCommand cmd = decision.cmd.clamped();

    state.pose = step_kinematics(state.pose, cmd, p);
    state.elapsed_steps = t + 1;

    StepRecord rec;
    rec.v = 0.5 * (cmd.left + cmd.right);
    rec.delta_v = 0.5 * std::abs(cmd.left - cmd.right);
    rec.pose = state.pose;
    rec.in_recharge = arena.recharge && in_recharge(state.pose, arena);
    rec.behavior = decision.behavior;

    if (collides(state.pose, arena, p)) {
      state.collided = true;
      rec.energy = state.energy(model);
      trace.steps.push_back(rec);
      trace.termination = Termination::Collision;
      return trace;
    }

    if (opts.energy_enabled) {
      state = update_energy(state, arena, model);
      rec.energy = state.energy(model);
      if (state.energy_units <= 0) {
        trace.steps.push_back(rec);
        trace.termination = Termination::EnergyExhausted;
        return trace;
      }
    } else {
      rec.energy = state.energy(model);
    }

    trace.steps.push_back(rec);

    if (opts.relocate_on_light_reach &&
        distance(state.pose.position(), arena.light->pos) <= p.light_reach_radius) {
      // Move clear of the light so the next step cannot re-count the reach.
      const Pose fresh = random_start_pose(arena, p, rng, arena.light->pos,
                                           p.light_reach_radius + 2.0 * p.step_length());
      trace.relocations.emplace_back(t, fresh);
      state.pose = fresh;
    }
  }
  trace.termination = Termination::StepLimit;
  return trace;
}

}  // namespace evodrive
