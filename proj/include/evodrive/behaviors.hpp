#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "evodrive/controllers.hpp"

namespace evodrive {

// ---------------------------------------------------------------------------
// Hand-coded rules
// ---------------------------------------------------------------------------
// Fixed steppers used as library padding and in tests. "Useless" ones model
// antagonistic or pointless habits a supervisor must learn to ignore.

enum class HandcodedRule {
  Random,        // i.i.d. uniform wheel speeds each step
  LightAvoiding, // turns away from the strongest light reading
  Crash,         // steers toward the nearest obstacle
  StickToWalls,  // hugs obstacles at close range
  OscillateFB,   // alternates full forward / full backward
  FullForward,   // both wheels at +1
  StopRule,      // both wheels at 0
};

inline const char* to_string(HandcodedRule r) {
  switch (r) {
    case HandcodedRule::Random: return "random";
    case HandcodedRule::LightAvoiding: return "light_avoiding";
    case HandcodedRule::Crash: return "crash";
    case HandcodedRule::StickToWalls: return "stick_to_walls";
    case HandcodedRule::OscillateFB: return "oscillate_fb";
    case HandcodedRule::FullForward: return "full_forward";
    case HandcodedRule::StopRule: return "stop_rule";
  }
  return "?";
}

inline bool handcoded_rule_from_string(const std::string& s, HandcodedRule& out) {
  for (HandcodedRule r : {HandcodedRule::Random, HandcodedRule::LightAvoiding,
                          HandcodedRule::Crash, HandcodedRule::StickToWalls,
                          HandcodedRule::OscillateFB, HandcodedRule::FullForward,
                          HandcodedRule::StopRule}) {
    if (s == to_string(r)) {
      out = r;
      return true;
    }
  }
  return false;
}

namespace detail {

// Index of the strongest reading, first on ties.
inline int strongest(const std::array<double, 8>& v) {
  return argmax_index(std::span<const double>(v.data(), v.size()));
}

// Mount angles run {90, 45, 10, -10, -45, -90, -150, 150} degrees, so the
// left half of the ring is indices 0..2 and 7.
inline bool sensor_on_left(int i) { return i <= 2 || i == 7; }

}  // namespace detail

class HandcodedController : public ControllerStepper {
public:
  explicit HandcodedController(HandcodedRule rule) : rule_(rule) {}

  void reset() override { tick_ = 0; }

  StepDecision step(const SensorFrame& f, RngStream& rng) override {
    const int t = tick_++;
    switch (rule_) {
      case HandcodedRule::Random:
        return {{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
      case HandcodedRule::LightAvoiding: {
        const int i = detail::strongest(f.ir_passive);
        if (f.ir_passive[i] < 1e-3) return {{1.0, 1.0}};
        // Light on the left: turn right, and vice versa.
        return detail::sensor_on_left(i) ? StepDecision{{1.0, -1.0}}
                                         : StepDecision{{-1.0, 1.0}};
      }
      case HandcodedRule::Crash: {
        const int i = detail::strongest(f.ir_active);
        if (f.ir_active[i] < 1e-3) return {{1.0, 1.0}};
        // Obstacle on the left: turn left, into it.
        return detail::sensor_on_left(i) ? StepDecision{{-1.0, 1.0}}
                                         : StepDecision{{1.0, -1.0}};
      }
      case HandcodedRule::StickToWalls: {
        const int i = detail::strongest(f.ir_active);
        const double r = f.ir_active[i];
        if (r < 0.1) return {{1.0, 1.0}};
        if (r > 0.5)
          return detail::sensor_on_left(i) ? StepDecision{{1.0, -1.0}}
                                           : StepDecision{{-1.0, 1.0}};
        return detail::sensor_on_left(i) ? StepDecision{{-1.0, 1.0}}
                                         : StepDecision{{1.0, -1.0}};
      }
      case HandcodedRule::OscillateFB:
        return {(t % 2 == 0) ? MotorCommand{1.0, 1.0} : MotorCommand{-1.0, -1.0}};
      case HandcodedRule::FullForward:
        return {{1.0, 1.0}};
      case HandcodedRule::StopRule:
        return {{0.0, 0.0}};
    }
    return {{0.0, 0.0}};
  }

private:
  HandcodedRule rule_;
  int tick_ = 0;
};

// ---------------------------------------------------------------------------
// Behavior library
// ---------------------------------------------------------------------------

// One selectable behavior: either a hand-coded rule or an evolved controller
// (blueprint fields + genotype, instantiated per supervisor).
struct BehaviorEntry {
  std::string name;
  bool handcoded = false;
  HandcodedRule rule = HandcodedRule::StopRule;
  // Evolved entries:
  NetworkSpec spec;
  InputSelect inputs = InputSelect::IrActive;
  bool symbolic = false;
  ActionSet actions;
  Genotype genotype;

  static BehaviorEntry fixed(std::string name, HandcodedRule rule) {
    BehaviorEntry e;
    e.name = std::move(name);
    e.handcoded = true;
    e.rule = rule;
    return e;
  }
};

inline std::unique_ptr<ControllerStepper> make_stepper(const BehaviorEntry& e) {
  if (e.handcoded) return std::make_unique<HandcodedController>(e.rule);
  if (e.symbolic)
    return std::make_unique<SymbolicController>(e.spec, e.genotype, e.inputs, e.actions);
  return std::make_unique<ClassicalController>(e.spec, e.genotype, e.inputs);
}

// Ordered collection; the position of an entry is the supervisor output that
// selects it.
struct BehaviorLibrary {
  std::vector<BehaviorEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }

  void add(BehaviorEntry e) {
    for (const auto& x : entries)
      config_check(x.name != e.name, "duplicate behavior name: " + e.name);
    entries.push_back(std::move(e));
  }

  int index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
      if (entries[i].name == name) return i;
    return -1;
  }
};

// ---------------------------------------------------------------------------
// Supervisor
// ---------------------------------------------------------------------------

// Hierarchical controller: a net reads the full sensor frame, its argmax
// output picks a library behavior, and that behavior's own stepper produces
// the motor command for the step.
class SupervisorController : public ControllerStepper {
public:
  SupervisorController(NetworkSpec spec, Genotype g, const BehaviorLibrary& library)
      : policy_(std::move(spec), std::move(g), InputSelect::Full) {
    contract_check(library.size() > 0, "supervisor needs a non-empty library");
    contract_check(policy_.spec().n_outputs == library.size(),
                   "supervisor needs one output per behavior");
    for (const auto& e : library.entries) {
      names_.push_back(e.name);
      steppers_.push_back(make_stepper(e));
    }
    calls_.assign(steppers_.size(), 0);
  }

  void reset() override {
    policy_.reset();
    for (auto& s : steppers_) s->reset();
  }

  StepDecision step(const SensorFrame& frame, RngStream& rng) override {
    const int pick = argmax_index(policy_.eval(frame));
    ++calls_[pick];
    ++total_calls_;
    StepDecision d = steppers_[pick]->step(frame, rng);
    d.behavior = pick;
    return d;
  }

  // Per-behavior selection counts, accumulated across epochs until cleared.
  const std::vector<long long>& calls() const { return calls_; }
  long long total_calls() const { return total_calls_; }
  const std::vector<std::string>& names() const { return names_; }

  void clear_counts() {
    calls_.assign(calls_.size(), 0);
    total_calls_ = 0;
  }

private:
  NetPolicy policy_;
  std::vector<std::string> names_;
  std::vector<std::unique_ptr<ControllerStepper>> steppers_;
  std::vector<long long> calls_;
  long long total_calls_ = 0;
};

}  // namespace evodrive
