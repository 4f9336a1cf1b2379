#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evodrive/network.hpp"
#include "evodrive/simulation.hpp"

namespace evodrive {

// ---------------------------------------------------------------------------
// Symbolic actions
// ---------------------------------------------------------------------------

enum class Action { Forward, Right, Left, Backward };

using ActionSet = std::vector<Action>;

inline ActionSet full_action_set() {
  return {Action::Forward, Action::Right, Action::Left, Action::Backward};
}

// No Backward: pure forward/turn motion, net displacement per step >= 0.
inline ActionSet degraded_action_set() {
  return {Action::Forward, Action::Left, Action::Right};
}

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Forward: return "forward";
    case Action::Right: return "right";
    case Action::Left: return "left";
    case Action::Backward: return "backward";
  }
  return "?";
}

struct ActionChoice {
  Action action = Action::Forward;
  double parameter = 0.0;  // in [0,1]
};

// First occurrence of the maximum; deterministic tie-break.
inline int argmax_index(std::span<const double> values) {
  contract_check(!values.empty(), "argmax of empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

// Outputs hold k selection values followed by k parameters; the chosen action
// is the argmax of the first half, its parameter sits k places later.
inline ActionChoice decode_symbolic(std::span<const double> outputs, const ActionSet& actions) {
  const int k = static_cast<int>(actions.size());
  contract_check(static_cast<int>(outputs.size()) == 2 * k,
                 "decode_symbolic: outputs must be twice the action count");
  const int i = argmax_index(outputs.subspan(0, k));
  return {actions[i], std::clamp(outputs[i + k], 0.0, 1.0)};
}

// Forward/backward translate, left/right rotate in place; the parameter sets
// the speed (or per-step turn angle) of the move.
inline MotorCommand action_to_motors(const ActionChoice& c) {
  const double p = std::clamp(c.parameter, 0.0, 1.0);
  switch (c.action) {
    case Action::Forward: return {p, p};
    case Action::Backward: return {-p, -p};
    case Action::Left: return {-p, p};
    case Action::Right: return {p, -p};
  }
  return {0.0, 0.0};
}

// Two outputs in [0,1] mapped affinely onto wheel speeds in [-1,1].
inline MotorCommand classical_to_motors(std::span<const double> outputs) {
  contract_check(outputs.size() == 2, "classical_to_motors: needs exactly 2 outputs");
  return {2.0 * outputs[0] - 1.0, 2.0 * outputs[1] - 1.0};
}

// ---------------------------------------------------------------------------
// Input wiring
// ---------------------------------------------------------------------------

// Which slice of the sensor frame a controller sees. Full is the 17-vector
// [8 active IR, 8 passive IR, energy level].
enum class InputSelect { IrActive, IrPassive, Full };

inline int input_count(InputSelect s) { return s == InputSelect::Full ? 17 : 8; }

inline const char* to_string(InputSelect s) {
  switch (s) {
    case InputSelect::IrActive: return "ir_active";
    case InputSelect::IrPassive: return "ir_passive";
    case InputSelect::Full: return "full";
  }
  return "?";
}

inline void build_inputs(const SensorFrame& f, InputSelect s, std::vector<double>& out) {
  out.clear();
  switch (s) {
    case InputSelect::IrActive:
      out.assign(f.ir_active.begin(), f.ir_active.end());
      break;
    case InputSelect::IrPassive:
      out.assign(f.ir_passive.begin(), f.ir_passive.end());
      break;
    case InputSelect::Full:
      out.assign(f.ir_active.begin(), f.ir_active.end());
      out.insert(out.end(), f.ir_passive.begin(), f.ir_passive.end());
      out.push_back(f.energy_level);
      break;
  }
}

// ---------------------------------------------------------------------------
// Network-backed controllers
// ---------------------------------------------------------------------------

// Shared net-evaluation state for a controller: spec, weights, recurrent
// context and scratch buffers.
class NetPolicy {
public:
  NetPolicy(NetworkSpec spec, Genotype genotype, InputSelect inputs)
      : spec_(std::move(spec)), genotype_(std::move(genotype)), inputs_(inputs) {
    contract_check(static_cast<int>(genotype_.weights.size()) == weight_count(spec_),
                   "controller genotype length does not match its network");
    contract_check(spec_.n_inputs == input_count(inputs_),
                   "controller input slice does not match its network");
  }

  void reset() { state_.activations.assign(state_.activations.size(), 0.0); }

  std::span<const double> eval(const SensorFrame& frame) {
    build_inputs(frame, inputs_, in_buf_);
    out_buf_ = forward(spec_, genotype_, in_buf_, state_);
    return out_buf_;
  }

  const NetworkSpec& spec() const { return spec_; }

private:
  NetworkSpec spec_;
  Genotype genotype_;
  InputSelect inputs_;
  HiddenState state_;
  std::vector<double> in_buf_;
  std::vector<double> out_buf_;
};

class ClassicalController : public ControllerStepper {
public:
  ClassicalController(NetworkSpec spec, Genotype g, InputSelect inputs)
      : policy_(std::move(spec), std::move(g), inputs) {
    contract_check(policy_.spec().n_outputs == 2, "classical controller needs 2 outputs");
  }

  void reset() override { policy_.reset(); }

  StepDecision step(const SensorFrame& frame, RngStream&) override {
    return {classical_to_motors(policy_.eval(frame))};
  }

private:
  NetPolicy policy_;
};

class SymbolicController : public ControllerStepper {
public:
  SymbolicController(NetworkSpec spec, Genotype g, InputSelect inputs, ActionSet actions)
      : policy_(std::move(spec), std::move(g), inputs), actions_(std::move(actions)) {
    contract_check(policy_.spec().n_outputs == 2 * static_cast<int>(actions_.size()),
                   "symbolic controller needs 2 outputs per action");
  }

  void reset() override { policy_.reset(); }

  StepDecision step(const SensorFrame& frame, RngStream&) override {
    return {action_to_motors(decode_symbolic(policy_.eval(frame), actions_))};
  }

private:
  NetPolicy policy_;
  ActionSet actions_;
};

}  // namespace evodrive
