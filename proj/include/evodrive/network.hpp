#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "evodrive/common.hpp"

namespace evodrive {

// Fixed topology, evaluated from a flat weight vector. `recurrent` selects an
// Elman network: one hidden layer whose neurons also receive the previous
// step's hidden activations through a fully connected context block.
struct NetworkSpec {
  int n_inputs = 0;
  std::vector<int> hidden_sizes;
  int n_outputs = 0;
  bool recurrent = false;

  void validate() const {
    contract_check(n_inputs > 0 && n_outputs > 0, "network: sizes must be positive");
    for (int h : hidden_sizes) contract_check(h > 0, "network: hidden sizes must be positive");
    contract_check(!recurrent || hidden_sizes.size() == 1,
                   "network: recurrent requires exactly one hidden layer");
  }
};

// Weight layout, neuron-major with a trailing bias per neuron:
//   MLP:   [in->h1 ((n_in+1)*h1)] [h1->h2 ...] [last->out ((last+1)*n_out)]
//   Elman: [in->h ((n_in+1)*h)] [context h*h] [h->out ((h+1)*n_out)]
inline int weight_count(const NetworkSpec& spec) {
  spec.validate();
  if (spec.recurrent) {
    const int h = spec.hidden_sizes[0];
    return (spec.n_inputs + 1) * h + h * h + (h + 1) * spec.n_outputs;
  }
  int total = 0;
  int prev = spec.n_inputs;
  for (int h : spec.hidden_sizes) {
    total += (prev + 1) * h;
    prev = h;
  }
  total += (prev + 1) * spec.n_outputs;
  return total;
}

// Weights plus per-gene mutation step sizes, same length.
struct Genotype {
  std::vector<double> weights;
  std::vector<double> sigmas;

  int size() const { return static_cast<int>(weights.size()); }
};

struct HiddenState {
  std::vector<double> activations;  // zeroed at epoch start
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace detail {

// One fully connected layer with bias, logistic activation. Returns the
// advanced weight cursor.
inline std::size_t dense_layer(std::span<const double> w, std::size_t cursor,
                               std::span<const double> in, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) acc += w[cursor++] * in[i];
    acc += w[cursor++];  // bias
    out[j] = logistic(acc);
  }
  return cursor;
}

}  // namespace detail

// Layered propagation with logistic activations on every layer; outputs lie
// strictly in (0,1). For Elman networks `state` carries the previous hidden
// activations and is replaced by the new ones; MLPs leave it untouched.
inline std::vector<double> forward(const NetworkSpec& spec, const Genotype& genotype,
                                   std::span<const double> inputs, HiddenState& state) {
  spec.validate();
  contract_check(static_cast<int>(inputs.size()) == spec.n_inputs, "forward: input length mismatch");
  contract_check(static_cast<int>(genotype.weights.size()) == weight_count(spec),
                 "forward: genotype length mismatch");
  std::span<const double> w(genotype.weights);

  if (spec.recurrent) {
    const int h = spec.hidden_sizes[0];
    if (static_cast<int>(state.activations.size()) != h) state.activations.assign(h, 0.0);
    std::vector<double> hidden(h);
    std::size_t cursor = 0;
    for (int j = 0; j < h; ++j) {
      double acc = 0.0;
      for (int i = 0; i < spec.n_inputs; ++i) acc += w[cursor++] * inputs[i];
      acc += w[cursor++];  // bias
      for (int i = 0; i < h; ++i) acc += w[(spec.n_inputs + 1) * h + j * h + i] * state.activations[i];
      hidden[j] = logistic(acc);
    }
    cursor = static_cast<std::size_t>((spec.n_inputs + 1) * h + h * h);
    std::vector<double> out(spec.n_outputs);
    detail::dense_layer(w, cursor, hidden, out);
    state.activations = std::move(hidden);
    return out;
  }

  std::vector<double> current(inputs.begin(), inputs.end());
  std::size_t cursor = 0;
  for (int h : spec.hidden_sizes) {
    std::vector<double> next(h);
    cursor = detail::dense_layer(w, cursor, current, next);
    current = std::move(next);
  }
  std::vector<double> out(spec.n_outputs);
  detail::dense_layer(w, cursor, current, out);
  return out;
}

}  // namespace evodrive
