// Copyright 2026 The alphaspike Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Layered feedforward network of single-spike alpha neurons with trainable
// synchronisation pulses, and its event-driven forward pass.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "alphaspike/math.hpp"
#include "alphaspike/matrix.hpp"
#include "alphaspike/neuron.hpp"
#include "alphaspike/spike_time.hpp"

namespace alphaspike {

class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class PulseMode {
  kPerLayer,  // one pulse set per non-input layer
  kShared,    // a single pulse set feeding every non-input layer
};

struct PulseSet {
  std::vector<double> times;
  int attached_layer = -1;  // -1 when shared by every non-input layer

  friend bool operator==(const PulseSet&, const PulseSet&) = default;
};

/// Fully connected layer. Rows [0, n_in) hold neuron->neuron weights and rows
/// [n_in, n_in + n_pulses) the pulse->neuron weights; one column per neuron.
struct LayerSpec {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  Matrix weights;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkModel {
  std::vector<LayerSpec> layers;
  std::vector<PulseSet> pulses;
  PulseMode pulse_mode = PulseMode::kPerLayer;
  std::size_t n_pulses = 0;
  double tau = 1.0;
  double theta = 1.0;

  std::size_t n_inputs() const { return layers.front().n_in; }
  std::size_t n_outputs() const { return layers.back().n_out; }

  std::size_t PulseSetIndex(std::size_t layer) const {
    return pulse_mode == PulseMode::kShared ? 0 : layer;
  }
  const PulseSet& PulsesFor(std::size_t layer) const { return pulses[PulseSetIndex(layer)]; }

  std::vector<std::size_t> LayerSizes() const {
    std::vector<std::size_t> sizes{n_inputs()};
    for (const LayerSpec& l : layers) sizes.push_back(l.n_out);
    return sizes;
  }

  void Validate() const {
    if (layers.empty()) throw InvalidSpec("network has no layers");
    if (!(tau > 0.0)) throw InvalidSpec("decay constant must be positive");
    if (!(theta > 0.0)) throw InvalidSpec("fire threshold must be positive");
    const std::size_t expected_sets = pulse_mode == PulseMode::kShared ? 1 : layers.size();
    if (pulses.size() != expected_sets) throw InvalidSpec("wrong number of pulse sets");
    for (const PulseSet& p : pulses) {
      if (p.times.size() != n_pulses) throw InvalidSpec("pulse set size mismatch");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const LayerSpec& layer = layers[l];
      if (layer.n_in == 0 || layer.n_out == 0) throw InvalidSpec("layer sizes must be positive");
      if (l > 0 && layer.n_in != layers[l - 1].n_out) {
        throw InvalidSpec("layer " + std::to_string(l) + " input size mismatch");
      }
      if (layer.weights.rows() != layer.n_in + n_pulses || layer.weights.cols() != layer.n_out) {
        throw InvalidSpec("layer " + std::to_string(l) + " weight shape mismatch");
      }
    }
  }

  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

struct ModelSpec {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  std::size_t n_pulses = 1;
  double nonpulse_init_multiplier = 0.0;
  double pulse_init_multiplier = 0.0;
  double tau = 1.0;
  double theta = 1.0;
  PulseMode pulse_mode = PulseMode::kPerLayer;
};

/// Pulse times evenly spread over the open interval (0, 1): k / (n + 1).
inline std::vector<double> EvenPulseTimes(std::size_t n_pulses) {
  std::vector<double> times(n_pulses);
  for (std::size_t k = 0; k < n_pulses; ++k) {
    times[k] = static_cast<double>(k + 1) / static_cast<double>(n_pulses + 1);
  }
  return times;
}

/// Glorot-normal weights with a shifted mean: sigma = sqrt(2 / (fan_in + fan_out)),
/// mean = multiplier * sigma, separate multipliers for pulse and non-pulse rows.
inline NetworkModel InitModel(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.layer_sizes.size() < 2) throw InvalidSpec("need at least input and output layers");
  for (std::size_t s : spec.layer_sizes) {
    if (s == 0) throw InvalidSpec("layer sizes must be positive");
  }
  if (!(spec.tau > 0.0) || !(spec.theta > 0.0)) {
    throw InvalidSpec("decay constant and fire threshold must be positive");
  }

  NetworkModel model;
  model.tau = spec.tau;
  model.theta = spec.theta;
  model.n_pulses = spec.n_pulses;
  model.pulse_mode = spec.pulse_mode;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    LayerSpec layer;
    layer.n_in = spec.layer_sizes[l];
    layer.n_out = spec.layer_sizes[l + 1];
    layer.weights = Matrix(layer.n_in + spec.n_pulses, layer.n_out);
    const double fan_in = static_cast<double>(layer.n_in + spec.n_pulses);
    const double sigma = std::sqrt(2.0 / (fan_in + static_cast<double>(layer.n_out)));
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      const double multiplier =
          r < layer.n_in ? spec.nonpulse_init_multiplier : spec.pulse_init_multiplier;
      for (double& w : layer.weights.row(r)) {
        w = standard_normal(rng) * sigma + multiplier * sigma;
      }
    }
    model.layers.push_back(std::move(layer));
  }

  if (spec.pulse_mode == PulseMode::kShared) {
    model.pulses.push_back({EvenPulseTimes(spec.n_pulses), -1});
  } else {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      model.pulses.push_back({EvenPulseTimes(spec.n_pulses), static_cast<int>(l)});
    }
  }
  return model;
}

/// Solver state of one non-input neuron. Its causal set is the first
/// `n_causal` entries of the layer's sorted event order.
struct NeuronState {
  double t_out = kNever;
  double a = 0.0;
  double b = 0.0;
  double w_lambert = 0.0;
  std::uint32_t n_causal = 0;
};

struct LayerTrace {
  std::vector<double> presyn_times;   // previous layer's spikes, then this layer's pulses
  std::vector<std::uint32_t> order;   // firing presynaptic indices, ascending by time
  std::vector<double> exp_tau;        // e^{tau t} aligned with `order`
  std::vector<NeuronState> neurons;

  std::span<const std::uint32_t> CausalIndices(std::size_t neuron) const {
    return std::span<const std::uint32_t>(order).first(neurons[neuron].n_causal);
  }
};

struct ForwardTrace {
  std::vector<std::vector<double>> spike_times;  // [0] inputs, [l + 1] outputs of layer l
  std::vector<LayerTrace> layers;

  std::span<const double> inputs() const { return spike_times.front(); }
  std::span<const double> outputs() const { return spike_times.back(); }
};

namespace detail {

// Event-driven solve of every neuron of one layer. Events are visited once in
// time order and all still-silent neurons fold them in together, so weight
// rows are read contiguously. The Lambert W evaluation is skipped when the
// potential provably stays below threshold until the next event; the
// accepted candidate is exactly the one the per-neuron solver produces.
inline void SolveLayer(const LayerSpec& layer, double tau, double theta, LayerTrace& lt) {
  struct Work {
    double a = 0.0;
    double b = 0.0;
    double abs_a = 0.0;
    double candidate = kNever;
    double w = 0.0;
    std::uint32_t n_causal = 0;
  };
  const std::size_t n_events = lt.order.size();
  const std::size_t n_out = layer.n_out;
  std::vector<Work> work(n_out);
  std::vector<std::uint32_t> active(n_out);
  std::iota(active.begin(), active.end(), 0u);

  const double inv_tau = 1.0 / tau;
  for (std::size_t k = 0; k < n_events && !active.empty(); ++k) {
    const double t_k = lt.presyn_times[lt.order[k]];
    const double e_k = lt.exp_tau[k];
    const bool has_next = k + 1 < n_events;
    const double t_next = has_next ? lt.presyn_times[lt.order[k + 1]] : kNever;
    const double inv_e_next = has_next ? std::exp(-tau * t_next) : 0.0;
    const std::span<const double> row = layer.weights.row(lt.order[k]);

    for (std::size_t idx = 0; idx < active.size();) {
      const std::uint32_t n = active[idx];
      Work& s = work[n];
      if (s.candidate < t_k) {
        active[idx] = active.back();
        active.pop_back();
        continue;
      }
      ++idx;
      ++s.n_causal;
      const double w_exp = row[n] * e_k;
      s.a += w_exp;
      s.b += w_exp * t_k;
      s.abs_a += std::abs(w_exp);
      s.candidate = kNever;
      if (!(s.a > 0.0)) continue;

      bool may_cross = false;
      const double scale = 1e-9 * s.abs_a * (1.0 + std::abs(t_k) + (has_next ? t_next : 0.0));
      if (has_next) {
        const double v_next = inv_e_next * (s.a * t_next - s.b);
        may_cross = v_next >= theta * (1.0 - 1e-7) - inv_e_next * scale;
      }
      if (!may_cross) {
        // A times the peak location B/A + 1/tau.
        const double peak_scaled = s.b + s.a * inv_tau;
        may_cross = peak_scaled >= s.a * t_k - scale &&
                    (!has_next || peak_scaled <= s.a * t_next + scale);
      }
      if (!may_cross) continue;

      double w = 0.0;
      const double t = RisingCrossing(s.a, s.b, tau, theta, t_k, &w);
      if (!Fires(t)) continue;
      s.candidate = t;
      s.w = w;
    }
  }

  lt.neurons.resize(n_out);
  for (std::size_t n = 0; n < n_out; ++n) {
    const Work& s = work[n];
    NeuronState& ns = lt.neurons[n];
    ns.t_out = s.candidate;
    ns.a = s.a;
    ns.b = s.b;
    ns.w_lambert = Fires(s.candidate) ? s.w : 0.0;
    ns.n_causal = s.n_causal;
  }
}

}  // namespace detail

/// Runs the whole network on one example, reusing `trace`'s buffers.
inline void Forward(const NetworkModel& model, std::span<const double> input_times,
                    ForwardTrace& trace) {
  if (input_times.size() != model.n_inputs()) {
    throw InvalidSpec("expected " + std::to_string(model.n_inputs()) + " inputs, got " +
                      std::to_string(input_times.size()));
  }
  const std::size_t n_layers = model.layers.size();
  trace.spike_times.resize(n_layers + 1);
  trace.layers.resize(n_layers);
  trace.spike_times[0].assign(input_times.begin(), input_times.end());

  for (std::size_t l = 0; l < n_layers; ++l) {
    const LayerSpec& layer = model.layers[l];
    LayerTrace& lt = trace.layers[l];
    const std::vector<double>& prev = trace.spike_times[l];
    const PulseSet& pulses = model.PulsesFor(l);

    lt.presyn_times.assign(prev.begin(), prev.end());
    lt.presyn_times.insert(lt.presyn_times.end(), pulses.times.begin(), pulses.times.end());

    lt.order.clear();
    for (std::uint32_t i = 0; i < lt.presyn_times.size(); ++i) {
      if (Fires(lt.presyn_times[i])) lt.order.push_back(i);
    }
    std::stable_sort(lt.order.begin(), lt.order.end(), [&](std::uint32_t x, std::uint32_t y) {
      return lt.presyn_times[x] < lt.presyn_times[y];
    });
    lt.exp_tau.resize(lt.order.size());
    for (std::size_t k = 0; k < lt.order.size(); ++k) {
      lt.exp_tau[k] = std::exp(model.tau * lt.presyn_times[lt.order[k]]);
    }

    detail::SolveLayer(layer, model.tau, model.theta, lt);

    std::vector<double>& out = trace.spike_times[l + 1];
    out.resize(layer.n_out);
    for (std::size_t n = 0; n < layer.n_out; ++n) out[n] = lt.neurons[n].t_out;
  }
}

inline ForwardTrace Forward(const NetworkModel& model, std::span<const double> input_times) {
  ForwardTrace trace;
  Forward(model, input_times, trace);
  return trace;
}

/// Index of the earliest output spike; ties go to the lowest index.
/// Returns nullopt when every output is silent.
inline std::optional<std::size_t> Predict(std::span<const double> output_times) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (!Fires(output_times[i])) continue;
    if (!best || output_times[i] < output_times[*best]) best = i;
  }
  return best;
}

inline std::optional<std::size_t> Predict(const ForwardTrace& trace) {
  return Predict(trace.outputs());
}

}  // namespace alphaspike
