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

// Softmax cross-entropy on negated output spike times, exact backpropagation
// through spike times, and Adam.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "alphaspike/datasets.hpp"
#include "alphaspike/matrix.hpp"
#include "alphaspike/network.hpp"
#include "alphaspike/neuron.hpp"
#include "alphaspike/spike_time.hpp"

namespace alphaspike {

/// Hyperparameters plus run control.
struct TrainConfig {
  std::size_t batch_size = 1;
  double clip_derivative = 100.0;
  double decay_constant = 1.0;
  double fire_threshold = 1.0;
  double learning_rate = 0.001;
  double learning_rate_pulses = 0.001;
  std::vector<std::size_t> n_hidden{2};
  std::size_t n_pulses = 1;
  double nonpulse_init_multiplier = 0.0;
  double penalty_no_spike = 1.0;
  double pulse_init_multiplier = 0.0;

  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  bool update_only_on_error = false;
  PulseMode pulse_mode = PulseMode::kShared;

  /// Column used for the Boolean and circle tasks.
  static TrainConfig BooleanDefaults() {
    TrainConfig cfg;
    cfg.update_only_on_error = true;
    return cfg;
  }

  /// Values selected for MNIST.
  static TrainConfig MnistChosen() {
    TrainConfig cfg;
    cfg.batch_size = 5;
    cfg.clip_derivative = 539.7;
    cfg.decay_constant = 0.181769;
    cfg.fire_threshold = 1.16732;
    cfg.learning_rate = 2.01864e-4;
    cfg.learning_rate_pulses = 5.95375e-2;
    cfg.n_hidden = {340};
    cfg.n_pulses = 10;
    cfg.nonpulse_init_multiplier = -0.275419;
    cfg.penalty_no_spike = 48.3748;
    cfg.pulse_init_multiplier = 7.83912;
    cfg.epochs = 20;
    cfg.pulse_mode = PulseMode::kPerLayer;
    return cfg;
  }

  /// Basic sanity, and optionally the hyperparameter search ranges.
  void Validate(bool check_search_ranges = false) const {
    if (batch_size == 0) throw InvalidSpec("batch_size must be at least 1");
    if (!(decay_constant > 0.0)) throw InvalidSpec("decay_constant must be positive");
    if (!(fire_threshold > 0.0)) throw InvalidSpec("fire_threshold must be positive");
    if (!(clip_derivative > 0.0)) throw InvalidSpec("clip_derivative must be positive");
    if (!(learning_rate > 0.0) || !(learning_rate_pulses > 0.0)) {
      throw InvalidSpec("learning rates must be positive");
    }
    if (!(penalty_no_spike >= 0.0)) throw InvalidSpec("penalty_no_spike must be non-negative");
    for (std::size_t h : n_hidden) {
      if (h == 0) throw InvalidSpec("hidden layer sizes must be positive");
    }
    if (!check_search_ranges) return;
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    if (!in(static_cast<double>(batch_size), 1, 1000)) throw InvalidSpec("batch_size out of range");
    if (!in(clip_derivative, 1, 1000)) throw InvalidSpec("clip_derivative out of range");
    if (!in(decay_constant, 0.1, 2)) throw InvalidSpec("decay_constant out of range");
    if (!in(fire_threshold, 0.1, 1.5)) throw InvalidSpec("fire_threshold out of range");
    if (!in(learning_rate, 1e-5, 1)) throw InvalidSpec("learning_rate out of range");
    if (!in(learning_rate_pulses, 1e-5, 1)) throw InvalidSpec("learning_rate_pulses out of range");
    if (n_hidden.size() > 4) throw InvalidSpec("too many hidden layers");
    for (std::size_t h : n_hidden) {
      if (!in(static_cast<double>(h), 2, 1000)) throw InvalidSpec("n_hidden entry out of range");
    }
    if (n_pulses > 10) throw InvalidSpec("n_pulses out of range");
    if (!in(nonpulse_init_multiplier, -10, 10) || !in(pulse_init_multiplier, -10, 10)) {
      throw InvalidSpec("init multiplier out of range");
    }
    if (!in(penalty_no_spike, 0, 100)) throw InvalidSpec("penalty_no_spike out of range");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline ModelSpec ModelSpecFor(const TrainConfig& cfg, std::size_t n_inputs,
                              std::size_t n_outputs) {
  ModelSpec spec;
  spec.layer_sizes.push_back(n_inputs);
  spec.layer_sizes.insert(spec.layer_sizes.end(), cfg.n_hidden.begin(), cfg.n_hidden.end());
  spec.layer_sizes.push_back(n_outputs);
  spec.n_pulses = cfg.n_pulses;
  spec.nonpulse_init_multiplier = cfg.nonpulse_init_multiplier;
  spec.pulse_init_multiplier = cfg.pulse_init_multiplier;
  spec.tau = cfg.decay_constant;
  spec.theta = cfg.fire_threshold;
  spec.pulse_mode = cfg.pulse_mode;
  return spec;
}

// ---------------------------------------------------------------------------
// Loss.

/// Reported loss when the target output never fires: -ln(1e-8).
inline constexpr double kSilentTargetLoss = 18.420680743952367;

struct LossReport {
  double loss = 0.0;
  std::vector<double> probabilities;  // 0 for silent outputs
  bool correct = false;
  std::vector<double> d_outputs;      // dL/d o_k
};

/// Cross-entropy of softmax(-o) over the outputs that fire. A silent target
/// gets the sentinel loss and no softmax gradient; the no-spike penalty is
/// what pulls it back.
inline LossReport Loss(std::span<const double> output_times, std::size_t target) {
  if (target >= output_times.size()) throw std::out_of_range("target class out of range");
  LossReport r;
  const std::size_t n = output_times.size();
  r.probabilities.assign(n, 0.0);
  r.d_outputs.assign(n, 0.0);
  const auto predicted = Predict(output_times);
  r.correct = predicted && *predicted == target;
  if (!Fires(output_times[target])) {
    r.loss = kSilentTargetLoss;
    return r;
  }

  const double o_min = output_times[*predicted];
  double denom = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (Fires(output_times[k])) {
      r.probabilities[k] = std::exp(o_min - output_times[k]);
      denom += r.probabilities[k];
    }
  }
  for (double& p : r.probabilities) p /= denom;
  // L = o_t + ln sum_k e^{-o_k}, so dL/do_k = [k == t] - p_k.
  r.loss = (output_times[target] - o_min) + std::log(denom);
  for (std::size_t k = 0; k < n; ++k) {
    if (Fires(output_times[k])) r.d_outputs[k] = (k == target ? 1.0 : 0.0) - r.probabilities[k];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Gradients.

struct GradientTape {
  std::vector<Matrix> d_weights;                  // one per layer
  std::vector<std::vector<double>> d_pulse_times;  // one per pulse set
  std::vector<double> d_inputs;

  static GradientTape ZerosLike(const NetworkModel& model) {
    GradientTape tape;
    for (const LayerSpec& l : model.layers) {
      tape.d_weights.emplace_back(l.weights.rows(), l.weights.cols());
    }
    for (const PulseSet& p : model.pulses) tape.d_pulse_times.emplace_back(p.times.size(), 0.0);
    tape.d_inputs.assign(model.n_inputs(), 0.0);
    return tape;
  }

  void Zero() {
    for (Matrix& m : d_weights) m.Fill(0.0);
    for (auto& v : d_pulse_times) std::fill(v.begin(), v.end(), 0.0);
    std::fill(d_inputs.begin(), d_inputs.end(), 0.0);
  }

  void Add(const GradientTape& other) {
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
      auto dst = d_weights[l].values();
      auto src = other.d_weights[l].values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    for (std::size_t s = 0; s < d_pulse_times.size(); ++s) {
      for (std::size_t i = 0; i < d_pulse_times[s].size(); ++i) {
        d_pulse_times[s][i] += other.d_pulse_times[s][i];
      }
    }
    for (std::size_t i = 0; i < d_inputs.size(); ++i) d_inputs[i] += other.d_inputs[i];
  }

  void Scale(double factor) {
    for (Matrix& m : d_weights) {
      for (double& v : m.values()) v *= factor;
    }
    for (auto& v : d_pulse_times) {
      for (double& x : v) x *= factor;
    }
    for (double& x : d_inputs) x *= factor;
  }
};

struct BackwardOptions {
  double clip_derivative = 100.0;
  double penalty_no_spike = 0.0;
};

/// Chain rule from output demands dL/do down to weights, pulse times and
/// inputs; accumulates into `tape`. Every local spike-time partial is clipped
/// before it is multiplied in. Silent neurons get -penalty on every
/// presynaptic weight.
inline void BackwardFromOutputs(const NetworkModel& model, const ForwardTrace& trace,
                                std::span<const double> d_outputs, const BackwardOptions& opt,
                                GradientTape& tape) {
  const double tau = model.tau;
  const double clip = opt.clip_derivative;
  std::vector<double> demand(d_outputs.begin(), d_outputs.end());
  std::vector<double> below;

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const LayerSpec& layer = model.layers[l];
    const LayerTrace& lt = trace.layers[l];
    Matrix& dw = tape.d_weights[l];
    std::vector<double>& d_pulses = tape.d_pulse_times[model.PulseSetIndex(l)];
    below.assign(layer.n_in, 0.0);

    for (std::size_t n = 0; n < layer.n_out; ++n) {
      const NeuronState& ns = lt.neurons[n];
      if (!Fires(ns.t_out)) {
        if (opt.penalty_no_spike != 0.0) {
          for (std::size_t r = 0; r < dw.rows(); ++r) dw(r, n) -= opt.penalty_no_spike;
        }
        continue;
      }
      const double g = demand[n];
      if (g == 0.0) continue;
      for (std::uint32_t k = 0; k < ns.n_causal; ++k) {
        const std::uint32_t i = lt.order[k];
        const double t_i = lt.presyn_times[i];
        const double e_i = lt.exp_tau[k];
        const double w_i = layer.weights(i, n);
        const double d_w = WeightPartial(ns.a, ns.b, ns.w_lambert, tau, t_i, e_i).value;
        const double d_t = TimePartial(ns.a, ns.b, ns.w_lambert, tau, t_i, w_i, e_i).value;
        dw(i, n) += g * Clip(d_w, clip);
        const double dt_term = g * Clip(d_t, clip);
        if (i < layer.n_in) {
          below[i] += dt_term;
        } else {
          d_pulses[i - layer.n_in] += dt_term;
        }
      }
    }
    demand.swap(below);
  }
  for (std::size_t i = 0; i < demand.size(); ++i) tape.d_inputs[i] += demand[i];
}

/// Gradient of the loss for one example, including the no-spike penalty.
inline GradientTape Backward(const NetworkModel& model, const ForwardTrace& trace,
                             std::size_t target, const TrainConfig& cfg) {
  GradientTape tape = GradientTape::ZerosLike(model);
  const LossReport loss = Loss(trace.outputs(), target);
  BackwardFromOutputs(model, trace, loss.d_outputs,
                      {cfg.clip_derivative, cfg.penalty_no_spike}, tape);
  return tape;
}

// ---------------------------------------------------------------------------
// Adam.

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct AdamState {
  std::vector<Matrix> m_weights;
  std::vector<Matrix> v_weights;
  std::vector<std::vector<double>> m_pulses;
  std::vector<std::vector<double>> v_pulses;
  std::uint64_t step = 0;

  static AdamState For(const NetworkModel& model) {
    AdamState s;
    for (const LayerSpec& l : model.layers) {
      s.m_weights.emplace_back(l.weights.rows(), l.weights.cols());
      s.v_weights.emplace_back(l.weights.rows(), l.weights.cols());
    }
    for (const PulseSet& p : model.pulses) {
      s.m_pulses.emplace_back(p.times.size(), 0.0);
      s.v_pulses.emplace_back(p.times.size(), 0.0);
    }
    return s;
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

namespace detail {

inline void AdamUpdate(std::span<double> params, std::span<const double> grads,
                       std::span<double> m, std::span<double> v, double lr, double bias1,
                       double bias2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g;
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
}

}  // namespace detail

/// One Adam step. Weights use learning_rate, pulse times learning_rate_pulses;
/// pulse times are kept non-negative.
inline void AdamStep(NetworkModel& model, const GradientTape& grad, AdamState& state,
                     double learning_rate, double learning_rate_pulses) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(kAdamBeta1, t);
  const double bias2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    detail::AdamUpdate(model.layers[l].weights.values(), grad.d_weights[l].values(),
                       state.m_weights[l].values(), state.v_weights[l].values(), learning_rate,
                       bias1, bias2);
  }
  for (std::size_t s = 0; s < model.pulses.size(); ++s) {
    auto& times = model.pulses[s].times;
    detail::AdamUpdate(times, grad.d_pulse_times[s], state.m_pulses[s], state.v_pulses[s],
                       learning_rate_pulses, bias1, bias2);
    for (double& x : times) x = std::max(x, 0.0);
  }
}

// ---------------------------------------------------------------------------
// Epoch loop and metrics.

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split = "train";
  std::size_t n_examples = 0;
  double accuracy = 0.0;
  double mean_loss = 0.0;
  double mean_hidden_spike_time = std::numeric_limits<double>::quiet_NaN();
  double mean_first_output_time = std::numeric_limits<double>::quiet_NaN();
  double fraction_output_before_mean_hidden = std::numeric_limits<double>::quiet_NaN();
};

/// Per-example numbers that the epoch metrics are built from.
struct ExampleStats {
  double loss = 0.0;
  bool correct = false;
  double hidden_sum = 0.0;
  std::size_t hidden_count = 0;
  double first_output = kNever;
};

inline ExampleStats StatsFor(const ForwardTrace& trace, const LossReport& loss) {
  ExampleStats s;
  s.loss = loss.loss;
  s.correct = loss.correct;
  for (std::size_t l = 1; l + 1 < trace.spike_times.size(); ++l) {
    for (double t : trace.spike_times[l]) {
      if (Fires(t)) {
        s.hidden_sum += t;
        ++s.hidden_count;
      }
    }
  }
  const auto out = trace.outputs();
  s.first_output = out.empty() ? kNever : *std::min_element(out.begin(), out.end());
  return s;
}

/// Pools per-example stats in order, so the result does not depend on how
/// the examples were spread across threads.
inline EpochMetrics Summarize(std::span<const ExampleStats> stats, std::size_t epoch,
                              std::string split) {
  EpochMetrics m;
  m.epoch = epoch;
  m.split = std::move(split);
  m.n_examples = stats.size();
  if (stats.empty()) return m;
  double loss_sum = 0.0, hidden_sum = 0.0, first_sum = 0.0;
  std::size_t correct = 0, hidden_count = 0, first_count = 0, fast = 0, fast_den = 0;
  for (const ExampleStats& s : stats) {
    loss_sum += s.loss;
    correct += s.correct ? 1 : 0;
    hidden_sum += s.hidden_sum;
    hidden_count += s.hidden_count;
    if (Fires(s.first_output)) {
      first_sum += s.first_output;
      ++first_count;
      if (s.hidden_count > 0) {
        ++fast_den;
        if (s.first_output < s.hidden_sum / static_cast<double>(s.hidden_count)) ++fast;
      }
    }
  }
  const double n = static_cast<double>(stats.size());
  m.accuracy = static_cast<double>(correct) / n;
  m.mean_loss = loss_sum / n;
  if (hidden_count > 0) m.mean_hidden_spike_time = hidden_sum / static_cast<double>(hidden_count);
  if (first_count > 0) m.mean_first_output_time = first_sum / static_cast<double>(first_count);
  if (fast_den > 0) {
    m.fraction_output_before_mean_hidden = static_cast<double>(fast) / static_cast<double>(fast_den);
  }
  return m;
}

inline constexpr const char* kMetricsHeader =
    "epoch,split,accuracy,mean_loss,mean_hidden_spike_time,mean_first_output_time,"
    "fraction_output_before_mean_hidden";

namespace detail {

inline std::string FormatMetric(double v) {
  if (std::isnan(v)) return "nan";
  return FormatSpikeTime(v);
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads, striding by worker.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i, w);
    });
  }
  for (std::size_t i = 0; i < n; i += workers) fn(i, 0);
}

}  // namespace detail

inline void WriteMetricsRow(std::ostream& out, const EpochMetrics& m) {
  out << m.epoch << ',' << m.split << ',' << detail::FormatMetric(m.accuracy) << ','
      << detail::FormatMetric(m.mean_loss) << ',' << detail::FormatMetric(m.mean_hidden_spike_time)
      << ',' << detail::FormatMetric(m.mean_first_output_time) << ','
      << detail::FormatMetric(m.fraction_output_before_mean_hidden) << '\n';
}

/// Forward-only pass over a dataset.
inline EpochMetrics Evaluate(const NetworkModel& model, std::span<const Example> data,
                             std::size_t workers = 1, std::size_t epoch = 0,
                             std::string split = "eval") {
  std::vector<ExampleStats> stats(data.size());
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(workers, data.size()));
  std::vector<ForwardTrace> traces(n_workers);
  detail::ParallelFor(data.size(), n_workers, [&](std::size_t i, std::size_t w) {
    Forward(model, data[i].input_times, traces[w]);
    stats[i] = StatsFor(traces[w], Loss(traces[w].outputs(), data[i].label));
  });
  return Summarize(stats, epoch, std::move(split));
}

/// Shuffled visiting order for one epoch; depends only on (seed, epoch).
inline std::vector<std::size_t> EpochOrder(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

/// Mini-batch trainer. The batch gradient is the mean of per-example tapes,
/// summed in example order, so results are identical for any worker count.
class Trainer {
 public:
  Trainer(NetworkModel& model, AdamState& state, const TrainConfig& cfg, std::size_t workers = 1)
      : model_(model), state_(state), cfg_(cfg), workers_(std::max<std::size_t>(1, workers)) {
    const std::size_t slots = cfg_.batch_size;
    traces_.resize(slots);
    tapes_.assign(slots, GradientTape::ZerosLike(model_));
    used_.assign(slots, false);
    batch_grad_ = GradientTape::ZerosLike(model_);
  }

  EpochMetrics TrainEpoch(std::span<const Example> data, std::size_t epoch) {
    if (data.empty()) throw std::invalid_argument("training set is empty");
    const std::vector<std::size_t> order = EpochOrder(data.size(), cfg_.seed, epoch);
    std::vector<ExampleStats> stats(data.size());
    const BackwardOptions opt{cfg_.clip_derivative, cfg_.penalty_no_spike};

    for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
      const std::size_t count = std::min(cfg_.batch_size, order.size() - start);
      detail::ParallelFor(count, workers_, [&](std::size_t slot, std::size_t) {
        const Example& ex = data[order[start + slot]];
        ForwardTrace& trace = traces_[slot];
        Forward(model_, ex.input_times, trace);
        const LossReport loss = Loss(trace.outputs(), ex.label);
        stats[start + slot] = StatsFor(trace, loss);
        used_[slot] = !(cfg_.update_only_on_error && loss.correct);
        if (!used_[slot]) return;
        tapes_[slot].Zero();
        BackwardFromOutputs(model_, trace, loss.d_outputs, opt, tapes_[slot]);
      });

      bool any = false;
      batch_grad_.Zero();
      for (std::size_t slot = 0; slot < count; ++slot) {
        if (!used_[slot]) continue;
        batch_grad_.Add(tapes_[slot]);
        any = true;
      }
      if (!any && cfg_.update_only_on_error) continue;
      batch_grad_.Scale(1.0 / static_cast<double>(count));
      AdamStep(model_, batch_grad_, state_, cfg_.learning_rate, cfg_.learning_rate_pulses);
    }
    return Summarize(stats, epoch, "train");
  }

 private:
  NetworkModel& model_;
  AdamState& state_;
  TrainConfig cfg_;
  std::size_t workers_;
  std::vector<ForwardTrace> traces_;
  std::vector<GradientTape> tapes_;
  std::vector<char> used_;
  GradientTape batch_grad_;
};

}  // namespace alphaspike
