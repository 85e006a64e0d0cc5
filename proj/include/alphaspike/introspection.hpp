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

// Diagnostics: dense membrane traces (also the brute-force oracle for the
// closed-form solver), spike rasters, the slow/fast regime label and input
// optimisation toward a chosen class.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "alphaspike/network.hpp"
#include "alphaspike/neuron.hpp"
#include "alphaspike/spike_time.hpp"
#include "alphaspike/training.hpp"

namespace alphaspike {

struct TraceGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  std::vector<double> samples;  // potential at t_start + k dt

  static std::size_t SampleCount(double t_start, double t_end, double dt) {
    return static_cast<std::size_t>(std::ceil((t_end - t_start) / dt)) + 1;
  }
  double TimeAt(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
};

struct DenseResult {
  TraceGrid grid;
  double first_crossing = kNever;
};

/// Samples the membrane potential on a uniform grid and reports the first
/// sample where it goes from below threshold to at or above it.
///
/// With `stop_early` the scan ends once it is past the last event with the
/// potential falling and below threshold: from there on the potential has
/// the form (a t - b) e^{-tau t}, which cannot come back up to theta.
inline DenseResult SimulateDense(std::span<const SpikeEvent> events, double tau, double theta,
                                 double t_start, double t_end, double dt,
                                 bool stop_early = false) {
  if (!(dt > 0.0) || !(t_end >= t_start)) throw std::invalid_argument("bad dense grid");
  std::vector<SpikeEvent> sorted;
  for (const SpikeEvent& e : events) {
    if (Fires(e.time)) sorted.push_back(e);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SpikeEvent& x, const SpikeEvent& y) { return x.time < y.time; });
  const double last_event = sorted.empty() ? t_start : sorted.back().time;

  DenseResult res;
  res.grid.t_start = t_start;
  res.grid.t_end = t_end;
  res.grid.dt = dt;
  const std::size_t n = TraceGrid::SampleCount(t_start, t_end, dt);
  res.grid.samples.reserve(stop_early ? std::min<std::size_t>(n, 1u << 16) : n);

  // Sum of kernels arrived so far, each scaled by e^{tau (t_i - t_start)} so
  // that one exponential per sample suffices: V = e^{-tau (t - t_start)} (alpha t - beta).
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t next = 0;
  bool below = true;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = res.grid.TimeAt(k);
    while (next < sorted.size() && sorted[next].time <= t) {
      const double c = sorted[next].weight * std::exp(tau * (sorted[next].time - t_start));
      alpha += c;
      beta += c * sorted[next].time;
      ++next;
    }
    const double v = std::exp(-tau * (t - t_start)) * (alpha * t - beta);
    res.grid.samples.push_back(v);
    if (v >= theta) {
      if (below && !Fires(res.first_crossing)) {
        res.first_crossing = t;
        if (stop_early) break;
      }
      below = false;
    } else {
      below = true;
      // With every event in, the slope's sign follows alpha - tau (alpha t - beta),
      // which changes at most once; falling below threshold means it is over.
      if (stop_early && next == sorted.size() && t > last_event &&
          alpha - tau * (alpha * t - beta) < 0.0) {
        break;
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Rasters.

struct RasterRecord {
  int layer = 0;           // index into ForwardTrace::spike_times; -1 for shared pulses
  std::size_t neuron = 0;  // neuron index, or pulse index when is_pulse
  bool is_pulse = false;
  double time = 0.0;

  friend bool operator==(const RasterRecord&, const RasterRecord&) = default;
};

/// One record per spike, sorted by time. Pulses are listed with the layer
/// they feed. Input spikes are left out unless asked for.
inline std::vector<RasterRecord> ExportRaster(const NetworkModel& model, const ForwardTrace& trace,
                                              bool include_inputs = false) {
  std::vector<RasterRecord> records;
  for (std::size_t l = include_inputs ? 0 : 1; l < trace.spike_times.size(); ++l) {
    for (std::size_t n = 0; n < trace.spike_times[l].size(); ++n) {
      const double t = trace.spike_times[l][n];
      if (Fires(t)) records.push_back({static_cast<int>(l), n, false, t});
    }
  }
  for (const PulseSet& p : model.pulses) {
    const int layer = p.attached_layer < 0 ? -1 : p.attached_layer + 1;
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      records.push_back({layer, k, true, p.times[k]});
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const RasterRecord& a, const RasterRecord& b) { return a.time < b.time; });
  return records;
}

inline void WriteRasterCsv(std::ostream& out, std::span<const RasterRecord> records) {
  out << "layer,neuron,is_pulse,time\n";
  for (const RasterRecord& r : records) {
    out << r.layer << ',' << r.neuron << ',' << (r.is_pulse ? 1 : 0) << ','
        << FormatSpikeTime(r.time) << '\n';
  }
}

/// Columns: t, then one potential column per trace (all on the same grid).
inline void WriteTraceCsv(std::ostream& out, std::span<const TraceGrid> traces) {
  if (traces.empty()) return;
  out << 't';
  for (std::size_t i = 0; i < traces.size(); ++i) out << ",v" << i;
  out << '\n';
  for (std::size_t k = 0; k < traces.front().samples.size(); ++k) {
    out << FormatSpikeTime(traces.front().TimeAt(k));
    for (const TraceGrid& g : traces) out << ',' << FormatSpikeTime(g.samples[k]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Regime.

enum class Regime { kSlow, kFast };

/// Fast when the first output spike precedes the mean hidden spike, strictly.
inline Regime RegimeIndicator(double mean_first_output_time, double mean_hidden_spike_time) {
  return mean_first_output_time < mean_hidden_spike_time ? Regime::kFast : Regime::kSlow;
}

inline Regime RegimeIndicator(const EpochMetrics& m) {
  return RegimeIndicator(m.mean_first_output_time, m.mean_hidden_spike_time);
}

inline const char* RegimeName(Regime r) { return r == Regime::kFast ? "fast" : "slow"; }

// ---------------------------------------------------------------------------
// Input optimisation ("dreaming").

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DreamConfig {
  std::size_t target_class = 0;
  double learning_rate = 0.1;
  std::size_t stop_streak = 10;
  std::size_t max_iterations = 10000;
  double clip_derivative = 100.0;
  std::vector<double> start_image;  // empty: every input at t = 0
};

struct DreamResult {
  std::vector<double> image;
  std::size_t iterations = 0;
};

/// Gradient descent on the input spike times for the softmax cross-entropy
/// of the target class. Times stay non-negative. Returns once the target has
/// been predicted `stop_streak` times in a row.
inline DreamResult Dream(const NetworkModel& model, const DreamConfig& cfg) {
  if (cfg.target_class >= model.n_outputs()) throw std::out_of_range("dream target out of range");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("dream learning rate must be positive");
  DreamResult res;
  res.image = cfg.start_image.empty() ? std::vector<double>(model.n_inputs(), 0.0) : cfg.start_image;
  if (res.image.size() != model.n_inputs()) throw std::invalid_argument("start image size mismatch");

  ForwardTrace trace;
  GradientTape tape = GradientTape::ZerosLike(model);
  std::size_t streak = 0;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    res.iterations = it + 1;
    Forward(model, res.image, trace);
    const auto pred = Predict(trace);
    streak = (pred && *pred == cfg.target_class) ? streak + 1 : 0;
    if (streak >= cfg.stop_streak) return res;
    const LossReport loss = Loss(trace.outputs(), cfg.target_class);
    tape.Zero();
    BackwardFromOutputs(model, trace, loss.d_outputs, {cfg.clip_derivative, 0.0}, tape);
    for (std::size_t i = 0; i < res.image.size(); ++i) {
      if (!Fires(res.image[i])) continue;
      res.image[i] = std::max(0.0, res.image[i] - cfg.learning_rate * tape.d_inputs[i]);
    }
  }
  throw NoConvergence("dream did not settle on class " + std::to_string(cfg.target_class) +
                      " within " + std::to_string(cfg.max_iterations) + " iterations");
}

/// Binary PGM, gray = 255 (1 - clamp(t, 0, 1)); silent pixels come out black.
inline void WritePgm(std::ostream& out, std::span<const double> times, std::size_t width,
                     std::size_t height) {
  if (times.size() != width * height) throw std::invalid_argument("PGM size mismatch");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (double t : times) {
    const double c = std::clamp(t, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - c)))));
  }
}

inline void WriteTimesText(std::ostream& out, std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << FormatSpikeTime(times[i]) << (i + 1 == times.size() ? '\n' : ',');
  }
}

}  // namespace alphaspike
