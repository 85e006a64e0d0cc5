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

// Hand-built networks that realise thresholds, boxes and piecewise-constant
// function approximations. They are ordinary NetworkModels: the fixed
// auxiliary spikes are pulses, so forward() is the only semantics involved.
//
// Threshold gadget. An input x with weight -w and a fixed spike at p with
// weight +w leave, long after both, a potential whose sign is that of
// (p - x): the later of two opposite spikes dominates the tail. A drive
// spike of weight v at t_g, trimmed by an inhibitory spike of weight -u so
// that on its own it peaks a hair below threshold, turns "slightly positive"
// into an output spike shortly after t_g and "negative" into silence.
// Flipping both signs gives the x >= t0 variant.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alphaspike/math.hpp"
#include "alphaspike/network.hpp"
#include "alphaspike/neuron.hpp"
#include "alphaspike/spike_time.hpp"

namespace alphaspike {

class InfeasibleConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GadgetDirection {
  kBelow,  // spike iff x <= t0
  kAbove,  // spike iff x >= t0
};

/// Threshold pulses sit this far on the accepting side of t0, which makes
/// the boundary itself accepted.
inline constexpr double kBoundaryShift = 1e-7;

/// Constants shared by every gadget driven at the same output time.
struct GadgetDrive {
  double w = 0.0;          // |input weight| = |threshold pulse weight|
  double v = 0.0;          // drive spike weight
  double u = 0.0;          // |inhibitory weight|
  double t_g = 0.0;        // drive spike time, start of the output window
  double t_inh = 0.0;      // inhibitory spike time
  double margin = 0.0;     // threshold minus the unassisted peak
  double peak_time = 0.0;  // unassisted peak, bounds the output delay
};

struct ThresholdGadget {
  GadgetDirection direction = GadgetDirection::kBelow;
  double t0 = 0.0;
  double t_out = 0.0;
  double epsilon = 0.0;
  double pulse_time = 0.0;  // t0 shifted by kBoundaryShift
  GadgetDrive drive;
  NetworkModel model;  // 1 input, 1 neuron, pulses {threshold, drive, inhibitory}

  bool Accepts(double x) const {
    return direction == GadgetDirection::kBelow ? x <= t0 : x >= t0;
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool Contains(double x) const { return x >= lo && x <= hi; }
};

/// Neurons of one box: 2n gadgets, a merge neuron and the shared drive and
/// inhibitory pulses. The 2n threshold pulses are counted separately.
inline std::size_t BoxCoreNeurons(std::size_t n) { return 2 * n + 3; }
inline std::size_t BoxTotalNeurons(std::size_t n) { return 4 * n + 3; }

struct BoxDetector {
  std::vector<Interval> intervals;
  double t = 0.0;             // nominal time parameter
  double epsilon = 0.0;
  double window_start = 0.0;  // spikes land in (window_start, window_start + epsilon)
  double merge_weight = 0.0;
  double merge_offset = 0.0;  // merge latency for simultaneous gadget spikes
  GadgetDrive drive;
  NetworkModel model;  // n inputs -> 2n gadgets -> 1 merge
  std::size_t core_neurons = 0;
  std::size_t threshold_pulses = 0;

  bool Contains(std::span<const double> x) const {
    for (std::size_t d = 0; d < intervals.size(); ++d) {
      if (!intervals[d].Contains(x[d])) return false;
    }
    return true;
  }
};

namespace detail {

inline constexpr double kGadgetWeightFraction = 0.9;
inline constexpr double kInhibitionLevel = 1.0 - 1e-6;

// Time and value of the maximum of v k(t - t_g) - u k(t - t_inh) for t >= t_inh.
inline std::pair<double, double> DrivePeak(double v, double t_g, double u, double t_inh,
                                           double tau) {
  const double e_g = std::exp(tau * t_g);
  const double e_i = std::exp(tau * t_inh);
  const double a = v * e_g - u * e_i;
  const double b = v * e_g * t_g - u * e_i * t_inh;
  double t_peak = t_inh;
  if (a > 0.0) t_peak = std::max(t_inh, b / a + 1.0 / tau);
  const SpikeEvent ev[2] = {{t_g, v, 0}, {t_inh, -u, 1}};
  return {t_peak, MembranePotential(ev, t_peak, tau)};
}

// Smallest tail potential of a threshold pair at time t, over pair positions
// in [0, 1] at the boundary shift. Sets how close to threshold the drive may
// peak while boundary inputs still get through.
inline double BoundarySignal(double w, double t, double tau) {
  double smallest = kNever;
  for (double p : {0.0, 1.0}) {
    const double diff =
        AlphaKernel(t, p, w, tau) - AlphaKernel(t, p + kBoundaryShift, w, tau);
    smallest = std::min(smallest, std::abs(diff));
  }
  return smallest;
}

inline GadgetDrive DesignDrive(double t_g, double epsilon, double tau, double theta) {
  GadgetDrive d;
  d.t_g = t_g;
  d.w = kGadgetWeightFraction * theta * tau * std::numbers::e;
  d.margin = std::clamp(0.1 * BoundarySignal(d.w, t_g, tau), 1e-10 * theta, 1e-9 * theta);
  const double target = theta - d.margin;

  for (double v = 1.5 * theta * tau * std::numbers::e; std::isfinite(v); v *= 2.0) {
    // Drive alone reaches kInhibitionLevel * theta after s; the inhibitory
    // spike starts there.
    const double s = -LambertW0(-tau * theta * kInhibitionLevel / v) / tau;
    const double t_inh = t_g + s;
    // At u_hi the combined slope at t_inh is zero, so the peak is the value
    // there, below target. At u = 0 the peak is v / (tau e), above it.
    double u_lo = 0.0;
    double u_hi = v * std::exp(-tau * s) * (1.0 - tau * s);
    for (int it = 0; it < 200 && u_hi - u_lo > 1e-16 * u_hi; ++it) {
      const double mid = 0.5 * (u_lo + u_hi);
      (DrivePeak(v, t_g, mid, t_inh, tau).second > target ? u_lo : u_hi) = mid;
    }
    const auto [t_peak, v_peak] = DrivePeak(v, t_g, u_hi, t_inh, tau);
    if (!(v_peak < theta)) continue;
    if (t_peak - t_g < epsilon) {
      d.v = v;
      d.u = u_hi;
      d.t_inh = t_inh;
      d.peak_time = t_peak;
      return d;
    }
  }
  throw InfeasibleConfig("no drive weight meets the output window");
}

inline void CheckCommon(double epsilon, double tau, double theta) {
  if (!(tau > 0.0)) throw InfeasibleConfig("decay constant must be positive");
  if (!(theta > 0.0)) throw InfeasibleConfig("fire threshold must be positive");
  if (!(epsilon > 0.0)) throw InfeasibleConfig("epsilon must be positive");
}

// Columns: box b, dimension d -> gadget 2 (b n + d) tests x <= hi,
// 2 (b n + d) + 1 tests x >= lo. Pulses of box b start at b (2n + 2): the
// 2n thresholds in gadget order, then drive, then inhibition.
struct BoxLayout {
  std::vector<Interval> intervals;
  double t_g = 0.0;
  GadgetDrive drive;
};

inline void WriteGadgetLayer(std::size_t n, std::span<const BoxLayout> boxes, LayerSpec& layer,
                             std::vector<double>& pulse_times) {
  const std::size_t per_box = 2 * n + 2;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const GadgetDrive& d = boxes[b].drive;
    const std::size_t pulse0 = n + b * per_box;
    for (std::size_t dim = 0; dim < n; ++dim) {
      const Interval& iv = boxes[b].intervals[dim];
      const std::size_t below = 2 * (b * n + dim);
      const std::size_t above = below + 1;
      layer.weights(dim, below) = -d.w;
      layer.weights(pulse0 + 2 * dim, below) = d.w;
      pulse_times[b * per_box + 2 * dim] = iv.hi + kBoundaryShift;
      layer.weights(dim, above) = d.w;
      layer.weights(pulse0 + 2 * dim + 1, above) = -d.w;
      pulse_times[b * per_box + 2 * dim + 1] = iv.lo - kBoundaryShift;
      for (std::size_t g : {below, above}) {
        layer.weights(pulse0 + 2 * n, g) = d.v;
        layer.weights(pulse0 + 2 * n + 1, g) = -d.u;
      }
    }
    pulse_times[b * per_box + 2 * n] = d.t_g;
    pulse_times[b * per_box + 2 * n + 1] = d.t_inh;
  }
}

// Merge weight theta tau e / (2n - 1) shrunk by a 1/(4n) fraction: 2n - 1
// simultaneous inputs peak at most at (1 - 1/(4n)) theta, while 2n reach
// (2n - 1/2) / (2n - 1) theta.
inline double MergeWeight(std::size_t n, double tau, double theta) {
  const double k = static_cast<double>(2 * n - 1);
  return theta * tau * std::numbers::e / k * (1.0 - 1.0 / (4.0 * static_cast<double>(n)));
}

// Latency of a neuron whose `count` inputs of weight `weight` arrive together.
inline double CrossingOffset(double count, double weight, double tau, double theta) {
  return -LambertW0(-tau * theta / (count * weight)) / tau;
}

// Shared by the box detector and the approximator: gadget layer and box merge
// layer for boxes whose merge spikes start at `window_starts`.
inline NetworkModel BuildBoxLayers(std::size_t n, std::span<const std::vector<Interval>> boxes,
                                   std::span<const double> window_starts, double epsilon,
                                   double tau, double theta, std::vector<BoxLayout>& layout,
                                   double& merge_weight, double& merge_offset) {
  merge_weight = MergeWeight(n, tau, theta);
  merge_offset = CrossingOffset(static_cast<double>(2 * n), merge_weight, tau, theta);
  // Gadget spikes spread over eps_g keep the merge latency in [o, o + eps_g]
  // as long as every input is still on its rising flank.
  const double eps_g = std::min(0.9 * epsilon, 0.5 * (1.0 / tau - merge_offset));

  layout.clear();
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    BoxLayout bl;
    bl.intervals = boxes[b];
    bl.t_g = window_starts[b] - merge_offset;
    if (!(bl.t_g > 2.0 + 1.0 / tau)) {
      throw InfeasibleConfig("gadget output time " + std::to_string(bl.t_g) +
                             " must exceed 2 + 1/tau");
    }
    bl.drive = DesignDrive(bl.t_g, eps_g, tau, theta);
    layout.push_back(std::move(bl));
  }

  const std::size_t n_boxes = boxes.size();
  const std::size_t n_gadgets = 2 * n * n_boxes;
  NetworkModel model;
  model.tau = tau;
  model.theta = theta;
  model.pulse_mode = PulseMode::kPerLayer;
  model.n_pulses = n_boxes * (2 * n + 2);

  LayerSpec gadgets{n, n_gadgets, Matrix(n + model.n_pulses, n_gadgets)};
  std::vector<double> gadget_pulses(model.n_pulses, 0.0);
  WriteGadgetLayer(n, layout, gadgets, gadget_pulses);

  LayerSpec merge{n_gadgets, n_boxes, Matrix(n_gadgets + model.n_pulses, n_boxes)};
  for (std::size_t b = 0; b < n_boxes; ++b) {
    for (std::size_t g = 0; g < 2 * n; ++g) merge.weights(b * 2 * n + g, b) = merge_weight;
  }
  model.layers = {std::move(gadgets), std::move(merge)};
  model.pulses = {{std::move(gadget_pulses), 0},
                  {std::vector<double>(model.n_pulses, 0.0), 1}};
  return model;
}

}  // namespace detail

/// One neuron that fires in (t_out, t_out + epsilon) iff its input x
/// satisfies x <= t0 (kBelow) or x >= t0 (kAbove).
inline ThresholdGadget BuildThresholdGadget(GadgetDirection direction, double t0, double t_out,
                                            double epsilon, double tau, double theta) {
  detail::CheckCommon(epsilon, tau, theta);
  if (!(t_out > 2.0 + 1.0 / tau)) {
    throw InfeasibleConfig("t_out = " + std::to_string(t_out) + " must exceed 2 + 1/tau = " +
                           std::to_string(2.0 + 1.0 / tau));
  }
  if (!(t0 >= 0.0 && t0 <= 1.0)) throw InfeasibleConfig("t0 must lie in [0, 1]");

  ThresholdGadget g;
  g.direction = direction;
  g.t0 = t0;
  g.t_out = t_out;
  g.epsilon = epsilon;
  g.drive = detail::DesignDrive(t_out, epsilon, tau, theta);
  const bool below = direction == GadgetDirection::kBelow;
  g.pulse_time = below ? t0 + kBoundaryShift : t0 - kBoundaryShift;

  NetworkModel& m = g.model;
  m.tau = tau;
  m.theta = theta;
  m.n_pulses = 3;
  m.pulse_mode = PulseMode::kPerLayer;
  LayerSpec layer{1, 1, Matrix(4, 1)};
  layer.weights(0, 0) = below ? -g.drive.w : g.drive.w;
  layer.weights(1, 0) = below ? g.drive.w : -g.drive.w;
  layer.weights(2, 0) = g.drive.v;
  layer.weights(3, 0) = -g.drive.u;
  m.layers.push_back(std::move(layer));
  m.pulses.push_back({{g.pulse_time, t_out, g.drive.t_inh}, 0});
  return g;
}

/// Fires in (t + 1/tau, t + 1/tau + epsilon) iff every input lies in its
/// closed interval; silent otherwise. Needs t >= 2 + 2/tau.
inline BoxDetector BuildBoxDetector(std::vector<Interval> intervals, double t, double epsilon,
                                    double tau, double theta) {
  detail::CheckCommon(epsilon, tau, theta);
  if (intervals.empty()) throw InfeasibleConfig("box needs at least one interval");
  if (!(t >= 2.0 + 2.0 / tau)) {
    throw InfeasibleConfig("t = " + std::to_string(t) + " must be at least 2 + 2/tau = " +
                           std::to_string(2.0 + 2.0 / tau));
  }
  for (const Interval& iv : intervals) {
    if (!(iv.lo >= 0.0 && iv.hi <= 1.0 && iv.lo <= iv.hi)) {
      throw InfeasibleConfig("intervals must be ordered and inside [0, 1]");
    }
  }
  const std::size_t n = intervals.size();
  BoxDetector box;
  box.intervals = intervals;
  box.t = t;
  box.epsilon = epsilon;
  box.window_start = t + 1.0 / tau;
  std::vector<detail::BoxLayout> layout;
  const std::vector<std::vector<Interval>> boxes{intervals};
  const double starts[1] = {box.window_start};
  box.model = detail::BuildBoxLayers(n, boxes, starts, epsilon, tau, theta, layout,
                                     box.merge_weight, box.merge_offset);
  box.drive = layout.front().drive;
  box.core_neurons = BoxCoreNeurons(n);
  box.threshold_pulses = 2 * n;
  return box;
}

// ---------------------------------------------------------------------------
// Function approximator.

using TargetFunction = std::function<double(std::span<const double>)>;

struct ApproximatorNet {
  std::size_t n = 0;
  double lipschitz = 0.0;
  double epsilon = 0.0;
  std::size_t cells_per_dim = 0;
  std::vector<std::vector<Interval>> boxes;
  std::vector<double> box_window_starts;
  double box_epsilon = 0.0;
  double final_weight = 0.0;
  double final_offset = 0.0;
  NetworkModel model;  // inputs -> gadgets -> box merges -> 1 output
  std::size_t neuron_count = 0;
  double neuron_bound = 0.0;  // (3 K sqrt(n) / eps)^n (4n + 3) + 1

  double Evaluate(std::span<const double> x) const {
    return Forward(model, x).outputs()[0];
  }
};

/// Overlap between neighbouring cells, so that no input sits on an edge.
inline constexpr double kCellOverlap = 1e-4;

/// Approximates f on [0, 1]^n to within epsilon by the output spike time.
/// `lipschitz` bounds |f(x) - f(y)| / |x - y|; f must stay >= 2 + 2/tau.
inline ApproximatorNet BuildApproximator(const TargetFunction& f, std::size_t n,
                                         double lipschitz, double epsilon, double tau,
                                         double theta = 1.0) {
  detail::CheckCommon(epsilon, tau, theta);
  if (n == 0) throw InfeasibleConfig("input dimension must be positive");
  if (!(lipschitz >= 0.0)) throw InfeasibleConfig("Lipschitz constant must be non-negative");

  ApproximatorNet net;
  net.n = n;
  net.lipschitz = lipschitz;
  net.epsilon = epsilon;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double ratio = 3.0 * lipschitz * sqrt_n / epsilon;
  net.neuron_bound = std::pow(ratio, static_cast<double>(n)) * static_cast<double>(4 * n + 3) + 1.0;
  // Rounding down keeps the count inside the bound; the shortfall in cell
  // resolution comes out of the timing budget below.
  const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio + 1e-9)));
  net.cells_per_dim = m;
  const double overlap = m > 1 ? kCellOverlap : 0.0;
  const double spread = lipschitz * sqrt_n * (1.0 / static_cast<double>(m) + 2.0 * overlap);
  const double budget = epsilon - spread;
  if (!(budget > 0.0)) {
    throw InfeasibleConfig("epsilon too small for the Lipschitz constant at this size");
  }
  net.box_epsilon = budget / 3.0;
  net.final_offset = std::min(budget / 3.0, 0.5 / tau);
  net.final_weight = theta / (net.final_offset * std::exp(-tau * net.final_offset));

  const double merge_weight = detail::MergeWeight(n, tau, theta);
  const double merge_offset = detail::CrossingOffset(static_cast<double>(2 * n), merge_weight,
                                                     tau, theta);
  const double floor_f = 2.0 + 2.0 / tau;
  const double earliest_window = 2.0 + 1.0 / tau + merge_offset + 1e-9;

  std::size_t n_boxes = 1;
  for (std::size_t d = 0; d < n; ++d) n_boxes *= m;
  const std::size_t samples = n == 1 ? 257 : std::max<std::size_t>(
      3, static_cast<std::size_t>(std::pow(4096.0, 1.0 / static_cast<double>(n))));

  std::vector<std::size_t> cell(n, 0);
  std::vector<double> x(n);
  for (std::size_t b = 0; b < n_boxes; ++b) {
    std::vector<Interval> box(n);
    for (std::size_t d = 0, rest = b; d < n; ++d, rest /= m) {
      cell[d] = rest % m;
      const double md = static_cast<double>(m);
      box[d].lo = std::max(0.0, static_cast<double>(cell[d]) / md - overlap);
      box[d].hi = std::min(1.0, static_cast<double>(cell[d] + 1) / md + overlap);
    }
    // Smallest sampled value of f over the box.
    double f_min = kNever;
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) total *= samples;
    for (std::size_t s = 0; s < total; ++s) {
      for (std::size_t d = 0, rest = s; d < n; ++d, rest /= samples) {
        const double frac = static_cast<double>(rest % samples) / static_cast<double>(samples - 1);
        x[d] = box[d].lo + frac * (box[d].hi - box[d].lo);
      }
      f_min = std::min(f_min, f(x));
    }
    if (!(f_min >= floor_f - 1e-12)) {
      throw InfeasibleConfig("target value " + std::to_string(f_min) +
                             " is below 2 + 2/tau = " + std::to_string(floor_f));
    }
    net.boxes.push_back(std::move(box));
    net.box_window_starts.push_back(std::max(f_min - net.final_offset, earliest_window));
  }

  std::vector<detail::BoxLayout> layout;
  double mw = 0.0, mo = 0.0;
  NetworkModel model = detail::BuildBoxLayers(n, net.boxes, net.box_window_starts,
                                              net.box_epsilon, tau, theta, layout, mw, mo);
  LayerSpec out{n_boxes, 1, Matrix(n_boxes + model.n_pulses, 1)};
  for (std::size_t b = 0; b < n_boxes; ++b) out.weights(b, 0) = net.final_weight;
  model.layers.push_back(std::move(out));
  model.pulses.push_back({std::vector<double>(model.n_pulses, 0.0), 2});
  model.Validate();
  net.model = std::move(model);
  net.neuron_count = n_boxes * BoxTotalNeurons(n) + 1;
  return net;
}

}  // namespace alphaspike
