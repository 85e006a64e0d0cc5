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

// Single-neuron spike time under the alpha kernel.
//
// For a set of presynaptic events I the membrane potential is
//   V(t) = e^{-tau t} (A t - B),  A = sum w_i e^{tau t_i},  B = sum w_i e^{tau t_i} t_i
// and its rising threshold crossing has the closed form
//   t_out = B/A - W0(-tau theta / A * e^{tau B / A}) / tau.
// Events are folded in by arrival time; each prefix yields a candidate that
// is accepted only if it lies in [last included time, next event time).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "alphaspike/math.hpp"
#include "alphaspike/spike_time.hpp"

namespace alphaspike {

struct SpikeEvent {
  double time = 0.0;
  double weight = 0.0;
  std::size_t source_index = 0;
};

/// The presynaptic events that determine a spike, with their accumulators.
struct CausalSet {
  std::vector<SpikeEvent> events;  // ascending by time
  double a = 0.0;
  double b = 0.0;

  bool Contains(std::size_t source_index) const {
    return std::any_of(events.begin(), events.end(), [&](const SpikeEvent& e) {
      return e.source_index == source_index;
    });
  }
};

struct SpikeResult {
  double t_out = kNever;
  CausalSet causal_set;
  double w_lambert = 0.0;  // W0 value at the solution
};

/// Local partial derivative plus a flag for the 1 + W -> 0 tangency.
struct Partial {
  double value = 0.0;
  bool near_singular = false;
};

inline constexpr double kNearSingularTolerance = 1e-10;

/// Sum of alpha kernels of the events that arrived at or before t. No reset.
inline double MembranePotential(std::span<const SpikeEvent> events, double t, double tau) {
  double v = 0.0;
  for (const SpikeEvent& e : events) {
    if (!Fires(e.time) || e.time > t) continue;
    v += AlphaKernel(t, e.time, e.weight, tau);
  }
  return v;
}

/// Rising threshold crossing of e^{-tau t} (A t - B), or kNever when there is
/// none at or after `last_time`. Writes the W0 value on success.
inline double RisingCrossing(double a, double b, double tau, double theta, double last_time,
                             double* w_lambert) {
  // A <= 0 means any crossing is on a falling flank.
  if (!(a > 0.0)) return kNever;
  const double b_over_a = b / a;
  const double exponent = tau * b_over_a;
  if (exponent > 700.0) return kNever;
  const double z = -tau * theta / a * std::exp(exponent);
  if (z < -kInvE - kLambertBranchTolerance) return kNever;
  const double w = LambertW0(z);
  const double t = b_over_a - w / tau;
  // Written this way so NaN also counts as invalid.
  if (!(t >= last_time)) return kNever;
  *w_lambert = w;
  return t;
}

/// Running A/B accumulators for one postsynaptic neuron.
class CrossingAccumulator {
 public:
  CrossingAccumulator(double tau, double theta) : tau_(tau), theta_(theta) {}

  void Add(double weight, double time, double exp_tau_time) {
    const double w_exp = weight * exp_tau_time;
    a_ += w_exp;
    b_ += w_exp * time;
  }

  /// Rising crossing for the current prefix if it is not earlier than
  /// `last_time`; kNever otherwise. Updates w_lambert() on success.
  double Candidate(double last_time) {
    return RisingCrossing(a_, b_, tau_, theta_, last_time, &w_);
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double w_lambert() const { return w_; }

 private:
  double tau_;
  double theta_;
  double a_ = 0.0;
  double b_ = 0.0;
  double w_ = 0.0;
};

/// Earliest rising threshold crossing produced by `events`.
/// Events timed kNever are ignored. Equal times keep their input order.
inline SpikeResult SolveSpikeTime(std::span<const SpikeEvent> events, double tau, double theta) {
  std::vector<SpikeEvent> sorted;
  sorted.reserve(events.size());
  for (const SpikeEvent& e : events) {
    if (Fires(e.time)) sorted.push_back(e);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SpikeEvent& x, const SpikeEvent& y) { return x.time < y.time; });

  CrossingAccumulator acc(tau, theta);
  SpikeResult result;
  double candidate = kNever;
  std::size_t included = 0;
  for (const SpikeEvent& e : sorted) {
    // An input exactly at the candidate time is still included.
    if (candidate < e.time) break;
    acc.Add(e.weight, e.time, std::exp(tau * e.time));
    ++included;
    candidate = acc.Candidate(e.time);
  }
  sorted.resize(included);
  result.t_out = candidate;
  result.causal_set.events = std::move(sorted);
  result.causal_set.a = acc.a();
  result.causal_set.b = acc.b();
  result.w_lambert = Fires(candidate) ? acc.w_lambert() : 0.0;
  return result;
}

// Closed-form partials given the causal accumulators. The argument order
// keeps tau = 1 evaluation bit-identical to the textbook tau-free forms.

/// d t_out / d w_j = e^{tau t_j} (t_j - B/A + W/tau) / (A (1 + W)).
/// `exp_tau_t_j` is e^{tau t_j}, passed in so layer code can reuse it.
inline Partial WeightPartial(double a, double b, double w_lambert, double tau, double t_j,
                             double exp_tau_t_j) {
  const double one_plus_w = 1.0 + w_lambert;
  Partial p;
  p.near_singular = one_plus_w < kNearSingularTolerance;
  p.value = exp_tau_t_j * (t_j - b / a + w_lambert / tau) / (a * one_plus_w);
  return p;
}

/// d t_out / d t_j = tau w_j e^{tau t_j} (t_j - B/A + W/tau + 1/tau) / (A (1 + W)).
inline Partial TimePartial(double a, double b, double w_lambert, double tau, double t_j,
                           double w_j, double exp_tau_t_j) {
  const double one_plus_w = 1.0 + w_lambert;
  Partial p;
  p.near_singular = one_plus_w < kNearSingularTolerance;
  p.value = tau * w_j * exp_tau_t_j * (t_j - b / a + w_lambert / tau + 1.0 / tau) /
            (a * one_plus_w);
  return p;
}

/// Partial of the output spike time w.r.t. the weight of source `j`;
/// zero when j is outside the causal set or the neuron is silent.
inline Partial DToutDWeight(const SpikeResult& result, std::size_t j, double tau) {
  if (!Fires(result.t_out)) return {};
  for (const SpikeEvent& e : result.causal_set.events) {
    if (e.source_index != j) continue;
    return WeightPartial(result.causal_set.a, result.causal_set.b, result.w_lambert, tau, e.time,
                         std::exp(tau * e.time));
  }
  return {};
}

/// Partial of the output spike time w.r.t. the arrival time of source `j`.
inline Partial DToutDTime(const SpikeResult& result, std::size_t j, double tau) {
  if (!Fires(result.t_out)) return {};
  for (const SpikeEvent& e : result.causal_set.events) {
    if (e.source_index != j) continue;
    return TimePartial(result.causal_set.a, result.causal_set.b, result.w_lambert, tau, e.time,
                       e.weight, std::exp(tau * e.time));
  }
  return {};
}

inline double Clip(double value, double bound) { return std::clamp(value, -bound, bound); }

}  // namespace alphaspike
