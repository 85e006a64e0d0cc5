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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "alphaspike/network.hpp"

namespace alphaspike {
namespace {

NetworkModel RandomModel(std::vector<std::size_t> sizes, std::size_t n_pulses, std::uint64_t seed,
                         double tau = 1.0, double theta = 1.0,
                         PulseMode mode = PulseMode::kPerLayer) {
  ModelSpec spec;
  spec.layer_sizes = std::move(sizes);
  spec.n_pulses = n_pulses;
  spec.nonpulse_init_multiplier = 1.5;
  spec.pulse_init_multiplier = 1.0;
  spec.tau = tau;
  spec.theta = theta;
  spec.pulse_mode = mode;
  return InitModel(spec, seed);
}

std::vector<double> RandomInputs(std::size_t n, std::mt19937_64& rng, double p_never = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (double& t : x) t = u(rng) < p_never ? kNever : u(rng);
  return x;
}

TEST(InitModel, GlorotMeanAndSpread) {
  ModelSpec spec;
  spec.layer_sizes = {1000, 100};
  spec.n_pulses = 0;
  const NetworkModel m = InitModel(spec, 1);
  const auto w = m.layers[0].weights.values();
  const double n = static_cast<double>(w.size());
  const double sigma = std::sqrt(2.0 / 1100.0);
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
  EXPECT_LT(std::abs(mean), 4.0 * sigma / std::sqrt(n));
  double var = 0;
  for (double x : w) var += (x - mean) * (x - mean);
  EXPECT_NEAR(std::sqrt(var / n), sigma, 0.02 * sigma);

  spec.nonpulse_init_multiplier = 2.0;
  const NetworkModel shifted = InitModel(spec, 1);
  const auto ws = shifted.layers[0].weights.values();
  EXPECT_NEAR(std::accumulate(ws.begin(), ws.end(), 0.0) / n, 2.0 * sigma, 4.0 * sigma / std::sqrt(n));
}

TEST(InitModel, PulseRowsUseTheirOwnMultiplier) {
  ModelSpec spec;
  spec.layer_sizes = {20, 400};
  spec.n_pulses = 10;
  spec.nonpulse_init_multiplier = -1.0;
  spec.pulse_init_multiplier = 3.0;
  const NetworkModel m = InitModel(spec, 4);
  const double sigma = std::sqrt(2.0 / (30.0 + 400.0));
  double pulse_sum = 0, pulse_n = 0, other_sum = 0, other_n = 0;
  for (std::size_t r = 0; r < 30; ++r) {
    for (double x : m.layers[0].weights.row(r)) {
      (r < 20 ? other_sum : pulse_sum) += x;
      (r < 20 ? other_n : pulse_n) += 1;
    }
  }
  EXPECT_NEAR(pulse_sum / pulse_n, 3.0 * sigma, 0.1 * sigma);
  EXPECT_NEAR(other_sum / other_n, -1.0 * sigma, 0.1 * sigma);
}

TEST(InitModel, PulseTimesAndErrors) {
  EXPECT_EQ(EvenPulseTimes(1), std::vector<double>{0.5});
  const auto ten = EvenPulseTimes(10);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_DOUBLE_EQ(ten[k], (k + 1) / 11.0);
  ModelSpec bad;
  bad.layer_sizes = {2, 0, 2};
  EXPECT_THROW(InitModel(bad, 0), InvalidSpec);
  bad.layer_sizes = {2};
  EXPECT_THROW(InitModel(bad, 0), InvalidSpec);
}

TEST(InitModel, SeedReproducible) {
  EXPECT_EQ(RandomModel({5, 4, 3}, 2, 9), RandomModel({5, 4, 3}, 2, 9));
  EXPECT_FALSE(RandomModel({5, 4, 3}, 2, 9) == RandomModel({5, 4, 3}, 2, 10));
}

TEST(Forward, SilentWithoutInputCurrent) {
  NetworkModel m = RandomModel({3, 4, 2}, 2, 5);
  for (auto& l : m.layers) {
    for (std::size_t r = l.n_in; r < l.weights.rows(); ++r) {
      for (double& w : l.weights.row(r)) w = 0.0;
    }
  }
  const std::vector<double> x(3, kNever);
  const ForwardTrace tr = Forward(m, x);
  for (std::size_t l = 1; l < tr.spike_times.size(); ++l) {
    for (double t : tr.spike_times[l]) EXPECT_TRUE(IsNever(t));
  }
}

TEST(Forward, SingleNeuronTangency) {
  NetworkModel m;
  m.layers.push_back({1, 1, Matrix(1, 1, std::numbers::e)});
  m.pulses.push_back({{}, 0});
  m.Validate();
  const std::vector<double> x{0.0};
  EXPECT_NEAR(Forward(m, x).outputs()[0], 1.0, 1e-7);
}

TEST(Forward, LayerSolverMatchesPerNeuronSolver) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const double tau = trial % 3 == 0 ? 0.181769 : 1.0;
    const double theta = trial % 2 == 0 ? 1.0 : 0.6;
    const auto mode = trial % 4 == 0 ? PulseMode::kShared : PulseMode::kPerLayer;
    const NetworkModel m = RandomModel({12, 9, 4}, 3, trial, tau, theta, mode);
    const auto x = RandomInputs(12, rng);
    const ForwardTrace tr = Forward(m, x);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const auto& prev = tr.spike_times[l];
      const auto& pulses = m.PulsesFor(l).times;
      for (std::size_t n = 0; n < m.layers[l].n_out; ++n) {
        std::vector<SpikeEvent> ev;
        for (std::size_t i = 0; i < prev.size(); ++i) ev.push_back({prev[i], m.layers[l].weights(i, n), i});
        for (std::size_t k = 0; k < pulses.size(); ++k) {
          ev.push_back({pulses[k], m.layers[l].weights(prev.size() + k, n), prev.size() + k});
        }
        const SpikeResult r = SolveSpikeTime(ev, tau, theta);
        ASSERT_EQ(r.t_out, tr.spike_times[l + 1][n]) << "trial " << trial << " layer " << l;
        if (Fires(r.t_out)) {
          ASSERT_EQ(r.causal_set.events.size(), tr.layers[l].neurons[n].n_causal);
          ASSERT_EQ(r.causal_set.a, tr.layers[l].neurons[n].a);
          ASSERT_EQ(r.causal_set.b, tr.layers[l].neurons[n].b);
        }
      }
    }
  }
}

TEST(Forward, HiddenPermutationInvariance) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkModel m = RandomModel({6, 7, 3}, 2, 100 + trial);
    std::vector<std::size_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    NetworkModel p = m;
    for (std::size_t r = 0; r < m.layers[0].weights.rows(); ++r) {
      for (std::size_t h = 0; h < 7; ++h) p.layers[0].weights(r, h) = m.layers[0].weights(r, perm[h]);
    }
    for (std::size_t h = 0; h < 7; ++h) {
      for (std::size_t c = 0; c < 3; ++c) p.layers[1].weights(h, c) = m.layers[1].weights(perm[h], c);
    }
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t c = 0; c < 3; ++c) p.layers[1].weights(7 + k, c) = m.layers[1].weights(7 + k, c);
    }
    const auto x = RandomInputs(6, rng);
    const auto b_trace = Forward(p, x);
    const auto b = b_trace.outputs();
    const ForwardTrace a_trace = Forward(m, x);
    for (std::size_t c = 0; c < 3; ++c) {
      const double ta = a_trace.outputs()[c], tb = b[c];
      if (IsNever(ta)) {
        EXPECT_TRUE(IsNever(tb));
      } else {
        EXPECT_NEAR(ta, tb, 1e-12);
      }
    }
  }
}

TEST(Forward, BitDeterministic) {
  const NetworkModel m = RandomModel({30, 20, 5}, 4, 3, 0.3);
  std::mt19937_64 rng(1);
  const auto x = RandomInputs(30, rng);
  const ForwardTrace a = Forward(m, x);
  const ForwardTrace b = Forward(m, x);
  EXPECT_EQ(a.spike_times, b.spike_times);
}

TEST(Forward, RejectsWrongInputWidth) {
  const NetworkModel m = RandomModel({3, 2}, 1, 0);
  const std::vector<double> x(4, 0.5);
  EXPECT_THROW(Forward(m, x), InvalidSpec);
}

TEST(Predict, Cases) {
  EXPECT_EQ(Predict(std::vector<double>{0.9, 0.7, kNever}), 1u);
  EXPECT_FALSE(Predict(std::vector<double>{kNever, kNever}).has_value());
  EXPECT_EQ(Predict(std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_EQ(Predict(std::vector<double>{kNever, 3.0}), 1u);
}

TEST(Predict, InvariantUnderIncreasingMaps) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> t(4);
    for (double& x : t) x = u(rng) < 0.5 ? kNever : u(rng);
    std::vector<double> mapped(t);
    for (double& x : mapped) {
      if (Fires(x)) x = std::exp(x) * 3.0 + 1.0;
    }
    EXPECT_EQ(Predict(t), Predict(mapped));
  }
}

}  // namespace
}  // namespace alphaspike
