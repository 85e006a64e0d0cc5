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

// alphaspike: train, evaluate, dream, run the hand-built constructions and
// dump spike rasters from the command line.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad configuration or data,
// 3 unreadable checkpoint, 4 dream did not converge.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "alphaspike/approximator.hpp"
#include "alphaspike/checkpoint.hpp"
#include "alphaspike/datasets.hpp"
#include "alphaspike/introspection.hpp"
#include "alphaspike/training.hpp"

namespace alphaspike::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCheckpoint = 3;
constexpr int kExitNoConvergence = 4;

// Synthetic test sets come from a seed stream disjoint from training.
constexpr std::uint64_t kTestSeedSalt = 0x9e3779b97f4a7c15ULL;

/// Reported as exit code 2 with a one-line message.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t DefaultWorkers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Data.

struct DataOptions {
  std::string task = "xor";
  std::string data_dir;
  std::size_t n_train = 1000;
  std::size_t n_test = 150;
  std::size_t train_subset = 0;  // 0: everything
  std::size_t test_subset = 0;
};

std::size_t OutputsFor(Task task) { return task == Task::kMnist ? 10 : 2; }

Dataset LoadSplit(const DataOptions& opt, Task task, bool train, std::uint64_t seed) {
  if (task == Task::kMnist) {
    if (opt.data_dir.empty()) throw ConfigError("--data-dir is required for the mnist task");
    return LoadMnist(opt.data_dir, train ? MnistSplit::kTrain : MnistSplit::kTest,
                     train ? opt.train_subset : opt.test_subset);
  }
  const std::size_t n = train ? opt.n_train : opt.n_test;
  const std::uint64_t s = train ? seed : seed ^ kTestSeedSalt;
  return task == Task::kCircles ? GenCircles(n, s) : GenBoolean(task, n, s);
}

Task TaskOrThrow(const std::string& name) {
  try {
    return ParseTask(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Hyperparameter flags carry the config field names verbatim; a flag only
// overrides the task preset when it was given.

struct ConfigFlags {
  std::optional<std::size_t> batch_size;
  std::optional<double> clip_derivative;
  std::optional<double> decay_constant;
  std::optional<double> fire_threshold;
  std::optional<double> learning_rate;
  std::optional<double> learning_rate_pulses;
  std::vector<std::size_t> n_hidden;
  std::optional<std::size_t> n_pulses;
  std::optional<double> nonpulse_init_multiplier;
  std::optional<double> penalty_no_spike;
  std::optional<double> pulse_init_multiplier;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<bool> update_only_on_error;
  std::optional<std::string> pulse_mode;

  void Register(CLI::App& app) {
    app.add_option("--batch_size", batch_size, "Examples per Adam step");
    app.add_option("--clip_derivative", clip_derivative, "Bound on each spike-time partial");
    app.add_option("--decay_constant", decay_constant, "Decay constant tau");
    app.add_option("--fire_threshold", fire_threshold, "Firing threshold theta");
    app.add_option("--learning_rate", learning_rate, "Adam step for weights");
    app.add_option("--learning_rate_pulses", learning_rate_pulses, "Adam step for pulse times");
    app.add_option("--n_hidden", n_hidden, "Hidden layer sizes, e.g. 340 or 20,20")
        ->delimiter(',');
    app.add_option("--n_pulses", n_pulses, "Synchronisation pulses per set");
    app.add_option("--nonpulse_init_multiplier", nonpulse_init_multiplier,
                   "Initial weight mean in units of sigma, neuron rows");
    app.add_option("--penalty_no_spike", penalty_no_spike, "Push applied to silent neurons");
    app.add_option("--pulse_init_multiplier", pulse_init_multiplier,
                   "Initial weight mean in units of sigma, pulse rows");
    app.add_option("--epochs", epochs, "Training epochs");
    app.add_option("--seed", seed, "Seed for data, initial weights and shuffling");
    app.add_option("--update-only-on-error", update_only_on_error,
                   "Skip correctly classified examples (true/false)");
    app.add_option("--pulse-mode", pulse_mode, "shared or per_layer")
        ->check(CLI::IsMember({"shared", "per_layer"}));
  }

  void ApplyTo(TrainConfig& c) const {
    if (batch_size) c.batch_size = *batch_size;
    if (clip_derivative) c.clip_derivative = *clip_derivative;
    if (decay_constant) c.decay_constant = *decay_constant;
    if (fire_threshold) c.fire_threshold = *fire_threshold;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (learning_rate_pulses) c.learning_rate_pulses = *learning_rate_pulses;
    if (!n_hidden.empty()) c.n_hidden = n_hidden;
    if (n_pulses) c.n_pulses = *n_pulses;
    if (nonpulse_init_multiplier) c.nonpulse_init_multiplier = *nonpulse_init_multiplier;
    if (penalty_no_spike) c.penalty_no_spike = *penalty_no_spike;
    if (pulse_init_multiplier) c.pulse_init_multiplier = *pulse_init_multiplier;
    if (epochs) c.epochs = *epochs;
    if (seed) c.seed = *seed;
    if (update_only_on_error) c.update_only_on_error = *update_only_on_error;
    if (pulse_mode) c.pulse_mode = *pulse_mode == "shared" ? PulseMode::kShared : PulseMode::kPerLayer;
  }
};

TrainConfig PresetFor(Task task) {
  return task == Task::kMnist ? TrainConfig::MnistChosen() : TrainConfig::BooleanDefaults();
}

Checkpoint LoadCheckpointOrThrow(const std::string& path) {
  if (path.empty()) throw ConfigError("--checkpoint is required");
  return LoadCheckpoint(path);
}

std::vector<double> ParseTimes(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto t = ParseSpikeTime(field);
    if (!t) throw ConfigError("bad spike time '" + field + "'");
    out.push_back(*t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  DataOptions data;
  ConfigFlags flags;
  std::string checkpoint = "checkpoint.json";
  std::string metrics = "metrics.csv";
  std::string resume;
  double valid_fraction = 0.0;
  std::size_t workers = DefaultWorkers();
  bool quiet = false;
};

void PrintEpoch(const EpochMetrics& m) {
  std::printf("epoch %zu %s accuracy %.4f loss %.6f regime %s\n", m.epoch, m.split.c_str(),
              m.accuracy, m.mean_loss, RegimeName(RegimeIndicator(m)));
}

int RunTrain(const TrainArgs& args) {
  const Task task = TaskOrThrow(args.data.task);
  Checkpoint ckpt;
  TrainConfig cfg = PresetFor(task);
  std::size_t first_epoch = 0;
  AdamState state;
  if (!args.resume.empty()) {
    ckpt = LoadCheckpoint(args.resume);
    if (!ckpt.config || !ckpt.optimizer) {
      throw CheckpointError("checkpoint " + args.resume + " has no training state to resume");
    }
    cfg = *ckpt.config;
    args.flags.ApplyTo(cfg);
    TrainConfig same_but_epochs = cfg;
    same_but_epochs.epochs = ckpt.config->epochs;
    if (same_but_epochs != *ckpt.config) {
      throw ConfigError("only --epochs may change when resuming");
    }
    state = *ckpt.optimizer;
    first_epoch = ckpt.epoch;
  } else {
    args.flags.ApplyTo(cfg);
  }
  try {
    cfg.Validate();
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what());
  }
  if (!(args.valid_fraction >= 0.0 && args.valid_fraction < 1.0)) {
    throw ConfigError("--valid-fraction must lie in [0, 1)");
  }

  Dataset train = LoadSplit(args.data, task, true, cfg.seed);
  Dataset valid;
  if (args.valid_fraction > 0.0) {
    std::tie(train, valid) = SplitTrainValid(std::move(train), 1.0 - args.valid_fraction, cfg.seed);
  }
  if (train.empty()) throw ConfigError("training set is empty");
  const std::size_t n_inputs = train.front().input_times.size();

  if (args.resume.empty()) {
    ckpt.model = InitModel(ModelSpecFor(cfg, n_inputs, OutputsFor(task)), cfg.seed);
    state = AdamState::For(ckpt.model);
  } else if (ckpt.model.n_inputs() != n_inputs || ckpt.model.n_outputs() != OutputsFor(task)) {
    throw ConfigError("checkpoint shape does not match task " + args.data.task);
  }
  ckpt.task = std::string(TaskName(task));
  ckpt.config = cfg;

  const bool append = !args.resume.empty() && std::filesystem::exists(args.metrics);
  std::ofstream metrics(args.metrics, append ? std::ios::app : std::ios::trunc);
  if (!metrics) throw ConfigError("cannot write metrics file " + args.metrics);
  if (!append) metrics << kMetricsHeader << '\n';

  NetworkModel& model = ckpt.model;
  Trainer trainer(model, state, cfg, args.workers);
  double best_valid = -1.0;
  bool saved = false;
  for (std::size_t epoch = first_epoch; epoch < cfg.epochs; ++epoch) {
    const EpochMetrics m = trainer.TrainEpoch(train, epoch);
    WriteMetricsRow(metrics, m);
    if (!args.quiet) PrintEpoch(m);
    ckpt.epoch = epoch + 1;
    ckpt.optimizer = state;
    if (!valid.empty()) {
      const EpochMetrics v = Evaluate(model, valid, args.workers, epoch, "valid");
      WriteMetricsRow(metrics, v);
      if (!args.quiet) PrintEpoch(v);
      if (v.accuracy > best_valid) {
        best_valid = v.accuracy;
        SaveCheckpoint(args.checkpoint, ckpt);
        saved = true;
      }
    }
    metrics.flush();
  }
  if (valid.empty() || !saved) SaveCheckpoint(args.checkpoint, ckpt);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  DataOptions data;
  std::string checkpoint;
  std::string split = "test";
  std::optional<std::uint64_t> seed;
  std::size_t workers = DefaultWorkers();
};

int RunEval(EvalArgs args) {
  const Checkpoint ckpt = LoadCheckpointOrThrow(args.checkpoint);
  if (args.data.task.empty()) args.data.task = ckpt.task;
  const Task task = TaskOrThrow(args.data.task);
  const std::uint64_t seed = args.seed ? *args.seed : (ckpt.config ? ckpt.config->seed : 0);
  const Dataset data = LoadSplit(args.data, task, args.split == "train", seed);
  if (data.empty()) throw ConfigError("evaluation set is empty");
  if (data.front().input_times.size() != ckpt.model.n_inputs()) {
    throw ConfigError("checkpoint expects " + std::to_string(ckpt.model.n_inputs()) +
                      " inputs, data has " + std::to_string(data.front().input_times.size()));
  }
  const EpochMetrics m = Evaluate(ckpt.model, data, args.workers, ckpt.epoch, args.split);
  std::printf("examples %zu\naccuracy %.4f\nloss %.6f\nregime %s\n", m.n_examples, m.accuracy,
              m.mean_loss, RegimeName(RegimeIndicator(m)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dream

struct DreamArgs {
  std::string checkpoint;
  std::size_t target = 0;
  double learning_rate = 0.1;
  std::size_t stop_streak = 10;
  std::size_t max_iterations = 10000;
  std::string out_pgm;
  std::string out_times;
};

int RunDream(const DreamArgs& args) {
  const Checkpoint ckpt = LoadCheckpointOrThrow(args.checkpoint);
  DreamConfig cfg;
  cfg.target_class = args.target;
  cfg.learning_rate = args.learning_rate;
  cfg.stop_streak = args.stop_streak;
  cfg.max_iterations = args.max_iterations;
  if (ckpt.config) cfg.clip_derivative = ckpt.config->clip_derivative;
  if (args.target >= ckpt.model.n_outputs()) {
    throw ConfigError("--target must be below " + std::to_string(ckpt.model.n_outputs()));
  }
  const DreamResult r = Dream(ckpt.model, cfg);
  const auto pred = Predict(Forward(ckpt.model, r.image));
  std::printf("iterations %zu\npredicted %zu\n", r.iterations, pred ? *pred : ckpt.model.n_outputs());
  if (!args.out_pgm.empty()) {
    const std::size_t n = r.image.size();
    const std::size_t side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
    const bool square = side * side == n;
    std::ofstream out(args.out_pgm, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + args.out_pgm);
    WritePgm(out, r.image, square ? side : n, square ? side : 1);
  }
  if (!args.out_times.empty()) {
    std::ofstream out(args.out_times);
    if (!out) throw ConfigError("cannot write " + args.out_times);
    WriteTimesText(out, r.image);
  } else {
    WriteTimesText(std::cout, r.image);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// approx-demo

struct ApproxArgs {
  std::string mode = "box";  // gadget, box or function
  double tau = 1.0;
  double theta = 1.0;
  double epsilon = 0.05;
  std::size_t probes = 1000;
  std::uint64_t seed = 0;
  // gadget
  std::string direction = "below";
  double t0 = 0.5;
  double t_out = 5.0;
  // box
  std::string intervals = "0.2:0.6";
  double t = 4.0;
  // function: offset + slope * sum(x) + amplitude * sin(2 pi x_0)
  std::size_t dims = 1;
  double offset = 4.0;
  double slope = 1.0;
  double amplitude = 0.0;
  std::string export_path;
};

std::vector<Interval> ParseIntervals(const std::string& text) {
  std::vector<Interval> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto colon = field.find(':');
    if (colon == std::string::npos) throw ConfigError("interval '" + field + "' needs lo:hi");
    try {
      out.push_back({std::stod(field.substr(0, colon)), std::stod(field.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ConfigError("bad interval '" + field + "'");
    }
  }
  if (out.empty()) throw ConfigError("--intervals is empty");
  return out;
}

void ExportModel(const std::string& path, const NetworkModel& model) {
  if (path.empty()) return;
  Checkpoint c;
  c.model = model;
  c.task = "approx";
  SaveCheckpoint(path, c);
}

int RunApprox(const ApproxArgs& a) {
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kEdgeMargin = 1e-6;
  std::size_t violations = 0, skipped = 0, spikes = 0;
  double max_deviation = 0.0;

  if (a.mode == "gadget") {
    if (a.direction != "below" && a.direction != "above") {
      throw ConfigError("--direction must be below or above");
    }
    const auto dir = a.direction == "below" ? GadgetDirection::kBelow : GadgetDirection::kAbove;
    const ThresholdGadget g = BuildThresholdGadget(dir, a.t0, a.t_out, a.epsilon, a.tau, a.theta);
    for (std::size_t i = 0; i < a.probes; ++i) {
      const double x = unit(rng);
      if (std::abs(x - a.t0) <= kEdgeMargin) {
        ++skipped;
        continue;
      }
      const std::vector<double> in{x};
      const double s = Forward(g.model, in).outputs()[0];
      const bool in_window = Fires(s) && s > a.t_out && s < a.t_out + a.epsilon;
      if (Fires(s)) {
        ++spikes;
        max_deviation = std::max(max_deviation, s - a.t_out);
      }
      if (g.Accepts(x) ? !in_window : Fires(s)) ++violations;
    }
    std::printf("construction threshold-gadget (%s t0=%g)\nneurons 1 (+3 fixed spikes)\n",
                a.direction.c_str(), a.t0);
    std::printf("window (%g, %g)\n", a.t_out, a.t_out + a.epsilon);
    ExportModel(a.export_path, g.model);
  } else if (a.mode == "box") {
    const BoxDetector box = BuildBoxDetector(ParseIntervals(a.intervals), a.t, a.epsilon, a.tau,
                                             a.theta);
    const std::size_t n = box.intervals.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < a.probes; ++i) {
      // Half the probes inside the box so both outcomes get exercised.
      bool near_edge = false;
      for (std::size_t d = 0; d < n; ++d) {
        const Interval& iv = box.intervals[d];
        x[d] = i % 2 ? unit(rng) : iv.lo + (iv.hi - iv.lo) * unit(rng);
        near_edge |= std::abs(x[d] - iv.lo) <= kEdgeMargin || std::abs(x[d] - iv.hi) <= kEdgeMargin;
      }
      if (near_edge) {
        ++skipped;
        continue;
      }
      const double s = Forward(box.model, x).outputs()[0];
      const bool in_window = Fires(s) && s > box.window_start && s < box.window_start + a.epsilon;
      if (Fires(s)) {
        ++spikes;
        max_deviation = std::max(max_deviation, s - box.window_start);
      }
      if (box.Contains(x) ? !in_window : Fires(s)) ++violations;
    }
    std::printf("construction box-detector (n=%zu)\nneurons %zu (bound %zu)\n", n,
                box.core_neurons, 2 * n + 4);
    std::printf("window (%.17g, %.17g)\n", box.window_start, box.window_start + a.epsilon);
    ExportModel(a.export_path, box.model);
  } else if (a.mode == "function") {
    if (a.dims == 0) throw ConfigError("--dims must be positive");
    const double offset = a.offset, slope = a.slope, amplitude = a.amplitude;
    const TargetFunction f = [=](std::span<const double> x) {
      double sum = 0.0;
      for (double v : x) sum += v;
      return offset + slope * sum + amplitude * std::sin(2.0 * std::numbers::pi * x[0]);
    };
    const double lipschitz =
        std::abs(slope) * std::sqrt(static_cast<double>(a.dims)) + 2.0 * std::numbers::pi * std::abs(amplitude);
    const ApproximatorNet net = BuildApproximator(f, a.dims, lipschitz, a.epsilon, a.tau, a.theta);
    std::vector<double> x(a.dims);
    for (std::size_t i = 0; i < a.probes; ++i) {
      if (a.dims == 1) {
        x[0] = (static_cast<double>(i) + 0.5) / static_cast<double>(a.probes);
      } else {
        for (double& v : x) v = unit(rng);
      }
      const double y = net.Evaluate(x);
      const double dev = Fires(y) ? std::abs(y - f(x)) : kNever;
      spikes += Fires(y);
      max_deviation = std::max(max_deviation, dev);
      if (!(dev < a.epsilon)) ++violations;
    }
    std::printf("construction approximator (n=%zu, K=%g, cells per dim %zu)\n", a.dims, lipschitz,
                net.cells_per_dim);
    std::printf("neurons %zu (bound %.17g)\n", net.neuron_count, net.neuron_bound);
    ExportModel(a.export_path, net.model);
  } else {
    throw ConfigError("--mode must be gadget, box or function");
  }
  std::printf("probes %zu\nskipped_near_boundary %zu\nspikes %zu\nviolations %zu\nmax_deviation %.17g\n",
              a.probes, skipped, spikes, violations, max_deviation);
  return violations == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// raster

struct RasterArgs {
  std::string checkpoint;
  std::string input;
  DataOptions data;
  std::size_t index = 0;
  std::string split = "test";
  std::string out;
  std::string traces;
  double trace_dt = 1e-3;
  double trace_end = 0.0;  // 0: a few time constants past the last spike
  bool include_inputs = false;
};

int RunRaster(RasterArgs args) {
  const Checkpoint ckpt = LoadCheckpointOrThrow(args.checkpoint);
  const NetworkModel& m = ckpt.model;
  std::vector<double> x;
  if (!args.input.empty()) {
    x = ParseTimes(args.input);
  } else {
    if (args.data.task.empty()) args.data.task = ckpt.task;
    const Task task = TaskOrThrow(args.data.task);
    const std::uint64_t seed = ckpt.config ? ckpt.config->seed : 0;
    const Dataset data = LoadSplit(args.data, task, args.split == "train", seed);
    if (args.index >= data.size()) throw ConfigError("--index past the end of the data");
    x = data[args.index].input_times;
  }
  if (x.size() != m.n_inputs()) {
    throw ConfigError("model expects " + std::to_string(m.n_inputs()) + " inputs, got " +
                      std::to_string(x.size()));
  }
  const ForwardTrace tr = Forward(m, x);
  const auto records = ExportRaster(m, tr, args.include_inputs);
  if (args.out.empty()) {
    WriteRasterCsv(std::cout, records);
  } else {
    std::ofstream out(args.out);
    if (!out) throw ConfigError("cannot write " + args.out);
    WriteRasterCsv(out, records);
  }
  if (!args.traces.empty()) {
    double last = 0.0;
    for (const RasterRecord& r : records) last = std::max(last, r.time);
    const double end = args.trace_end > 0.0 ? args.trace_end : last + 3.0 / m.tau;
    std::vector<TraceGrid> grids;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const auto& prev = tr.spike_times[l];
      const auto& pulses = m.PulsesFor(l).times;
      for (std::size_t n = 0; n < m.layers[l].n_out; ++n) {
        std::vector<SpikeEvent> ev;
        for (std::size_t i = 0; i < prev.size(); ++i) ev.push_back({prev[i], m.layers[l].weights(i, n), i});
        for (std::size_t k = 0; k < pulses.size(); ++k) {
          ev.push_back({pulses[k], m.layers[l].weights(prev.size() + k, n), prev.size() + k});
        }
        grids.push_back(SimulateDense(ev, m.tau, m.theta, 0.0, end, args.trace_dt).grid);
      }
    }
    std::ofstream out(args.traces);
    if (!out) throw ConfigError("cannot write " + args.traces);
    WriteTraceCsv(out, grids);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

void AddDataOptions(CLI::App& app, DataOptions& d, bool task_default) {
  auto* task = app.add_option("--task", d.task, "and, or, xor, circles or mnist");
  if (task_default) task->capture_default_str();
  app.add_option("--data-dir", d.data_dir, "Directory with the four MNIST IDX files");
  app.add_option("--n-train", d.n_train, "Synthetic training examples")->capture_default_str();
  app.add_option("--n-test", d.n_test, "Synthetic test examples")->capture_default_str();
  app.add_option("--train-subset", d.train_subset, "Use only the first N MNIST training images");
  app.add_option("--test-subset", d.test_subset, "Use only the first N MNIST test images");
}

int Main(int argc, char** argv) {
  CLI::App app{"Spiking networks with alpha synapses and time-to-first-spike coding"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a network and write checkpoint + metrics");
  AddDataOptions(*train_cmd, train.data, true);
  train.flags.Register(*train_cmd);
  train_cmd->add_option("--checkpoint", train.checkpoint, "Checkpoint to write")->capture_default_str();
  train_cmd->add_option("--metrics", train.metrics, "Metrics CSV to write")->capture_default_str();
  train_cmd->add_option("--resume", train.resume, "Continue from this checkpoint");
  train_cmd->add_option("--valid-fraction", train.valid_fraction,
                        "Hold out this fraction for validation and keep the best epoch");
  train_cmd->add_option("--workers", train.workers, "Threads per batch")->capture_default_str();
  train_cmd->add_flag("--quiet", train.quiet, "No per-epoch output");

  EvalArgs eval;
  eval.data.task.clear();
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and mean loss of a checkpoint");
  AddDataOptions(*eval_cmd, eval.data, false);
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint to evaluate")->required();
  eval_cmd->add_option("--split", eval.split, "train or test")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Data seed (default: the training seed)");
  eval_cmd->add_option("--workers", eval.workers, "Threads")->capture_default_str();

  DreamArgs dream;
  auto* dream_cmd = app.add_subcommand("dream", "Optimise an input until it is read as a class");
  dream_cmd->add_option("--checkpoint", dream.checkpoint, "Trained checkpoint")->required();
  dream_cmd->add_option("--target", dream.target, "Class to dream")->capture_default_str();
  dream_cmd->add_option("--lr", dream.learning_rate, "Step size")->capture_default_str();
  dream_cmd->add_option("--stop-streak", dream.stop_streak, "Consecutive hits to stop")
      ->capture_default_str();
  dream_cmd->add_option("--max-iterations", dream.max_iterations, "Iteration cap")
      ->capture_default_str();
  dream_cmd->add_option("--out-pgm", dream.out_pgm, "Write the image as binary PGM");
  dream_cmd->add_option("--out-times", dream.out_times, "Write the spike times as text");

  ApproxArgs approx;
  auto* approx_cmd = app.add_subcommand("approx-demo", "Build and verify a hand-built network");
  approx_cmd->add_option("--mode", approx.mode, "gadget, box or function")->capture_default_str();
  approx_cmd->add_option("--tau", approx.tau, "Decay constant")->capture_default_str();
  approx_cmd->add_option("--theta", approx.theta, "Threshold")->capture_default_str();
  approx_cmd->add_option("--epsilon", approx.epsilon, "Output window width")->capture_default_str();
  approx_cmd->add_option("--probes", approx.probes, "Random probes")->capture_default_str();
  approx_cmd->add_option("--seed", approx.seed, "Probe seed")->capture_default_str();
  approx_cmd->add_option("--direction", approx.direction, "Gadget: below or above");
  approx_cmd->add_option("--t0", approx.t0, "Gadget threshold");
  approx_cmd->add_option("--t-out", approx.t_out, "Gadget output time");
  approx_cmd->add_option("--intervals", approx.intervals, "Box: lo:hi per dimension, comma separated");
  approx_cmd->add_option("--t", approx.t, "Box time parameter");
  approx_cmd->add_option("--dims", approx.dims, "Function: input dimension");
  approx_cmd->add_option("--offset", approx.offset, "Function: constant term");
  approx_cmd->add_option("--slope", approx.slope, "Function: coefficient of sum(x)");
  approx_cmd->add_option("--amplitude", approx.amplitude, "Function: coefficient of sin(2 pi x0)");
  approx_cmd->add_option("--export", approx.export_path, "Save the network as a checkpoint");

  RasterArgs raster;
  raster.data.task.clear();
  auto* raster_cmd = app.add_subcommand("raster", "Spike raster (and traces) for one input");
  AddDataOptions(*raster_cmd, raster.data, false);
  raster_cmd->add_option("--checkpoint", raster.checkpoint, "Checkpoint")->required();
  raster_cmd->add_option("--input", raster.input, "Comma-separated input spike times");
  raster_cmd->add_option("--index", raster.index, "Example index when no --input is given");
  raster_cmd->add_option("--split", raster.split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  raster_cmd->add_option("--out", raster.out, "Raster CSV (default: stdout)");
  raster_cmd->add_option("--traces", raster.traces, "Also write membrane traces as CSV");
  raster_cmd->add_option("--trace-dt", raster.trace_dt, "Trace sampling step");
  raster_cmd->add_option("--trace-end", raster.trace_end, "Trace end time");
  raster_cmd->add_flag("--include-inputs", raster.include_inputs, "List input spikes too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train_cmd) return RunTrain(train);
    if (*eval_cmd) return RunEval(eval);
    if (*dream_cmd) return RunDream(dream);
    if (*approx_cmd) return RunApprox(approx);
    if (*raster_cmd) return RunRaster(raster);
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return kExitCheckpoint;
  } catch (const NoConvergence& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return kExitNoConvergence;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const DataFileError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitConfig;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitConfig;
  } catch (const LengthError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitConfig;
  } catch (const InfeasibleConfig& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitConfig;
  } catch (const InvalidSpec& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace
}  // namespace alphaspike::cli

int main(int argc, char** argv) { return alphaspike::cli::Main(argc, argv); }
