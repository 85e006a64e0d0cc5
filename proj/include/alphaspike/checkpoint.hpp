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

// JSON checkpoints: model, training config and optimizer state. Doubles are
// written in shortest round-trip form, so a load gives back the exact bits.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "alphaspike/matrix.hpp"
#include "alphaspike/network.hpp"
#include "alphaspike/training.hpp"

namespace alphaspike {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCheckpointFormat = "alphaspike-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  NetworkModel model;
  std::optional<TrainConfig> config;
  std::optional<AdamState> optimizer;
  std::size_t epoch = 0;       // epochs completed
  std::string task;            // free-form tag, e.g. "xor"
};

namespace detail {

using nlohmann::json;

inline json MatrixToJson(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()},
              {"values", std::vector<double>(m.values().begin(), m.values().end())}};
}

inline Matrix MatrixFromJson(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != rows * cols) throw CheckpointError("matrix value count mismatch");
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.values().begin());
  return m;
}

inline std::string PulseModeName(PulseMode mode) {
  return mode == PulseMode::kShared ? "shared" : "per_layer";
}

inline PulseMode ParsePulseMode(const std::string& s) {
  if (s == "shared") return PulseMode::kShared;
  if (s == "per_layer") return PulseMode::kPerLayer;
  throw CheckpointError("unknown pulse_mode '" + s + "'");
}

inline json ConfigToJson(const TrainConfig& c) {
  return json{{"batch_size", c.batch_size},
              {"clip_derivative", c.clip_derivative},
              {"decay_constant", c.decay_constant},
              {"fire_threshold", c.fire_threshold},
              {"learning_rate", c.learning_rate},
              {"learning_rate_pulses", c.learning_rate_pulses},
              {"n_hidden", c.n_hidden},
              {"n_pulses", c.n_pulses},
              {"nonpulse_init_multiplier", c.nonpulse_init_multiplier},
              {"penalty_no_spike", c.penalty_no_spike},
              {"pulse_init_multiplier", c.pulse_init_multiplier},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"update_only_on_error", c.update_only_on_error},
              {"pulse_mode", PulseModeName(c.pulse_mode)}};
}

inline TrainConfig ConfigFromJson(const json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.clip_derivative = j.at("clip_derivative").get<double>();
  c.decay_constant = j.at("decay_constant").get<double>();
  c.fire_threshold = j.at("fire_threshold").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.learning_rate_pulses = j.at("learning_rate_pulses").get<double>();
  c.n_hidden = j.at("n_hidden").get<std::vector<std::size_t>>();
  c.n_pulses = j.at("n_pulses").get<std::size_t>();
  c.nonpulse_init_multiplier = j.at("nonpulse_init_multiplier").get<double>();
  c.penalty_no_spike = j.at("penalty_no_spike").get<double>();
  c.pulse_init_multiplier = j.at("pulse_init_multiplier").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.update_only_on_error = j.at("update_only_on_error").get<bool>();
  c.pulse_mode = ParsePulseMode(j.at("pulse_mode").get<std::string>());
  return c;
}

}  // namespace detail

inline nlohmann::json CheckpointToJson(const Checkpoint& ckpt) {
  using nlohmann::json;
  const NetworkModel& m = ckpt.model;
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["task"] = ckpt.task;
  j["epoch"] = ckpt.epoch;
  j["layer_sizes"] = m.LayerSizes();
  j["decay_constant"] = m.tau;
  j["fire_threshold"] = m.theta;
  j["n_pulses"] = m.n_pulses;
  j["pulse_mode"] = detail::PulseModeName(m.pulse_mode);
  json pulses = json::array();
  for (const PulseSet& p : m.pulses) {
    pulses.push_back({{"attached_layer", p.attached_layer}, {"times", p.times}});
  }
  j["pulses"] = pulses;
  json layers = json::array();
  for (const LayerSpec& l : m.layers) {
    layers.push_back({{"n_in", l.n_in}, {"n_out", l.n_out},
                      {"weights", detail::MatrixToJson(l.weights)}});
  }
  j["layers"] = layers;
  j["config"] = ckpt.config ? detail::ConfigToJson(*ckpt.config) : json(nullptr);
  if (ckpt.optimizer) {
    const AdamState& s = *ckpt.optimizer;
    json opt;
    opt["step"] = s.step;
    json mw = json::array(), vw = json::array();
    for (std::size_t l = 0; l < s.m_weights.size(); ++l) {
      mw.push_back(detail::MatrixToJson(s.m_weights[l]));
      vw.push_back(detail::MatrixToJson(s.v_weights[l]));
    }
    opt["m_weights"] = mw;
    opt["v_weights"] = vw;
    opt["m_pulses"] = s.m_pulses;
    opt["v_pulses"] = s.v_pulses;
    j["optimizer"] = opt;
  } else {
    j["optimizer"] = nullptr;
  }
  return j;
}

inline Checkpoint CheckpointFromJson(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
      throw CheckpointError("not an alphaspike checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version");
    }
    Checkpoint ckpt;
    ckpt.task = j.value("task", "");
    ckpt.epoch = j.at("epoch").get<std::size_t>();
    NetworkModel& m = ckpt.model;
    m.tau = j.at("decay_constant").get<double>();
    m.theta = j.at("fire_threshold").get<double>();
    m.n_pulses = j.at("n_pulses").get<std::size_t>();
    m.pulse_mode = detail::ParsePulseMode(j.at("pulse_mode").get<std::string>());
    for (const auto& p : j.at("pulses")) {
      m.pulses.push_back({p.at("times").get<std::vector<double>>(),
                          p.at("attached_layer").get<int>()});
    }
    for (const auto& l : j.at("layers")) {
      LayerSpec layer;
      layer.n_in = l.at("n_in").get<std::size_t>();
      layer.n_out = l.at("n_out").get<std::size_t>();
      layer.weights = detail::MatrixFromJson(l.at("weights"));
      m.layers.push_back(std::move(layer));
    }
    m.Validate();
    if (j.at("layer_sizes").get<std::vector<std::size_t>>() != m.LayerSizes()) {
      throw CheckpointError("layer_sizes disagree with the stored layers");
    }
    if (!j.at("config").is_null()) ckpt.config = detail::ConfigFromJson(j.at("config"));
    if (!j.at("optimizer").is_null()) {
      const auto& o = j.at("optimizer");
      AdamState s;
      s.step = o.at("step").get<std::uint64_t>();
      for (const auto& x : o.at("m_weights")) s.m_weights.push_back(detail::MatrixFromJson(x));
      for (const auto& x : o.at("v_weights")) s.v_weights.push_back(detail::MatrixFromJson(x));
      s.m_pulses = o.at("m_pulses").get<std::vector<std::vector<double>>>();
      s.v_pulses = o.at("v_pulses").get<std::vector<std::vector<double>>>();
      const AdamState shape = AdamState::For(m);
      bool ok = s.m_weights.size() == shape.m_weights.size() &&
                s.v_weights.size() == shape.v_weights.size() &&
                s.m_pulses.size() == shape.m_pulses.size() &&
                s.v_pulses.size() == shape.v_pulses.size();
      for (std::size_t l = 0; ok && l < s.m_weights.size(); ++l) {
        ok = s.m_weights[l].rows() == shape.m_weights[l].rows() &&
             s.m_weights[l].cols() == shape.m_weights[l].cols() &&
             s.v_weights[l].rows() == shape.v_weights[l].rows() &&
             s.v_weights[l].cols() == shape.v_weights[l].cols();
      }
      for (std::size_t p = 0; ok && p < s.m_pulses.size(); ++p) {
        ok = s.m_pulses[p].size() == shape.m_pulses[p].size() &&
             s.v_pulses[p].size() == shape.v_pulses[p].size();
      }
      if (!ok) throw CheckpointError("optimizer state shape mismatch");
      ckpt.optimizer = std::move(s);
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const InvalidSpec& e) {
    throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

inline std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  return CheckpointToJson(ckpt).dump(1) + "\n";
}

inline Checkpoint ParseCheckpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return CheckpointFromJson(j);
}

inline void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << SerializeCheckpoint(ckpt);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFileError("cannot open checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseCheckpoint(buf.str());
}

}  // namespace alphaspike
