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

#include <filesystem>
#include <fstream>
#include <random>

#include "alphaspike/checkpoint.hpp"

namespace alphaspike {
namespace {

Checkpoint Trained(PulseMode mode) {
  TrainConfig cfg = TrainConfig::BooleanDefaults();
  cfg.pulse_mode = mode;
  cfg.n_hidden = {3, 2};
  cfg.n_pulses = 2;
  cfg.learning_rate = 0.01;
  Checkpoint c;
  c.model = InitModel(ModelSpecFor(cfg, 2, 2), 3);
  AdamState state = AdamState::For(c.model);
  Trainer trainer(c.model, state, cfg);
  trainer.TrainEpoch(GenBoolean(Task::kXor, 50, 1), 0);
  c.config = cfg;
  c.optimizer = state;
  c.epoch = 1;
  c.task = "xor";
  return c;
}

TEST(Checkpoint, RoundTripIsExact) {
  for (PulseMode mode : {PulseMode::kShared, PulseMode::kPerLayer}) {
    const Checkpoint c = Trained(mode);
    const std::string text = SerializeCheckpoint(c);
    const Checkpoint back = ParseCheckpoint(text);
    EXPECT_EQ(back.model, c.model);
    EXPECT_EQ(back.config, c.config);
    EXPECT_EQ(back.optimizer, c.optimizer);
    EXPECT_EQ(back.epoch, 1u);
    EXPECT_EQ(back.task, "xor");
    EXPECT_EQ(SerializeCheckpoint(back), text);
  }
}

TEST(Checkpoint, ExtremeValuesSurvive) {
  Checkpoint c = Trained(PulseMode::kShared);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> e(-300, 300);
  for (double& w : c.model.layers[0].weights.values()) w = std::pow(10.0, e(rng)) * (w < 0 ? -1 : 1);
  c.model.layers[1].weights(0, 0) = 5e-324;
  c.model.layers[1].weights(0, 1) = 0.1 + 0.2;
  EXPECT_EQ(ParseCheckpoint(SerializeCheckpoint(c)).model, c.model);
}

TEST(Checkpoint, OptionalSectionsMayBeAbsent) {
  Checkpoint c = Trained(PulseMode::kPerLayer);
  c.config.reset();
  c.optimizer.reset();
  const std::string text = SerializeCheckpoint(c);
  EXPECT_NE(text.find("\"optimizer\": null"), std::string::npos);
  const Checkpoint back = ParseCheckpoint(text);
  EXPECT_FALSE(back.config.has_value());
  EXPECT_FALSE(back.optimizer.has_value());
  EXPECT_EQ(back.model, c.model);
}

TEST(Checkpoint, SelfDescribingFields) {
  const auto j = CheckpointToJson(Trained(PulseMode::kShared));
  EXPECT_EQ(j.at("format"), "alphaspike-checkpoint");
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("layer_sizes"), (std::vector<std::size_t>{2, 3, 2, 2}));
  EXPECT_EQ(j.at("decay_constant"), 1.0);
  EXPECT_EQ(j.at("fire_threshold"), 1.0);
  EXPECT_EQ(j.at("pulse_mode"), "shared");
  EXPECT_EQ(j.at("pulses").size(), 1u);
}

TEST(Checkpoint, RejectsBadInput) {
  EXPECT_THROW(ParseCheckpoint("not json"), CheckpointError);
  EXPECT_THROW(ParseCheckpoint("{}"), CheckpointError);
  EXPECT_THROW(ParseCheckpoint("[1,2]"), CheckpointError);

  const auto good = CheckpointToJson(Trained(PulseMode::kShared));
  auto version = good;
  version["version"] = 99;
  EXPECT_THROW(CheckpointFromJson(version), CheckpointError);

  auto sizes = good;
  sizes["layer_sizes"] = std::vector<int>{2, 4, 2, 2};
  EXPECT_THROW(CheckpointFromJson(sizes), CheckpointError);

  auto short_values = good;
  short_values["layers"][0]["weights"]["values"].erase(0);
  EXPECT_THROW(CheckpointFromJson(short_values), CheckpointError);

  auto mismatched = good;
  mismatched["layers"][1]["n_in"] = 4;
  EXPECT_THROW(CheckpointFromJson(mismatched), CheckpointError);

  auto optimizer = good;
  optimizer["optimizer"]["m_pulses"][0].push_back(0.0);
  EXPECT_THROW(CheckpointFromJson(optimizer), CheckpointError);

  auto mode = good;
  mode["pulse_mode"] = "sideways";
  EXPECT_THROW(CheckpointFromJson(mode), CheckpointError);

  auto type = good;
  type["epoch"] = "three";
  EXPECT_THROW(CheckpointFromJson(type), CheckpointError);
}

TEST(Checkpoint, FileIo) {
  const auto path = std::filesystem::temp_directory_path() / "alphaspike_ckpt_unit.json";
  const Checkpoint c = Trained(PulseMode::kShared);
  SaveCheckpoint(path, c);
  EXPECT_EQ(LoadCheckpoint(path).model, c.model);
  std::filesystem::remove(path);
  EXPECT_THROW(LoadCheckpoint(path), DataFileError);
}

}  // namespace
}  // namespace alphaspike
