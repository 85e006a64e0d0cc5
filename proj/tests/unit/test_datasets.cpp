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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "alphaspike/datasets.hpp"

namespace alphaspike {
namespace {

TEST(Boolean, GateLabels) {
  EXPECT_EQ(BooleanLabel(Task::kXor, 0.4, 0.6), 0u);
  EXPECT_EQ(BooleanLabel(Task::kAnd, 0.1, 0.2), 0u);
  EXPECT_EQ(BooleanLabel(Task::kOr, 0.9, 0.8), 1u);
  EXPECT_EQ(BooleanLabel(Task::kXor, 0.1, 0.2), 1u);
  EXPECT_EQ(BooleanLabel(Task::kAnd, 0.1, 0.7), 1u);
  EXPECT_EQ(BooleanLabel(Task::kOr, 0.1, 0.7), 0u);
}

TEST(Boolean, BandsAndLabelsAgree) {
  for (Task task : {Task::kAnd, Task::kOr, Task::kXor}) {
    const Dataset d = GenBoolean(task, 5000, 17);
    ASSERT_EQ(d.size(), 5000u);
    std::size_t true_inputs = 0;
    for (const Example& ex : d) {
      ASSERT_EQ(ex.input_times.size(), 2u);
      for (double t : ex.input_times) {
        ASSERT_GE(t, 0.0);
        ASSERT_LE(t, 1.0);
        ASSERT_TRUE(t <= kTrueBandHi || t >= kFalseBandLo) << t;
        true_inputs += t <= kTrueBandHi;
      }
      ASSERT_EQ(ex.label, BooleanLabel(task, ex.input_times[0], ex.input_times[1]));
    }
    EXPECT_NEAR(true_inputs / 10000.0, 0.5, 0.02);
  }
  EXPECT_THROW(GenBoolean(Task::kCircles, 1, 0), std::invalid_argument);
}

TEST(Boolean, SeedReproducible) {
  const Dataset a = GenBoolean(Task::kXor, 100, 3), b = GenBoolean(Task::kXor, 100, 3);
  const Dataset c = GenBoolean(Task::kXor, 100, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Circles, GeometryAndBalance) {
  EXPECT_EQ(CircleLabel(0.5, 0.5), 0u);
  EXPECT_EQ(CircleLabel(0.5 + 0.45, 0.5), 1u);
  const Dataset d = GenCircles(100000, 5);
  std::size_t inner = 0;
  double inner_r2 = 0.0;
  for (const Example& ex : d) {
    const double x = ex.input_times[0], y = ex.input_times[1];
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
    ASSERT_GE(y, 0.0);
    ASSERT_LE(y, 1.0);
    const double r = std::hypot(x - 0.5, y - 0.5);
    if (ex.label == 0) {
      ASSERT_LE(r, 0.3 + 1e-12);
      ++inner;
      inner_r2 += r * r;
    } else {
      ASSERT_GE(r, 0.4 - 1e-12);
      ASSERT_LE(r, 0.5 + 1e-12);
    }
    ASSERT_EQ(ex.label, CircleLabel(x, y));
  }
  EXPECT_NEAR(inner / 100000.0, 0.5, 0.01);
  // Uniform by area on a disk: E[r^2] = R^2 / 2.
  EXPECT_NEAR(inner_r2 / static_cast<double>(inner), 0.09 / 2.0, 0.002);
}

TEST(Tasks, NamesRoundTrip) {
  for (Task t : {Task::kAnd, Task::kOr, Task::kXor, Task::kCircles, Task::kMnist}) {
    EXPECT_EQ(ParseTask(TaskName(t)), t);
  }
  EXPECT_THROW(ParseTask("nand"), std::invalid_argument);
}

// ---------------------------------------------------------------------------

TEST(Mnist, PixelEncoding) {
  EXPECT_EQ(EncodePixel(255), 0.0);
  EXPECT_TRUE(IsNever(EncodePixel(0)));
  EXPECT_NEAR(EncodePixel(51), 0.8, 1e-15);
  double prev = EncodePixel(1);
  for (int raw = 2; raw < 256; ++raw) {
    const double t = EncodePixel(static_cast<std::uint8_t>(raw));
    ASSERT_LT(t, prev);
    ASSERT_GE(t, 0.0);
    prev = t;
  }
}

IdxImages RandomImages(std::uint32_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  IdxImages img;
  img.count = count;
  img.rows = kMnistSide;
  img.cols = kMnistSide;
  img.pixels.resize(std::size_t{count} * kMnistSide * kMnistSide);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(byte(rng) < 150 ? 0 : byte(rng));
  return img;
}

TEST(Mnist, IdxRoundTripIsByteExact) {
  const IdxImages img = RandomImages(7, 1);
  const auto bytes = SerializeIdxImages(img);
  ASSERT_EQ(bytes.size(), 16u + 7u * 784u);
  EXPECT_EQ(bytes[2], 0x08);
  EXPECT_EQ(bytes[3], 0x03);
  EXPECT_EQ(SerializeIdxImages(ParseIdxImages(bytes)), bytes);

  const std::vector<std::uint8_t> labels{3, 1, 4, 1, 5, 9, 2};
  const auto lbytes = SerializeIdxLabels(labels);
  EXPECT_EQ(ParseIdxLabels(lbytes), labels);
  EXPECT_EQ(SerializeIdxLabels(ParseIdxLabels(lbytes)), lbytes);
}

TEST(Mnist, FormatErrors) {
  auto bytes = SerializeIdxImages(RandomImages(2, 2));
  auto bad_magic = bytes;
  bad_magic[3] = 0x01;
  EXPECT_THROW(ParseIdxImages(bad_magic), FormatError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(ParseIdxImages(truncated), FormatError);
  EXPECT_THROW(ParseIdxImages({0, 0}), FormatError);
  auto wrong_dims = bytes;
  wrong_dims[11] = 27;  // rows
  EXPECT_THROW(ParseIdxImages(wrong_dims), FormatError);
  // Label files are not image files.
  EXPECT_THROW(ParseIdxImages(SerializeIdxLabels({1, 2})), FormatError);
  EXPECT_THROW(ParseIdxLabels(bytes), FormatError);
}

TEST(Mnist, DecodeChecksCountsAndFlattensRowMajor) {
  IdxImages img = RandomImages(2, 3);
  img.pixels[784 + 28 * 5 + 7] = 255;  // second image, row 5, column 7
  const Dataset d = DecodeMnist(img, {7, 2});
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1].label, 2u);
  EXPECT_EQ(d[1].input_times[28 * 5 + 7], 0.0);
  for (std::size_t i = 0; i < 784; ++i) EXPECT_EQ(d[0].input_times[i], EncodePixel(img.pixels[i]));
  EXPECT_THROW(DecodeMnist(img, {7}), LengthError);
}

TEST(Mnist, LoadFromDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "alphaspike_mnist_unit";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  EXPECT_THROW(LoadMnist(dir, MnistSplit::kTest), DataFileError);
  const IdxImages img = RandomImages(5, 4);
  const auto write = [](const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                             static_cast<std::streamsize>(b.size()));
  };
  write(MnistImagePath(dir, MnistSplit::kTest), SerializeIdxImages(img));
  write(MnistLabelPath(dir, MnistSplit::kTest), SerializeIdxLabels({0, 1, 2, 3, 4}));
  const Dataset all = LoadMnist(dir, MnistSplit::kTest);
  EXPECT_EQ(all.size(), 5u);
  EXPECT_EQ(all[4].label, 4u);
  EXPECT_EQ(LoadMnist(dir, MnistSplit::kTest, 3).size(), 3u);
  try {
    LoadMnist(dir, MnistSplit::kTrain);
    FAIL() << "expected DataFileError";
  } catch (const DataFileError& e) {
    EXPECT_NE(std::string(e.what()).find("train-images-idx3-ubyte"), std::string::npos) << e.what();
  }
  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------

TEST(Split, SizesAndPartition) {
  Dataset d;
  for (std::size_t i = 0; i < 60000; ++i) d.push_back({{static_cast<double>(i)}, i % 10});
  const auto [train, valid] = SplitTrainValid(d, 0.9, 1);
  EXPECT_EQ(train.size(), 54000u);
  EXPECT_EQ(valid.size(), 6000u);
  std::vector<double> seen;
  for (const auto* part : {&train, &valid}) {
    for (const Example& ex : *part) seen.push_back(ex.input_times[0]);
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) ASSERT_EQ(seen[i], static_cast<double>(i));
  // Shuffled, not a plain prefix.
  EXPECT_NE(train.front().input_times[0], 0.0);

  const auto [a, b] = SplitTrainValid({{{0.1}, 0}, {{0.2}, 1}}, 0.5, 0);
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(b.size(), 1u);
  EXPECT_THROW(SplitTrainValid(d, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(SplitTrainValid(d, 0.0, 0), std::invalid_argument);
}

TEST(TextFormat, RoundTripAndErrors) {
  Dataset d = GenBoolean(Task::kOr, 20, 8);
  d.push_back({{kNever, 0.25}, 1});
  std::stringstream s;
  WriteDatasetText(s, d);
  EXPECT_NE(s.str().find("never,0.25;1"), std::string::npos);
  EXPECT_EQ(ReadDatasetText(s), d);

  std::istringstream missing("0.1,0.2\n");
  EXPECT_THROW(ReadDatasetText(missing), FormatError);
  std::istringstream bad_time("0.1,x;0\n");
  EXPECT_THROW(ReadDatasetText(bad_time), FormatError);
  std::istringstream bad_label("0.1,0.2;-1\n");
  EXPECT_THROW(ReadDatasetText(bad_label), FormatError);
}

}  // namespace
}  // namespace alphaspike
