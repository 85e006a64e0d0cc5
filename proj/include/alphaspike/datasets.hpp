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

// Temporally encoded datasets: noisy Boolean gates, concentric circles and
// MNIST read from the standard IDX files.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "alphaspike/spike_time.hpp"

namespace alphaspike {

struct Example {
  std::vector<double> input_times;
  std::size_t label = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

using Dataset = std::vector<Example>;

enum class Task { kAnd, kOr, kXor, kCircles, kMnist };

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LengthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or unreadable input file; the message names the path.
class DataFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kAnd: return "and";
    case Task::kOr: return "or";
    case Task::kXor: return "xor";
    case Task::kCircles: return "circles";
    case Task::kMnist: return "mnist";
  }
  return "?";
}

inline Task ParseTask(std::string_view name) {
  for (Task t : {Task::kAnd, Task::kOr, Task::kXor, Task::kCircles, Task::kMnist}) {
    if (TaskName(t) == name) return t;
  }
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

inline bool IsBoolean(Task task) {
  return task == Task::kAnd || task == Task::kOr || task == Task::kXor;
}

// Boolean encoding: True in [0, 0.45], False in [0.55, 1].
inline constexpr double kTrueBandHi = 0.45;
inline constexpr double kFalseBandLo = 0.55;

inline bool GateValue(Task task, bool a, bool b) {
  switch (task) {
    case Task::kAnd: return a && b;
    case Task::kOr: return a || b;
    case Task::kXor: return a != b;
    default: throw std::invalid_argument("not a Boolean task");
  }
}

/// Label of a Boolean example read back from its spike times. Class 0 is True.
inline std::size_t BooleanLabel(Task task, double t_a, double t_b) {
  return GateValue(task, t_a <= kTrueBandHi, t_b <= kTrueBandHi) ? 0 : 1;
}

inline Dataset GenBoolean(Task task, std::size_t n, std::uint64_t seed) {
  if (!IsBoolean(task)) throw std::invalid_argument("GenBoolean needs and, or or xor");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> true_band(0.0, kTrueBandHi);
  std::uniform_real_distribution<double> false_band(kFalseBandLo, 1.0);
  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = coin(rng);
    const bool b = coin(rng);
    Example ex;
    ex.input_times = {a ? true_band(rng) : false_band(rng), b ? true_band(rng) : false_band(rng)};
    ex.label = GateValue(task, a, b) ? 0 : 1;
    out.push_back(std::move(ex));
  }
  return out;
}

// Circles: class 0 is the inner disk, class 1 the annulus, both centred at
// (0.5, 0.5) so that coordinates stay inside the unit square.
inline constexpr double kCircleCenter = 0.5;
inline constexpr double kInnerRadius = 0.3;
inline constexpr double kAnnulusInner = 0.4;
inline constexpr double kAnnulusOuter = 0.5;

inline std::size_t CircleLabel(double x, double y) {
  const double r = std::hypot(x - kCircleCenter, y - kCircleCenter);
  return r <= kInnerRadius ? 0 : 1;
}

inline Dataset GenCircles(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool outer = coin(rng);
    // Uniform by area: r^2 is uniform between the squared radii.
    const double r2_lo = outer ? kAnnulusInner * kAnnulusInner : 0.0;
    const double r2_hi = outer ? kAnnulusOuter * kAnnulusOuter : kInnerRadius * kInnerRadius;
    const double r = std::sqrt(r2_lo + unit(rng) * (r2_hi - r2_lo));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    Example ex;
    ex.input_times = {kCircleCenter + r * std::cos(phi), kCircleCenter + r * std::sin(phi)};
    ex.label = outer ? 1 : 0;
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// IDX files.

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;
inline constexpr std::uint32_t kMnistSide = 28;

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
};

namespace detail {

inline std::uint32_t ReadBigEndian32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw FormatError("IDX header truncated");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline void AppendBigEndian32(std::vector<std::uint8_t>& bytes, std::uint32_t v) {
  bytes.push_back(static_cast<std::uint8_t>(v >> 24));
  bytes.push_back(static_cast<std::uint8_t>(v >> 16));
  bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  bytes.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace detail

inline IdxImages ParseIdxImages(const std::vector<std::uint8_t>& bytes) {
  const std::uint32_t magic = detail::ReadBigEndian32(bytes, 0);
  if (magic != kIdxImageMagic) {
    throw FormatError("bad IDX image magic " + std::to_string(magic));
  }
  IdxImages img;
  img.count = detail::ReadBigEndian32(bytes, 4);
  img.rows = detail::ReadBigEndian32(bytes, 8);
  img.cols = detail::ReadBigEndian32(bytes, 12);
  if (img.rows != kMnistSide || img.cols != kMnistSide) {
    throw FormatError("IDX images are " + std::to_string(img.rows) + "x" +
                      std::to_string(img.cols) + ", expected 28x28");
  }
  const std::size_t n = std::size_t{img.count} * img.rows * img.cols;
  if (bytes.size() != 16 + n) throw FormatError("IDX image payload size mismatch");
  img.pixels.assign(bytes.begin() + 16, bytes.end());
  return img;
}

inline std::vector<std::uint8_t> SerializeIdxImages(const IdxImages& img) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + img.pixels.size());
  detail::AppendBigEndian32(bytes, kIdxImageMagic);
  detail::AppendBigEndian32(bytes, img.count);
  detail::AppendBigEndian32(bytes, img.rows);
  detail::AppendBigEndian32(bytes, img.cols);
  bytes.insert(bytes.end(), img.pixels.begin(), img.pixels.end());
  return bytes;
}

inline std::vector<std::uint8_t> ParseIdxLabels(const std::vector<std::uint8_t>& bytes) {
  const std::uint32_t magic = detail::ReadBigEndian32(bytes, 0);
  if (magic != kIdxLabelMagic) {
    throw FormatError("bad IDX label magic " + std::to_string(magic));
  }
  const std::uint32_t count = detail::ReadBigEndian32(bytes, 4);
  if (bytes.size() != 8 + std::size_t{count}) throw FormatError("IDX label payload size mismatch");
  return {bytes.begin() + 8, bytes.end()};
}

inline std::vector<std::uint8_t> SerializeIdxLabels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + labels.size());
  detail::AppendBigEndian32(bytes, kIdxLabelMagic);
  detail::AppendBigEndian32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  return bytes;
}

inline std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFileError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Ink intensity to spike time: full ink at 0, background never fires,
/// linear in between.
inline double EncodePixel(std::uint8_t raw) {
  if (raw == 0) return kNever;
  return 1.0 - static_cast<double>(raw) / 255.0;
}

enum class MnistSplit { kTrain, kTest };

inline std::filesystem::path MnistImagePath(const std::filesystem::path& dir, MnistSplit split) {
  return dir / (split == MnistSplit::kTrain ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte");
}

inline std::filesystem::path MnistLabelPath(const std::filesystem::path& dir, MnistSplit split) {
  return dir / (split == MnistSplit::kTrain ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte");
}

inline Dataset DecodeMnist(const IdxImages& images, const std::vector<std::uint8_t>& labels) {
  if (images.count != labels.size()) {
    throw LengthError("IDX image count " + std::to_string(images.count) +
                      " does not match label count " + std::to_string(labels.size()));
  }
  const std::size_t stride = std::size_t{images.rows} * images.cols;
  Dataset out(images.count);
  for (std::size_t i = 0; i < images.count; ++i) {
    Example& ex = out[i];
    ex.input_times.resize(stride);
    for (std::size_t p = 0; p < stride; ++p) {
      ex.input_times[p] = EncodePixel(images.pixels[i * stride + p]);
    }
    if (labels[i] > 9) throw FormatError("label out of range at index " + std::to_string(i));
    ex.label = labels[i];
  }
  return out;
}

/// Loads one split from `dir`; `limit` caps the example count (0 = all).
inline Dataset LoadMnist(const std::filesystem::path& dir, MnistSplit split,
                         std::size_t limit = 0) {
  const auto image_path = MnistImagePath(dir, split);
  const auto label_path = MnistLabelPath(dir, split);
  for (const auto& p : {image_path, label_path}) {
    if (!std::filesystem::is_regular_file(p)) throw DataFileError("missing MNIST file " + p.string());
  }
  Dataset data = DecodeMnist(ParseIdxImages(ReadFileBytes(image_path)),
                             ParseIdxLabels(ReadFileBytes(label_path)));
  if (limit > 0 && data.size() > limit) data.resize(limit);
  return data;
}

/// Seeded shuffle, then the first round(fraction * n) examples train.
inline std::pair<Dataset, Dataset> SplitTrainValid(Dataset examples, double fraction,
                                                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(examples.begin(), examples.end(), rng);
  const auto n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(examples.size())));
  Dataset valid(std::make_move_iterator(examples.begin() + static_cast<std::ptrdiff_t>(n_train)),
                std::make_move_iterator(examples.end()));
  examples.resize(n_train);
  return {std::move(examples), std::move(valid)};
}

/// One example per line: comma-separated spike times, a semicolon, the label.
inline void WriteDatasetText(std::ostream& out, const Dataset& data) {
  for (const Example& ex : data) {
    for (std::size_t i = 0; i < ex.input_times.size(); ++i) {
      if (i > 0) out << ',';
      out << FormatSpikeTime(ex.input_times[i]);
    }
    out << ';' << ex.label << '\n';
  }
}

inline Dataset ReadDatasetText(std::istream& in) {
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::size_t semi = line.find(';');
    if (semi == std::string::npos) {
      throw FormatError("line " + std::to_string(line_no) + ": missing ';'");
    }
    Example ex;
    std::string_view times(line.data(), semi);
    while (!times.empty()) {
      const std::size_t comma = times.find(',');
      const auto field = times.substr(0, comma);
      const auto t = ParseSpikeTime(field);
      if (!t) throw FormatError("line " + std::to_string(line_no) + ": bad spike time");
      ex.input_times.push_back(*t);
      if (comma == std::string_view::npos) break;
      times.remove_prefix(comma + 1);
    }
    std::string_view label(line.data() + semi + 1, line.size() - semi - 1);
    if (!label.empty() && label.back() == '\r') label.remove_suffix(1);
    const auto [end, ec] = std::from_chars(label.data(), label.data() + label.size(), ex.label);
    if (ec != std::errc() || end != label.data() + label.size() || label.empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": bad label");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace alphaspike
