// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "subsel/point_set.hpp"
#include "subsel/shapes.hpp"

namespace subsel {

// PSET binary point-set file, little-endian:
//
//   char[4] "PSET" | u32 version = 1 | u32 n | u32 d | u32 label |
//   f32[n * d] row-major coordinates
//
// Ids are not stored; a loaded set has ids 0..n-1.
std::string pset_bytes(const PointSet& ps);
PointSet pset_from_bytes(std::string_view bytes, std::string name = {});
void save_pset(const std::filesystem::path& path, const PointSet& ps);
PointSet load_pset(const std::filesystem::path& path);

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<PointSet> train;
  std::vector<PointSet> test;
};

struct DatasetConfig {
  std::vector<ShapeFamily> classes = all_families();
  std::size_t train_per_class = 200;
  std::size_t test_per_class = 50;
  std::size_t points = 256;
  std::uint64_t seed = 0;
  // Per-sample uniform jitter: scale in [1 - s, 1 + s], each aspect factor
  // in [1 - a, 1 + a], family ratio in [1 - r, 1 + r] times the default.
  double scale_jitter = 0.2;
  double aspect_jitter = 0.2;
  double ratio_jitter = 0.15;
};

// Deterministic synthetic shape dataset; every sample is normalized and
// derived from its own (seed, class, split, index) stream.
Dataset make_dataset(const DatasetConfig& config);

// Manifest (manifest.json) schema:
//
//   { "format": "subsel-dataset", "version": 1,
//     "classes": ["sphere", ...], "points": 256,
//     "samples": [ {"path": "train/sphere_0000.pset", "label": 0, "split": "train"}, ... ] }
//
// Paths are relative to the directory holding the manifest.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace subsel
