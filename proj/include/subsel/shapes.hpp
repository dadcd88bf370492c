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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "subsel/mesh.hpp"
#include "subsel/point_set.hpp"

namespace subsel {

enum class ShapeFamily { kSphere, kCube, kCylinder, kTorus, kCone };

std::string_view family_name(ShapeFamily f);
ShapeFamily parse_family(std::string_view name);
const std::vector<ShapeFamily>& all_families();

// A parametric surface in a canonical frame, scaled per axis by
// scale * aspect[i] after sampling.
//
//   sphere    radius 1
//   cube      side 2, centred at the origin
//   cylinder  radius 1, height 2 * ratio, with caps
//   torus     major radius 1, tube radius ratio (0 < ratio < 1)
//   cone      base radius 1, height 2 * ratio, with base cap
struct ShapeSpec {
  ShapeFamily family = ShapeFamily::kSphere;
  double scale = 1.0;
  std::array<double, 3> aspect{1.0, 1.0, 1.0};
  double ratio = 0;         // 0 selects the family default
  std::size_t segments = 48;  // tessellation resolution around the axis

  // Throws SpecError when parameters leave their positive ranges.
  void validate() const;
  double resolved_ratio() const;
};

// Canonical-frame triangle mesh of the family (scale and aspect not applied).
TriangleMesh shape_mesh(const ShapeSpec& spec);

// Samples the mesh, snaps curved patches back onto the analytic surface, then
// applies scale and aspect. Label is the family index.
PointSet make_shape(const ShapeSpec& spec, std::size_t n, std::uint64_t seed);

// Subtracts the centroid and divides by the largest point norm. A set whose
// points all coincide maps to zeros.
PointSet normalize(const PointSet& ps);

}  // namespace subsel
