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
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "subsel/point_set.hpp"

namespace subsel {

using Vec3 = std::array<double, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriangleMesh& mesh);

// Throws GeometryError for out-of-range indices. Returns a copy with every
// zero-area face dropped.
TriangleMesh clean_mesh(const TriangleMesh& mesh);

// Uniform surface sampling: a face is picked with probability proportional
// to its area, then a point inside it from barycentric (u, v) with the fold
// u + v > 1 -> (1 - u, 1 - v). Pure function of (mesh, n, seed). Throws
// GeometryError when the total area is zero and ParameterError for n = 0.
PointSet sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed,
                     std::size_t label = 0, std::string name = {});

// OFF reader. Polygon faces are fan-triangulated. Malformed input raises
// ParseError naming the offending line.
TriangleMesh read_off(std::istream& in, const std::string& source = "<stream>");
TriangleMesh load_off(const std::filesystem::path& path);

}  // namespace subsel
