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

#include "subsel/shapes.hpp"

#include <cmath>
#include <numbers>

#include "subsel/errors.hpp"

namespace subsel {

namespace {

constexpr double kPi = std::numbers::pi;

double default_ratio(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::kCylinder:
      return 1.0;
    case ShapeFamily::kTorus:
      return 0.35;
    case ShapeFamily::kCone:
      return 1.0;
    default:
      return 1.0;
  }
}

std::uint32_t add(TriangleMesh& m, Vec3 v) {
  m.vertices.push_back(v);
  return static_cast<std::uint32_t>(m.vertices.size() - 1);
}

// Ring of `seg` vertices at height z and radius r; returns the first index.
std::uint32_t ring(TriangleMesh& m, std::size_t seg, double r, double z) {
  const auto first = static_cast<std::uint32_t>(m.vertices.size());
  for (std::size_t i = 0; i < seg; ++i) {
    const double t = 2 * kPi * static_cast<double>(i) / static_cast<double>(seg);
    add(m, {r * std::cos(t), r * std::sin(t), z});
  }
  return first;
}

void band(TriangleMesh& m, std::size_t seg, std::uint32_t lo, std::uint32_t hi) {
  for (std::uint32_t i = 0; i < seg; ++i) {
    const std::uint32_t j = static_cast<std::uint32_t>((i + 1) % seg);
    m.faces.push_back({lo + i, lo + j, hi + j});
    m.faces.push_back({lo + i, hi + j, hi + i});
  }
}

void fan(TriangleMesh& m, std::size_t seg, std::uint32_t centre, std::uint32_t rim) {
  for (std::uint32_t i = 0; i < seg; ++i) {
    const std::uint32_t j = static_cast<std::uint32_t>((i + 1) % seg);
    m.faces.push_back({centre, rim + i, rim + j});
  }
}

TriangleMesh sphere_mesh(std::size_t seg) {
  TriangleMesh m;
  const std::size_t stacks = std::max<std::size_t>(seg / 2, 2);
  const auto south = add(m, {0, 0, -1});
  std::vector<std::uint32_t> rings;
  for (std::size_t s = 1; s < stacks; ++s) {
    const double phi = -kPi / 2 + kPi * static_cast<double>(s) / static_cast<double>(stacks);
    rings.push_back(ring(m, seg, std::cos(phi), std::sin(phi)));
  }
  const auto north = add(m, {0, 0, 1});
  for (std::uint32_t i = 0; i < seg; ++i) {
    const std::uint32_t j = static_cast<std::uint32_t>((i + 1) % seg);
    m.faces.push_back({south, rings.front() + j, rings.front() + i});
    m.faces.push_back({north, rings.back() + i, rings.back() + j});
  }
  for (std::size_t r = 0; r + 1 < rings.size(); ++r) band(m, seg, rings[r], rings[r + 1]);
  return m;
}

TriangleMesh cube_mesh() {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    add(m, {(i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0});
  }
  // Two triangles per face; vertex bit k is the sign of axis k.
  const std::uint32_t quads[6][4] = {{0, 2, 6, 4}, {1, 5, 7, 3}, {0, 4, 5, 1},
                                     {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 6, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

TriangleMesh cylinder_mesh(std::size_t seg, double half_height) {
  TriangleMesh m;
  const auto lo = ring(m, seg, 1.0, -half_height);
  const auto hi = ring(m, seg, 1.0, half_height);
  band(m, seg, lo, hi);
  fan(m, seg, add(m, {0, 0, -half_height}), lo);
  fan(m, seg, add(m, {0, 0, half_height}), hi);
  return m;
}

TriangleMesh torus_mesh(std::size_t seg, double tube) {
  TriangleMesh m;
  const std::size_t minor = std::max<std::size_t>(seg / 2, 3);
  for (std::size_t i = 0; i < seg; ++i) {
    const double t = 2 * kPi * static_cast<double>(i) / static_cast<double>(seg);
    for (std::size_t j = 0; j < minor; ++j) {
      const double p = 2 * kPi * static_cast<double>(j) / static_cast<double>(minor);
      const double r = 1.0 + tube * std::cos(p);
      add(m, {r * std::cos(t), r * std::sin(t), tube * std::sin(p)});
    }
  }
  auto at = [&](std::size_t i, std::size_t j) {
    return static_cast<std::uint32_t>((i % seg) * minor + (j % minor));
  };
  for (std::size_t i = 0; i < seg; ++i) {
    for (std::size_t j = 0; j < minor; ++j) {
      m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  return m;
}

TriangleMesh cone_mesh(std::size_t seg, double half_height) {
  TriangleMesh m;
  const auto base = ring(m, seg, 1.0, -half_height);
  fan(m, seg, add(m, {0, 0, half_height}), base);
  fan(m, seg, add(m, {0, 0, -half_height}), base);
  return m;
}

void snap(ShapeFamily family, double ratio, std::span<double> p) {
  const double rxy = std::hypot(p[0], p[1]);
  switch (family) {
    case ShapeFamily::kSphere: {
      const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      if (r > 0) {
        for (double& v : p) v /= r;
      }
      break;
    }
    case ShapeFamily::kCylinder:
      // Cap points keep |z| == half height exactly and stay planar.
      if (std::abs(p[2]) < ratio && rxy > 0) {
        p[0] /= rxy;
        p[1] /= rxy;
      }
      break;
    case ShapeFamily::kCone:
      if (p[2] > -ratio && rxy > 0) {
        const double target = (ratio - p[2]) / (2 * ratio);
        p[0] *= target / rxy;
        p[1] *= target / rxy;
      }
      break;
    case ShapeFamily::kTorus:
      if (rxy > 0) {
        const double cx = p[0] / rxy, cy = p[1] / rxy;
        const double dx = p[0] - cx, dy = p[1] - cy, dz = p[2];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d > 0) {
          p[0] = cx + dx * ratio / d;
          p[1] = cy + dy * ratio / d;
          p[2] = dz * ratio / d;
        }
      }
      break;
    case ShapeFamily::kCube:
      break;
  }
}

}  // namespace

std::string_view family_name(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::kSphere:
      return "sphere";
    case ShapeFamily::kCube:
      return "cube";
    case ShapeFamily::kCylinder:
      return "cylinder";
    case ShapeFamily::kTorus:
      return "torus";
    case ShapeFamily::kCone:
      return "cone";
  }
  return "unknown";
}

ShapeFamily parse_family(std::string_view name) {
  for (ShapeFamily f : all_families()) {
    if (family_name(f) == name) return f;
  }
  throw SpecError("unknown shape family '" + std::string(name) + "'");
}

const std::vector<ShapeFamily>& all_families() {
  static const std::vector<ShapeFamily> families{ShapeFamily::kSphere, ShapeFamily::kCube,
                                                 ShapeFamily::kCylinder, ShapeFamily::kTorus,
                                                 ShapeFamily::kCone};
  return families;
}

double ShapeSpec::resolved_ratio() const { return ratio > 0 ? ratio : default_ratio(family); }

void ShapeSpec::validate() const {
  if (!(scale > 0) || !std::isfinite(scale)) throw SpecError("shape scale must be positive");
  for (double a : aspect) {
    if (!(a > 0) || !std::isfinite(a)) throw SpecError("shape aspect factors must be positive");
  }
  if (ratio < 0 || !std::isfinite(ratio)) throw SpecError("shape ratio must be positive (or 0 for default)");
  if (family == ShapeFamily::kTorus && resolved_ratio() >= 1.0) {
    throw SpecError("torus tube ratio must be below 1");
  }
  if (segments < 3) throw SpecError("shape tessellation needs at least 3 segments");
}

TriangleMesh shape_mesh(const ShapeSpec& spec) {
  spec.validate();
  const double ratio = spec.resolved_ratio();
  switch (spec.family) {
    case ShapeFamily::kSphere:
      return sphere_mesh(spec.segments);
    case ShapeFamily::kCube:
      return cube_mesh();
    case ShapeFamily::kCylinder:
      return cylinder_mesh(spec.segments, ratio);
    case ShapeFamily::kTorus:
      return torus_mesh(spec.segments, ratio);
    case ShapeFamily::kCone:
      return cone_mesh(spec.segments, ratio);
  }
  throw SpecError("unknown shape family");
}

PointSet make_shape(const ShapeSpec& spec, std::size_t n, std::uint64_t seed) {
  const TriangleMesh mesh = shape_mesh(spec);
  const auto label = static_cast<std::size_t>(spec.family);
  PointSet sampled = sample_mesh(mesh, n, seed, label, std::string(family_name(spec.family)));
  Matrix coords = sampled.coords();
  const double ratio = spec.resolved_ratio();
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    auto p = coords.row(i);
    snap(spec.family, ratio, p);
    for (std::size_t k = 0; k < 3; ++k) p[k] *= spec.scale * spec.aspect[k];
  }
  return sampled.with_coords(std::move(coords));
}

PointSet normalize(const PointSet& ps) {
  const Matrix& c = ps.coords();
  const std::size_t n = c.rows(), d = c.cols();
  std::vector<double> centroid(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) centroid[k] += c(i, k);
  }
  for (double& v : centroid) v /= static_cast<double>(n);
  Matrix out(n, d);
  double max_norm = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0;
    for (std::size_t k = 0; k < d; ++k) {
      out(i, k) = c(i, k) - centroid[k];
      sq += out(i, k) * out(i, k);
    }
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  if (max_norm > 0) {
    for (double& v : out.values()) v /= max_norm;
  } else {
    for (double& v : out.values()) v = 0;
  }
  return ps.with_coords(std::move(out));
}

}  // namespace subsel
