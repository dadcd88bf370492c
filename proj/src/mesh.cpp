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

#include "subsel/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "subsel/errors.hpp"

namespace subsel {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Vec3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const Vec3 x{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

namespace {

void check_indices(const TriangleMesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (auto idx : mesh.faces[f]) {
      if (idx >= nv) {
        throw GeometryError("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                            " but the mesh has " + std::to_string(nv) + " vertices");
      }
    }
  }
}

double face_area(const TriangleMesh& mesh, std::size_t f) {
  const auto& t = mesh.faces[f];
  return triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
}

}  // namespace

double surface_area(const TriangleMesh& mesh) {
  check_indices(mesh);
  double total = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) total += face_area(mesh, f);
  return total;
}

TriangleMesh clean_mesh(const TriangleMesh& mesh) {
  check_indices(mesh);
  TriangleMesh out;
  out.vertices = mesh.vertices;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (face_area(mesh, f) > 0) out.faces.push_back(mesh.faces[f]);
  }
  return out;
}

PointSet sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed, std::size_t label,
                     std::string name) {
  if (n == 0) throw ParameterError("sample_mesh: n must be positive");
  check_indices(mesh);
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += face_area(mesh, f);
    cumulative.push_back(total);
  }
  if (!(total > 0)) throw GeometryError("sample_mesh: mesh has zero total area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix coords(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    std::size_t f = static_cast<std::size_t>(it - cumulative.begin());
    if (f >= cumulative.size()) f = cumulative.size() - 1;
    // Zero-area faces occupy an empty interval and are never selected.
    double u = unit(rng), v = unit(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const auto& t = mesh.faces[f];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    for (std::size_t k = 0; k < 3; ++k) coords(i, k) = a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]);
  }
  return PointSet(std::move(coords), label, std::move(name));
}

namespace {

// Splits the stream into non-empty, non-comment lines, remembering line
// numbers for error messages.
class OffLines {
 public:
  OffLines(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(source_ + ":" + std::to_string(number_) + ": " + msg);
  }
  [[noreturn]] void fail_eof(const std::string& what) const {
    throw ParseError(source_ + ":" + std::to_string(number_) + ": unexpected end of file, expected " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t number_ = 0;
};

}  // namespace

TriangleMesh read_off(std::istream& in, const std::string& source) {
  OffLines lines(in, source);
  std::string line;
  if (!lines.next(line)) lines.fail_eof("OFF header");
  std::istringstream header(line);
  std::string tag;
  header >> tag;
  if (tag.rfind("OFF", 0) != 0) lines.fail("missing OFF header (got '" + tag + "')");
  // Some exporters glue the counts onto the header ("OFF1024 2000 0").
  std::string rest = tag.substr(3);
  std::string remainder;
  std::getline(header, remainder);
  rest += " " + remainder;
  if (rest.find_first_not_of(" \t\r") == std::string::npos) {
    if (!lines.next(rest)) lines.fail_eof("vertex/face counts");
  }
  std::istringstream counts(rest);
  long long nv = -1, nf = -1;
  if (!(counts >> nv >> nf) || nv < 0 || nf < 0) lines.fail("malformed counts line");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!lines.next(line)) lines.fail_eof("vertex " + std::to_string(i));
    std::istringstream vs(line);
    Vec3 v{};
    if (!(vs >> v[0] >> v[1] >> v[2])) lines.fail("malformed vertex line");
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) {
      lines.fail("non-finite vertex coordinate");
    }
    mesh.vertices.push_back(v);
  }
  for (long long f = 0; f < nf; ++f) {
    if (!lines.next(line)) lines.fail_eof("face " + std::to_string(f));
    std::istringstream fs(line);
    long long k = 0;
    if (!(fs >> k) || k < 3) lines.fail("face needs a vertex count >= 3");
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(k));
    for (auto& i : idx) {
      long long v = -1;
      if (!(fs >> v)) lines.fail("face lists fewer than " + std::to_string(k) + " indices");
      if (v < 0 || v >= nv) {
        lines.fail("vertex index " + std::to_string(v) + " out of range [0, " + std::to_string(nv) + ")");
      }
      i = static_cast<std::uint32_t>(v);
    }
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) mesh.faces.push_back({idx[0], idx[j], idx[j + 1]});
  }
  return mesh;
}

TriangleMesh load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_off(in, path.string());
}

}  // namespace subsel
