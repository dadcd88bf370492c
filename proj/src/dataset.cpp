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

#include "subsel/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "subsel/errors.hpp"

namespace subsel {

namespace {

constexpr std::string_view kPsetMagic = "PSET";
constexpr std::uint32_t kPsetVersion = 1;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

std::string pset_bytes(const PointSet& ps) {
  detail::ByteWriter w;
  w.raw(kPsetMagic);
  w.u32(kPsetVersion);
  w.u32(static_cast<std::uint32_t>(ps.size()));
  w.u32(static_cast<std::uint32_t>(ps.dim()));
  w.u32(static_cast<std::uint32_t>(ps.label()));
  for (double v : ps.coords().values()) w.f32(static_cast<float>(v));
  return w.take();
}

PointSet pset_from_bytes(std::string_view bytes, std::string name) {
  detail::ByteReader r(bytes, "pset");
  if (r.raw(4) != kPsetMagic) throw FormatError("pset: bad magic (expected PSET)");
  if (const auto v = r.u32(); v != kPsetVersion) {
    throw FormatError("pset: unsupported version " + std::to_string(v));
  }
  const std::uint32_t n = r.u32(), d = r.u32(), label = r.u32();
  if (n == 0) throw FormatError("pset: empty point set");
  const std::uint64_t count = std::uint64_t{n} * d;
  if (count * 4 != r.remaining()) {
    throw FormatError("pset: payload has " + std::to_string(r.remaining()) + " bytes, expected " +
                      std::to_string(count * 4));
  }
  std::vector<double> data(count);
  for (double& v : data) v = r.f32();
  return PointSet(Matrix(n, d, std::move(data)), label, std::move(name));
}

void save_pset(const std::filesystem::path& path, const PointSet& ps) {
  // PointSet construction already rejects n = 0, so every value here is valid.
  write_file(path, pset_bytes(ps));
}

PointSet load_pset(const std::filesystem::path& path) {
  return pset_from_bytes(read_file(path), path.stem().string());
}

Dataset make_dataset(const DatasetConfig& config) {
  if (config.classes.empty()) throw ParameterError("dataset needs at least one class");
  if (config.points == 0) throw ParameterError("points per sample must be positive");
  for (double j : {config.scale_jitter, config.aspect_jitter, config.ratio_jitter}) {
    if (!(j >= 0 && j < 1)) throw ParameterError("jitter fractions must lie in [0, 1)");
  }
  Dataset ds;
  for (ShapeFamily f : config.classes) ds.class_names.emplace_back(family_name(f));

  auto generate = [&](std::size_t label, std::uint32_t split, std::size_t index) {
    const ShapeFamily family = config.classes[label];
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(label), split, static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    auto jitter = [&rng](double amount) {
      return std::uniform_real_distribution<double>(1.0 - amount, 1.0 + amount)(rng);
    };
    ShapeSpec spec;
    spec.family = family;
    spec.scale = jitter(config.scale_jitter);
    for (double& a : spec.aspect) a = jitter(config.aspect_jitter);
    ShapeSpec defaults;
    defaults.family = family;
    spec.ratio = defaults.resolved_ratio() * jitter(config.ratio_jitter);
    const std::uint64_t sample_seed = rng();
    PointSet raw = make_shape(spec, config.points, sample_seed);
    char name[96];
    std::snprintf(name, sizeof(name), "%s_%s_%04zu", std::string(family_name(family)).c_str(),
                  split == 0 ? "train" : "test", index);
    PointSet ps = normalize(raw);
    return PointSet(ps.ids(), ps.coords(), label, name);
  };

  for (std::size_t c = 0; c < config.classes.size(); ++c) {
    for (std::size_t i = 0; i < config.train_per_class; ++i) ds.train.push_back(generate(c, 0, i));
    for (std::size_t i = 0; i < config.test_per_class; ++i) ds.test.push_back(generate(c, 1, i));
  }
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* split : {"train", "test"}) {
    fs::create_directories(dir / split, ec);
    if (ec) throw DataError("cannot create " + (dir / split).string() + ": " + ec.message());
  }
  nlohmann::ordered_json manifest;
  manifest["format"] = "subsel-dataset";
  manifest["version"] = 1;
  manifest["classes"] = dataset.class_names;
  std::size_t points = 0;
  auto samples = nlohmann::ordered_json::array();
  auto emit = [&](const std::vector<PointSet>& split, const char* tag) {
    for (const auto& ps : split) {
      if (ps.name().empty()) throw DataError("dataset sample without a name cannot be written");
      const std::string rel = std::string(tag) + "/" + ps.name() + ".pset";
      save_pset(dir / rel, ps);
      points = ps.size();
      samples.push_back({{"path", rel}, {"label", ps.label()}, {"split", tag}});
    }
  };
  emit(dataset.train, "train");
  emit(dataset.test, "test");
  manifest["points"] = points;
  manifest["samples"] = std::move(samples);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    if (manifest.at("format") != "subsel-dataset" || manifest.at("version") != 1) {
      throw FormatError(path.string() + ": not a version 1 subsel dataset manifest");
    }
    Dataset ds;
    ds.class_names = manifest.at("classes").get<std::vector<std::string>>();
    for (const auto& s : manifest.at("samples")) {
      const auto rel = s.at("path").get<std::string>();
      const auto label = s.at("label").get<std::size_t>();
      const auto split = s.at("split").get<std::string>();
      if (label >= ds.class_names.size()) {
        throw DataError(path.string() + ": sample " + rel + " has label " + std::to_string(label) +
                        " but only " + std::to_string(ds.class_names.size()) + " classes");
      }
      PointSet ps = load_pset(dir / rel);
      if (ps.label() != label) throw DataError(rel + ": label disagrees with the manifest");
      if (split == "train") {
        ds.train.push_back(std::move(ps));
      } else if (split == "test") {
        ds.test.push_back(std::move(ps));
      } else {
        throw DataError(path.string() + ": unknown split '" + split + "'");
      }
    }
    std::size_t d = 0;
    for (const auto* split : {&ds.train, &ds.test}) {
      for (const auto& ps : *split) {
        if (d == 0) d = ps.dim();
        if (ps.dim() != d) throw DataError(path.string() + ": samples disagree on dimension");
      }
    }
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace subsel
