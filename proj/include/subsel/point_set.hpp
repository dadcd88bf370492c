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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "subsel/tensor.hpp"

namespace subsel {

using ElementId = std::uint32_t;

// A set S as an ordered sequence of element embeddings T(e), one row per
// element, with stable ids. Row order is the canonical element order used
// whenever embeddings are treated as a flat vector.
class PointSet {
 public:
  PointSet() = default;
  // ids defaults to 0..n-1. Throws EmptySetError for n = 0, IdError for
  // duplicate ids and NumericError for non-finite coordinates.
  PointSet(Matrix coords, std::size_t label, std::string name = {});
  PointSet(std::vector<ElementId> ids, Matrix coords, std::size_t label, std::string name = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return coords_.cols(); }
  const std::vector<ElementId>& ids() const { return ids_; }
  const Matrix& coords() const { return coords_; }
  std::size_t label() const { return label_; }
  const std::string& name() const { return name_; }

  ElementId id_at(std::size_t row) const { return ids_[row]; }
  // Throws IdError for an unknown id.
  std::size_t row_of(ElementId id) const;
  bool contains(ElementId id) const { return index_.contains(id); }

  // Rows in the order given; ids are carried along.
  PointSet gather(std::span<const std::size_t> rows) const;
  Matrix gather_coords(std::span<const std::size_t> rows) const;

  PointSet with_coords(Matrix coords) const;

 private:
  void build_index();

  std::vector<ElementId> ids_;
  Matrix coords_;
  std::size_t label_ = 0;
  std::string name_;
  std::unordered_map<ElementId, std::size_t> index_;
};

// A subset S' of a PointSet: ascending row indices plus a membership mask.
class Subset {
 public:
  // The full set.
  explicit Subset(const PointSet& ps);
  // Throws IdError for ids not in ps (or repeated), EmptySetError when empty.
  Subset(const PointSet& ps, std::span<const ElementId> ids);

  static Subset from_rows(std::size_t universe, std::vector<std::size_t> rows);

  std::size_t size() const { return rows_.size(); }
  std::size_t universe() const { return member_.size(); }
  const std::vector<std::size_t>& rows() const { return rows_; }
  bool contains_row(std::size_t row) const { return row < member_.size() && member_[row]; }

  // Throws IdError when the row is not a member.
  void remove_row(std::size_t row);
  Subset without_row(std::size_t row) const;

  std::vector<ElementId> ids(const PointSet& ps) const;

 private:
  Subset() = default;

  std::vector<std::size_t> rows_;
  std::vector<bool> member_;
};

}  // namespace subsel
