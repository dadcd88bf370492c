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

#include "subsel/point_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subsel/errors.hpp"

namespace subsel {

PointSet::PointSet(Matrix coords, std::size_t label, std::string name)
    : coords_(std::move(coords)), label_(label), name_(std::move(name)) {
  ids_.resize(coords_.rows());
  std::iota(ids_.begin(), ids_.end(), ElementId{0});
  build_index();
}

PointSet::PointSet(std::vector<ElementId> ids, Matrix coords, std::size_t label, std::string name)
    : ids_(std::move(ids)), coords_(std::move(coords)), label_(label), name_(std::move(name)) {
  if (ids_.size() != coords_.rows()) {
    throw DimensionError("point set: " + std::to_string(ids_.size()) + " ids for " +
                         std::to_string(coords_.rows()) + " coordinate rows");
  }
  build_index();
}

void PointSet::build_index() {
  if (ids_.empty()) throw EmptySetError("point set must contain at least one element");
  for (double v : coords_.values()) {
    if (!std::isfinite(v)) throw NumericError("point set '" + name_ + "' has non-finite coordinates");
  }
  index_.reserve(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (!index_.emplace(ids_[r], r).second) {
      throw IdError("point set: duplicate element id " + std::to_string(ids_[r]));
    }
  }
}

std::size_t PointSet::row_of(ElementId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw IdError("unknown element id " + std::to_string(id));
  return it->second;
}

Matrix PointSet::gather_coords(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = coords_.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

PointSet PointSet::gather(std::span<const std::size_t> rows) const {
  std::vector<ElementId> ids;
  ids.reserve(rows.size());
  for (std::size_t r : rows) ids.push_back(ids_.at(r));
  return PointSet(std::move(ids), gather_coords(rows), label_, name_);
}

PointSet PointSet::with_coords(Matrix coords) const {
  return PointSet(ids_, std::move(coords), label_, name_);
}

Subset::Subset(const PointSet& ps) : rows_(ps.size()), member_(ps.size(), true) {
  std::iota(rows_.begin(), rows_.end(), std::size_t{0});
}

Subset::Subset(const PointSet& ps, std::span<const ElementId> ids) : member_(ps.size(), false) {
  if (ids.empty()) throw EmptySetError("subset must contain at least one element");
  for (ElementId id : ids) {
    const std::size_t r = ps.row_of(id);
    if (member_[r]) throw IdError("element id " + std::to_string(id) + " listed twice");
    member_[r] = true;
  }
  for (std::size_t r = 0; r < member_.size(); ++r) {
    if (member_[r]) rows_.push_back(r);
  }
}

Subset Subset::from_rows(std::size_t universe, std::vector<std::size_t> rows) {
  Subset s;
  s.member_.assign(universe, false);
  for (std::size_t r : rows) {
    if (r >= universe || s.member_[r]) throw IdError("invalid subset row " + std::to_string(r));
    s.member_[r] = true;
  }
  std::sort(rows.begin(), rows.end());
  s.rows_ = std::move(rows);
  return s;
}

void Subset::remove_row(std::size_t row) {
  if (!contains_row(row)) throw IdError("row " + std::to_string(row) + " is not in the subset");
  member_[row] = false;
  rows_.erase(std::lower_bound(rows_.begin(), rows_.end(), row));
}

Subset Subset::without_row(std::size_t row) const {
  Subset s = *this;
  s.remove_row(row);
  return s;
}

std::vector<ElementId> Subset::ids(const PointSet& ps) const {
  std::vector<ElementId> out;
  out.reserve(rows_.size());
  for (std::size_t r : rows_) out.push_back(ps.id_at(r));
  return out;
}

}  // namespace subsel
