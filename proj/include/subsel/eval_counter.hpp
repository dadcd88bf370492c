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

#include <atomic>
#include <cstdint>

namespace subsel {

// Exact pass accounting for one experiment run. `forwards` and `backwards`
// count evaluations made by an optimizer; `audits` counts evaluations made
// only to report results (objective columns, post-attack accuracy), so they
// never blur the cost comparison between strategies.
class EvalCounter {
 public:
  struct Snapshot {
    std::uint64_t forwards = 0;
    std::uint64_t backwards = 0;
    std::uint64_t audits = 0;

    Snapshot operator-(const Snapshot& o) const {
      return {forwards - o.forwards, backwards - o.backwards, audits - o.audits};
    }
    bool operator==(const Snapshot&) const = default;
  };

  void add_forward() { forwards_.fetch_add(1, std::memory_order_relaxed); }
  void add_backward() { backwards_.fetch_add(1, std::memory_order_relaxed); }
  void add_audit() { audits_.fetch_add(1, std::memory_order_relaxed); }

  Snapshot snapshot() const {
    return {forwards_.load(std::memory_order_relaxed), backwards_.load(std::memory_order_relaxed),
            audits_.load(std::memory_order_relaxed)};
  }

 private:
  std::atomic<std::uint64_t> forwards_{0};
  std::atomic<std::uint64_t> backwards_{0};
  std::atomic<std::uint64_t> audits_{0};
};

// How an evaluation is charged.
enum class Charge { kForward, kAudit };

}  // namespace subsel
