// Copyright 2026 The Curate Authors. All Rights Reserved.
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

// Near-duplicate removal by repeatedly dropping one member of the closest
// remaining pair in indicator-plus-content space.

#ifndef CURATE_DEDUP_H_
#define CURATE_DEDUP_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "curate/indicators.h"

namespace curate {

// Scalar coordinates already mapped to [0,1] per dimension, plus an optional
// content cluster (-1 = none). Distances are Euclidean over the scalars with
// an extra 0/1 term for differing clusters.
class DistanceSpace {
 public:
  DistanceSpace() = default;

  // Normalizes each indicator with the min/max of `population`; the same
  // ranges then apply to every later lookup. Missing JPEG quality counts as
  // 100. Clusters are used when every vector carries one.
  static DistanceSpace FromIndicators(std::span<const IndicatorVector> population);

  // Coordinates are taken as given (expected in [0,1]).
  static DistanceSpace FromCoordinates(std::vector<std::string> ids,
                                       std::vector<std::vector<double>> coords,
                                       std::vector<int> clusters = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t dims() const { return dims_; }
  const std::vector<std::string>& ids() const { return ids_; }
  bool has_content() const { return has_content_; }
  std::size_t IndexOf(const std::string& id) const;

  // Symmetric in (a, b); bit-identical for either argument order.
  double SquaredDistance(std::size_t a, std::size_t b) const;
  double Distance(std::size_t a, std::size_t b) const;

 private:
  std::vector<std::string> ids_;
  std::size_t dims_ = 0;
  std::vector<double> coords_;
  std::vector<int> clusters_;
  bool has_content_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

struct RemovedPair {
  std::string removed;
  std::string kept;
  double distance = 0.0;
};

struct DedupResult {
  std::vector<std::string> ids;       // survivors, input order
  std::vector<RemovedPair> removals;  // in removal order
};

// Repeats remove_count times: take the closest remaining pair (ties by the
// lexicographically smallest (id, id) pair) and drop the member with the
// larger id. Requires remove_count < selection size.
DedupResult Dedup(std::span<const std::string> selection, const DistanceSpace& space,
                  std::size_t remove_count);

}  // namespace curate

#endif  // CURATE_DEDUP_H_
