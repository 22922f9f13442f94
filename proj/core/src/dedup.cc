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

#include "curate/dedup.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "curate/errors.h"
#include "curate/parallel.h"

namespace curate {

DistanceSpace DistanceSpace::FromIndicators(std::span<const IndicatorVector> population) {
  std::array<double, kNumIndicators> lo;
  std::array<double, kNumIndicators> hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  auto value = [](const IndicatorVector& v, int k) {
    return v.Get(static_cast<Indicator>(k)).value_or(100.0);
  };
  bool all_clustered = !population.empty();
  for (const auto& v : population) {
    for (int k = 0; k < kNumIndicators; ++k) {
      lo[k] = std::min(lo[k], value(v, k));
      hi[k] = std::max(hi[k], value(v, k));
    }
    all_clustered = all_clustered && v.cluster_id.has_value();
  }
  std::vector<std::string> ids;
  std::vector<std::vector<double>> coords;
  std::vector<int> clusters;
  for (const auto& v : population) {
    ids.push_back(v.id);
    std::vector<double> c(kNumIndicators);
    for (int k = 0; k < kNumIndicators; ++k) {
      c[k] = hi[k] > lo[k] ? (value(v, k) - lo[k]) / (hi[k] - lo[k]) : 0.0;
    }
    coords.push_back(std::move(c));
    if (all_clustered) clusters.push_back(*v.cluster_id);
  }
  return FromCoordinates(std::move(ids), std::move(coords), std::move(clusters));
}

DistanceSpace DistanceSpace::FromCoordinates(std::vector<std::string> ids,
                                             std::vector<std::vector<double>> coords,
                                             std::vector<int> clusters) {
  if (coords.size() != ids.size()) throw InvalidInput("one coordinate row per id");
  if (!clusters.empty() && clusters.size() != ids.size()) {
    throw InvalidInput("one cluster per id");
  }
  DistanceSpace s;
  s.dims_ = coords.empty() ? 0 : coords.front().size();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (coords[i].size() != s.dims_) throw InvalidInput("ragged coordinates");
    for (double v : coords[i]) {
      if (!std::isfinite(v)) throw InvalidInput("non-finite coordinate for " + ids[i]);
    }
    s.coords_.insert(s.coords_.end(), coords[i].begin(), coords[i].end());
    if (!s.index_.emplace(ids[i], i).second) throw InvalidInput("duplicate id " + ids[i]);
  }
  s.ids_ = std::move(ids);
  s.has_content_ = !clusters.empty();
  s.clusters_ = std::move(clusters);
  return s;
}

std::size_t DistanceSpace::IndexOf(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw InvalidInput("id not in distance space: " + id);
  return it->second;
}

double DistanceSpace::SquaredDistance(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  const double* pa = coords_.data() + a * dims_;
  const double* pb = coords_.data() + b * dims_;
  double d = 0.0;
  for (std::size_t k = 0; k < dims_; ++k) {
    const double t = pa[k] - pb[k];
    d += t * t;
  }
  if (has_content_ && clusters_[a] != clusters_[b]) d += 1.0;
  return d;
}

double DistanceSpace::Distance(std::size_t a, std::size_t b) const {
  return std::sqrt(SquaredDistance(a, b));
}

namespace {

// Local indices are ordered by id, so (min, max) index pairs compare like
// (min id, max id) pairs.
struct Neighbor {
  double d2 = std::numeric_limits<double>::infinity();
  std::size_t other = 0;
};

bool PairLess(double d2a, std::size_t a1, std::size_t a2, double d2b, std::size_t b1,
              std::size_t b2) {
  if (d2a != d2b) return d2a < d2b;
  const auto ka = std::minmax(a1, a2);
  const auto kb = std::minmax(b1, b2);
  return ka < kb;
}

}  // namespace

DedupResult Dedup(std::span<const std::string> selection, const DistanceSpace& space,
                  std::size_t remove_count) {
  if (remove_count >= selection.size() && !(remove_count == 0 && selection.empty())) {
    throw InvalidInput("remove_count must be smaller than the selection");
  }
  DedupResult result;
  if (remove_count == 0) {
    result.ids.assign(selection.begin(), selection.end());
    return result;
  }

  std::vector<std::string> sorted(selection.begin(), selection.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("selection contains duplicate ids");
  }
  const std::size_t n = sorted.size();
  std::vector<std::size_t> space_index(n);
  for (std::size_t i = 0; i < n; ++i) space_index[i] = space.IndexOf(sorted[i]);

  std::vector<char> alive(n, 1);
  std::vector<Neighbor> nn(n);
  auto refresh = [&](std::size_t i) {
    Neighbor best;
    bool found = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !alive[j]) continue;
      const double d2 = space.SquaredDistance(space_index[i], space_index[j]);
      if (!found || PairLess(d2, i, j, best.d2, i, best.other)) {
        best = {d2, j};
        found = true;
      }
    }
    nn[i] = best;
  };
  ParallelFor(0, n, refresh);

  for (std::size_t step = 0; step < remove_count; ++step) {
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      if (a == n || PairLess(nn[i].d2, i, nn[i].other, nn[a].d2, a, nn[a].other)) a = i;
    }
    const std::size_t b = nn[a].other;
    const std::size_t gone = std::max(a, b);
    const std::size_t stay = std::min(a, b);
    result.removals.push_back({sorted[gone], sorted[stay], std::sqrt(nn[a].d2)});
    alive[gone] = 0;
    std::vector<std::size_t> stale;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i] && nn[i].other == gone) stale.push_back(i);
    }
    ParallelFor(0, stale.size(), [&](std::size_t k) { refresh(stale[k]); });
  }

  std::unordered_set<std::string> removed;
  for (const auto& r : result.removals) removed.insert(r.removed);
  for (const auto& id : selection) {
    if (!removed.count(id)) result.ids.push_back(id);
  }
  return result;
}

}  // namespace curate
