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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "curate/errors.h"

namespace curate {
namespace {

std::string Id(std::size_t i) { return "n" + std::to_string(1000 + i); }

// Naive repeated closest-pair removal over explicit coordinates.
std::vector<std::string> NaiveDedup(std::vector<std::string> ids,
                                    const std::map<std::string, std::vector<double>>& coords,
                                    std::size_t k) {
  for (std::size_t step = 0; step < k; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> pair;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < ids.size(); ++j) {
        if (i == j) continue;
        const auto& a = coords.at(ids[i]);
        const auto& b = coords.at(ids[j]);
        double d = 0;
        for (std::size_t c = 0; c < a.size(); ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
        const std::pair<std::string, std::string> p = std::minmax(ids[i], ids[j]);
        if (d < best || (d == best && p < pair)) {
          best = d;
          pair = p;
        }
      }
    }
    ids.erase(std::find(ids.begin(), ids.end(), pair.second));
  }
  return ids;
}

TEST(DistanceSpace, NormalizesAndAddsContentTerm) {
  std::vector<IndicatorVector> v(2);
  v[0].id = "a";
  v[1].id = "b";
  v[1].brightness = 1.0;
  v[1].colorfulness = 50;
  v[0].cluster_id = 1;
  v[1].cluster_id = 2;
  const auto space = DistanceSpace::FromIndicators(v);
  EXPECT_TRUE(space.has_content());
  // Two scalars differ by a full range; jpeg quality imputes to 100 for both.
  EXPECT_NEAR(space.SquaredDistance(0, 1), 3.0, 1e-12);
  EXPECT_EQ(space.SquaredDistance(0, 1), space.SquaredDistance(1, 0));
  EXPECT_EQ(space.Distance(0, 0), 0.0);
}

TEST(DistanceSpace, BoundedBySqrt8) {
  std::mt19937_64 rng(1);
  std::vector<IndicatorVector> v(30);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i].id = Id(i);
    v[i].brightness = u(rng);
    v[i].colorfulness = u(rng) * 100;
    v[i].rms_contrast = u(rng);
    v[i].sharpness = u(rng);
    v[i].bitrate = u(rng) * 8;
    v[i].resolution = 1000 + static_cast<std::int64_t>(u(rng) * 1e6);
    if (i % 3) v[i].jpeg_quality = 10 + static_cast<int>(u(rng) * 90);
    v[i].cluster_id = static_cast<int>(i % 4);
  }
  const auto space = DistanceSpace::FromIndicators(v);
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = 0; b < v.size(); ++b) {
      EXPECT_LE(space.Distance(a, b), std::sqrt(8.0) + 1e-12);
      EXPECT_EQ(space.Distance(a, b), space.Distance(b, a));
    }
}

TEST(Dedup, ZeroDistancePairRemovedFirst) {
  auto space = DistanceSpace::FromCoordinates({"a", "b", "c"}, {{0.5, 0.5}, {0.0, 1.0}, {0.5, 0.5}},
                                              {1, 2, 1});
  const std::vector<std::string> sel = {"a", "b", "c"};
  const auto r = Dedup(sel, space, 1);
  ASSERT_EQ(r.removals.size(), 1u);
  EXPECT_EQ(r.removals[0].removed, "c");
  EXPECT_EQ(r.removals[0].kept, "a");
  EXPECT_DOUBLE_EQ(r.removals[0].distance, 0.0);
  EXPECT_EQ(r.ids, (std::vector<std::string>{"a", "b"}));
}

TEST(Dedup, ZeroRemovalIsIdentity) {
  auto space = DistanceSpace::FromCoordinates({"a", "b"}, {{0.0}, {1.0}});
  const std::vector<std::string> sel = {"b", "a"};
  EXPECT_EQ(Dedup(sel, space, 0).ids, sel);
}

TEST(Dedup, RejectsRemovingEverything) {
  auto space = DistanceSpace::FromCoordinates({"a", "b"}, {{0.0}, {1.0}});
  const std::vector<std::string> sel = {"a", "b"};
  EXPECT_THROW(Dedup(sel, space, 2), InvalidInput);
}

TEST(Dedup, MatchesNaiveSimulation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng() % 40;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> coords;
    std::map<std::string, std::vector<double>> by_id;
    for (std::size_t i = 0; i < n; ++i) {
      // Dyadic grid: sums are exact, so ties are real ties.
      std::vector<double> c = {static_cast<double>(rng() % 9) / 8.0,
                               static_cast<double>(rng() % 9) / 8.0};
      ids.push_back(Id(rng() % 100000));
      if (by_id.count(ids.back())) {
        ids.pop_back();
        continue;
      }
      coords.push_back(c);
      by_id[ids.back()] = c;
    }
    const auto space = DistanceSpace::FromCoordinates(ids, coords);
    std::vector<std::string> sel = ids;
    std::shuffle(sel.begin(), sel.end(), rng);
    const std::size_t k = rng() % sel.size();
    EXPECT_EQ(Dedup(sel, space, k).ids, NaiveDedup(sel, by_id, k)) << "trial " << trial;
  }
}

TEST(Dedup, PlantedPairsLoseExactlyOneMember) {
  std::mt19937_64 rng(5);
  const double delta = 1e-3;
  for (int trial = 0; trial < 20; ++trial) {
    // Anchors on a lattice with spacing 0.125 > 10 * delta * sqrt(2).
    std::vector<std::string> ids;
    std::vector<std::vector<double>> coords;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::size_t next = 0;
    for (int gx = 0; gx < 8; ++gx) {
      for (int gy = 0; gy < 8; ++gy) {
        const std::vector<double> c = {gx * 0.125, gy * 0.125};
        ids.push_back(Id(next++));
        coords.push_back(c);
        if (rng() % 4 == 0) {
          ids.push_back(Id(next++));
          coords.push_back({c[0] + delta * 0.5, c[1]});
          pairs.emplace_back(ids[ids.size() - 2], ids.back());
        }
      }
    }
    const auto space = DistanceSpace::FromCoordinates(ids, coords);
    const auto r = Dedup(ids, space, pairs.size());
    std::set<std::string> left(r.ids.begin(), r.ids.end());
    for (const auto& [a, b] : pairs) EXPECT_EQ(left.count(a) + left.count(b), 1u);
    EXPECT_EQ(r.ids.size(), ids.size() - pairs.size());
  }
}

TEST(Dedup, RemovalDistancesNeverDecrease) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> coords;
  for (std::size_t i = 0; i < 200; ++i) {
    ids.push_back(Id(i));
    coords.push_back({u(rng), u(rng), u(rng)});
  }
  const auto space = DistanceSpace::FromCoordinates(ids, coords);
  const auto r = Dedup(ids, space, 50);
  std::set<std::string> removed;
  for (const auto& p : r.removals) removed.insert(p.removed);
  EXPECT_EQ(removed.size(), 50u);
  for (std::size_t i = 1; i < r.removals.size(); ++i) {
    EXPECT_GE(r.removals[i].distance, r.removals[i - 1].distance);
  }
  // Every surviving pair is at least as far apart as the last removed pair.
  for (std::size_t a = 0; a < r.ids.size(); ++a)
    for (std::size_t b = a + 1; b < r.ids.size(); ++b)
      EXPECT_GE(space.Distance(space.IndexOf(r.ids[a]), space.IndexOf(r.ids[b])),
                r.removals.back().distance);
}

}  // namespace
}  // namespace curate
