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

// Tag-quota coverage sampling.
//
// Phase 1 takes every image carrying a tag that occurs fewer than Q times in
// the corpus. Phase 2 visits the remaining tags by increasing corpus count
// and tops each one up to Q with its highest-confidence images that are not
// yet selected. Selection stops as soon as the size cap is reached.

#ifndef CURATE_TAG_SAMPLER_H_
#define CURATE_TAG_SAMPLER_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "curate/indicators.h"

namespace curate {

struct Posting {
  std::size_t record;  // index into the record list
  double confidence;
};

struct TagIndex {
  // tag -> number of images carrying it.
  std::map<std::string, std::size_t> phi;
  // tag -> postings by descending confidence, ties by ascending image id.
  std::map<std::string, std::vector<Posting>> postings;
  // Tags ordered by (phi ascending, tag ascending).
  std::vector<std::string> order;
};

// An image listing the same tag twice counts once, at its highest confidence.
TagIndex BuildTagIndex(std::span<const ImageRecord> records);

struct TagFulfillment {
  std::string tag;
  std::size_t phi = 0;        // count in the corpus
  std::size_t selected = 0;   // count in the selection
  bool under_quota = false;   // selected < min(Q, phi)
};

struct TagSelection {
  std::vector<std::string> ids;  // selection order
  std::size_t quota = 0;
  std::size_t size_cap = 0;
  bool capped = false;
  std::size_t phase1_size = 0;
  std::vector<TagFulfillment> trace;  // in TagIndex::order
};

// size_cap == 0 disables the cap. Throws InvalidInput when quota < 1.
TagSelection SampleByQuota(const TagIndex& index, std::span<const ImageRecord> records,
                           std::size_t quota, std::size_t size_cap);

struct QuotaProbe {
  std::size_t quota;
  std::size_t size;
};

struct QuotaChoice {
  std::size_t quota = 0;
  std::size_t size = 0;
  std::vector<QuotaProbe> probes;
};

// Largest integer Q in [1, max phi] whose uncapped selection size is at most
// target_size * (1 + tolerance), found by bisection. Selection size must be
// non-decreasing in Q; a probe contradicting that throws std::logic_error.
// When even Q = 1 overshoots, throws InvalidInput reporting the floor.
QuotaChoice ChooseQuota(const TagIndex& index, std::span<const ImageRecord> records,
                        std::size_t target_size, double tolerance);

}  // namespace curate

#endif  // CURATE_TAG_SAMPLER_H_
