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


// Deterministic synthetic corpus for demos, tests and benchmarks: encoded
// images with varied exposure, colour, detail and compression, a corpus
// manifest with machine tags, content features, face boxes, crowd ratings
// and an expert table.

#ifndef CURATE_SYNTHETIC_H_
#define CURATE_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "curate/image.h"

namespace curate {

struct SyntheticCorpusOptions {
  std::size_t images = 500;
  std::uint64_t seed = 1;
  std::size_t tags = 30;
  std::size_t content_classes = 8;
  std::size_t feature_dim = 16;
  // Crowd study over the first rated_images in-range images.
  std::size_t rated_images = 150;
  std::size_t workers = 60;
  std::size_t ratings_per_worker = 50;
  std::size_t expert_images = 40;
  std::size_t experts = 11;
  std::size_t test_questions_per_worker = 6;
};

struct SyntheticCorpus {
  std::filesystem::path manifest;  // corpus.jsonl
  std::filesystem::path features;  // features.txt
  std::filesystem::path faces;     // faces.jsonl
  std::filesystem::path ratings;   // ratings.jsonl
  std::filesystem::path experts;   // experts.txt
  std::size_t images = 0;
};

// Writes everything under `dir` (images in dir/images). Output bytes depend
// only on the options.
SyntheticCorpus GenerateSyntheticCorpus(const std::filesystem::path& dir,
                                        const SyntheticCorpusOptions& options = {});

// One synthetic photograph-like image; the same (seed, width, height) always
// gives the same pixels.
RgbImage SyntheticImage(std::uint64_t seed, int width, int height);

}  // namespace curate

#endif  // CURATE_SYNTHETIC_H_
