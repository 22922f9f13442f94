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

// Bag-of-words quantization of externally computed content features.
//
// Feature file format (text, whitespace separated):
//
//   features <count> <dim> [seed <n>]
//   <id> <v_1> ... <v_dim>        (count rows)
//
// Codebooks are written in the same format with ids c0..c{k-1} and the
// fitting seed in the header.

#ifndef CURATE_CONTENT_FEATURES_H_
#define CURATE_CONTENT_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace curate {

struct FeatureMatrix {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<double> values;  // row-major, ids.size() * dim

  std::size_t rows() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  // Rows whose ids appear in `keep`, in `keep` order. Unknown ids throw.
  FeatureMatrix Select(std::span<const std::string> keep) const;
};

struct Codebook {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> centroids;  // row-major, k * dim
  int iterations = 0;
  // Within-cluster sum of squares after each Lloyd iteration.
  std::vector<double> wcss_trace;

  std::span<const double> centroid(std::size_t c) const {
    return {centroids.data() + c * dim, dim};
  }
};

// Throws IngestError naming the offending row (zero-based data row).
FeatureMatrix ReadFeatures(std::istream& in);
FeatureMatrix ReadFeatures(const std::filesystem::path& path);
void WriteFeatures(std::ostream& out, const FeatureMatrix& features,
                   std::optional<std::uint64_t> seed = std::nullopt);

void WriteCodebook(std::ostream& out, const Codebook& codebook);
Codebook ReadCodebook(const std::filesystem::path& path);

struct KMeansOptions {
  int max_iterations = 100;
};

// k-means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iterations is reached. Deterministic in (data, k, seed).
// An emptied cluster keeps its previous centroid.
Codebook FitCodebook(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& options = {});

// Index of the nearest centroid (squared Euclidean), lowest index on ties.
int AssignCluster(std::span<const double> vector, const Codebook& codebook);

std::vector<int> AssignAll(const FeatureMatrix& features, const Codebook& codebook);

}  // namespace curate

#endif  // CURATE_CONTENT_FEATURES_H_
