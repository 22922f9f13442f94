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

#include "curate/content_features.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "curate/errors.h"
#include "curate/parallel.h"
#include "curate/text.h"

namespace curate {

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

struct Header {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::optional<std::uint64_t> seed;
};

Header ParseHeader(std::string_view line) {
  const auto tok = SplitWhitespace(line);
  if (tok.size() < 3 || tok[0] != "features") {
    throw IngestError("feature header must read 'features <count> <dim>'");
  }
  const auto count = ParseInt(tok[1]);
  const auto dim = ParseInt(tok[2]);
  if (!count || !dim || *count < 0 || *dim < 1) throw IngestError("bad feature header shape");
  Header h{static_cast<std::size_t>(*count), static_cast<std::size_t>(*dim), std::nullopt};
  for (std::size_t i = 3; i + 1 < tok.size(); i += 2) {
    if (tok[i] == "seed") {
      const auto s = ParseInt(tok[i + 1]);
      if (!s) throw IngestError("bad seed in feature header");
      h.seed = static_cast<std::uint64_t>(*s);
    }
  }
  return h;
}

FeatureMatrix ReadFeaturesWithHeader(std::istream& in, Header* header_out) {
  std::string line;
  bool have_header = false;
  Header header;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    header = ParseHeader(line);
    have_header = true;
    break;
  }
  if (!have_header) throw IngestError("empty feature file");
  FeatureMatrix m;
  m.dim = header.dim;
  m.ids.reserve(header.count);
  m.values.reserve(header.count * header.dim);
  std::unordered_set<std::string> seen;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    if (row >= header.count) throw IngestError("more rows than declared", row);
    const auto tok = SplitWhitespace(line);
    if (tok.size() != header.dim + 1) {
      throw IngestError("expected id plus " + std::to_string(header.dim) + " values", row);
    }
    std::string id(tok[0]);
    if (!seen.insert(id).second) throw IngestError("duplicate id " + id, row);
    for (std::size_t j = 1; j < tok.size(); ++j) {
      const auto v = ParseDouble(tok[j]);
      if (!v) throw IngestError("unparseable value", row);
      if (!std::isfinite(*v)) throw IngestError("non-finite value", row);
      m.values.push_back(*v);
    }
    m.ids.push_back(std::move(id));
    ++row;
  }
  if (row != header.count) {
    throw IngestError("declared " + std::to_string(header.count) + " rows, found " +
                          std::to_string(row),
                      row);
  }
  if (header_out) *header_out = header;
  return m;
}

}  // namespace

FeatureMatrix FeatureMatrix::Select(std::span<const std::string> keep) const {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  FeatureMatrix out;
  out.dim = dim;
  out.ids.reserve(keep.size());
  out.values.reserve(keep.size() * dim);
  for (const auto& id : keep) {
    const auto it = index.find(id);
    if (it == index.end()) throw InvalidInput("no features for id " + id);
    out.ids.push_back(id);
    const auto r = row(it->second);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

FeatureMatrix ReadFeatures(std::istream& in) { return ReadFeaturesWithHeader(in, nullptr); }

FeatureMatrix ReadFeatures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  return ReadFeatures(in);
}

void WriteFeatures(std::ostream& out, const FeatureMatrix& features,
                   std::optional<std::uint64_t> seed) {
  out << "features " << features.rows() << ' ' << features.dim;
  if (seed) out << " seed " << *seed;
  out << '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out << features.ids[i];
    for (double v : features.row(i)) out << ' ' << FormatDouble(v);
    out << '\n';
  }
}

void WriteCodebook(std::ostream& out, const Codebook& codebook) {
  FeatureMatrix m;
  m.dim = codebook.dim;
  m.values = codebook.centroids;
  for (std::size_t c = 0; c < codebook.k; ++c) m.ids.push_back("c" + std::to_string(c));
  WriteFeatures(out, m, codebook.seed);
}

Codebook ReadCodebook(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  Header header;
  FeatureMatrix m = ReadFeaturesWithHeader(in, &header);
  if (m.rows() == 0) throw IngestError("codebook has no centroids");
  Codebook cb;
  cb.k = m.rows();
  cb.dim = m.dim;
  cb.seed = header.seed.value_or(0);
  cb.centroids = std::move(m.values);
  return cb;
}

int AssignCluster(std::span<const double> vector, const Codebook& codebook) {
  if (vector.size() != codebook.dim) throw InvalidInput("feature dimension mismatch");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < codebook.k; ++c) {
    const double d = SquaredDistance(vector, codebook.centroid(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<int> AssignAll(const FeatureMatrix& features, const Codebook& codebook) {
  if (features.dim != codebook.dim) throw InvalidInput("feature dimension mismatch");
  std::vector<int> out(features.rows());
  ParallelFor(0, features.rows(),
              [&](std::size_t i) { out[i] = AssignCluster(features.row(i), codebook); });
  return out;
}

Codebook FitCodebook(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& options) {
  const std::size_t n = features.rows();
  if (k < 1) throw InvalidInput("k must be at least 1");
  if (n < k) throw InvalidInput("k-means needs at least k rows");
  const std::size_t d = features.dim;

  Codebook cb;
  cb.k = k;
  cb.dim = d;
  cb.seed = seed;
  cb.centroids.reserve(k * d);

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  auto push_centroid = [&](std::size_t row) {
    const auto r = features.row(row);
    cb.centroids.insert(cb.centroids.end(), r.begin(), r.end());
  };
  push_centroid(pick(rng));
  std::vector<double> nearest(n);
  ParallelFor(0, n, [&](std::size_t i) {
    nearest[i] = SquaredDistance(features.row(i), cb.centroid(0));
  });
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : nearest) total += v;
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    push_centroid(chosen);
    const auto added = cb.centroid(c);
    ParallelFor(0, n, [&](std::size_t i) {
      nearest[i] = std::min(nearest[i], SquaredDistance(features.row(i), added));
    });
  }

  // Lloyd iterations.
  std::vector<int> assign(n, -1);
  std::vector<int> next(n);
  for (int it = 0; it < options.max_iterations; ++it) {
    ParallelFor(0, n, [&](std::size_t i) { next[i] = AssignCluster(features.row(i), cb); });
    if (next == assign) break;
    assign.swap(next);
    std::vector<double> sums(k * d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = features.row(i);
      double* s = sums.data() + static_cast<std::size_t>(assign[i]) * d;
      for (std::size_t j = 0; j < d; ++j) s[j] += r[j];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        cb.centroids[c * d + j] = sums[c * d + j] / static_cast<double>(counts[c]);
      }
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wcss += SquaredDistance(features.row(i), cb.centroid(assign[i]));
    }
    cb.wcss_trace.push_back(wcss);
    cb.iterations = it + 1;
  }
  return cb;
}

}  // namespace curate
