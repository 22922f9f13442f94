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

// Histogram-shaping subset selection.
//
// Every image falls into one bin per dimension. A subset of size M is scored
// by its L1 deviation from a uniform target histogram,
//
//   sum_d  w_d * sum_b | occupancy(d, b) - M / bins(d) |,
//
// summed over the seven scalar indicator dimensions and the categorical
// content dimension. UniformSample is the scalable heuristic (lazy greedy
// construction followed by a seeded swap local search); ExactSample is a
// branch-and-bound reference for desk-sized instances.

#ifndef CURATE_DIVERSITY_SAMPLER_H_
#define CURATE_DIVERSITY_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curate/indicators.h"

namespace curate {

struct BinnedDataset {
  std::vector<std::string> ids;        // ascending
  std::vector<std::string> dim_names;
  std::vector<int> bins_per_dim;
  std::vector<bool> categorical;
  std::vector<bool> degenerate;        // constant scalar dimension
  std::vector<std::vector<double>> bin_edges;  // scalar dims: bins + 1 edges
  std::vector<int> bin_of;             // ids.size() x dims, row-major

  std::size_t size() const { return ids.size(); }
  std::size_t dims() const { return bins_per_dim.size(); }
  int bin(std::size_t image, std::size_t dim) const {
    return bin_of[image * dims() + dim];
  }
};

// Equal-width bin of `value` over [lo, hi] with right-closed intervals:
// (e_j, e_{j+1}], the first bin also closed on the left.
int EqualWidthBin(double value, double lo, double hi, int bins);

struct ScalarColumn {
  std::string name;
  std::vector<double> values;  // one per id
};

// General binning. `ids` need not be sorted; the result is reordered by id.
// `categories`, when given, becomes a trailing categorical dimension whose
// bins are the category values (0..max).
BinnedDataset BinColumns(std::vector<std::string> ids, std::vector<ScalarColumn> columns,
                         int bins, const std::optional<std::vector<int>>& categories,
                         const std::string& category_name = "content");

// Seven indicator dimensions plus cluster ids when every vector has one.
// Unset JPEG quality is binned as 100. Requires bins >= 2.
BinnedDataset BinDataset(std::span<const IndicatorVector> vectors, int bins,
                         bool include_content = true);

struct SamplingProblem {
  std::size_t target_size = 0;
  std::vector<double> weights;  // per dim; empty means all 1
};

struct SampleResult {
  std::vector<std::size_t> members;  // dataset indices, ascending
  std::vector<std::string> ids;      // matching ids
  double objective = 0.0;
  std::vector<std::vector<int>> histograms;  // per dim occupancy
  std::size_t greedy_steps = 0;
  std::size_t swaps = 0;
  double greedy_objective = 0.0;
  std::vector<double> swap_trace;  // objective after every accepted swap
};

struct UniformSampleOptions {
  std::uint64_t seed = 0;
  // Accepted swaps allowed across local search and perturbation rounds.
  // 0 selects max(1000, 2 * M).
  std::size_t swap_budget = 0;
  // Perturbation rounds after the first local optimum.
  int kicks = 128;
  int kick_size = 1;  // strength cycles from kick_size to kick_size + 7
};

double Objective(const BinnedDataset& data, const SamplingProblem& problem,
                 std::span<const std::size_t> members);

std::vector<std::vector<int>> Histograms(const BinnedDataset& data,
                                         std::span<const std::size_t> members);

// Throws InvalidInput when M exceeds the dataset size.
SampleResult UniformSample(const BinnedDataset& data, const SamplingProblem& problem,
                           const UniformSampleOptions& options = {});

struct ExactSampleOptions {
  std::size_t max_size = 24;
};

// Globally optimal subset by depth-first branch and bound; refuses datasets
// larger than options.max_size.
SampleResult ExactSample(const BinnedDataset& data, const SamplingProblem& problem,
                         const ExactSampleOptions& options = {});

// Pearson chi-square of a histogram against the flat histogram of the same
// total.
double ChiSquareVsUniform(std::span<const int> histogram);

}  // namespace curate

#endif  // CURATE_DIVERSITY_SAMPLER_H_
