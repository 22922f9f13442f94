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


// Stage orchestration over a workspace directory.
//
// Every stage reads the outputs of its upstream stages from the workspace,
// writes its own outputs there and appends a StageManifest line to
// <workspace>/manifests.jsonl. A stage refuses to run when an upstream stage
// has no manifest or when an upstream output no longer matches the digest
// recorded for it. Re-running a stage whose input and parameter digests are
// unchanged reuses the recorded outputs.
//
// Image chain: filter -> tagsample -> crop -> indicators -> trim -> cluster
//              -> sample -> dedup -> review
// Ratings:     testq -> screen -> mos -> reliability, mos -> eval
// Plotting:    export-hist (indicators + any selection stage)

#ifndef CURATE_PIPELINE_H_
#define CURATE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "curate/cropper.h"
#include "curate/indicators.h"
#include "curate/review_service.h"

namespace curate {

struct PipelineConfig {
  std::filesystem::path workspace;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency; never affects outputs

  // External inputs.
  std::filesystem::path corpus;    // corpus manifest
  std::filesystem::path features;  // content feature file
  std::filesystem::path faces;     // optional face-box sidecar
  std::filesystem::path ratings;
  std::filesystem::path experts;

  // filter
  int min_width = 960;
  int min_height = 540;
  int max_width = 6000;
  int max_height = 6000;
  std::vector<std::string> licenses;  // empty: trust each record's license_ok

  // tagsample: a fixed quota, or a target size searched by bisection
  std::size_t tag_quota = 0;
  std::size_t tag_target = 0;
  double tag_tolerance = 0.0;
  std::size_t tag_size_cap = 0;

  // crop
  ImportanceWeights crop_weights;
  bool allow_upscale = false;

  // indicators
  bool indicators_on_original = false;

  // trim
  double trim_threshold = 3.0;

  // cluster
  std::size_t clusters = 200;
  int kmeans_iterations = 100;

  // sample
  int bins = 200;
  std::size_t sample_size = 0;
  std::vector<double> dim_weights;  // empty: equal weights
  std::size_t swap_budget = 0;
  int kicks = 128;

  // dedup
  std::size_t dedup_remove = 0;

  // review
  bool review_force = false;

  // ratings analytics
  double plcc_threshold = 0.5;
  std::size_t min_ratings = 10;
  double line_clicker_ratio = 2.0;
  double quiz_threshold = 0.70;
  std::vector<std::size_t> group_sizes = {1, 2, 4, 8};
  std::size_t bootstrap_reps = 1000;
  double train_fraction = 0.8;
  std::size_t cv_reps = 100;
  double ridge_lambda = 1e-3;

  // export-hist
  int hist_bins = 200;
  std::string hist_selection = "review";
};

struct StageManifest {
  std::string stage;
  std::string input_digest;
  std::string param_digest;
  std::string output_digest;
  std::map<std::string, std::string> outputs;  // workspace-relative path -> SHA-256
  std::size_t count = 0;                       // ids in the stage's selection
  std::string ids_digest;
  double seconds = 0.0;
  bool cached = false;
};

const std::vector<std::string>& StageNames();
const std::vector<std::string>& ImageChain();

// Runs one stage. Throws StageError for unknown stages, missing upstream
// manifests and digest conflicts.
StageManifest RunStage(const std::string& name, const PipelineConfig& config,
                       bool force = false);

std::vector<StageManifest> RunPipeline(const PipelineConfig& config,
                                       std::span<const std::string> stages, bool force = false);

std::vector<StageManifest> ReadStageManifests(const std::filesystem::path& workspace);

// Selection file written by a stage ("<stage>.json", final.json for review).
std::filesystem::path SelectionPath(const std::filesystem::path& workspace,
                                    const std::string& stage);
std::vector<std::string> ReadSelectionIds(const std::filesystem::path& selection_file);

std::filesystem::path VerdictLogPath(const std::filesystem::path& workspace);

// Queue items for the dedup survivors (requires a dedup manifest). Items
// serve the cropped images; the nearest surviving neighbour is suggested as
// partner when it lies within the largest removed-pair distance.
std::vector<ReviewItem> BuildReviewItems(const PipelineConfig& config);

struct ResolutionBounds {
  int min_width = 960;
  int min_height = 540;
  int max_width = 6000;
  int max_height = 6000;
};

struct FilterResult {
  std::vector<std::string> kept;
  std::map<std::string, std::vector<std::string>> rejected;  // reason -> ids
};

// Inclusive bounds on both sides. A non-empty allow-list is matched against
// the record's license string; otherwise the record's license_ok decides.
FilterResult FilterRecords(std::span<const ImageRecord> records, const ResolutionBounds& bounds,
                           std::span<const std::string> licenses);

struct IndicatorHistogram {
  std::string indicator;
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> population;
  std::vector<std::size_t> selection;
};

// Equal-width bins over the population range with the sampler's binning
// rule; unset JPEG quality counts as 100. Selection ids must be in the
// population.
std::vector<IndicatorHistogram> ExportHistograms(std::span<const IndicatorVector> population,
                                                 std::span<const std::string> selection,
                                                 int bins);

// Tab-separated: indicator, bin, lo, hi, population, selection.
std::string FormatHistograms(std::span<const IndicatorHistogram> histograms);

}  // namespace curate

#endif  // CURATE_PIPELINE_H_
