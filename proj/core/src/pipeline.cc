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


#include "curate/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "curate/content_features.h"
#include "curate/dedup.h"
#include "curate/digest.h"
#include "curate/diversity_sampler.h"
#include "curate/errors.h"
#include "curate/io.h"
#include "curate/parallel.h"
#include "curate/rng.h"
#include "curate/subjective.h"
#include "curate/tag_sampler.h"
#include "curate/text.h"
#include "json.hpp"

namespace curate {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr char kManifestFile[] = "manifests.jsonl";

Json ToJson(const StageManifest& m) {
  return {{"stage", m.stage},
          {"input_digest", m.input_digest},
          {"param_digest", m.param_digest},
          {"output_digest", m.output_digest},
          {"outputs", m.outputs},
          {"count", m.count},
          {"ids_digest", m.ids_digest},
          {"seconds", m.seconds}};
}

StageManifest FromJson(const Json& j) {
  StageManifest m;
  m.stage = j.at("stage").get<std::string>();
  m.input_digest = j.at("input_digest").get<std::string>();
  m.param_digest = j.at("param_digest").get<std::string>();
  m.output_digest = j.at("output_digest").get<std::string>();
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  m.count = j.at("count").get<std::size_t>();
  m.ids_digest = j.at("ids_digest").get<std::string>();
  m.seconds = j.value("seconds", 0.0);
  return m;
}

std::optional<StageManifest> LatestManifest(const fs::path& ws, const std::string& stage) {
  std::optional<StageManifest> latest;
  for (auto& m : ReadStageManifests(ws)) {
    if (m.stage == stage) latest = std::move(m);
  }
  return latest;
}

// Empty when intact, otherwise the first offending output.
std::string FirstModifiedOutput(const fs::path& ws, const StageManifest& m) {
  for (const auto& [rel, digest] : m.outputs) {
    const fs::path p = ws / rel;
    if (!fs::exists(p) || FileSha256(p) != digest) return rel;
  }
  return {};
}

std::string DigestOfOutputs(const std::map<std::string, std::string>& outputs) {
  std::string text;
  for (const auto& [rel, digest] : outputs) text += rel + " " + digest + "\n";
  return Sha256Hex(text);
}

std::string DigestOfIds(const std::vector<std::string>& ids) {
  std::string text;
  for (const auto& id : ids) text += id + "\n";
  return Sha256Hex(text);
}

Json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StageError("cannot read " + path.string());
  return Json::parse(in);
}

class StageContext {
 public:
  StageContext(const PipelineConfig& c, std::string stage)
      : config(c), ws(c.workspace), name(std::move(stage)), seed(StageSeed(c.seed, name)) {}

  fs::path Path(const std::string& rel) const { return ws / rel; }

  void WriteText(const std::string& rel, const std::string& text) {
    fs::create_directories(Path(rel).parent_path());
    WriteFileAtomically(Path(rel), text);
    Record(rel, Sha256Hex(text));
  }

  void WriteJson(const std::string& rel, const Json& j) { WriteText(rel, j.dump(1) + "\n"); }

  // Selection file with this stage's ids.
  void WriteSelection(Json body, std::vector<std::string> selected) {
    body["stage"] = name;
    body["ids"] = selected;
    body["count"] = selected.size();
    WriteJson(SelectionPath(fs::path(), name).string(), body);
    ids = std::move(selected);
  }

  void Record(const std::string& rel, const std::string& digest) {
    std::lock_guard<std::mutex> lock(mutex_);
    outputs[rel] = digest;
  }

  const PipelineConfig& config;
  fs::path ws;
  std::string name;
  std::uint64_t seed;
  std::map<std::string, std::string> outputs;
  std::vector<std::string> ids;

 private:
  std::mutex mutex_;
};

struct ExternalInput {
  std::string key;
  fs::path path;
  bool optional = false;
};

struct StageSpec {
  std::function<std::vector<std::string>(const PipelineConfig&)> upstream;
  std::function<std::vector<ExternalInput>(const PipelineConfig&)> inputs;
  std::function<Json(const PipelineConfig&)> params;
  std::function<void(StageContext&)> run;
};

std::map<std::string, const ImageRecord*> IndexRecords(const std::vector<ImageRecord>& records) {
  std::map<std::string, const ImageRecord*> index;
  for (const auto& r : records) index[r.id] = &r;
  return index;
}

std::vector<std::string> UpstreamIds(const StageContext& ctx, const std::string& stage) {
  return ReadSelectionIds(SelectionPath(ctx.ws, stage));
}

std::vector<ImageRecord> RecordsFor(const PipelineConfig& config,
                                    const std::vector<std::string>& ids) {
  const auto all = ReadCorpusManifest(config.corpus);
  const auto index = IndexRecords(all);
  std::vector<ImageRecord> out;
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw StageError("id " + id + " is not in the corpus manifest");
    out.push_back(*it->second);
  }
  return out;
}

std::string CropRel(const std::string& id) { return "crops/" + id + ".png"; }

// ---------------------------------------------------------------- stages

void RunFilter(StageContext& ctx) {
  const auto records = ReadCorpusManifest(ctx.config.corpus);
  const ResolutionBounds bounds{ctx.config.min_width, ctx.config.min_height,
                                ctx.config.max_width, ctx.config.max_height};
  const FilterResult r = FilterRecords(records, bounds, ctx.config.licenses);
  ctx.WriteSelection({{"rejected", r.rejected}}, r.kept);
}

void RunTagSample(StageContext& ctx) {
  const auto records = RecordsFor(ctx.config, UpstreamIds(ctx, "filter"));
  const TagIndex index = BuildTagIndex(records);
  Json meta;
  std::size_t quota = ctx.config.tag_quota;
  if (quota == 0) {
    if (ctx.config.tag_target == 0) throw StageError("tagsample needs tag_quota or tag_target");
    const QuotaChoice choice =
        ChooseQuota(index, records, ctx.config.tag_target, ctx.config.tag_tolerance);
    quota = choice.quota;
    Json probes = Json::array();
    for (const auto& p : choice.probes) probes.push_back({{"quota", p.quota}, {"size", p.size}});
    meta["probes"] = probes;
  }
  const TagSelection sel = SampleByQuota(index, records, quota, ctx.config.tag_size_cap);
  Json trace = Json::array();
  for (const auto& f : sel.trace) {
    trace.push_back({{"tag", f.tag},
                     {"phi", f.phi},
                     {"selected", f.selected},
                     {"under_quota", f.under_quota}});
  }
  meta["quota"] = sel.quota;
  meta["size_cap"] = sel.size_cap;
  meta["capped"] = sel.capped;
  meta["phase1_size"] = sel.phase1_size;
  meta["trace"] = trace;
  ctx.WriteSelection(meta, sel.ids);
}

void RunCrop(StageContext& ctx) {
  const auto ids = UpstreamIds(ctx, "tagsample");
  const auto records = RecordsFor(ctx.config, ids);
  std::map<std::string, std::vector<FaceBox>> faces;
  if (!ctx.config.faces.empty()) faces = ReadFaceBoxes(ctx.config.faces);
  SmartCropOptions options;
  options.allow_upscale = ctx.config.allow_upscale;
  options.weights = ctx.config.crop_weights;

  fs::create_directories(ctx.Path("crops"));
  std::vector<Json> log(records.size());
  std::vector<std::string> failure(records.size());
  ParallelFor(0, records.size(), [&](std::size_t i) {
    const ImageRecord& r = records[i];
    try {
      const RgbImage source = LoadImage(r.path);
      if (source.width != r.width || source.height != r.height) {
        throw DecodeError("decoded size differs from the manifest");
      }
      const auto fit = faces.find(r.id);
      const std::vector<FaceBox> boxes = fit == faces.end() ? std::vector<FaceBox>{} : fit->second;
      const SmartCropResult c = SmartCrop(source, boxes, options);
      const auto bytes = EncodePng(c.image);
      WriteFileAtomically(ctx.Path(CropRel(r.id)), bytes);
      ctx.Record(CropRel(r.id), Sha256Hex(bytes));
      log[i] = {{"id", r.id},
                {"source", {r.width, r.height}},
                {"resized", {c.resized.width, c.resized.height}},
                {"scale", c.scale},
                {"x", c.crop.x},
                {"y", c.crop.y},
                {"width", c.crop.width},
                {"height", c.crop.height},
                {"score", c.crop.score},
                {"warnings", c.warnings}};
    } catch (const DecodeError& e) {
      failure[i] = std::string("decode: ") + e.what();
    } catch (const InvalidInput& e) {
      failure[i] = e.what();
    }
  });
  std::string log_text;
  std::vector<std::string> kept;
  Json failed = Json::object();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!failure[i].empty()) {
      failed[records[i].id] = failure[i];
      continue;
    }
    log_text += log[i].dump() + "\n";
    kept.push_back(records[i].id);
  }
  ctx.WriteText("crop_log.jsonl", log_text);
  ctx.WriteSelection({{"failed", failed}}, kept);
}

void RunIndicators(StageContext& ctx) {
  const auto ids = UpstreamIds(ctx, "crop");
  const auto records = RecordsFor(ctx.config, ids);
  const bool original = ctx.config.indicators_on_original;
  std::vector<IndicatorVector> vectors(records.size());
  std::vector<std::string> failure(records.size());
  ParallelFor(0, records.size(), [&](std::size_t i) {
    const ImageRecord& r = records[i];
    try {
      const auto source_bytes = ReadFileBytes(r.path);
      const RgbImage pixels =
          original ? DecodeImage(source_bytes) : LoadImage(ctx.Path(CropRel(r.id)));
      vectors[i] = ComputeIndicators(r, pixels, source_bytes);
    } catch (const DecodeError& e) {
      failure[i] = std::string("decode: ") + e.what();
    } catch (const InvalidInput& e) {
      failure[i] = e.what();
    }
  });
  std::vector<IndicatorVector> ok;
  std::vector<std::string> kept;
  Json failed = Json::object();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!failure[i].empty()) {
      failed[records[i].id] = failure[i];
      continue;
    }
    ok.push_back(vectors[i]);
    kept.push_back(records[i].id);
  }
  WriteIndicatorTable(ctx.Path("indicators.jsonl"), ok);
  ctx.Record("indicators.jsonl", FileSha256(ctx.Path("indicators.jsonl")));
  ctx.WriteSelection({{"pixels", original ? "original" : "cropped"},
                      {"colorfulness_scale", "0-255"},
                      {"failed", failed}},
                     kept);
}

void RunTrim(StageContext& ctx) {
  const auto vectors = ReadIndicatorTable(ctx.Path("indicators.jsonl"));
  const TrimResult r = ZscoreTrim(vectors, ctx.config.trim_threshold);
  Json stats = Json::object();
  for (int k = 0; k < kNumIndicators; ++k) {
    stats[std::string(kIndicatorNames[k])] = {{"mean", r.stats.mean[k]},
                                              {"std", r.stats.stddev[k]},
                                              {"count", r.stats.count[k]}};
  }
  ctx.WriteSelection({{"removed", r.removed}, {"stats", stats}}, r.kept);
}

void RunCluster(StageContext& ctx) {
  const auto kept = UpstreamIds(ctx, "trim");
  const FeatureMatrix features = ReadFeatures(ctx.config.features).Select(kept);
  if (ctx.config.clusters < 1 || ctx.config.clusters > features.rows()) {
    throw StageError("cluster: k=" + std::to_string(ctx.config.clusters) + " needs between 1 and " +
                     std::to_string(features.rows()) + " clusters");
  }
  KMeansOptions km;
  km.max_iterations = ctx.config.kmeans_iterations;
  const Codebook codebook = FitCodebook(features, ctx.config.clusters, ctx.seed, km);
  const std::vector<int> assignment = AssignAll(features, codebook);
  std::ostringstream cb;
  WriteCodebook(cb, codebook);
  ctx.WriteText("codebook.txt", cb.str());

  std::unordered_map<std::string, int> cluster_of;
  for (std::size_t i = 0; i < features.rows(); ++i) cluster_of[features.ids[i]] = assignment[i];
  std::vector<IndicatorVector> clustered;
  const std::set<std::string> keep(kept.begin(), kept.end());
  for (auto& v : ReadIndicatorTable(ctx.Path("indicators.jsonl"))) {
    if (!keep.count(v.id)) continue;
    v.cluster_id = cluster_of.at(v.id);
    clustered.push_back(std::move(v));
  }
  WriteIndicatorTable(ctx.Path("clustered.jsonl"), clustered);
  ctx.Record("clustered.jsonl", FileSha256(ctx.Path("clustered.jsonl")));
  ctx.WriteSelection({{"k", codebook.k},
                      {"iterations", codebook.iterations},
                      {"wcss", codebook.wcss_trace.empty() ? 0.0 : codebook.wcss_trace.back()}},
                     kept);
}

void RunSample(StageContext& ctx) {
  const auto vectors = ReadIndicatorTable(ctx.Path("clustered.jsonl"));
  const BinnedDataset data = BinDataset(vectors, ctx.config.bins, true);
  if (ctx.config.sample_size == 0) throw StageError("sample needs sample_size");
  SamplingProblem problem;
  problem.target_size = ctx.config.sample_size;
  problem.weights = ctx.config.dim_weights;
  UniformSampleOptions options;
  options.seed = ctx.seed;
  options.swap_budget = ctx.config.swap_budget;
  options.kicks = ctx.config.kicks;
  const SampleResult r = UniformSample(data, problem, options);
  Json dims = Json::array();
  for (std::size_t d = 0; d < data.dims(); ++d) {
    dims.push_back({{"name", data.dim_names[d]},
                    {"bins", data.bins_per_dim[d]},
                    {"degenerate", static_cast<bool>(data.degenerate[d])},
                    {"histogram", r.histograms[d]}});
  }
  ctx.WriteSelection({{"objective", r.objective},
                      {"greedy_objective", r.greedy_objective},
                      {"swaps", r.swaps},
                      {"dims", dims}},
                     r.ids);
}

void RunDedup(StageContext& ctx) {
  const auto selected = UpstreamIds(ctx, "sample");
  const auto population = ReadIndicatorTable(ctx.Path("clustered.jsonl"));
  const DistanceSpace space = DistanceSpace::FromIndicators(population);
  const DedupResult r = Dedup(selected, space, ctx.config.dedup_remove);
  Json removals = Json::array();
  for (const auto& p : r.removals) {
    removals.push_back({{"removed", p.removed}, {"kept", p.kept}, {"distance", p.distance}});
  }
  ctx.WriteSelection({{"removals", removals}}, r.ids);
}

void RunReview(StageContext& ctx) {
  ReviewQueue queue(BuildReviewItems(ctx.config), VerdictLogPath(ctx.ws));
  FinalizeResult r;
  try {
    r = queue.Finalize(ctx.config.review_force);
  } catch (const ReviewConflict& e) {
    throw StageError(std::string("review: ") + e.what() + "; pass force to keep them");
  }
  Json by_reason = Json::object();
  for (const auto& [reason, ids] : r.removed_by_reason) by_reason[reason] = ids;
  ctx.WriteSelection({{"removed_by_reason", by_reason},
                      {"removed_count", r.removed_count()},
                      {"pending_defaulted", r.pending_defaulted}},
                     r.kept);
}

std::vector<TestQuestion> ReadTestQuestions(const fs::path& path) {
  std::vector<TestQuestion> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    out.push_back({j.at("image_id").get<std::string>(),
                   j.at("valid_answers").get<std::vector<int>>()});
  }
  return out;
}

void RunTestQuestions(StageContext& ctx) {
  const auto questions = GenerateTestQuestions(ReadExpertTable(ctx.config.experts));
  std::string text;
  std::vector<std::string> ids;
  for (const auto& q : questions) {
    text += Json{{"image_id", q.image_id}, {"valid_answers", q.valid_answers}}.dump() + "\n";
    ids.push_back(q.image_id);
  }
  ctx.WriteText("test_questions.jsonl", text);
  ctx.WriteSelection(Json::object(), ids);
}

void RunScreen(StageContext& ctx) {
  const auto ratings = ReadRatings(ctx.config.ratings);
  auto profiles = BuildWorkerProfiles(ratings);
  std::map<std::string, WorkerProfile*> by_id;
  for (auto& p : profiles) by_id[p.worker_id] = &p;

  for (const auto& s :
       ScreenLowCorrelation(ratings, ctx.config.plcc_threshold, ctx.config.min_ratings)) {
    by_id.at(s.worker_id)->plcc_vs_crowd = s.plcc;
    by_id.at(s.worker_id)->low_correlation = s.flagged;
  }
  for (const auto& id : ScreenLineClickers(profiles, ctx.config.line_clicker_ratio)) {
    by_id.at(id)->line_clicker = true;
  }
  if (!ctx.config.experts.empty()) {
    const auto questions = ReadTestQuestions(ctx.Path("test_questions.jsonl"));
    for (const auto& a : ScoreWorkers(ratings, questions, ctx.config.quiz_threshold)) {
      by_id.at(a.worker_id)->test_accuracy = a.accuracy;
      by_id.at(a.worker_id)->failed_quiz = !a.pass;
    }
  }
  Json workers = Json::array();
  std::vector<std::string> excluded;
  std::map<std::string, std::size_t> counts = {
      {"low_correlation", 0}, {"line_clicker", 0}, {"failed_quiz", 0}};
  for (const auto& p : profiles) {
    Json w = {{"worker_id", p.worker_id},
              {"score_counts", p.score_counts},
              {"line_clicker_ratio", LineClickerRatio(p.score_counts)},
              {"low_correlation", p.low_correlation},
              {"line_clicker", p.line_clicker},
              {"failed_quiz", p.failed_quiz}};
    if (std::isinf(LineClickerRatio(p.score_counts))) w["line_clicker_ratio"] = "inf";
    if (p.plcc_vs_crowd) w["plcc"] = *p.plcc_vs_crowd;
    if (p.test_accuracy) w["test_accuracy"] = *p.test_accuracy;
    workers.push_back(std::move(w));
    counts["low_correlation"] += p.low_correlation;
    counts["line_clicker"] += p.line_clicker;
    counts["failed_quiz"] += p.failed_quiz;
    if (p.flagged()) excluded.push_back(p.worker_id);
  }
  // The selection of this stage is the excluded worker set.
  ctx.WriteSelection({{"flag_counts", counts}, {"workers", workers}}, excluded);
}

std::set<std::string> ExcludedWorkers(const StageContext& ctx) {
  const auto ids = UpstreamIds(ctx, "screen");
  return {ids.begin(), ids.end()};
}

void RunMos(StageContext& ctx) {
  const auto ratings = ReadRatings(ctx.config.ratings);
  const MosReport report = ComputeMos(ratings, ExcludedWorkers(ctx), true);
  std::string text;
  std::vector<std::string> ids;
  for (const auto& r : report.records) {
    text += Json{{"image_id", r.image_id}, {"mos", r.mos}, {"std", r.std}, {"count", r.count}}
                .dump() +
            "\n";
    ids.push_back(r.image_id);
  }
  ctx.WriteText("mos.jsonl", text);
  ctx.WriteSelection({{"residue", report.residue}}, ids);
}

std::map<std::string, double> ReadMos(const fs::path& path) {
  std::map<std::string, double> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    out[j.at("image_id").get<std::string>()] = j.at("mos").get<double>();
  }
  return out;
}

double MapReal(double raw) { return 1.0 + 24.75 * (raw - 1.0); }

void RunReliability(StageContext& ctx) {
  const auto ratings = ReadRatings(ctx.config.ratings);
  const auto excluded = ExcludedWorkers(ctx);
  const auto crowd = ReadMos(ctx.Path("mos.jsonl"));
  const auto experts = ReadExpertTable(ctx.config.experts);

  std::map<std::string, std::vector<double>> pools_by_id;
  std::vector<std::vector<double>> icc_groups;
  {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : ratings) {
      if (r.is_test_question || excluded.count(r.worker_id)) continue;
      groups[r.image_id].push_back(MapScore(r.score));
    }
    for (auto& [id, g] : groups) {
      pools_by_id[id] = g;
      icc_groups.push_back(std::move(g));
    }
  }

  std::vector<std::string> ids;
  std::vector<double> crowd_mos;
  std::vector<double> expert_mos;
  std::vector<std::vector<double>> expert_scores;
  std::vector<std::vector<double>> pools;
  for (const auto& [id, raw] : experts) {
    const auto it = crowd.find(id);
    if (it == crowd.end()) continue;
    std::vector<double> mapped;
    for (double s : raw) mapped.push_back(MapReal(s));
    double mean = 0.0;
    for (double v : mapped) mean += v;
    ids.push_back(id);
    crowd_mos.push_back(it->second);
    expert_mos.push_back(mean / static_cast<double>(mapped.size()));
    expert_scores.push_back(std::move(mapped));
    pools.push_back(pools_by_id.at(id));
  }
  if (ids.size() < 2) throw StageError("reliability: fewer than 2 images have both expert and crowd MOS");

  const Alignment a = FitAlignment(crowd_mos, expert_mos);
  std::vector<double> aligned;
  double ss = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    aligned.push_back(a.Apply(crowd_mos[i]));
    ss += (aligned[i] - expert_mos[i]) * (aligned[i] - expert_mos[i]);
  }
  const double expert_std =
      ExpertBootstrapStd(expert_scores, ctx.config.bootstrap_reps, SubSeed(ctx.seed, 1));
  const ZscoreReport z = ErrorZscores(aligned, expert_mos, expert_std);
  const auto curve = BootstrapRmse(pools, expert_mos, ctx.config.group_sizes,
                                   ctx.config.bootstrap_reps, SubSeed(ctx.seed, 2), ids);
  Json curve_json = Json::array();
  std::string tsv = "group_size\trmse\tci_low\tci_high\n";
  for (const auto& p : curve) {
    curve_json.push_back(Json{{"group_size", p.group_size},
                          {"rmse", p.rmse_mean},
                          {"ci_low", p.ci_low},
                          {"ci_high", p.ci_high}});
    tsv += std::to_string(p.group_size) + "\t" + FormatDouble(p.rmse_mean) + "\t" +
           FormatDouble(p.ci_low) + "\t" + FormatDouble(p.ci_high) + "\n";
  }
  ctx.WriteText("reliability_curve.tsv", tsv);
  ctx.WriteSelection({{"alignment", {{"slope", a.slope}, {"intercept", a.intercept}}},
                      {"aligned_rmse", std::sqrt(ss / static_cast<double>(ids.size()))},
                      {"expert_bootstrap_std", expert_std},
                      {"zscores", {{"fraction_within_2", z.fraction_within_2},
                                   {"abs_histogram", z.abs_histogram}}},
                      {"icc", Icc(icc_groups)},
                      {"curve", curve_json}},
                     ids);
}

void RunEval(StageContext& ctx) {
  const auto mos = ReadMos(ctx.Path("mos.jsonl"));
  std::vector<std::string> ids;
  for (const auto& [id, m] : mos) ids.push_back(id);
  const FeatureMatrix features = ReadFeatures(ctx.config.features).Select(ids);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto row = features.row(i);
    x.emplace_back(row.begin(), row.end());
    y.push_back(mos.at(features.ids[i]));
  }
  CrossValidationOptions options;
  options.train_fraction = ctx.config.train_fraction;
  options.reps = ctx.config.cv_reps;
  options.seed = ctx.seed;
  const double lambda = ctx.config.ridge_lambda;
  const auto report = CrossValidate(
      x, y, options, [lambda] { return std::make_unique<RidgeRegressor>(lambda); });
  ctx.WriteSelection({{"regressor", "ridge"},
                      {"srocc_mean", report.srocc_mean},
                      {"srocc_std", report.srocc_std},
                      {"plcc_mean", report.plcc_mean},
                      {"plcc_std", report.plcc_std},
                      {"reps", options.reps},
                      {"undefined_reps", report.undefined_reps}},
                     ids);
}

void RunExportHist(StageContext& ctx) {
  const auto population = ReadIndicatorTable(ctx.Path("indicators.jsonl"));
  const auto selection = UpstreamIds(ctx, ctx.config.hist_selection);
  const auto hist = ExportHistograms(population, selection, ctx.config.hist_bins);
  ctx.WriteText("histograms.tsv", FormatHistograms(hist));
  ctx.WriteSelection({{"selection_stage", ctx.config.hist_selection}, {"bins", ctx.config.hist_bins}},
                     selection);
}

// ---------------------------------------------------------------- table

std::vector<ExternalInput> CorpusInput(const PipelineConfig& c) { return {{"corpus", c.corpus}}; }

std::vector<std::string> None(const PipelineConfig&) { return {}; }
std::vector<ExternalInput> NoInputs(const PipelineConfig&) { return {}; }

const std::map<std::string, StageSpec>& Stages() {
  static const std::map<std::string, StageSpec> table = {
      {"filter",
       {None, CorpusInput,
        [](const PipelineConfig& c) {
          return Json{{"bounds", {c.min_width, c.min_height, c.max_width, c.max_height}},
                      {"licenses", c.licenses}};
        },
        RunFilter}},
      {"tagsample",
       {[](const PipelineConfig&) { return std::vector<std::string>{"filter"}; }, CorpusInput,
        [](const PipelineConfig& c) {
          return Json{{"quota", c.tag_quota},
                      {"target", c.tag_target},
                      {"tolerance", c.tag_tolerance},
                      {"size_cap", c.tag_size_cap}};
        },
        RunTagSample}},
      {"crop",
       {[](const PipelineConfig&) { return std::vector<std::string>{"tagsample"}; },
        [](const PipelineConfig& c) {
          std::vector<ExternalInput> in = {{"corpus", c.corpus}};
          if (!c.faces.empty()) in.push_back({"faces", c.faces});
          return in;
        },
        [](const PipelineConfig& c) {
          return Json{{"size", {kCropWidth, kCropHeight}},
                      {"border", kCropBorder},
                      {"weights",
                       {c.crop_weights.saliency, c.crop_weights.face, c.crop_weights.center}},
                      {"allow_upscale", c.allow_upscale}};
        },
        RunCrop}},
      {"indicators",
       {[](const PipelineConfig&) { return std::vector<std::string>{"crop"}; }, CorpusInput,
        [](const PipelineConfig& c) { return Json{{"on_original", c.indicators_on_original}}; },
        RunIndicators}},
      {"trim",
       {[](const PipelineConfig&) { return std::vector<std::string>{"indicators"}; }, NoInputs,
        [](const PipelineConfig& c) { return Json{{"threshold", c.trim_threshold}}; }, RunTrim}},
      {"cluster",
       {[](const PipelineConfig&) { return std::vector<std::string>{"indicators", "trim"}; },
        [](const PipelineConfig& c) { return std::vector<ExternalInput>{{"features", c.features}}; },
        [](const PipelineConfig& c) {
          return Json{{"k", c.clusters}, {"max_iterations", c.kmeans_iterations}};
        },
        RunCluster}},
      {"sample",
       {[](const PipelineConfig&) { return std::vector<std::string>{"cluster"}; }, NoInputs,
        [](const PipelineConfig& c) {
          return Json{{"bins", c.bins},
                      {"size", c.sample_size},
                      {"weights", c.dim_weights},
                      {"swap_budget", c.swap_budget},
                      {"kicks", c.kicks}};
        },
        RunSample}},
      {"dedup",
       {[](const PipelineConfig&) { return std::vector<std::string>{"cluster", "sample"}; },
        NoInputs, [](const PipelineConfig& c) { return Json{{"remove", c.dedup_remove}}; },
        RunDedup}},
      {"review",
       {[](const PipelineConfig&) { return std::vector<std::string>{"crop", "cluster", "dedup"}; },
        [](const PipelineConfig& c) {
          return std::vector<ExternalInput>{{"verdicts", VerdictLogPath(c.workspace), true}};
        },
        [](const PipelineConfig& c) { return Json{{"force", c.review_force}}; }, RunReview}},
      {"testq",
       {None,
        [](const PipelineConfig& c) { return std::vector<ExternalInput>{{"experts", c.experts}}; },
        [](const PipelineConfig&) { return Json::object(); }, RunTestQuestions}},
      {"screen",
       {[](const PipelineConfig& c) {
          return c.experts.empty() ? std::vector<std::string>{} : std::vector<std::string>{"testq"};
        },
        [](const PipelineConfig& c) { return std::vector<ExternalInput>{{"ratings", c.ratings}}; },
        [](const PipelineConfig& c) {
          return Json{{"plcc_threshold", c.plcc_threshold},
                      {"min_ratings", c.min_ratings},
                      {"line_clicker_ratio", c.line_clicker_ratio},
                      {"quiz_threshold", c.quiz_threshold}};
        },
        RunScreen}},
      {"mos",
       {[](const PipelineConfig&) { return std::vector<std::string>{"screen"}; },
        [](const PipelineConfig& c) { return std::vector<ExternalInput>{{"ratings", c.ratings}}; },
        [](const PipelineConfig&) { return Json::object(); }, RunMos}},
      {"reliability",
       {[](const PipelineConfig&) { return std::vector<std::string>{"screen", "mos"}; },
        [](const PipelineConfig& c) {
          return std::vector<ExternalInput>{{"ratings", c.ratings}, {"experts", c.experts}};
        },
        [](const PipelineConfig& c) {
          return Json{{"group_sizes", c.group_sizes}, {"reps", c.bootstrap_reps}};
        },
        RunReliability}},
      {"eval",
       {[](const PipelineConfig&) { return std::vector<std::string>{"mos"}; },
        [](const PipelineConfig& c) { return std::vector<ExternalInput>{{"features", c.features}}; },
        [](const PipelineConfig& c) {
          return Json{{"train_fraction", c.train_fraction},
                      {"reps", c.cv_reps},
                      {"ridge_lambda", c.ridge_lambda}};
        },
        RunEval}},
      {"export-hist",
       {[](const PipelineConfig& c) {
          return std::vector<std::string>{"indicators", c.hist_selection};
        },
        NoInputs,
        [](const PipelineConfig& c) {
          return Json{{"bins", c.hist_bins}, {"selection", c.hist_selection}};
        },
        RunExportHist}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& StageNames() {
  static const std::vector<std::string> names = {
      "filter", "tagsample", "crop",   "indicators", "trim",        "cluster", "sample",
      "dedup",  "review",    "testq",  "screen",     "mos",         "reliability",
      "eval",   "export-hist"};
  return names;
}

const std::vector<std::string>& ImageChain() {
  static const std::vector<std::string> chain = {"filter", "tagsample", "crop",
                                                 "indicators", "trim", "cluster",
                                                 "sample", "dedup", "review"};
  return chain;
}

fs::path SelectionPath(const fs::path& workspace, const std::string& stage) {
  return workspace / (stage == "review" ? std::string("final.json") : stage + ".json");
}

std::vector<std::string> ReadSelectionIds(const fs::path& selection_file) {
  return ReadJsonFile(selection_file).at("ids").get<std::vector<std::string>>();
}

fs::path VerdictLogPath(const fs::path& workspace) { return workspace / "review" / "verdicts.jsonl"; }

std::vector<StageManifest> ReadStageManifests(const fs::path& workspace) {
  std::vector<StageManifest> out;
  std::ifstream in(workspace / kManifestFile);
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    out.push_back(FromJson(Json::parse(line)));
  }
  return out;
}

StageManifest RunStage(const std::string& name, const PipelineConfig& config, bool force) {
  const auto& table = Stages();
  const auto spec_it = table.find(name);
  if (spec_it == table.end()) throw StageError("unknown stage '" + name + "'");
  const StageSpec& spec = spec_it->second;
  if (config.workspace.empty()) throw StageError(name + ": no workspace (--out) given");
  if (config.threads != 0) SetThreadCount(config.threads);
  fs::create_directories(config.workspace);

  Json input = {{"upstream", Json::object()}, {"inputs", Json::object()}};
  for (const auto& up : spec.upstream(config)) {
    if (!table.count(up)) throw StageError(name + ": unknown upstream stage '" + up + "'");
    const auto m = LatestManifest(config.workspace, up);
    if (!m) {
      throw StageError("stage '" + name + "' needs upstream stage '" + up +
                       "', which has no manifest in " + config.workspace.string());
    }
    const std::string modified = FirstModifiedOutput(config.workspace, *m);
    if (!modified.empty()) {
      throw StageError("digest conflict: output '" + modified + "' of stage '" + up +
                       "' changed after its manifest was written; rerun '" + up + "'");
    }
    input["upstream"][up] = m->output_digest;
  }
  for (const auto& in : spec.inputs(config)) {
    if (in.path.empty() || !fs::exists(in.path)) {
      if (in.optional) {
        input["inputs"][in.key] = "absent";
        continue;
      }
      throw StageError("stage '" + name + "' needs input '" + in.key + "'" +
                       (in.path.empty() ? std::string() : " at " + in.path.string()));
    }
    input["inputs"][in.key] = FileSha256(in.path);
  }
  Json params = spec.params(config);
  params["seed"] = StageSeed(config.seed, name);

  StageManifest m;
  m.stage = name;
  m.input_digest = Sha256Hex(input.dump());
  m.param_digest = Sha256Hex(params.dump());

  if (!force) {
    const auto previous = LatestManifest(config.workspace, name);
    if (previous && previous->input_digest == m.input_digest &&
        previous->param_digest == m.param_digest &&
        FirstModifiedOutput(config.workspace, *previous).empty()) {
      StageManifest cached = *previous;
      cached.cached = true;
      return cached;
    }
  }

  const auto start = std::chrono::steady_clock::now();
  StageContext ctx(config, name);
  try {
    spec.run(ctx);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("stage '" + name + "' failed: " + e.what());
  }
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.outputs = ctx.outputs;
  m.output_digest = DigestOfOutputs(m.outputs);
  m.count = ctx.ids.size();
  m.ids_digest = DigestOfIds(ctx.ids);

  std::ofstream log(config.workspace / kManifestFile, std::ios::app);
  log << ToJson(m).dump() << '\n';
  if (!log) throw StageError("cannot append to " + (config.workspace / kManifestFile).string());
  return m;
}

std::vector<StageManifest> RunPipeline(const PipelineConfig& config,
                                       std::span<const std::string> stages, bool force) {
  std::vector<StageManifest> out;
  for (const auto& s : stages) out.push_back(RunStage(s, config, force));
  return out;
}

std::vector<ReviewItem> BuildReviewItems(const PipelineConfig& config) {
  const fs::path ws = config.workspace;
  if (!LatestManifest(ws, "dedup")) {
    throw StageError("review needs upstream stage 'dedup', which has no manifest in " + ws.string());
  }
  const Json dedup = ReadJsonFile(SelectionPath(ws, "dedup"));
  const auto ids = dedup.at("ids").get<std::vector<std::string>>();
  double radius = -1.0;
  for (const auto& r : dedup.at("removals")) radius = std::max(radius, r.at("distance").get<double>());

  const auto population = ReadIndicatorTable(ws / "clustered.jsonl");
  const DistanceSpace space = DistanceSpace::FromIndicators(population);
  std::vector<ReviewItem> items;
  for (const auto& id : ids) {
    ReviewItem item;
    item.image_id = id;
    item.full_path = fs::absolute(ws / CropRel(id)).string();
    item.thumbnail_path = item.full_path;
    if (radius >= 0.0) {
      const std::size_t a = space.IndexOf(id);
      double best = radius;
      for (const auto& other : ids) {
        if (other == id) continue;
        const double d = space.Distance(a, space.IndexOf(other));
        if (d < best || (d == best && item.partner_id.empty())) {
          best = d;
          item.partner_id = other;
        }
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

FilterResult FilterRecords(std::span<const ImageRecord> records, const ResolutionBounds& bounds,
                           std::span<const std::string> licenses) {
  const std::set<std::string> allow(licenses.begin(), licenses.end());
  FilterResult out;
  for (const auto& r : records) {
    const bool license_ok = allow.empty() ? r.license_ok : allow.count(r.license) > 0;
    const bool size_ok = r.width >= bounds.min_width && r.height >= bounds.min_height &&
                         r.width <= bounds.max_width && r.height <= bounds.max_height;
    if (!license_ok) {
      out.rejected["license"].push_back(r.id);
    } else if (!size_ok) {
      out.rejected["resolution"].push_back(r.id);
    } else {
      out.kept.push_back(r.id);
    }
  }
  return out;
}

std::vector<IndicatorHistogram> ExportHistograms(std::span<const IndicatorVector> population,
                                                 std::span<const std::string> selection,
                                                 int bins) {
  if (bins < 1) throw InvalidInput("histogram needs at least one bin");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < population.size(); ++i) index[population[i].id] = i;
  std::vector<std::size_t> chosen;
  for (const auto& id : selection) {
    const auto it = index.find(id);
    if (it == index.end()) throw InvalidInput("selection id " + id + " is not in the population");
    chosen.push_back(it->second);
  }
  std::vector<IndicatorHistogram> out;
  for (int k = 0; k < kNumIndicators; ++k) {
    const auto which = static_cast<Indicator>(k);
    auto value = [&](std::size_t i) { return population[i].Get(which).value_or(100.0); };
    IndicatorHistogram h;
    h.indicator = std::string(kIndicatorNames[k]);
    h.population.assign(bins, 0);
    h.selection.assign(bins, 0);
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < population.size(); ++i) {
      lo = i == 0 ? value(i) : std::min(lo, value(i));
      hi = i == 0 ? value(i) : std::max(hi, value(i));
    }
    for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + (hi - lo) * b / bins);
    for (std::size_t i = 0; i < population.size(); ++i) {
      ++h.population[EqualWidthBin(value(i), lo, hi, bins)];
    }
    for (std::size_t i : chosen) ++h.selection[EqualWidthBin(value(i), lo, hi, bins)];
    out.push_back(std::move(h));
  }
  return out;
}

std::string FormatHistograms(std::span<const IndicatorHistogram> histograms) {
  std::string out = "indicator\tbin\tlo\thi\tpopulation\tselection\n";
  for (const auto& h : histograms) {
    for (std::size_t b = 0; b < h.population.size(); ++b) {
      out += h.indicator + "\t" + std::to_string(b) + "\t" + FormatDouble(h.edges[b]) + "\t" +
             FormatDouble(h.edges[b + 1]) + "\t" + std::to_string(h.population[b]) + "\t" +
             std::to_string(h.selection[b]) + "\n";
    }
  }
  return out;
}

}  // namespace curate
