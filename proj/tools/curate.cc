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


// Command-line front end. Pipeline options live on the top-level command and
// may appear before or after the subcommand, or in an INI file via --config.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curate/errors.h"
#include "curate/pipeline.h"
#include "curate/review_service.h"
#include "curate/synthetic.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

curate::ReviewServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

void PrintManifest(const curate::StageManifest& m) {
  nlohmann::json j = {{"stage", m.stage},
                      {"count", m.count},
                      {"cached", m.cached},
                      {"seconds", m.seconds},
                      {"output_digest", m.output_digest},
                      {"ids_digest", m.ids_digest}};
  std::cout << j.dump() << std::endl;
}

void WriteDemoConfig(const fs::path& dir, const curate::SyntheticCorpus& corpus,
                     std::uint64_t seed) {
  const fs::path abs = fs::absolute(dir);
  std::ofstream out(abs / "pipeline.ini");
  out << "# Settings sized for the synthetic demo corpus.\n"
      << "seed=" << seed << "\n"
      << "out=\"" << (abs / "work").string() << "\"\n"
      << "corpus=\"" << fs::absolute(corpus.manifest).string() << "\"\n"
      << "features=\"" << fs::absolute(corpus.features).string() << "\"\n"
      << "faces=\"" << fs::absolute(corpus.faces).string() << "\"\n"
      << "ratings=\"" << fs::absolute(corpus.ratings).string() << "\"\n"
      << "experts=\"" << fs::absolute(corpus.experts).string() << "\"\n"
      << "tag-target=" << corpus.images * 4 / 5 << "\n"
      << "tag-tolerance=0.05\n"
      << "clusters=8\n"
      << "bins=10\n"
      << "sample-size=" << corpus.images * 3 / 10 << "\n"
      << "dedup-remove=" << corpus.images / 50 << "\n"
      << "force-review=true\n"
      << "bootstrap-reps=200\n"
      << "cv-reps=20\n"
      << "hist-bins=20\n";
  if (!out) throw curate::StageError("cannot write " + (abs / "pipeline.ini").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image dataset curation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file with option values (key=value, option names without --)");

  curate::PipelineConfig c;
  std::string workspace;
  std::uint64_t seed = 0;
  bool force = false;
  std::string corpus, features, faces, ratings, experts;

  auto* seed_opt = app.add_option("--seed", seed, "Global seed (required for stages)");
  app.add_option("--out", workspace, "Workspace directory");
  app.add_option("--threads", c.threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  app.add_flag("--force", force, "Rerun even when the stage is cached");

  app.add_option("--corpus", corpus, "Corpus manifest (JSONL)");
  app.add_option("--features", features, "Content feature file");
  app.add_option("--faces", faces, "Face-box sidecar (JSONL)");
  app.add_option("--ratings", ratings, "Crowd ratings (JSONL)");
  app.add_option("--experts", experts, "Expert score table");

  app.add_option("--min-width", c.min_width)->check(CLI::PositiveNumber);
  app.add_option("--min-height", c.min_height)->check(CLI::PositiveNumber);
  app.add_option("--max-width", c.max_width)->check(CLI::PositiveNumber);
  app.add_option("--max-height", c.max_height)->check(CLI::PositiveNumber);
  app.add_option("--license", c.licenses, "Accepted license strings (repeatable)");

  app.add_option("--tag-quota", c.tag_quota, "Fixed per-tag quota Q");
  app.add_option("--tag-target", c.tag_target, "Target sample size for the quota search");
  app.add_option("--tag-tolerance", c.tag_tolerance)->check(CLI::Range(0.0, 1.0));
  app.add_option("--tag-size-cap", c.tag_size_cap, "Hard cap on the tag sample, 0 for none");

  app.add_option("--saliency-weight", c.crop_weights.saliency)->check(CLI::NonNegativeNumber);
  app.add_option("--face-weight", c.crop_weights.face)->check(CLI::NonNegativeNumber);
  app.add_option("--center-weight", c.crop_weights.center)->check(CLI::NonNegativeNumber);
  app.add_flag("--allow-upscale", c.allow_upscale);
  app.add_flag("--indicators-on-original", c.indicators_on_original,
               "Compute pixel indicators on the source instead of the crop");

  app.add_option("--trim-threshold", c.trim_threshold)->check(CLI::PositiveNumber);
  app.add_option("--clusters", c.clusters)->check(CLI::PositiveNumber);
  app.add_option("--kmeans-iterations", c.kmeans_iterations)->check(CLI::PositiveNumber);
  app.add_option("--bins", c.bins)->check(CLI::PositiveNumber);
  app.add_option("--sample-size", c.sample_size, "Uniform sample size M");
  app.add_option("--dim-weights", c.dim_weights, "Per-dimension objective weights");
  app.add_option("--swap-budget", c.swap_budget, "Local-search swap budget, 0 for automatic");
  app.add_option("--kicks", c.kicks)->check(CLI::NonNegativeNumber);
  app.add_option("--dedup-remove", c.dedup_remove, "Near duplicates to remove");
  app.add_flag("--force-review", c.review_force, "Finalize with pending items kept");

  app.add_option("--plcc-threshold", c.plcc_threshold)->check(CLI::Range(-1.0, 1.0));
  app.add_option("--min-ratings", c.min_ratings);
  app.add_option("--line-clicker-ratio", c.line_clicker_ratio)->check(CLI::PositiveNumber);
  app.add_option("--quiz-threshold", c.quiz_threshold)->check(CLI::Range(0.0, 1.0));
  app.add_option("--group-sizes", c.group_sizes);
  app.add_option("--bootstrap-reps", c.bootstrap_reps)->check(CLI::PositiveNumber);
  app.add_option("--train-fraction", c.train_fraction)->check(CLI::Range(0.05, 0.95));
  app.add_option("--cv-reps", c.cv_reps)->check(CLI::PositiveNumber);
  app.add_option("--ridge-lambda", c.ridge_lambda)->check(CLI::NonNegativeNumber);
  app.add_option("--hist-bins", c.hist_bins)->check(CLI::PositiveNumber);
  app.add_option("--hist-selection", c.hist_selection, "Stage whose selection is histogrammed");

  std::vector<std::pair<std::string, CLI::App*>> stage_commands;
  for (const auto& name : curate::StageNames()) {
    stage_commands.emplace_back(name, app.add_subcommand(name, "Run the " + name + " stage"));
  }
  auto* run_cmd = app.add_subcommand("run", "Run every stage in order");

  std::string host = "127.0.0.1";
  int port = 8080;
  double lease_minutes = 10.0;
  std::size_t batch = 20;
  auto* serve_cmd = app.add_subcommand("review-serve", "Serve the review queue over HTTP");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--lease-minutes", lease_minutes)->check(CLI::PositiveNumber);
  serve_cmd->add_option("--batch", batch)->check(CLI::PositiveNumber);

  std::string synth_dir;
  curate::SyntheticCorpusOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic demo corpus and pipeline.ini");
  synth_cmd->add_option("dir", synth_dir, "Output directory")->required();
  synth_cmd->add_option("--images", synth.images)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  c.workspace = workspace;
  c.seed = seed;
  c.corpus = corpus;
  c.features = features;
  c.faces = faces;
  c.ratings = ratings;
  c.experts = experts;

  try {
    if (synth_cmd->parsed()) {
      if (seed_opt->count() > 0) synth.seed = seed;
      const auto corpus_files = curate::GenerateSyntheticCorpus(synth_dir, synth);
      WriteDemoConfig(synth_dir, corpus_files, synth.seed);
      std::cout << "wrote " << corpus_files.images << " images and "
                << (fs::path(synth_dir) / "pipeline.ini").string() << std::endl;
      return 0;
    }
    if (seed_opt->count() == 0) throw curate::StageError("--seed is required (flag or config)");
    if (serve_cmd->parsed()) {
      curate::ReviewQueueOptions options;
      options.lease_ms = static_cast<std::int64_t>(lease_minutes * 60000.0);
      options.default_batch = batch;
      curate::ReviewQueue queue(curate::BuildReviewItems(c), curate::VerdictLogPath(c.workspace),
                                curate::SystemClockMs, options);
      curate::ReviewServer server(queue, c.workspace / "review" / "api_final.json");
      g_server = &server;
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      std::cerr << "serving " << queue.Stats().total << " items on " << host << ":" << port
                << std::endl;
      server.Run(host, port);
      g_server = nullptr;
      return 0;
    }
    if (run_cmd->parsed()) {
      std::vector<std::string> stages = curate::ImageChain();
      if (!c.ratings.empty()) {
        if (!c.experts.empty()) stages.push_back("testq");
        stages.insert(stages.end(), {"screen", "mos"});
        if (!c.experts.empty()) stages.push_back("reliability");
        if (!c.features.empty()) stages.push_back("eval");
      }
      stages.push_back("export-hist");
      for (const auto& s : stages) PrintManifest(curate::RunStage(s, c, force));
      return 0;
    }
    for (const auto& [name, cmd] : stage_commands) {
      if (cmd->parsed()) PrintManifest(curate::RunStage(name, c, force));
    }
  } catch (const curate::StageError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
