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


// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crop_oracle.h"
#include "curate/cropper.h"
#include "curate/dedup.h"
#include "curate/diversity_sampler.h"
#include "curate/image.h"
#include "curate/indicators.h"
#include "curate/parallel.h"
#include "curate/pipeline.h"
#include "curate/review_service.h"
#include "curate/subjective.h"
#include "curate/synthetic.h"
#include "curate/tag_sampler.h"
#include "sampler_oracle.h"
#include "tag_sampler_oracle.h"
#include "test_util.h"

namespace curate {
namespace {

using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Pinned limits.
constexpr double kIndicatorSeconds = 1.0;
constexpr double kTagSamplerSeconds = 5.0;
constexpr double kTrimLow = 0.001;
constexpr double kTrimHigh = 0.006;
constexpr double kSamplerRelativeGap = 0.05;
constexpr double kChiSquareRatio = 0.5;
constexpr double kLargeSampleSeconds = 60.0;
constexpr double kSlopeTolerance = 0.01;
constexpr double kIccNullLimit = 0.05;
constexpr double kEndToEndSeconds = 120.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

class Report {
 public:
  void Run(const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures_ += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

Outcome IndicatorSuite() {
  const auto start = Clock::now();
  bool ok = Brightness(testing::SolidImage(64, 48, 0, 0, 0)) == 0.0;
  ok = ok && Colorfulness(testing::SolidImage(64, 48, 0.3f, 0.3f, 0.3f)) == 0.0;
  RgbImage ramp(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const float v = static_cast<float>(x + y) / 110.0f;
      ramp.at(x, y) = {v, v, v};
    }
  ok = ok && Colorfulness(ramp) == 0.0;
  ok = ok && RmsContrast(testing::SolidImage(64, 48, 0.6f, 0.2f, 0.9f)) == 0.0;
  int strict = 0;
  for (int i = 0; i < 50; ++i) {
    const RgbImage img = SyntheticImage(1000 + i, 320, 240);
    strict += Sharpness(GaussianBlur(img, 2.0)) < Sharpness(img);
  }
  const double secs = Seconds(start);
  ok = ok && strict == 50 && secs < kIndicatorSeconds;
  return {ok, "analytic cases exact, blur reduced sharpness on " + std::to_string(strict) +
                  "/50, " + Fmt("%.3f s", secs)};
}

Outcome TagSamplerOracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  int sample_match = 0, quota_match = 0, quota_cases = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto records = testing::RandomTagCorpus(rng, 50, 8);
    const TagIndex index = BuildTagIndex(records);
    const std::size_t q = 1 + rng() % 6;
    const std::size_t cap = (rng() % 3 == 0) ? 1 + rng() % records.size() : 0;
    sample_match +=
        SampleByQuota(index, records, q, cap).ids == testing::SimulateQuotaSampling(records, q, cap);
    if (index.phi.empty()) continue;
    ++quota_cases;
    const std::size_t floor = SampleByQuota(index, records, 1, 0).ids.size();
    const std::size_t target = floor + rng() % (records.size() - floor + 1);
    const double tol = (trial % 2) ? 0.0 : 0.1;
    quota_match += ChooseQuota(index, records, target, tol).quota ==
                   testing::LinearScanQuota(index, records, target, tol);
  }
  const double secs = Seconds(start);
  return {sample_match == 100 && quota_match == quota_cases && secs < kTagSamplerSeconds,
          "simulation " + std::to_string(sample_match) + "/100, linear scan " +
              std::to_string(quota_match) + "/" + std::to_string(quota_cases) + ", " +
              Fmt("%.3f s", secs)};
}

IndicatorVector GaussianRow(std::mt19937_64& rng, const std::string& id) {
  std::normal_distribution<double> g(0, 1);
  IndicatorVector v;
  v.id = id;
  v.brightness = 0.5 + 0.1 * g(rng);
  v.colorfulness = 40 + 12 * g(rng);
  v.rms_contrast = 0.2 + 0.05 * g(rng);
  v.sharpness = 0.1 + 0.03 * g(rng);
  v.bitrate = 3 + 0.8 * g(rng);
  v.resolution = std::llround(2e6 + 2e5 * g(rng));
  v.jpeg_quality = static_cast<int>(std::lround(75 + 8 * g(rng)));
  return v;
}

Outcome Trimming() {
  std::mt19937_64 rng(77);
  std::vector<IndicatorVector> rows;
  for (int i = 0; i < 10000; ++i) rows.push_back(GaussianRow(rng, "r" + std::to_string(i)));
  const TrimResult r = ZscoreTrim(rows);
  const std::set<std::string> removed(r.removed.begin(), r.removed.end());

  // Independent per-indicator tail counts with population statistics.
  double lo_frac = 1, hi_frac = 0;
  bool covered = true;
  for (int k = 0; k < kNumIndicators; ++k) {
    const auto which = static_cast<Indicator>(k);
    double mean = 0, var = 0;
    for (const auto& v : rows) mean += *v.Get(which);
    mean /= rows.size();
    for (const auto& v : rows) var += (*v.Get(which) - mean) * (*v.Get(which) - mean);
    const double sd = std::sqrt(var / rows.size());
    std::size_t tail = 0;
    for (const auto& v : rows) {
      if (std::abs(*v.Get(which) - mean) / sd > 3.0) {
        ++tail;
        covered = covered && removed.count(v.id);
      }
    }
    const double f = static_cast<double>(tail) / rows.size();
    lo_frac = std::min(lo_frac, f);
    hi_frac = std::max(hi_frac, f);
  }

  int outliers = 0;
  for (int k = 0; k < kNumIndicators; ++k) {
    std::vector<IndicatorVector> planted(rows.begin(), rows.begin() + 2000);
    IndicatorVector o = GaussianRow(rng, "outlier");
    const IndicatorStats s = ComputeIndicatorStats(planted);
    const double z10 = s.mean[k] + 10.0 * s.stddev[k];
    switch (static_cast<Indicator>(k)) {
      case Indicator::kBrightness: o.brightness = z10; break;
      case Indicator::kColorfulness: o.colorfulness = z10; break;
      case Indicator::kRmsContrast: o.rms_contrast = z10; break;
      case Indicator::kSharpness: o.sharpness = z10; break;
      case Indicator::kBitrate: o.bitrate = z10; break;
      case Indicator::kResolution: o.resolution = std::llround(z10); break;
      case Indicator::kJpegQuality: o.jpeg_quality = static_cast<int>(std::lround(z10)); break;
    }
    planted.push_back(o);
    const auto t = ZscoreTrim(planted);
    outliers += std::count(t.removed.begin(), t.removed.end(), "outlier") == 1;
  }
  const bool ok = lo_frac >= kTrimLow && hi_frac <= kTrimHigh && covered && outliers == 7;
  return {ok, "per-indicator removed fraction " + Fmt("%.4f", lo_frac) + ".." +
                  Fmt("%.4f", hi_frac) + ", tails removed " + (covered ? "yes" : "no") +
                  ", planted outliers removed " + std::to_string(outliers) + "/7"};
}

// Integer column values 0..bins-1 land exactly in bin 0..bins-1.
BinnedDataset ZeroDeviationInstance(std::mt19937_64& rng, std::size_t dims, int bins, int per_bin,
                                    int distractors) {
  const int m = bins * per_bin;
  std::vector<std::string> ids;
  std::vector<ScalarColumn> cols(dims);
  for (std::size_t d = 0; d < dims; ++d) cols[d].name = "d" + std::to_string(d);
  for (int j = 0; j < m; ++j) {
    ids.push_back("z" + std::to_string(1000 + j));
    for (std::size_t d = 0; d < dims; ++d) {
      cols[d].values.push_back((j + static_cast<int>(d) * (j / bins)) % bins);
    }
  }
  for (int j = 0; j < distractors; ++j) {
    ids.push_back("x" + std::to_string(1000 + j));
    // Distractors crowd the low bins.
    for (std::size_t d = 0; d < dims; ++d) cols[d].values.push_back(rng() % 2 ? 0 : rng() % bins);
  }
  return BinColumns(ids, cols, bins, std::nullopt);
}

Outcome SamplerZero() {
  std::mt19937_64 rng(31);
  int zero = 0, total = 0;
  for (int t = 0; t < 30; ++t) {
    const std::size_t dims = 1 + t % 4;
    const int bins = 3 + t % 6;
    const int per_bin = 1 + t % 4;
    const auto data = ZeroDeviationInstance(rng, dims, bins, per_bin, static_cast<int>(rng() % 60));
    const auto r = UniformSample(data, SamplingProblem{static_cast<std::size_t>(bins * per_bin), {}},
                                 {.seed = static_cast<std::uint64_t>(t)});
    zero += r.objective == 0.0;
    ++total;
  }
  return {zero == total, "objective 0 on " + std::to_string(zero) + "/" + std::to_string(total) +
                             " constructed instances"};
}

Outcome SamplerExact() {
  std::mt19937_64 rng(32);
  int within = 0, oracle_agree = 0, oracle_checked = 0;
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 8 + rng() % 13;
    const std::size_t m = 1 + rng() % std::min<std::size_t>(10, n);
    const auto data = testing::RandomSmallInstance(rng, n, 1 + rng() % 3, 2 + rng() % 4);
    const double opt = ExactSample(data, SamplingProblem{m, {}}).objective;
    const double heur = UniformSample(data, SamplingProblem{m, {}}, {.seed = 9}).objective;
    const double gap = opt > 0 ? (heur - opt) / opt : (heur > 1e-9 ? 1.0 : 0.0);
    worst = std::max(worst, gap);
    within += heur <= opt * (1 + kSamplerRelativeGap) + 1e-9;
    if (t % 5 == 0) {
      ++oracle_checked;
      oracle_agree += std::abs(testing::BruteForceOptimum(data, m) - opt) < 1e-9;
    }
  }
  return {within == 50 && oracle_agree == oracle_checked,
          std::to_string(within) + "/50 within 5% (worst gap " + Fmt("%.4f", worst) +
              "), branch and bound equals brute force on " + std::to_string(oracle_agree) + "/" +
              std::to_string(oracle_checked)};
}

// Seven lognormal columns sharing one latent factor, plus Zipf-like content
// classes.
BinnedDataset HeavyTailedPopulation(std::size_t n, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::string> ids;
  std::vector<ScalarColumn> cols(kNumIndicators);
  for (int d = 0; d < kNumIndicators; ++d) cols[d].name = std::string(kIndicatorNames[d]);
  std::vector<double> weights;
  for (int c = 0; c < 20; ++c) weights.push_back(1.0 / (c + 1));
  std::discrete_distribution<int> cls(weights.begin(), weights.end());
  std::vector<int> classes;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("h" + std::to_string(100000 + i));
    const double z = g(rng);
    for (int d = 0; d < kNumIndicators; ++d) {
      cols[d].values.push_back(std::exp(std::sqrt(rho) * z + std::sqrt(1 - rho) * g(rng)));
    }
    classes.push_back(cls(rng));
  }
  return BinColumns(ids, cols, 200, classes);
}

Outcome SamplerLarge() {
  const auto data = HeavyTailedPopulation(50000, 0.5, 33);
  const std::size_t m = 5000;
  const auto start = Clock::now();
  const auto r = UniformSample(data, SamplingProblem{m, {}}, {.seed = 5});
  const double secs = Seconds(start);
  std::mt19937_64 rng(34);
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  perm.resize(m);
  const auto random_hist = Histograms(data, perm);
  double worst = 0;
  for (std::size_t d = 0; d < data.dims(); ++d) {
    worst = std::max(worst, ChiSquareVsUniform(r.histograms[d]) /
                                ChiSquareVsUniform(random_hist[d]));
  }
  return {worst <= kChiSquareRatio && secs < kLargeSampleSeconds,
          "worst per-dimension chi-square ratio " + Fmt("%.3f", worst) + ", " +
              Fmt("%.2f s", secs)};
}

Outcome DedupPlanted() {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> g(0, 1);
  const double delta = 0.005;
  int perfect = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> anchors;
    while (anchors.size() < 60) {
      std::vector<double> c(7);
      for (double& v : c) v = u(rng);
      bool far = true;
      for (const auto& a : anchors) {
        double d = 0;
        for (int k = 0; k < 7; ++k) d += (a[k] - c[k]) * (a[k] - c[k]);
        far = far && std::sqrt(d) > 12 * delta;
      }
      if (far) anchors.push_back(c);
    }
    std::vector<std::string> ids;
    std::vector<std::vector<double>> coords;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      ids.push_back("a" + std::to_string(1000 + i));
      coords.push_back(anchors[i]);
      if (rng() % 3 == 0) {
        std::vector<double> dir(7);
        double norm = 0;
        for (double& v : dir) {
          v = g(rng);
          norm += v * v;
        }
        const double len = delta * (0.1 + 0.8 * u(rng)) / std::sqrt(norm);
        std::vector<double> p = anchors[i];
        for (int k = 0; k < 7; ++k) p[k] += dir[k] * len;
        ids.push_back("b" + std::to_string(1000 + i));
        coords.push_back(p);
        pairs.emplace_back(ids[ids.size() - 2], ids.back());
      }
    }
    const auto space = DistanceSpace::FromCoordinates(ids, coords);
    const auto r = Dedup(ids, space, pairs.size());
    const std::set<std::string> left(r.ids.begin(), r.ids.end());
    bool ok = r.ids.size() == ids.size() - pairs.size();
    for (const auto& [a, b] : pairs) ok = ok && left.count(a) + left.count(b) == 1;
    perfect += ok;
  }
  return {perfect == 100, std::to_string(perfect) + "/100 trials removed one member per pair"};
}

GrayMap RandomImportance(std::uint64_t seed, int w, int h) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  GrayMap m(w, h, 0.0);
  const int levels = seed % 3 == 0 ? 4 : 0;
  const int blobs = 1 + static_cast<int>(rng() % 5);
  std::vector<std::array<double, 4>> b;
  for (int i = 0; i < blobs; ++i) b.push_back({u(rng) * w, u(rng) * h, 30 + 200 * u(rng), u(rng)});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.2 * u(rng);
      for (const auto& [cx, cy, s, a] : b) {
        v += a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
      }
      v = std::min(1.0, v);
      if (levels) v = std::floor(v * levels) / levels;
      m.at(x, y) = v;
    }
  return m;
}

Outcome CropExhaustive() {
  int match = 0, naive = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const GrayMap m = RandomImportance(500 + s, 1200, 900);
    const CropResult got = BestCrop(m);
    const auto q = testing::Quantize(m);
    const CropResult want = testing::SlidingBest(q, kCropWidth, kCropHeight, kCropBorder);
    match += got.x == want.x && got.y == want.y && got.response == want.response;
    naive += got.response ==
             testing::NaiveResponse(q, got.x, got.y, kCropWidth, kCropHeight, kCropBorder);
  }
  return {match == 20 && naive == 20, "argmax and tie-break match " + std::to_string(match) +
                                          "/20, naive response equal " + std::to_string(naive) +
                                          "/20"};
}

Outcome Subjective() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };
  check(LineClickerRatio({100, 10, 10, 10, 10}) == 2.5, "line clicker");

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(1, 100);
  std::normal_distribution<double> noise(0, 0.5);
  std::vector<double> x, y;
  for (int i = 0; i < 187; ++i) {
    x.push_back(u(rng));
    y.push_back(1.12 * x.back() - 10.43 + noise(rng));
  }
  const Alignment a = FitAlignment(x, y);
  const double slope_err = std::abs(a.slope - 1.12) / 1.12;
  check(slope_err <= kSlopeTolerance, "alignment slope");

  check(Srocc(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{1, 3, 2, 5, 4}) == 0.8,
        "srocc");

  std::vector<std::vector<double>> null_groups;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> grp(3 + rng() % 6);
    for (double& v : grp) v = MapScore(1 + static_cast<int>(rng() % 5));
    null_groups.push_back(std::move(grp));
  }
  const double icc_null = Icc(null_groups);
  check(std::abs(icc_null) < kIccNullLimit, "icc null");
  check(Icc({{10, 10, 10}, {50, 50}, {80, 80, 80, 80}}) == 1.0, "icc perfect");

  const double sigma = 10.0;
  std::normal_distribution<double> crowd(0, sigma);
  std::vector<double> experts;
  std::vector<std::vector<double>> pools;
  for (int i = 0; i < 187; ++i) {
    experts.push_back(u(rng));
    std::vector<double> pool(4000);
    for (double& v : pool) v = experts.back() + crowd(rng);
    pools.push_back(std::move(pool));
  }
  const std::vector<std::size_t> sizes = {3, 11, 30, 120};
  int tracked = 0;
  std::string curve;
  for (const auto& p : BootstrapRmse(pools, experts, sizes, 300, 52)) {
    const double expect = sigma / std::sqrt(static_cast<double>(p.group_size));
    tracked += p.ci_low <= expect && expect <= p.ci_high;
    curve += " s=" + std::to_string(p.group_size) + ":" + Fmt("%.3f", p.rmse_mean) + "/" +
             Fmt("%.3f", expect);
  }
  check(tracked == 4, "bootstrap");

  int capped = 0;
  std::uniform_real_distribution<double> mos(1, 5), sd(0, 3);
  for (int i = 0; i < 1000; ++i) {
    const double m = mos(rng);
    const auto v = ValidAnswers(m, sd(rng));
    capped += v.size() <= 3 && std::count(v.begin(), v.end(), static_cast<int>(std::lround(m)));
  }
  check(capped == 1000, "test questions");

  std::string detail = "slope error " + Fmt("%.4f", slope_err) + ", null ICC " +
                       Fmt("%.4f", icc_null) + ", bootstrap rmse/expected" + curve +
                       ", test questions " + std::to_string(capped) + "/1000";
  for (const auto& f : failed) detail += "; failed " + f;
  return {failed.empty(), detail};
}

Outcome EndToEnd() {
  testing::TempDir dir;
  auto t0 = Clock::now();
  SyntheticCorpusOptions opts;
  opts.images = 500;
  opts.seed = 7;
  const SyntheticCorpus corpus = GenerateSyntheticCorpus(dir / "corpus", opts);
  const double gen = Seconds(t0);

  auto run = [&](const std::string& ws, unsigned threads, double& secs) {
    PipelineConfig c;
    c.workspace = dir / ws;
    c.seed = 7;
    c.threads = threads;
    c.corpus = corpus.manifest;
    c.features = corpus.features;
    c.faces = corpus.faces;
    c.tag_target = 400;
    c.tag_tolerance = 0.05;
    c.clusters = 8;
    c.bins = 10;
    c.sample_size = 150;
    c.dedup_remove = 10;
    c.review_force = true;
    const auto start = Clock::now();
    RunPipeline(c, ImageChain());
    secs = Seconds(start);
    return testing::ReadText(SelectionPath(c.workspace, "review"));
  };
  double s1 = 0, s2 = 0;
  const std::string a = run("ws1", 1, s1);
  const std::string b = run("ws4", 4, s2);
  SetThreadCount(0);
  const auto ids = Json::parse(a)["ids"];
  const bool ok = !a.empty() && a == b && s1 < kEndToEndSeconds && s2 < kEndToEndSeconds;
  return {ok, std::string(a == b ? "final manifest byte-identical" : "final manifests differ") +
                  " (" + std::to_string(ids.size()) + " ids), runs " + Fmt("%.1f s", s1) +
                  " (1 thread) and " + Fmt("%.1f s", s2) + " (4 threads), corpus generation " +
                  Fmt("%.1f s", gen)};
}

Outcome ReviewApi() {
  testing::TempDir dir;
  std::vector<ReviewItem> items;
  for (int i = 0; i < 13000; ++i) {
    ReviewItem it;
    it.image_id = "k" + std::to_string(100000 + i);
    items.push_back(it);
  }
  ReviewQueue queue(items, dir / "verdicts.jsonl");
  ReviewServer server(queue, dir / "final.json");
  const int port = server.Start();
  httplib::Client cli("127.0.0.1", port);
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };

  const Json a = Json::parse(cli.Get("/queue/next?reviewer=ann&n=50")->body);
  const Json b = Json::parse(cli.Get("/queue/next?reviewer=ben&n=50")->body);
  std::set<std::string> seen;
  for (const auto& it : a["items"]) seen.insert(it["image_id"]);
  for (const auto& it : b["items"]) seen.insert(it["image_id"]);
  check(a["items"].size() == 50 && b["items"].size() == 50 && seen.size() == 100,
        "lease exclusion");
  const std::string leased = a["items"][0]["image_id"];
  auto post = [&](const Json& body) {
    return cli.Post("/verdict", body.dump(), "application/json");
  };
  check(post({{"reviewer", "ben"}, {"image_id", leased}, {"status", "kept"}})->status == 409,
        "lease conflict");

  post({{"reviewer", "ann"}, {"image_id", leased}, {"status", "kept"}});
  const Json second = Json::parse(post({{"reviewer", "ann"},
                                        {"image_id", leased},
                                        {"status", "removed"},
                                        {"reason", "duplicate"}})
                                       ->body);
  check(second["history_length"] == 2, "lww history");

  const char* reasons[] = {"inappropriate", "text_screenshot", "under_exposed", "duplicate",
                           "other"};
  std::mt19937_64 rng(61);
  std::set<std::string> removed = {leased};
  for (int i = 0; i < 600; ++i) {
    const std::string id = items[rng() % items.size()].image_id;
    if (id == leased) continue;
    // Items leased to ann or ben answer 409 and stay untouched.
    if (rng() % 2) {
      if (post({{"reviewer", "cy"}, {"image_id", id}, {"status", "removed"}, {"reason", reasons[i % 5]}})
              ->status == 200) {
        removed.insert(id);
      }
    } else if (post({{"reviewer", "cy"}, {"image_id", id}, {"status", "kept"}})->status == 200) {
      removed.erase(id);
    }
  }
  check(cli.Post("/finalize", "{}", "application/json")->status == 409, "finalize pending");
  const Json fin = Json::parse(cli.Post("/finalize", R"({"force": true})", "application/json")->body);
  std::size_t by_reason = 0;
  for (const auto& [r, ids] : fin["removed_by_reason"].items()) by_reason += ids.size();
  const std::size_t kept = fin["kept_count"];
  const std::size_t rm = fin["removed_count"];
  check(rm == removed.size() && kept == 13000 - rm && by_reason == rm, "finalize arithmetic");
  const Json stats = Json::parse(cli.Get("/stats")->body);
  check(stats["removed"] == rm, "stats");
  server.Stop();

  std::string detail = "13000 - " + std::to_string(rm) + " removals = " + std::to_string(kept) +
                       " kept";
  for (const auto& f : failed) detail += "; failed " + f;
  return {failed.empty(), detail};
}

}  // namespace
}  // namespace curate

int main() {
  curate::Report report;
  report.Run("indicator analytic suite", curate::IndicatorSuite);
  report.Run("tag sampler oracle", curate::TagSamplerOracle);
  report.Run("z-score trimming", curate::Trimming);
  report.Run("uniform sampler (a) zero-deviation instances", curate::SamplerZero);
  report.Run("uniform sampler (b) within 5% of exact", curate::SamplerExact);
  report.Run("uniform sampler (c) heavy-tailed flatness", curate::SamplerLarge);
  report.Run("dedup planted pairs", curate::DedupPlanted);
  report.Run("crop exhaustive argmax", curate::CropExhaustive);
  report.Run("subjective analytics", curate::Subjective);
  report.Run("review service API", curate::ReviewApi);
  report.Run("end-to-end determinism", curate::EndToEnd);
  return report.failures() == 0 ? 0 : 1;
}
