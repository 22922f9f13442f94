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


#include "curate/synthetic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "curate/content_features.h"
#include "curate/cropper.h"
#include "curate/errors.h"
#include "curate/indicators.h"
#include "curate/io.h"
#include "curate/parallel.h"
#include "curate/rng.h"
#include "curate/subjective.h"

namespace curate {

namespace {

struct Look {
  double exposure = 1.0;    // global gain
  double saturation = 1.0;  // chroma gain
  double detail = 0.1;      // amplitude of hard-edged shapes
  double noise = 0.02;
  int coarse = 32;          // base field cell size in pixels
};

Look DrawLook(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Look look;
  look.exposure = 0.35 + 1.1 * u(rng);
  look.saturation = u(rng) < 0.1 ? 0.0 : 0.2 + 1.3 * u(rng);
  look.detail = 0.4 * u(rng) * u(rng);
  look.noise = 0.06 * u(rng) * u(rng);
  look.coarse = 16 << static_cast<int>(u(rng) * 3.0);
  return look;
}

double Hash01(std::uint64_t seed, std::uint64_t i) {
  return static_cast<double>(Mix64(seed ^ Mix64(i)) >> 11) * 0x1.0p-53;
}

RgbImage Render(std::uint64_t seed, int width, int height, const Look& look,
                const std::vector<FaceBox>& faces) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int cw = std::max(2, width / look.coarse);
  const int ch = std::max(2, height / look.coarse);
  RgbImage coarse(cw, ch);
  const double base_r = u(rng), base_g = u(rng), base_b = u(rng);
  for (auto& p : coarse.data) {
    p.r = static_cast<float>(0.5 * base_r + 0.5 * u(rng));
    p.g = static_cast<float>(0.5 * base_g + 0.5 * u(rng));
    p.b = static_cast<float>(0.5 * base_b + 0.5 * u(rng));
  }
  RgbImage img = ResizeBilinear(coarse, width, height);

  const int shapes = 2 + static_cast<int>(u(rng) * 6);
  for (int s = 0; s < shapes; ++s) {
    const int w = 16 + static_cast<int>(u(rng) * width / 3);
    const int h = 16 + static_cast<int>(u(rng) * height / 3);
    const int x0 = static_cast<int>(u(rng) * (width - w));
    const int y0 = static_cast<int>(u(rng) * (height - h));
    const float dr = static_cast<float>((u(rng) - 0.5) * 2 * look.detail);
    const float dg = static_cast<float>((u(rng) - 0.5) * 2 * look.detail);
    const float db = static_cast<float>((u(rng) - 0.5) * 2 * look.detail);
    const bool ellipse = u(rng) < 0.5;
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        if (ellipse) {
          const double ex = (x - x0 - w / 2.0) / (w / 2.0);
          const double ey = (y - y0 - h / 2.0) / (h / 2.0);
          if (ex * ex + ey * ey > 1.0) continue;
        }
        Rgb& p = img.at(x, y);
        p.r += dr;
        p.g += dg;
        p.b += db;
      }
    }
  }
  for (const FaceBox& f : faces) {
    for (int y = f.y; y < f.y + f.height; ++y) {
      for (int x = f.x; x < f.x + f.width; ++x) {
        const double ex = (x - f.x - f.width / 2.0) / (f.width / 2.0);
        const double ey = (y - f.y - f.height / 2.0) / (f.height / 2.0);
        if (ex * ex + ey * ey > 1.0) continue;
        img.at(x, y) = {0.87f, 0.68f, 0.55f};
      }
    }
  }

  const std::uint64_t noise_seed = Mix64(seed + 17);
  for (std::size_t i = 0; i < img.size(); ++i) {
    Rgb& p = img.data[i];
    const double n = (Hash01(noise_seed, i) - 0.5) * 2.0 * look.noise;
    const double y = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    auto finish = [&](float c) {
      const double chroma = y + look.saturation * (c - y);
      return static_cast<float>(std::clamp(look.exposure * chroma + n, 0.0, 1.0));
    };
    p = {finish(p.r), finish(p.g), finish(p.b)};
  }
  return img;
}

struct Planned {
  ImageRecord record;
  std::uint64_t seed = 0;
  Look look;
  int quality = 0;  // 0: PNG
  std::vector<FaceBox> faces;
  std::size_t content_class = 0;
  double true_quality = 3.0;  // on 1..5
};

std::string ImageId(std::size_t i) {
  std::ostringstream s;
  s << "img" << std::setw(5) << std::setfill('0') << i;
  return s.str();
}

}  // namespace

RgbImage SyntheticImage(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed);
  return Render(Mix64(seed), width, height, DrawLook(rng), {});
}

SyntheticCorpus GenerateSyntheticCorpus(const std::filesystem::path& dir,
                                        const SyntheticCorpusOptions& options) {
  if (options.images == 0 || options.tags == 0 || options.content_classes == 0) {
    throw InvalidInput("synthetic corpus needs images, tags and classes");
  }
  std::filesystem::create_directories(dir / "images");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Zipf-like tag popularity.
  std::vector<double> tag_weight(options.tags);
  for (std::size_t t = 0; t < options.tags; ++t) tag_weight[t] = 1.0 / static_cast<double>(t + 1);
  std::discrete_distribution<std::size_t> pick_tag(tag_weight.begin(), tag_weight.end());

  static constexpr std::pair<int, int> kSizes[] = {
      {1024, 768}, {1024, 768}, {1024, 768}, {1024, 768}, {1152, 864},
      {1280, 960}, {1200, 900}, {1366, 768}, {1024, 1024}, {1280, 800}};
  static constexpr const char* kLicenses[] = {"CC-BY", "CC-BY-SA", "CC-BY-NC", "CC0"};

  std::vector<Planned> plan(options.images);
  for (std::size_t i = 0; i < options.images; ++i) {
    Planned& p = plan[i];
    p.seed = SubSeed(options.seed, i);
    std::mt19937_64 local(p.seed);
    p.look = DrawLook(local);
    ImageRecord& r = p.record;
    r.id = ImageId(i);
    const double size_draw = u(rng);
    if (size_draw < 0.03) {
      r.width = 800;  // below the resolution floor
      r.height = 600;
    } else {
      const auto [w, h] = kSizes[static_cast<std::size_t>(u(rng) * std::size(kSizes))];
      r.width = w;
      r.height = h;
    }
    r.license = u(rng) < 0.04 ? "all-rights-reserved"
                              : kLicenses[static_cast<std::size_t>(u(rng) * std::size(kLicenses))];
    p.quality = u(rng) < 0.08 ? 0 : 30 + static_cast<int>(u(rng) * 66);
    const std::size_t n_tags = 1 + static_cast<std::size_t>(u(rng) * 4);
    std::set<std::size_t> chosen;
    while (chosen.size() < std::min(n_tags, options.tags)) chosen.insert(pick_tag(rng));
    for (std::size_t t : chosen) {
      const double conf = std::round((0.3 + 0.7 * u(rng)) * 1000.0) / 1000.0;
      r.tags.push_back({"tag" + std::to_string(t), conf});
    }
    p.content_class = *chosen.begin() % options.content_classes;
    if (u(rng) < 0.15) {
      const int fw = 60 + static_cast<int>(u(rng) * 120);
      const int fh = fw * 5 / 4;
      p.faces.push_back({static_cast<int>(u(rng) * (r.width - fw)),
                         static_cast<int>(u(rng) * (r.height - fh)), fw, fh});
    }
    const double q_jpeg = p.quality == 0 ? 1.0 : (p.quality - 30) / 65.0;
    const double q_expo = 1.0 - std::min(1.0, std::abs(p.look.exposure - 0.9) / 0.6);
    const double q_noise = 1.0 - p.look.noise / 0.06;
    p.true_quality = std::clamp(1.0 + 4.0 * (0.4 * q_jpeg + 0.35 * q_expo + 0.25 * q_noise) +
                                    0.3 * (u(rng) - 0.5),
                                1.0, 5.0);
    r.path = "images/" + r.id + (p.quality == 0 ? ".png" : ".jpg");
  }

  // Pixels and bytes are independent per image.
  std::vector<std::int64_t> sizes(options.images, 0);
  ParallelFor(0, options.images, [&](std::size_t i) {
    const Planned& p = plan[i];
    const RgbImage img = Render(p.seed, p.record.width, p.record.height, p.look, p.faces);
    const auto bytes = p.quality == 0 ? EncodePng(img) : EncodeJpeg(img, p.quality);
    WriteFileAtomically(dir / p.record.path, bytes);
    sizes[i] = static_cast<std::int64_t>(bytes.size());
  });
  std::vector<ImageRecord> records;
  std::map<std::string, std::vector<FaceBox>> faces;
  for (std::size_t i = 0; i < options.images; ++i) {
    plan[i].record.byte_size = sizes[i];
    records.push_back(plan[i].record);
    if (!plan[i].faces.empty()) faces[plan[i].record.id] = plan[i].faces;
  }

  SyntheticCorpus out;
  out.images = options.images;
  out.manifest = dir / "corpus.jsonl";
  out.features = dir / "features.txt";
  out.faces = dir / "faces.jsonl";
  out.ratings = dir / "ratings.jsonl";
  out.experts = dir / "experts.txt";
  WriteCorpusManifest(out.manifest, records);
  WriteFaceBoxes(out.faces, faces);

  // Content features: class centre, a quality direction and noise.
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> centres(options.content_classes,
                                           std::vector<double>(options.feature_dim));
  for (auto& c : centres) {
    for (double& v : c) v = 3.0 * normal(rng);
  }
  FeatureMatrix features;
  features.dim = options.feature_dim;
  for (const Planned& p : plan) {
    features.ids.push_back(p.record.id);
    for (std::size_t d = 0; d < options.feature_dim; ++d) {
      double v = centres[p.content_class][d] + 0.5 * normal(rng);
      if (d == 0) v += 2.0 * (p.true_quality - 3.0);
      features.values.push_back(std::round(v * 1e6) / 1e6);
    }
  }
  {
    std::ostringstream s;
    WriteFeatures(s, features, options.seed);
    WriteFileAtomically(out.features, s.str());
  }

  // Crowd study over in-range images.
  std::vector<const Planned*> rated;
  for (const Planned& p : plan) {
    if (rated.size() >= options.rated_images) break;
    if (p.record.width >= 960 && p.record.height >= 540) rated.push_back(&p);
  }
  const std::size_t n_expert = std::min(options.expert_images, rated.size());
  std::map<std::string, std::vector<double>> experts;
  for (std::size_t i = 0; i < n_expert; ++i) {
    auto& scores = experts[rated[i]->record.id];
    for (std::size_t e = 0; e < options.experts; ++e) {
      scores.push_back(std::clamp(std::round(rated[i]->true_quality + 0.5 * normal(rng)), 1.0, 5.0));
    }
  }
  WriteExpertTable(out.experts, experts);

  std::vector<RatingEvent> ratings;
  std::int64_t clock = 1'600'000'000;
  for (std::size_t w = 0; w < options.workers && !rated.empty(); ++w) {
    const std::string worker = "w" + std::to_string(w);
    const int kind = static_cast<int>(w % 10);  // 7: random, 9: line clicker
    auto answer = [&](const Planned* p) {
      if (kind == 7) return 1 + static_cast<int>(u(rng) * 5);
      if (kind == 9) return u(rng) < 0.85 ? 3 : 1 + static_cast<int>(u(rng) * 5);
      return static_cast<int>(std::clamp(std::round(p->true_quality + 0.6 * normal(rng)), 1.0, 5.0));
    };
    std::vector<std::size_t> order(rated.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < std::min(options.ratings_per_worker, order.size()); ++k) {
      const Planned* p = rated[order[k]];
      ratings.push_back({worker, p->record.id, answer(p), clock++, false, {}});
    }
    for (std::size_t k = 0; k < options.test_questions_per_worker && n_expert > 0; ++k) {
      const Planned* p = rated[static_cast<std::size_t>(u(rng) * n_expert)];
      ratings.push_back({worker, p->record.id, answer(p), clock++, true, {}});
    }
  }
  WriteRatings(out.ratings, ratings);
  return out;
}

}  // namespace curate
