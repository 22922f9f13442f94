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

#include "curate/io.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "curate/errors.h"
#include "curate/text.h"
#include "json.hpp"

namespace curate {

namespace {

using Json = nlohmann::json;

template <typename Fn>
void ForEachJsonLine(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  std::string line;
  std::size_t row = 0;
  for (; std::getline(in, line); ++row) {
    if (Trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw IngestError(path.string() + ": malformed JSON: " + e.what(), row);
    }
    try {
      fn(j, row);
    } catch (const IngestError&) {
      throw;
    } catch (const std::exception& e) {
      throw IngestError(path.string() + ": " + e.what(), row);
    }
  }
}

std::string JoinLines(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& j : rows) {
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

TagAssignment ParseTagAssignment(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw InvalidInput("tag assignment must look like tag:confidence: " + std::string(text));
  }
  const auto conf = ParseDouble(text.substr(colon + 1));
  if (!conf || !(*conf >= 0.0 && *conf <= 1.0)) {
    throw InvalidInput("tag confidence must lie in [0,1]: " + std::string(text));
  }
  return {std::string(text.substr(0, colon)), *conf};
}

std::vector<ImageRecord> ReadCorpusManifest(const std::filesystem::path& path) {
  std::vector<ImageRecord> records;
  std::set<std::string> seen;
  const auto base = path.parent_path();
  ForEachJsonLine(path, [&](const Json& j, std::size_t row) {
    ImageRecord r;
    r.id = j.at("id").get<std::string>();
    const std::filesystem::path p = j.at("path").get<std::string>();
    r.path = (p.is_absolute() ? p : base / p).lexically_normal().string();
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    r.byte_size = j.at("byte_size").get<std::int64_t>();
    if (j.contains("tags")) {
      for (const auto& t : j.at("tags")) r.tags.push_back(ParseTagAssignment(t.get<std::string>()));
    }
    r.license = j.value("license", std::string());
    r.license_ok = j.value("license_ok", true);
    ValidateRecord(r);
    if (!seen.insert(r.id).second) throw IngestError("duplicate id " + r.id, row);
    records.push_back(std::move(r));
  });
  return records;
}

void WriteCorpusManifest(const std::filesystem::path& path,
                         std::span<const ImageRecord> records) {
  std::vector<Json> rows;
  for (const auto& r : records) {
    Json tags = Json::array();
    for (const auto& t : r.tags) tags.push_back(t.tag + ":" + FormatDouble(t.confidence));
    rows.push_back({{"id", r.id},
                    {"path", r.path},
                    {"width", r.width},
                    {"height", r.height},
                    {"byte_size", r.byte_size},
                    {"tags", tags},
                    {"license", r.license}});
    if (!r.license_ok) rows.back()["license_ok"] = false;
  }
  WriteFileAtomically(path, JoinLines(rows));
}

std::vector<IndicatorVector> ReadIndicatorTable(const std::filesystem::path& path) {
  std::vector<IndicatorVector> out;
  ForEachJsonLine(path, [&](const Json& j, std::size_t row) {
    IndicatorVector v;
    v.id = j.at("id").get<std::string>();
    v.brightness = j.at("brightness").get<double>();
    v.colorfulness = j.at("colorfulness").get<double>();
    v.rms_contrast = j.at("rms_contrast").get<double>();
    v.sharpness = j.at("sharpness").get<double>();
    v.bitrate = j.at("bitrate").get<double>();
    v.resolution = j.at("resolution").get<std::int64_t>();
    if (j.contains("jpeg_quality")) v.jpeg_quality = j.at("jpeg_quality").get<int>();
    if (j.contains("cluster_id")) v.cluster_id = j.at("cluster_id").get<int>();
    for (int k = 0; k < kNumIndicators; ++k) {
      const auto value = v.Get(static_cast<Indicator>(k));
      if (value && !std::isfinite(*value)) {
        throw IngestError("non-finite " + std::string(kIndicatorNames[k]), row);
      }
    }
    out.push_back(std::move(v));
  });
  return out;
}

void WriteIndicatorTable(const std::filesystem::path& path,
                         std::span<const IndicatorVector> vectors) {
  std::vector<Json> rows;
  for (const auto& v : vectors) {
    Json j = {{"id", v.id},
              {"brightness", v.brightness},
              {"colorfulness", v.colorfulness},
              {"rms_contrast", v.rms_contrast},
              {"sharpness", v.sharpness},
              {"bitrate", v.bitrate},
              {"resolution", v.resolution}};
    if (v.jpeg_quality) j["jpeg_quality"] = *v.jpeg_quality;
    if (v.cluster_id) j["cluster_id"] = *v.cluster_id;
    rows.push_back(std::move(j));
  }
  WriteFileAtomically(path, JoinLines(rows));
}

std::map<std::string, std::vector<FaceBox>> ReadFaceBoxes(const std::filesystem::path& path) {
  std::map<std::string, std::vector<FaceBox>> out;
  ForEachJsonLine(path, [&](const Json& j, std::size_t row) {
    auto& boxes = out[j.at("id").get<std::string>()];
    for (const auto& b : j.at("faces")) {
      if (!b.is_array() || b.size() != 4) throw IngestError("face box needs x,y,w,h", row);
      FaceBox f{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
      if (f.width < 1 || f.height < 1) throw IngestError("face box must be non-empty", row);
      boxes.push_back(f);
    }
  });
  return out;
}

void WriteFaceBoxes(const std::filesystem::path& path,
                    const std::map<std::string, std::vector<FaceBox>>& faces) {
  std::vector<Json> rows;
  for (const auto& [id, boxes] : faces) {
    Json list = Json::array();
    for (const auto& b : boxes) list.push_back({b.x, b.y, b.width, b.height});
    rows.push_back({{"id", id}, {"faces", list}});
  }
  WriteFileAtomically(path, JoinLines(rows));
}

std::vector<RatingEvent> ReadRatings(const std::filesystem::path& path) {
  std::vector<RatingEvent> out;
  ForEachJsonLine(path, [&](const Json& j, std::size_t row) {
    RatingEvent r;
    r.worker_id = j.at("worker").get<std::string>();
    r.image_id = j.at("image").get<std::string>();
    r.score = j.at("score").get<int>();
    if (r.score < 1 || r.score > 5) throw IngestError("score outside 1..5", row);
    r.timestamp = j.value("timestamp", std::int64_t{0});
    r.is_test_question = j.value("is_test", false);
    r.context = j.value("context", std::string());
    out.push_back(std::move(r));
  });
  return out;
}

void WriteRatings(const std::filesystem::path& path, std::span<const RatingEvent> ratings) {
  std::vector<Json> rows;
  for (const auto& r : ratings) {
    Json j = {{"worker", r.worker_id},
              {"image", r.image_id},
              {"score", r.score},
              {"timestamp", r.timestamp},
              {"is_test", r.is_test_question}};
    if (!r.context.empty()) j["context"] = r.context;
    rows.push_back(std::move(j));
  }
  WriteFileAtomically(path, JoinLines(rows));
}

std::map<std::string, std::vector<double>> ReadExpertTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  std::map<std::string, std::vector<double>> out;
  std::string line;
  for (std::size_t row = 0; std::getline(in, line); ++row) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw IngestError("expert row needs at least one score", row);
    auto& scores = out[std::string(fields[0])];
    if (!scores.empty()) throw IngestError("duplicate image " + std::string(fields[0]), row);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = ParseDouble(fields[i]);
      if (!v || !(*v >= 1.0 && *v <= 5.0)) throw IngestError("expert score outside 1..5", row);
      scores.push_back(*v);
    }
  }
  return out;
}

void WriteExpertTable(const std::filesystem::path& path,
                      const std::map<std::string, std::vector<double>>& experts) {
  std::ostringstream out;
  for (const auto& [id, scores] : experts) {
    out << id;
    for (double s : scores) out << ' ' << FormatDouble(s);
    out << '\n';
  }
  WriteFileAtomically(path, out.str());
}

}  // namespace curate
