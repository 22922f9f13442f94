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

// Line-delimited JSON and plain-text formats for corpus manifests, indicator
// tables, face boxes, ratings and expert scores. Readers throw IngestError
// with the zero-based line index of the first bad row.
//
// Corpus manifest line:
//   {"id": "...", "path": "...", "width": W, "height": H, "byte_size": B,
//    "tags": ["tag:confidence", ...], "license": "CC-BY"}
// Relative paths resolve against the manifest's directory.
//
// Expert table: one image per line, "<image_id> <score> <score> ...", raw
// 1..5 scores; '#' starts a comment.

#ifndef CURATE_IO_H_
#define CURATE_IO_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curate/cropper.h"
#include "curate/indicators.h"
#include "curate/subjective.h"

namespace curate {

// "tag:confidence", split at the last ':'.
TagAssignment ParseTagAssignment(std::string_view text);

std::vector<ImageRecord> ReadCorpusManifest(const std::filesystem::path& path);
void WriteCorpusManifest(const std::filesystem::path& path,
                         std::span<const ImageRecord> records);

std::vector<IndicatorVector> ReadIndicatorTable(const std::filesystem::path& path);
void WriteIndicatorTable(const std::filesystem::path& path,
                         std::span<const IndicatorVector> vectors);

// {"id": "...", "faces": [[x, y, w, h], ...]} per line.
std::map<std::string, std::vector<FaceBox>> ReadFaceBoxes(const std::filesystem::path& path);
void WriteFaceBoxes(const std::filesystem::path& path,
                    const std::map<std::string, std::vector<FaceBox>>& faces);

// {"worker": "...", "image": "...", "score": 1..5, "timestamp": t,
//  "is_test": false} per line.
std::vector<RatingEvent> ReadRatings(const std::filesystem::path& path);
void WriteRatings(const std::filesystem::path& path, std::span<const RatingEvent> ratings);

std::map<std::string, std::vector<double>> ReadExpertTable(const std::filesystem::path& path);
void WriteExpertTable(const std::filesystem::path& path,
                      const std::map<std::string, std::vector<double>>& experts);

}  // namespace curate

#endif  // CURATE_IO_H_
