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

#include "curate/tag_sampler.h"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "curate/errors.h"

namespace curate {

namespace {

// Distinct tags of a record with their best confidence.
std::map<std::string, double> DistinctTags(const ImageRecord& r) {
  std::map<std::string, double> tags;
  for (const auto& t : r.tags) {
    auto [it, inserted] = tags.emplace(t.tag, t.confidence);
    if (!inserted) it->second = std::max(it->second, t.confidence);
  }
  return tags;
}

class SelectionBuilder {
 public:
  SelectionBuilder(const TagIndex& index, std::span<const ImageRecord> records,
                   std::size_t size_cap)
      : records_(records), size_cap_(size_cap), selected_(records.size(), false) {
    record_tags_.reserve(records.size());
    for (const auto& r : records) {
      std::vector<std::string> tags;
      for (const auto& [tag, conf] : DistinctTags(r)) tags.push_back(tag);
      record_tags_.push_back(std::move(tags));
    }
    for (const auto& [tag, n] : index.phi) fulfilled_[tag] = 0;
  }

  bool full() const { return size_cap_ != 0 && ids_.size() >= size_cap_; }
  bool selected(std::size_t i) const { return selected_[i]; }
  std::size_t fulfilled(const std::string& tag) const { return fulfilled_.at(tag); }

  // Returns false once the cap has been hit.
  bool Add(std::size_t i) {
    if (full()) return false;
    if (selected_[i]) return true;
    selected_[i] = true;
    ids_.push_back(records_[i].id);
    for (const auto& t : record_tags_[i]) ++fulfilled_[t];
    return true;
  }

  std::vector<std::string> TakeIds() { return std::move(ids_); }
  std::size_t size() const { return ids_.size(); }

 private:
  std::span<const ImageRecord> records_;
  std::size_t size_cap_;
  std::vector<bool> selected_;
  std::vector<std::vector<std::string>> record_tags_;
  std::unordered_map<std::string, std::size_t> fulfilled_;
  std::vector<std::string> ids_;
};

}  // namespace

TagIndex BuildTagIndex(std::span<const ImageRecord> records) {
  TagIndex index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& [tag, conf] : DistinctTags(records[i])) {
      index.postings[tag].push_back({i, conf});
    }
  }
  for (auto& [tag, list] : index.postings) {
    std::sort(list.begin(), list.end(), [&](const Posting& a, const Posting& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      return records[a.record].id < records[b.record].id;
    });
    index.phi[tag] = list.size();
    index.order.push_back(tag);
  }
  // std::map iteration already sorted tags lexicographically; stable_sort
  // keeps that as the tie-break.
  std::stable_sort(index.order.begin(), index.order.end(),
                   [&](const std::string& a, const std::string& b) {
                     return index.phi.at(a) < index.phi.at(b);
                   });
  return index;
}

TagSelection SampleByQuota(const TagIndex& index, std::span<const ImageRecord> records,
                           std::size_t quota, std::size_t size_cap) {
  if (quota < 1) throw InvalidInput("tag quota must be at least 1");
  SelectionBuilder builder(index, records, size_cap);
  TagSelection out;
  out.quota = quota;
  out.size_cap = size_cap;

  bool stopped = false;
  for (const auto& tag : index.order) {
    if (stopped || index.phi.at(tag) >= quota) continue;
    for (const Posting& p : index.postings.at(tag)) {
      if (!builder.Add(p.record)) {
        stopped = true;
        break;
      }
    }
  }
  out.phase1_size = builder.size();

  for (const auto& tag : index.order) {
    if (stopped) break;
    if (index.phi.at(tag) < quota) continue;
    for (const Posting& p : index.postings.at(tag)) {
      if (builder.fulfilled(tag) >= quota) break;
      if (builder.selected(p.record)) continue;  // excluded at pop time
      if (!builder.Add(p.record)) {
        stopped = true;
        break;
      }
    }
  }
  for (const auto& tag : index.order) {
    TagFulfillment f;
    f.tag = tag;
    f.phi = index.phi.at(tag);
    f.selected = builder.fulfilled(tag);
    f.under_quota = f.selected < std::min(quota, f.phi);
    out.trace.push_back(std::move(f));
  }
  out.capped = stopped;
  out.ids = builder.TakeIds();
  return out;
}

QuotaChoice ChooseQuota(const TagIndex& index, std::span<const ImageRecord> records,
                        std::size_t target_size, double tolerance) {
  if (target_size > records.size()) throw InvalidInput("target size exceeds corpus size");
  if (tolerance < 0) throw InvalidInput("tolerance must be non-negative");
  const double limit = static_cast<double>(target_size) * (1.0 + tolerance);
  std::size_t max_phi = 0;
  for (const auto& [tag, n] : index.phi) max_phi = std::max(max_phi, n);

  QuotaChoice choice;
  auto probe = [&](std::size_t q) {
    const std::size_t size = SampleByQuota(index, records, q, 0).ids.size();
    for (const auto& p : choice.probes) {
      if ((p.quota < q && p.size > size) || (p.quota > q && p.size < size)) {
        throw std::logic_error("selection size is not monotone in the quota (Q=" +
                               std::to_string(p.quota) + " -> " + std::to_string(p.size) +
                               ", Q=" + std::to_string(q) + " -> " + std::to_string(size) +
                               ")");
      }
    }
    choice.probes.push_back({q, size});
    return size;
  };

  if (max_phi == 0) {
    choice.quota = 1;
    choice.size = 0;
    return choice;
  }
  const std::size_t floor_size = probe(1);
  if (static_cast<double>(floor_size) > limit) {
    throw InvalidInput("target " + std::to_string(target_size) +
                       " is below the Q=1 selection floor of " + std::to_string(floor_size));
  }
  std::size_t lo = 1;
  std::size_t lo_size = floor_size;
  std::size_t hi = max_phi;
  if (hi == lo) {
    choice.quota = lo;
    choice.size = lo_size;
    return choice;
  }
  const std::size_t hi_size = probe(hi);
  if (static_cast<double>(hi_size) <= limit) {
    choice.quota = hi;
    choice.size = hi_size;
    return choice;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t s = probe(mid);
    if (static_cast<double>(s) <= limit) {
      lo = mid;
      lo_size = s;
    } else {
      hi = mid;
    }
  }
  choice.quota = lo;
  choice.size = lo_size;
  return choice;
}

}  // namespace curate
