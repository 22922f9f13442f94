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


#include "curate/review_service.h"

#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "curate/errors.h"
#include "curate/image.h"
#include "httplib.h"
#include "json.hpp"

namespace curate {

namespace {

using Json = nlohmann::json;

constexpr std::string_view kStatusNames[] = {"pending", "kept", "removed"};
constexpr std::string_view kReasonNames[] = {"inappropriate", "text_screenshot", "under_exposed",
                                             "duplicate", "other"};

Json ToJson(const VerdictRecord& v) {
  Json j = {{"seq", v.sequence},
            {"reviewer", v.reviewer_id},
            {"image_id", v.image_id},
            {"status", ToString(v.status)},
            {"decided_at", v.decided_at}};
  if (v.reason) j["reason"] = ToString(*v.reason);
  if (!v.partner_id.empty()) j["partner_id"] = v.partner_id;
  return j;
}

Json ToJson(const ReviewItem& item) {
  Json j = {{"image_id", item.image_id},
            {"image_url", "/image/" + item.image_id},
            {"status", ToString(item.status)}};
  if (!item.partner_id.empty()) j["partner_id"] = item.partner_id;
  if (item.reason) j["reason"] = ToString(*item.reason);
  if (!item.lease_holder.empty()) j["lease_expires_at"] = item.lease_expires_at;
  return j;
}

Json ToJson(const FinalizeResult& r) {
  Json by_reason = Json::object();
  for (const auto& [reason, ids] : r.removed_by_reason) by_reason[reason] = ids;
  return {{"ids", r.kept},
          {"kept_count", r.kept.size()},
          {"removed_count", r.removed_count()},
          {"removed_by_reason", by_reason},
          {"pending_defaulted", r.pending_defaulted}};
}

}  // namespace

std::string_view ToString(ReviewStatus status) { return kStatusNames[static_cast<int>(status)]; }
std::string_view ToString(RemovalReason reason) { return kReasonNames[static_cast<int>(reason)]; }

std::optional<ReviewStatus> ParseReviewStatus(std::string_view text) {
  for (int i = 0; i < 3; ++i) {
    if (kStatusNames[i] == text) return static_cast<ReviewStatus>(i);
  }
  return std::nullopt;
}

std::optional<RemovalReason> ParseRemovalReason(std::string_view text) {
  for (int i = 0; i < 5; ++i) {
    if (kReasonNames[i] == text) return static_cast<RemovalReason>(i);
  }
  return std::nullopt;
}

std::size_t FinalizeResult::removed_count() const {
  std::size_t n = 0;
  for (const auto& [reason, ids] : removed_by_reason) n += ids.size();
  return n;
}

std::int64_t SystemClockMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

ReviewQueue::ReviewQueue(std::vector<ReviewItem> items, std::filesystem::path log_path,
                         Clock clock, ReviewQueueOptions options)
    : items_(std::move(items)),
      log_path_(std::move(log_path)),
      clock_(std::move(clock)),
      options_(options) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].image_id, i).second) {
      throw InvalidInput("duplicate review item " + items_[i].image_id);
    }
  }
  Replay();
}

void ReviewQueue::Replay() {
  if (log_path_.empty() || !std::filesystem::exists(log_path_)) return;
  std::ifstream in(log_path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception&) {
      break;  // torn final line from an interrupted write
    }
    VerdictRecord v;
    v.sequence = j.at("seq").get<std::uint64_t>();
    v.reviewer_id = j.at("reviewer").get<std::string>();
    v.image_id = j.at("image_id").get<std::string>();
    const auto status = ParseReviewStatus(j.at("status").get<std::string>());
    if (!status || *status == ReviewStatus::kPending) {
      throw IngestError("bad status in verdict log " + log_path_.string());
    }
    v.status = *status;
    if (j.contains("reason")) v.reason = ParseRemovalReason(j.at("reason").get<std::string>());
    v.partner_id = j.value("partner_id", std::string());
    v.decided_at = j.at("decided_at").get<std::int64_t>();
    if (!index_.count(v.image_id)) continue;  // item no longer queued
    Apply(v);
  }
}

void ReviewQueue::Apply(const VerdictRecord& v) {
  ReviewItem& item = items_[index_.at(v.image_id)];
  item.status = v.status;
  item.reason = v.reason;
  item.reviewer_id = v.reviewer_id;
  item.decided_at = v.decided_at;
  item.lease_holder.clear();
  item.lease_expires_at = 0;
  history_.push_back(v);
}

std::vector<ReviewItem> ReviewQueue::NextBatch(const std::string& reviewer, std::size_t n) {
  if (reviewer.empty()) throw InvalidInput("reviewer id required");
  if (n == 0) n = options_.default_batch;
  std::unique_lock lock(mutex_);
  const std::int64_t now = clock_();
  std::vector<ReviewItem> batch;
  for (auto& item : items_) {
    if (batch.size() >= n) break;
    if (item.status != ReviewStatus::kPending) continue;
    const bool active = !item.lease_holder.empty() && item.lease_expires_at > now;
    if (active && item.lease_holder != reviewer) continue;
    item.lease_holder = reviewer;
    item.lease_expires_at = now + options_.lease_ms;
    batch.push_back(item);
  }
  return batch;
}

VerdictRecord ReviewQueue::Submit(const std::string& reviewer, const std::string& image_id,
                                  ReviewStatus status, std::optional<RemovalReason> reason,
                                  const std::string& partner_id) {
  if (reviewer.empty()) throw InvalidInput("reviewer id required");
  if (status == ReviewStatus::kPending) throw InvalidInput("verdict must be kept or removed");
  if (status == ReviewStatus::kRemoved && !reason) {
    throw InvalidInput("removal of " + image_id + " needs a reason");
  }
  std::unique_lock lock(mutex_);
  const auto it = index_.find(image_id);
  if (it == index_.end()) throw ReviewNotFound("unknown image id " + image_id);
  const ReviewItem& item = items_[it->second];
  const std::int64_t now = clock_();
  if (item.status == ReviewStatus::kPending && !item.lease_holder.empty() &&
      item.lease_holder != reviewer && item.lease_expires_at > now) {
    throw ReviewConflict(image_id + " is leased to " + item.lease_holder);
  }
  VerdictRecord v;
  v.sequence = history_.size() + 1;
  v.reviewer_id = reviewer;
  v.image_id = image_id;
  v.status = status;
  if (status == ReviewStatus::kRemoved) v.reason = reason;
  v.partner_id = partner_id;
  v.decided_at = now;
  if (!log_path_.empty()) {
    if (log_path_.has_parent_path()) std::filesystem::create_directories(log_path_.parent_path());
    std::ofstream out(log_path_, std::ios::app);
    out << ToJson(v).dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot append to " + log_path_.string());
  }
  Apply(v);
  return v;
}

ReviewStats ReviewQueue::Stats() const {
  std::shared_lock lock(mutex_);
  const std::int64_t now = clock_();
  ReviewStats s;
  s.total = items_.size();
  s.verdicts = history_.size();
  for (const auto& item : items_) {
    switch (item.status) {
      case ReviewStatus::kPending:
        ++s.pending;
        if (!item.lease_holder.empty() && item.lease_expires_at > now) ++s.leased;
        break;
      case ReviewStatus::kKept:
        ++s.kept;
        break;
      case ReviewStatus::kRemoved:
        ++s.removed;
        ++s.removed_by_reason[std::string(ToString(*item.reason))];
        break;
    }
  }
  return s;
}

std::optional<ReviewItem> ReviewQueue::Item(const std::string& image_id) const {
  std::shared_lock lock(mutex_);
  const auto it = index_.find(image_id);
  if (it == index_.end()) return std::nullopt;
  return items_[it->second];
}

std::vector<VerdictRecord> ReviewQueue::History(const std::string& image_id) const {
  std::shared_lock lock(mutex_);
  std::vector<VerdictRecord> out;
  for (const auto& v : history_) {
    if (v.image_id == image_id) out.push_back(v);
  }
  return out;
}

FinalizeResult ReviewQueue::Finalize(bool force) const {
  std::shared_lock lock(mutex_);
  FinalizeResult r;
  std::size_t pending = 0;
  for (const auto& item : items_) pending += item.status == ReviewStatus::kPending;
  if (pending > 0 && !force) {
    throw ReviewConflict(std::to_string(pending) + " items are still pending");
  }
  for (const auto& item : items_) {
    if (item.status == ReviewStatus::kRemoved) {
      r.removed_by_reason[std::string(ToString(*item.reason))].push_back(item.image_id);
    } else {
      r.kept.push_back(item.image_id);
    }
  }
  r.pending_defaulted = pending;
  return r;
}

void WriteFinalManifest(const std::filesystem::path& path, const FinalizeResult& result) {
  Json j = ToJson(result);
  j["stage"] = "review";
  WriteFileAtomically(path, j.dump(1) + "\n");
}

struct ReviewServer::Impl {
  ReviewQueue& queue;
  std::filesystem::path final_manifest;
  httplib::Server server;
  std::thread thread;

  Impl(ReviewQueue& q, std::filesystem::path out) : queue(q), final_manifest(std::move(out)) {}

  static void Reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename Fn>
  static void Guard(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const ReviewNotFound& e) {
      Reply(res, 404, {{"error", e.what()}});
    } catch (const ReviewConflict& e) {
      Reply(res, 409, {{"error", e.what()}});
    } catch (const InvalidInput& e) {
      Reply(res, 400, {{"error", e.what()}});
    } catch (const Json::exception& e) {
      Reply(res, 400, {{"error", std::string("bad JSON: ") + e.what()}});
    } catch (const std::exception& e) {
      Reply(res, 500, {{"error", e.what()}});
    }
  }

  void Routes() {
    server.Get("/queue/next", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const std::string reviewer = req.get_param_value("reviewer");
        std::size_t n = 0;
        if (req.has_param("n")) {
          try {
            n = std::stoul(req.get_param_value("n"));
          } catch (const std::exception&) {
            throw InvalidInput("n must be a non-negative integer");
          }
        }
        Json items = Json::array();
        for (const auto& item : queue.NextBatch(reviewer, n)) items.push_back(ToJson(item));
        Reply(res, 200, {{"reviewer", reviewer}, {"items", items}});
      });
    });
    server.Post("/verdict", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const Json body = Json::parse(req.body);
        const auto status = ParseReviewStatus(body.at("status").get<std::string>());
        if (!status) throw InvalidInput("status must be kept or removed");
        std::optional<RemovalReason> reason;
        if (body.contains("reason") && !body.at("reason").is_null()) {
          reason = ParseRemovalReason(body.at("reason").get<std::string>());
          if (!reason) throw InvalidInput("unknown removal reason");
        }
        const std::string image_id = body.at("image_id").get<std::string>();
        const VerdictRecord v =
            queue.Submit(body.value("reviewer", std::string()), image_id, *status, reason,
                         body.value("partner_id", std::string()));
        Json ack = ToJson(v);
        ack["ok"] = true;
        ack["history_length"] = queue.History(image_id).size();
        Reply(res, 200, ack);
      });
    });
    server.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
      Guard(res, [&] {
        const ReviewStats s = queue.Stats();
        Reply(res, 200,
              {{"total", s.total},
               {"pending", s.pending},
               {"leased", s.leased},
               {"kept", s.kept},
               {"removed", s.removed},
               {"verdicts", s.verdicts},
               {"removed_by_reason", s.removed_by_reason}});
      });
    });
    server.Get(R"(/image/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        const std::string id = req.matches[1];
        const auto item = queue.Item(id);
        if (!item) throw ReviewNotFound("unknown image id " + id);
        const auto bytes = ReadFileBytes(item->full_path);
        const char* type = "application/octet-stream";
        switch (SniffFormat(bytes)) {
          case FileFormat::kJpeg:
            type = "image/jpeg";
            break;
          case FileFormat::kPng:
            type = "image/png";
            break;
          case FileFormat::kUnknown:
            break;
        }
        res.status = 200;
        res.set_content(std::string(bytes.begin(), bytes.end()), type);
      });
    });
    server.Post("/finalize", [this](const httplib::Request& req, httplib::Response& res) {
      Guard(res, [&] {
        bool force = req.get_param_value("force") == "1" || req.get_param_value("force") == "true";
        if (!req.body.empty()) force = force || Json::parse(req.body).value("force", false);
        const FinalizeResult r = queue.Finalize(force);
        if (!final_manifest.empty()) WriteFinalManifest(final_manifest, r);
        Reply(res, 200, ToJson(r));
      });
    });
  }
};

ReviewServer::ReviewServer(ReviewQueue& queue, std::filesystem::path final_manifest)
    : impl_(std::make_unique<Impl>(queue, std::move(final_manifest))) {
  impl_->Routes();
}

ReviewServer::~ReviewServer() { Stop(); }

int ReviewServer::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ReviewServer::Run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ReviewServer::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace curate
