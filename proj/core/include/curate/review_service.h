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

// Manual triage queue with reviewer leases, an append-only verdict log and
// an HTTP front end.
//
// Endpoints (all JSON unless noted):
//   GET  /queue/next?reviewer=<id>&n=<count>
//   POST /verdict     {"reviewer", "image_id", "status": "kept"|"removed",
//                      "reason", "partner_id"}
//   GET  /stats
//   GET  /image/<id>  raw image bytes with their content type
//   POST /finalize    {"force": bool}

#ifndef CURATE_REVIEW_SERVICE_H_
#define CURATE_REVIEW_SERVICE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curate {

enum class ReviewStatus { kPending, kKept, kRemoved };
enum class RemovalReason { kInappropriate, kTextScreenshot, kUnderExposed, kDuplicate, kOther };

std::string_view ToString(ReviewStatus status);
std::string_view ToString(RemovalReason reason);
std::optional<ReviewStatus> ParseReviewStatus(std::string_view text);
std::optional<RemovalReason> ParseRemovalReason(std::string_view text);

struct ReviewItem {
  std::string image_id;
  std::string thumbnail_path;
  std::string full_path;
  std::string partner_id;  // suggested near-duplicate partner, may be empty
  ReviewStatus status = ReviewStatus::kPending;
  std::optional<RemovalReason> reason;
  std::string reviewer_id;
  std::int64_t decided_at = 0;  // ms
  std::string lease_holder;
  std::int64_t lease_expires_at = 0;  // ms
};

struct VerdictRecord {
  std::uint64_t sequence = 0;
  std::string reviewer_id;
  std::string image_id;
  ReviewStatus status = ReviewStatus::kKept;
  std::optional<RemovalReason> reason;
  std::string partner_id;
  std::int64_t decided_at = 0;
};

// Unknown image id.
class ReviewNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Item leased to another reviewer, or pending items at finalize.
class ReviewConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReviewStats {
  std::size_t total = 0;
  std::size_t pending = 0;
  std::size_t leased = 0;
  std::size_t kept = 0;
  std::size_t removed = 0;
  std::size_t verdicts = 0;
  std::map<std::string, std::size_t> removed_by_reason;
};

struct FinalizeResult {
  std::vector<std::string> kept;  // queue order
  std::map<std::string, std::vector<std::string>> removed_by_reason;
  std::size_t pending_defaulted = 0;
  std::size_t removed_count() const;
};

using Clock = std::function<std::int64_t()>;  // milliseconds
std::int64_t SystemClockMs();

struct ReviewQueueOptions {
  std::int64_t lease_ms = 10 * 60 * 1000;
  std::size_t default_batch = 20;
};

// Thread-safe. Every verdict is appended to the log before it takes effect;
// constructing a queue over an existing log replays it.
class ReviewQueue {
 public:
  ReviewQueue(std::vector<ReviewItem> items, std::filesystem::path log_path,
              Clock clock = SystemClockMs, ReviewQueueOptions options = {});

  // Up to n pending items not leased to someone else; they are leased to
  // `reviewer` (refreshing any lease the reviewer already holds). n == 0
  // selects the default batch size.
  std::vector<ReviewItem> NextBatch(const std::string& reviewer, std::size_t n = 0);

  // Throws ReviewNotFound, InvalidInput (bad status, removal without
  // reason) or ReviewConflict (pending item leased to another reviewer).
  VerdictRecord Submit(const std::string& reviewer, const std::string& image_id,
                       ReviewStatus status, std::optional<RemovalReason> reason,
                       const std::string& partner_id = {});

  ReviewStats Stats() const;
  std::optional<ReviewItem> Item(const std::string& image_id) const;
  std::vector<VerdictRecord> History(const std::string& image_id) const;

  // Latest verdict per item. Pending items throw ReviewConflict unless
  // `force`, in which case they count as kept.
  FinalizeResult Finalize(bool force) const;

  const ReviewQueueOptions& options() const { return options_; }

 private:
  void Apply(const VerdictRecord& record);
  void Replay();

  std::vector<ReviewItem> items_;
  std::map<std::string, std::size_t> index_;
  std::vector<VerdictRecord> history_;
  std::filesystem::path log_path_;
  Clock clock_;
  ReviewQueueOptions options_;
  mutable std::shared_mutex mutex_;
};

// Writes kept ids and the removal report as JSON.
void WriteFinalManifest(const std::filesystem::path& path, const FinalizeResult& result);

class ReviewServer {
 public:
  // When final_manifest is non-empty, POST /finalize also writes it.
  explicit ReviewServer(ReviewQueue& queue, std::filesystem::path final_manifest = {});
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port.
  int Start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until Stop().
  void Run(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace curate

#endif  // CURATE_REVIEW_SERVICE_H_
