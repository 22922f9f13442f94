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

#include <gtest/gtest.h>

#include <fstream>

#include "curate/errors.h"
#include "test_util.h"

namespace curate {
namespace {

using testing::TempDir;

struct FakeClock {
  std::int64_t now = 1000;
  Clock fn() {
    return [this] { return now; };
  }
};

std::vector<ReviewItem> Items(int n) {
  std::vector<ReviewItem> items;
  for (int i = 0; i < n; ++i) {
    ReviewItem it;
    it.image_id = "img" + std::to_string(100 + i);
    items.push_back(it);
  }
  return items;
}

std::vector<std::string> Ids(const std::vector<ReviewItem>& v) {
  std::vector<std::string> out;
  for (const auto& i : v) out.push_back(i.image_id);
  return out;
}

TEST(ReviewQueue, LeasesAreExclusive) {
  FakeClock clock;
  ReviewQueue q(Items(5), {}, clock.fn());
  const auto a = q.NextBatch("alice", 3);
  const auto b = q.NextBatch("bob", 3);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(b.size(), 2u);
  for (const auto& x : a)
    for (const auto& y : b) EXPECT_NE(x.image_id, y.image_id);
  EXPECT_EQ(q.Stats().leased, 5u);
  EXPECT_THROW(q.Submit("bob", a[0].image_id, ReviewStatus::kKept, std::nullopt), ReviewConflict);
  EXPECT_EQ(Ids(q.NextBatch("alice", 3)), Ids(a));
}

TEST(ReviewQueue, ExpiredLeasesReturnToPool) {
  FakeClock clock;
  ReviewQueue q(Items(2), {}, clock.fn(), {.lease_ms = 500});
  EXPECT_EQ(q.NextBatch("alice").size(), 2u);
  EXPECT_TRUE(q.NextBatch("bob").empty());
  clock.now += 501;
  EXPECT_EQ(q.NextBatch("bob").size(), 2u);
  EXPECT_NO_THROW(q.Submit("bob", "img100", ReviewStatus::kKept, std::nullopt));
}

TEST(ReviewQueue, DecidedItemsLeaveTheQueue) {
  FakeClock clock;
  ReviewQueue q(Items(3), {}, clock.fn());
  q.Submit("alice", "img101", ReviewStatus::kKept, std::nullopt);
  EXPECT_EQ(Ids(q.NextBatch("bob")), (std::vector<std::string>{"img100", "img102"}));
}

TEST(ReviewQueue, VerdictValidation) {
  FakeClock clock;
  ReviewQueue q(Items(2), {}, clock.fn());
  EXPECT_NO_THROW(q.Submit("a", "img100", ReviewStatus::kKept, std::nullopt));
  EXPECT_THROW(q.Submit("a", "img101", ReviewStatus::kRemoved, std::nullopt), InvalidInput);
  EXPECT_THROW(q.Submit("a", "nope", ReviewStatus::kKept, std::nullopt), ReviewNotFound);
  EXPECT_THROW(q.Submit("a", "img101", ReviewStatus::kPending, std::nullopt), InvalidInput);
  EXPECT_THROW(q.Submit("", "img101", ReviewStatus::kKept, std::nullopt), InvalidInput);
  EXPECT_THROW(q.NextBatch(""), InvalidInput);
}

TEST(ReviewQueue, LastWriteWinsWithFullHistory) {
  FakeClock clock;
  ReviewQueue q(Items(1), {}, clock.fn());
  q.Submit("a", "img100", ReviewStatus::kKept, std::nullopt);
  clock.now += 10;
  q.Submit("b", "img100", ReviewStatus::kRemoved, RemovalReason::kDuplicate, "img999");
  const auto h = q.History("img100");
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].status, ReviewStatus::kKept);
  EXPECT_EQ(h[1].partner_id, "img999");
  const auto item = q.Item("img100");
  EXPECT_EQ(item->status, ReviewStatus::kRemoved);
  EXPECT_EQ(item->reviewer_id, "b");
  EXPECT_EQ(item->decided_at, 1010);
}

TEST(ReviewQueue, ReplayRestoresStateAndSkipsTornLine) {
  TempDir dir;
  const auto log = dir.path() / "review" / "verdicts.jsonl";
  FakeClock clock;
  {
    ReviewQueue q(Items(4), log, clock.fn());
    q.Submit("a", "img100", ReviewStatus::kRemoved, RemovalReason::kTextScreenshot);
    q.Submit("a", "img101", ReviewStatus::kKept, std::nullopt);
    q.Submit("b", "img100", ReviewStatus::kKept, std::nullopt);
  }
  {
    std::ofstream out(log, std::ios::app);
    out << R"({"seq":4,"reviewer":"a","image_id":"img10)";
  }
  ReviewQueue q(Items(4), log, clock.fn());
  EXPECT_EQ(q.Stats().verdicts, 3u);
  EXPECT_EQ(q.Item("img100")->status, ReviewStatus::kKept);
  EXPECT_EQ(q.History("img100").size(), 2u);
  EXPECT_EQ(q.Stats().pending, 2u);
}

TEST(ReviewQueue, FinalizeArithmetic) {
  FakeClock clock;
  ReviewQueue q(Items(40), {}, clock.fn());
  const RemovalReason reasons[] = {RemovalReason::kInappropriate, RemovalReason::kUnderExposed,
                                   RemovalReason::kDuplicate};
  std::size_t removed = 0;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "img" + std::to_string(100 + i);
    if (i % 3 == 0) {
      q.Submit("a", id, ReviewStatus::kRemoved, reasons[i % 9 / 3]);
      ++removed;
    } else if (i < 35) {
      q.Submit("a", id, ReviewStatus::kKept, std::nullopt);
    }
  }
  EXPECT_THROW(q.Finalize(false), ReviewConflict);
  const auto r = q.Finalize(true);
  EXPECT_EQ(r.removed_count(), removed);
  EXPECT_EQ(r.kept.size(), 40 - removed);
  std::size_t sum = 0;
  for (const auto& [reason, ids] : r.removed_by_reason) sum += ids.size();
  EXPECT_EQ(sum, removed);
  EXPECT_GT(r.pending_defaulted, 0u);
  const auto s = q.Stats();
  EXPECT_EQ(s.kept + s.removed + s.pending, s.total);
}

TEST(ReviewQueue, DuplicateItemsRejected) {
  auto items = Items(2);
  items[1].image_id = items[0].image_id;
  EXPECT_THROW(ReviewQueue(items, {}), InvalidInput);
}

}  // namespace
}  // namespace curate
