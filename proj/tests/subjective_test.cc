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


#include "curate/subjective.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "curate/errors.h"

namespace curate {
namespace {

RatingEvent R(const std::string& w, const std::string& img, int s, bool test = false) {
  return {w, img, s, 0, test, ""};
}

std::string Img(int i) { return "img" + std::to_string(1000 + i); }

TEST(MapScore, Endpoints) {
  EXPECT_DOUBLE_EQ(MapScore(1), 1.0);
  EXPECT_DOUBLE_EQ(MapScore(5), 100.0);
  EXPECT_DOUBLE_EQ(MapScore(3), 50.5);
  for (int s = 1; s < 5; ++s) EXPECT_LT(MapScore(s), MapScore(s + 1));
  EXPECT_THROW(MapScore(0), InvalidInput);
}

TEST(Mos, ConstantRatings) {
  const std::vector<RatingEvent> r = {R("a", "x", 3), R("b", "x", 3), R("c", "x", 3),
                                      R("a", "y", 5)};
  const auto m = ComputeMos(r);
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_DOUBLE_EQ(m.records[0].mos, 50.5);
  EXPECT_DOUBLE_EQ(m.records[0].std, 0.0);
  EXPECT_DOUBLE_EQ(m.records[1].mos, 100.0);
  EXPECT_EQ(m.records[1].count, 1u);
}

TEST(Mos, ExclusionAndTestRows) {
  const std::vector<RatingEvent> r = {R("a", "x", 1), R("b", "x", 5), R("c", "x", 5, true),
                                      R("b", "y", 2)};
  const auto m = ComputeMos(r, {"b"});
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_EQ(m.records[0].count, 1u);
  EXPECT_EQ(m.residue, std::vector<std::string>{"y"});
}

TEST(LineClicker, RatioArithmetic) {
  EXPECT_DOUBLE_EQ(LineClickerRatio({100, 10, 10, 10, 10}), 2.5);
  EXPECT_DOUBLE_EQ(LineClickerRatio({20, 20, 20, 20, 20}), 0.25);
  EXPECT_TRUE(std::isinf(LineClickerRatio({7, 0, 0, 0, 0})));
  std::vector<WorkerProfile> p(3);
  p[0].worker_id = "a";
  p[0].score_counts = {100, 10, 10, 10, 10};
  p[1].worker_id = "b";
  p[1].score_counts = {20, 20, 20, 20, 20};
  p[2].worker_id = "c";
  p[2].score_counts = {7, 0, 0, 0, 0};
  EXPECT_EQ(ScreenLineClickers(p, 2.0), (std::vector<std::string>{"a", "c"}));
}

// Crowd of faithful workers plus one extra worker of the given kind.
std::vector<RatingEvent> Crowd(std::mt19937_64& rng, int images, const std::string& extra,
                               bool extra_random, int extra_count) {
  std::vector<RatingEvent> out;
  std::vector<int> truth(images);
  for (int i = 0; i < images; ++i) truth[i] = 1 + static_cast<int>(rng() % 5);
  for (int w = 0; w < 8; ++w)
    for (int i = 0; i < images; ++i) {
      const int noise = static_cast<int>(rng() % 5 == 0) * ((rng() % 2) ? 1 : -1);
      out.push_back(R("good" + std::to_string(w), Img(i), std::clamp(truth[i] + noise, 1, 5)));
    }
  for (int i = 0; i < extra_count; ++i) {
    out.push_back(R(extra, Img(i), extra_random ? 1 + static_cast<int>(rng() % 5) : truth[i]));
  }
  return out;
}

TEST(ScreenLowCorrelation, FaithfulWorkerKept) {
  std::mt19937_64 rng(1);
  const auto r = Crowd(rng, 50, "faithful", false, 50);
  for (const auto& s : ScreenLowCorrelation(r)) {
    if (s.worker_id == "faithful") {
      EXPECT_FALSE(s.flagged);
      ASSERT_TRUE(s.plcc.has_value());
      EXPECT_GT(*s.plcc, 0.9);
    }
  }
}

TEST(ScreenLowCorrelation, RandomWorkerFlaggedAlmostAlways) {
  std::mt19937_64 rng(2);
  int flagged = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto r = Crowd(rng, 50, "noise", true, 50);
    for (const auto& s : ScreenLowCorrelation(r)) flagged += s.worker_id == "noise" && s.flagged;
  }
  EXPECT_GE(flagged, trials * 99 / 100);
}

TEST(ScreenLowCorrelation, FewRatingsExempt) {
  std::mt19937_64 rng(3);
  const auto r = Crowd(rng, 50, "rare", true, 2);
  for (const auto& s : ScreenLowCorrelation(r)) {
    if (s.worker_id == "rare") {
      EXPECT_TRUE(s.exempt);
      EXPECT_FALSE(s.flagged);
    }
  }
}

TEST(ScreenLowCorrelation, ConstantWorkerIsFlagged) {
  std::vector<RatingEvent> r;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    r.push_back(R("flat", Img(i), 3));
    for (int w = 0; w < 3; ++w) r.push_back(R("w" + std::to_string(w), Img(i), 1 + i % 5));
  }
  for (const auto& s : ScreenLowCorrelation(r)) {
    if (s.worker_id == "flat") {
      EXPECT_TRUE(s.flagged);
      EXPECT_FALSE(s.plcc.has_value());
    }
  }
}

TEST(Alignment, PublishedCoefficientsSubstitution) {
  const Alignment a{1.12, -10.43};
  EXPECT_NEAR(a.Apply(50.0), 45.57, 1e-9);
}

TEST(Alignment, ExactLinearDataIsRecovered) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i * 7.0);
    y.push_back(2.0 * i * 7.0 - 3.0);
  }
  const auto a = FitAlignment(x, y);
  EXPECT_NEAR(a.slope, 2.0, 1e-12);
  EXPECT_NEAR(a.intercept, -3.0, 1e-10);
  EXPECT_THROW(FitAlignment(std::vector<double>{1, 1}, std::vector<double>{2, 3}), InvalidInput);
}

TEST(Alignment, NoisyRecoveryWithinOnePercent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1, 100);
  std::normal_distribution<double> n(0, 0.5);
  std::vector<double> x, y;
  for (int i = 0; i < 187; ++i) {
    x.push_back(u(rng));
    y.push_back(1.12 * x.back() - 10.43 + n(rng));
  }
  EXPECT_NEAR(FitAlignment(x, y).slope, 1.12, 0.0112);
}

TEST(Bootstrap, ZeroNoiseGivesZeroRmse) {
  std::vector<std::vector<double>> pools;
  std::vector<double> experts;
  for (int i = 0; i < 30; ++i) {
    experts.push_back(10 + 2.5 * i);
    pools.push_back(std::vector<double>(20, experts.back()));
  }
  const std::vector<std::size_t> sizes = {1, 4};
  for (const auto& p : BootstrapRmse(pools, experts, sizes, 50, 1)) {
    EXPECT_NEAR(p.rmse_mean, 0.0, 1e-9);
  }
}

TEST(Bootstrap, NoiseShrinksLikeInverseRootOfGroupSize) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(10, 90);
  const double sigma = 8.0;
  std::normal_distribution<double> n(0, sigma);
  std::vector<std::vector<double>> pools;
  std::vector<double> experts;
  for (int i = 0; i < 187; ++i) {
    experts.push_back(u(rng));
    std::vector<double> pool(2000);
    for (double& v : pool) v = experts.back() + n(rng);
    pools.push_back(std::move(pool));
  }
  const std::vector<std::size_t> sizes = {3, 11, 30};
  const auto curve = BootstrapRmse(pools, experts, sizes, 200, 7);
  for (const auto& p : curve) {
    const double expect = sigma / std::sqrt(static_cast<double>(p.group_size));
    EXPECT_LE(p.ci_low, expect) << p.group_size;
    EXPECT_GE(p.ci_high, expect) << p.group_size;
  }
  EXPECT_GT(curve[0].rmse_mean, curve[1].rmse_mean);
  EXPECT_GT(curve[1].rmse_mean, curve[2].rmse_mean);
}

TEST(Bootstrap, SeedDeterminism) {
  const std::vector<std::vector<double>> pools = {{1, 2, 3}, {4, 5, 9}, {2, 8, 8}};
  const std::vector<double> experts = {2, 6, 5};
  const std::vector<std::size_t> sizes = {2};
  EXPECT_EQ(BootstrapRmse(pools, experts, sizes, 30, 3)[0].samples,
            BootstrapRmse(pools, experts, sizes, 30, 3)[0].samples);
}

TEST(ExpertStd, IdenticalExpertsGiveZero) {
  EXPECT_DOUBLE_EQ(ExpertBootstrapStd({{50, 50, 50}, {20, 20}}, 100, 1), 0.0);
}

TEST(ExpertStd, MatchesAnalyticBootstrapExpectation) {
  // The bootstrap mean of n draws has std = population std / sqrt(n).
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 10);
  std::vector<std::vector<double>> scores;
  double sum_sq = 0;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> s(11);
    for (double& v : s) v = 50 + n(rng);
    double m = 0, var = 0;
    for (double v : s) m += v;
    m /= 11;
    for (double v : s) var += (v - m) * (v - m);
    sum_sq += var / 11 / 11;
    scores.push_back(std::move(s));
  }
  const double analytic = std::sqrt(sum_sq / 40);
  EXPECT_NEAR(ExpertBootstrapStd(scores, 2000, 2), analytic, 0.05 * analytic);
}

TEST(Zscores, IdenticalVectors) {
  const std::vector<double> a = {10, 20, 30};
  const auto z = ErrorZscores(a, a, 5.0);
  for (double v : z.z) EXPECT_EQ(v, 0.0);
  EXPECT_DOUBLE_EQ(z.fraction_within_2, 1.0);
}

TEST(Zscores, ConstructedFraction) {
  std::vector<double> crowd(100, 0.0), expert(100, 0.0);
  for (int i = 73; i < 100; ++i) crowd[i] = 2.5;
  const auto z = ErrorZscores(crowd, expert, 1.0);
  EXPECT_DOUBLE_EQ(z.fraction_within_2, 0.73);
  EXPECT_EQ(z.abs_histogram[0], 73u);
  EXPECT_EQ(z.abs_histogram[2], 27u);
}

TEST(Zscores, GaussianCoverage) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 4);
  std::vector<double> crowd, expert;
  for (int i = 0; i < 20000; ++i) {
    expert.push_back(50);
    crowd.push_back(50 + n(rng));
  }
  EXPECT_NEAR(ErrorZscores(crowd, expert, 4.0).fraction_within_2, 0.9545, 0.01);
}

TEST(TestQuestions, SpecifiedCases) {
  EXPECT_EQ(ValidAnswers(4.2, 0.0), std::vector<int>{4});
  EXPECT_EQ(ValidAnswers(3.5, 0.8), (std::vector<int>{3, 4}));
  EXPECT_EQ(ValidAnswers(3.0, 2.0), (std::vector<int>{2, 3, 4}));
}

TEST(TestQuestions, CapAndCentreOverRandomDraws) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> mos(1, 5), sig(0, 3);
  for (int i = 0; i < 1000; ++i) {
    const double m = mos(rng);
    const auto a = ValidAnswers(m, sig(rng));
    EXPECT_LE(a.size(), 3u);
    EXPECT_NE(std::find(a.begin(), a.end(), static_cast<int>(std::lround(m))), a.end());
    for (std::size_t k = 1; k < a.size(); ++k) EXPECT_EQ(a[k], a[k - 1] + 1);
  }
}

TEST(TestQuestions, GeneratedFromExpertScores) {
  const auto q = GenerateTestQuestions({{"a", {4, 4, 4}}, {"b", {1, 5}}});
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].valid_answers, std::vector<int>{4});
  // mean 3, population std 2: interval 1..5 capped around 3.
  EXPECT_EQ(q[1].valid_answers, (std::vector<int>{2, 3, 4}));
}

std::vector<RatingEvent> Quiz(const std::string& w, int correct, int total) {
  std::vector<RatingEvent> r;
  for (int i = 0; i < total; ++i) r.push_back(R(w, Img(i), i < correct ? 3 : 1, true));
  return r;
}

TEST(ScoreWorkers, StrictThreshold) {
  std::vector<TestQuestion> q;
  for (int i = 0; i < 10; ++i) q.push_back({Img(i), {3}});
  auto r = Quiz("seven", 7, 10);
  const auto eight = Quiz("eight", 8, 10);
  r.insert(r.end(), eight.begin(), eight.end());
  const auto acc = ScoreWorkers(r, q, 0.70);
  ASSERT_EQ(acc.size(), 2u);
  EXPECT_EQ(acc[0].worker_id, "eight");
  EXPECT_TRUE(acc[0].pass);
  EXPECT_DOUBLE_EQ(acc[1].accuracy, 0.7);
  EXPECT_FALSE(acc[1].pass);
}

TEST(ScoreWorkers, SingleAnswerQuestionsAllCorrect) {
  std::vector<TestQuestion> q;
  for (int i = 0; i < 5; ++i) q.push_back({Img(i), {3}});
  const auto acc = ScoreWorkers(Quiz("w", 5, 5), q);
  EXPECT_DOUBLE_EQ(acc[0].accuracy, 1.0);
}

TEST(Icc, PerfectAgreement) {
  EXPECT_DOUBLE_EQ(Icc({{1, 1, 1}, {5, 5}, {3, 3, 3, 3}}), 1.0);
}

TEST(Icc, NullSimulationNearZero) {
  std::mt19937_64 rng(11);
  std::vector<std::vector<double>> groups;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> g(3 + rng() % 5);
    for (double& v : g) v = 1 + static_cast<double>(rng() % 5);
    groups.push_back(std::move(g));
  }
  EXPECT_LT(std::abs(Icc(groups)), 0.05);
}

TEST(Icc, RatingOverloadAgrees) {
  const std::vector<RatingEvent> r = {R("a", "x", 1), R("b", "x", 2), R("a", "y", 4),
                                      R("b", "y", 5), R("c", "y", 5)};
  EXPECT_DOUBLE_EQ(Icc(r), Icc({{MapScore(1), MapScore(2)}, {MapScore(4), MapScore(5), MapScore(5)}}));
}

TEST(Correlation, HandCases) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(Srocc(x, std::vector<double>{1, 3, 2, 5, 4}), 0.8);
  EXPECT_DOUBLE_EQ(Srocc(x, std::vector<double>{2, 4, 8, 16, 32}), 1.0);
  EXPECT_DOUBLE_EQ(Srocc(x, std::vector<double>{-1, -2, -3, -4, -5}), -1.0);
  EXPECT_NEAR(Plcc(x, std::vector<double>{-1, -2, -3, -4, -5}), -1.0, 1e-12);
  EXPECT_THROW(Srocc(x, std::vector<double>{1, 1, 1, 1, 1}), InvalidInput);
}

TEST(CrossValidate, RealizableTargetHasUnitSrocc) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0, 1);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 120; ++i) {
    x.push_back({n(rng), n(rng), n(rng)});
    y.push_back(3 * x.back()[1] + 1);
  }
  const auto r = CrossValidate(x, y, {0.8, 20, 1});
  for (double s : r.srocc) EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_EQ(r.undefined_reps, 0u);
}

TEST(CrossValidate, IndependentTargetAveragesNearZero) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0, 1);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back({n(rng), n(rng)});
    y.push_back(n(rng));
  }
  EXPECT_LT(std::abs(CrossValidate(x, y, {0.8, 100, 2}).srocc_mean), 0.1);
}

TEST(CrossValidate, DeterministicSplits) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    x.push_back({static_cast<double>(i), static_cast<double>(i % 7)});
    y.push_back(i % 5 + 0.1 * i);
  }
  const auto a = CrossValidate(x, y, {0.8, 10, 5});
  const auto b = CrossValidate(x, y, {0.8, 10, 5});
  EXPECT_EQ(a.test_indices, b.test_indices);
  EXPECT_EQ(a.srocc, b.srocc);
  EXPECT_NE(a.test_indices, CrossValidate(x, y, {0.8, 10, 6}).test_indices);
}

TEST(Profiles, CountsRawScores) {
  const std::vector<RatingEvent> r = {R("w", "a", 1), R("w", "b", 1), R("w", "c", 5, true)};
  const auto p = BuildWorkerProfiles(r);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].score_counts[0], 2u);
  EXPECT_EQ(p[0].score_counts[4], 1u);
  EXPECT_EQ(p[0].ratings(), 3u);
}

}  // namespace
}  // namespace curate
