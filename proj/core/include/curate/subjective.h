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

// Subjective-study analytics: MOS, worker screening, expert alignment,
// bootstrap reliability, test questions, ICC and the correlation harness.
//
// Scores are ACR integers 1..5. MOS values live on [1,100] through the map
// s -> 1 + 24.75 (s - 1).

#ifndef CURATE_SUBJECTIVE_H_
#define CURATE_SUBJECTIVE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace curate {

struct RatingEvent {
  std::string worker_id;
  std::string image_id;
  int score = 0;
  std::int64_t timestamp = 0;
  bool is_test_question = false;
  std::string context;
};

double MapScore(int score);

struct MosRecord {
  std::string image_id;
  double mos = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

struct MosReport {
  std::vector<MosRecord> records;  // by image id
  std::vector<std::string> residue;  // images left without ratings
};

// Mean and population std of mapped scores per image, skipping excluded
// workers and, when asked, test-question rows.
MosReport ComputeMos(std::span<const RatingEvent> ratings,
                     const std::set<std::string>& excluded_workers = {},
                     bool exclude_test_questions = true);

struct WorkerProfile {
  std::string worker_id;
  std::array<std::size_t, 5> score_counts{};
  std::optional<double> plcc_vs_crowd;
  std::optional<double> test_accuracy;
  bool low_correlation = false;
  bool line_clicker = false;
  bool failed_quiz = false;

  std::size_t ratings() const;
  bool flagged() const { return low_correlation || line_clicker || failed_quiz; }
};

// Raw score counts over all of a worker's rows, ordered by worker id.
std::vector<WorkerProfile> BuildWorkerProfiles(std::span<const RatingEvent> ratings);

struct CorrelationScreen {
  std::string worker_id;
  std::size_t ratings = 0;
  std::optional<double> plcc;  // unset when undefined or exempt
  bool exempt = false;         // fewer than min_ratings
  bool flagged = false;
};

// PLCC of each worker's scores against the unscreened crowd MOS of the same
// images. Workers under min_ratings are exempt; an undefined PLCC flags.
// Test-question rows are ignored.
std::vector<CorrelationScreen> ScreenLowCorrelation(std::span<const RatingEvent> ratings,
                                                    double threshold = 0.5,
                                                    std::size_t min_ratings = 10);

// max / (total - max); +inf when every answer is the same.
double LineClickerRatio(const std::array<std::size_t, 5>& counts);

// Worker ids with ratio > `ratio`.
std::vector<std::string> ScreenLineClickers(std::span<const WorkerProfile> profiles,
                                            double ratio = 2.0);

struct Alignment {
  double slope = 1.0;
  double intercept = 0.0;
  double Apply(double x) const { return slope * x + intercept; }
};

// Least squares y = slope * x + intercept. Requires at least two pairs and a
// non-constant x.
Alignment FitAlignment(std::span<const double> x, std::span<const double> y);

struct BootstrapPoint {
  std::size_t group_size = 0;
  double rmse_mean = 0.0;
  double ci_low = 0.0;   // 2.5th percentile
  double ci_high = 0.0;  // 97.5th percentile
  std::vector<double> samples;
};

// For each group size s, `reps` times: draw s ratings with replacement from
// each image's pool, average, align to the experts by least squares and take
// the RMSE. `pools` holds mapped crowd scores per image, parallel to
// `expert_mos`; `image_ids` names images in errors.
std::vector<BootstrapPoint> BootstrapRmse(const std::vector<std::vector<double>>& pools,
                                          std::span<const double> expert_mos,
                                          std::span<const std::size_t> group_sizes,
                                          std::size_t reps, std::uint64_t seed,
                                          std::span<const std::string> image_ids = {});

// Per image: std over `reps` bootstrap means of the expert scores; the
// result is the RMS over images. Every image needs two or more experts.
double ExpertBootstrapStd(const std::vector<std::vector<double>>& expert_scores,
                          std::size_t reps, std::uint64_t seed);

struct ZscoreReport {
  std::vector<double> z;
  std::array<std::size_t, 4> abs_histogram{};  // |z| in [0,1), [1,2), [2,3), [3,inf)
  double fraction_within_2 = 0.0;              // |z| <= 2
};

ZscoreReport ErrorZscores(std::span<const double> crowd_aligned,
                          std::span<const double> expert_mos, double expert_std);

struct TestQuestion {
  std::string image_id;
  std::vector<int> valid_answers;  // ascending, contiguous, 1..3 entries
};

// Rounded [mos - sigma, mos + sigma] on the 1..5 scale, capped at the three
// answers nearest round(mos) with ties to the lower answer.
std::vector<int> ValidAnswers(double mos, double sigma);

// mos and sigma from the raw 1..5 expert scores (population std).
std::vector<TestQuestion> GenerateTestQuestions(
    const std::map<std::string, std::vector<double>>& expert_scores);

struct WorkerAccuracy {
  std::string worker_id;
  std::size_t answered = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  bool pass = false;
};

// Test-question rows only; pass iff accuracy > threshold.
std::vector<WorkerAccuracy> ScoreWorkers(std::span<const RatingEvent> ratings,
                                         std::span<const TestQuestion> questions,
                                         double threshold = 0.70);

// One-way random-effects ICC(1,1) over per-image rating groups of unequal
// size. No within-image variance gives 1, no between-image variance gives 0.
double Icc(const std::vector<std::vector<double>>& groups);
double Icc(std::span<const RatingEvent> ratings);

// Average ranks for ties. Equal lengths >= 3; constant input throws.
double Srocc(std::span<const double> x, std::span<const double> y);
double Plcc(std::span<const double> x, std::span<const double> y);

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual void Fit(const std::vector<std::vector<double>>& x, std::span<const double> y) = 0;
  virtual std::vector<double> Predict(const std::vector<std::vector<double>>& x) const = 0;
};

using RegressorFactory = std::function<std::unique_ptr<Regressor>()>;

// Ridge on standardized features with an unpenalized intercept.
class RidgeRegressor : public Regressor {
 public:
  explicit RidgeRegressor(double lambda = 1e-3) : lambda_(lambda) {}
  void Fit(const std::vector<std::vector<double>>& x, std::span<const double> y) override;
  std::vector<double> Predict(const std::vector<std::vector<double>>& x) const override;

 private:
  double lambda_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> weights_;
  double intercept_ = 0.0;
};

struct CrossValidationOptions {
  double train_fraction = 0.8;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
};

struct CrossValidationReport {
  double srocc_mean = 0.0;
  double srocc_std = 0.0;
  double plcc_mean = 0.0;
  double plcc_std = 0.0;
  std::vector<double> srocc;  // per repetition, NaN when undefined
  std::vector<double> plcc;
  std::size_t undefined_reps = 0;
  std::vector<std::vector<std::size_t>> test_indices;
};

// Seeded random train/test splits; repetition r draws from SubSeed(seed, r).
CrossValidationReport CrossValidate(const std::vector<std::vector<double>>& features,
                                    std::span<const double> mos,
                                    const CrossValidationOptions& options,
                                    const RegressorFactory& factory = {});

}  // namespace curate

#endif  // CURATE_SUBJECTIVE_H_
