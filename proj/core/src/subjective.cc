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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "curate/errors.h"
#include "curate/parallel.h"
#include "curate/rng.h"

namespace curate {

namespace {

struct Moments {
  double mean = 0.0;
  double pop_std = 0.0;
};

Moments MeanStd(std::span<const double> v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.pop_std = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

// Type-7 (linear interpolation) quantile of a sorted sample.
double Quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::optional<double> PlccOrNone(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

void CheckPair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("correlation inputs differ in length");
  if (x.size() < 3) throw InvalidInput("correlation needs at least 3 points");
}

void CheckScore(int score) {
  if (score < 1 || score > 5) {
    throw InvalidInput("ACR score out of range: " + std::to_string(score));
  }
}

}  // namespace

double MapScore(int score) {
  CheckScore(score);
  return 1.0 + 24.75 * (score - 1);
}

MosReport ComputeMos(std::span<const RatingEvent> ratings,
                     const std::set<std::string>& excluded_workers,
                     bool exclude_test_questions) {
  std::map<std::string, std::vector<double>> by_image;
  std::set<std::string> seen;
  for (const auto& r : ratings) {
    CheckScore(r.score);
    if (exclude_test_questions && r.is_test_question) continue;
    seen.insert(r.image_id);
    if (excluded_workers.count(r.worker_id)) continue;
    by_image[r.image_id].push_back(MapScore(r.score));
  }
  MosReport report;
  for (const auto& id : seen) {
    const auto it = by_image.find(id);
    if (it == by_image.end()) {
      report.residue.push_back(id);
      continue;
    }
    const Moments m = MeanStd(it->second);
    report.records.push_back({id, m.mean, m.pop_std, it->second.size()});
  }
  return report;
}

std::size_t WorkerProfile::ratings() const {
  return std::accumulate(score_counts.begin(), score_counts.end(), std::size_t{0});
}

std::vector<WorkerProfile> BuildWorkerProfiles(std::span<const RatingEvent> ratings) {
  std::map<std::string, WorkerProfile> by_worker;
  for (const auto& r : ratings) {
    CheckScore(r.score);
    auto& p = by_worker[r.worker_id];
    p.worker_id = r.worker_id;
    ++p.score_counts[r.score - 1];
  }
  std::vector<WorkerProfile> out;
  for (auto& [id, p] : by_worker) out.push_back(std::move(p));
  return out;
}

std::vector<CorrelationScreen> ScreenLowCorrelation(std::span<const RatingEvent> ratings,
                                                    double threshold,
                                                    std::size_t min_ratings) {
  if (min_ratings < 3) throw InvalidInput("min_ratings must be at least 3");
  std::unordered_map<std::string, double> crowd;
  for (const auto& rec : ComputeMos(ratings).records) crowd[rec.image_id] = rec.mos;

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> pairs;
  for (const auto& r : ratings) {
    if (r.is_test_question) continue;
    auto& [mine, theirs] = pairs[r.worker_id];
    mine.push_back(MapScore(r.score));
    theirs.push_back(crowd.at(r.image_id));
  }
  std::vector<CorrelationScreen> out;
  for (const auto& [worker, xy] : pairs) {
    CorrelationScreen s;
    s.worker_id = worker;
    s.ratings = xy.first.size();
    if (s.ratings < min_ratings) {
      s.exempt = true;
    } else {
      s.plcc = PlccOrNone(xy.first, xy.second);
      s.flagged = !s.plcc || *s.plcc < threshold;
    }
    out.push_back(std::move(s));
  }
  return out;
}

double LineClickerRatio(const std::array<std::size_t, 5>& counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  const std::size_t top = *std::max_element(counts.begin(), counts.end());
  if (total == 0) throw InvalidInput("worker has no ratings");
  if (total == top) return std::numeric_limits<double>::infinity();
  return static_cast<double>(top) / static_cast<double>(total - top);
}

std::vector<std::string> ScreenLineClickers(std::span<const WorkerProfile> profiles,
                                            double ratio) {
  std::vector<std::string> out;
  for (const auto& p : profiles) {
    if (p.ratings() == 0) continue;
    if (LineClickerRatio(p.score_counts) > ratio) out.push_back(p.worker_id);
  }
  return out;
}

Alignment FitAlignment(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("alignment inputs differ in length");
  if (x.size() < 2) throw InvalidInput("alignment needs at least 2 pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw InvalidInput("alignment predictor is constant");
  Alignment a;
  a.slope = sxy / sxx;
  a.intercept = my - a.slope * mx;
  return a;
}

std::vector<BootstrapPoint> BootstrapRmse(const std::vector<std::vector<double>>& pools,
                                          std::span<const double> expert_mos,
                                          std::span<const std::size_t> group_sizes,
                                          std::size_t reps, std::uint64_t seed,
                                          std::span<const std::string> image_ids) {
  if (pools.size() != expert_mos.size()) throw InvalidInput("one pool per expert MOS");
  if (pools.size() < 2) throw InvalidInput("bootstrap needs at least 2 images");
  if (reps == 0) throw InvalidInput("bootstrap needs at least one repetition");
  const std::size_t largest =
      group_sizes.empty() ? 0 : *std::max_element(group_sizes.begin(), group_sizes.end());
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (pools[i].size() < std::max<std::size_t>(largest, 1)) {
      const std::string name = i < image_ids.size() ? image_ids[i] : "#" + std::to_string(i);
      throw InvalidInput("image " + name + " has " + std::to_string(pools[i].size()) +
                         " ratings, fewer than the group size " + std::to_string(largest));
    }
  }
  std::vector<BootstrapPoint> curve;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    const std::size_t s = group_sizes[g];
    if (s == 0) throw InvalidInput("group size must be positive");
    BootstrapPoint point;
    point.group_size = s;
    point.samples.assign(reps, 0.0);
    ParallelFor(0, reps, [&](std::size_t rep) {
      std::mt19937_64 rng(SubSeed(seed, g * reps + rep));
      std::vector<double> crowd(pools.size());
      for (std::size_t i = 0; i < pools.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, pools[i].size() - 1);
        double sum = 0.0;
        for (std::size_t k = 0; k < s; ++k) sum += pools[i][pick(rng)];
        crowd[i] = sum / static_cast<double>(s);
      }
      double ss = 0.0;
      try {
        const Alignment a = FitAlignment(crowd, expert_mos);
        for (std::size_t i = 0; i < crowd.size(); ++i) {
          const double e = a.Apply(crowd[i]) - expert_mos[i];
          ss += e * e;
        }
      } catch (const InvalidInput&) {
        // Constant resampled crowd: best fit is the expert mean.
        const Moments m = MeanStd(expert_mos);
        ss = m.pop_std * m.pop_std * static_cast<double>(crowd.size());
      }
      point.samples[rep] = std::sqrt(ss / static_cast<double>(crowd.size()));
    });
    std::vector<double> sorted = point.samples;
    std::sort(sorted.begin(), sorted.end());
    point.rmse_mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / reps;
    point.ci_low = Quantile(sorted, 0.025);
    point.ci_high = Quantile(sorted, 0.975);
    curve.push_back(std::move(point));
  }
  return curve;
}

double ExpertBootstrapStd(const std::vector<std::vector<double>>& expert_scores,
                          std::size_t reps, std::uint64_t seed) {
  if (expert_scores.empty()) throw InvalidInput("no expert scores");
  if (reps < 2) throw InvalidInput("bootstrap needs at least 2 repetitions");
  std::vector<double> var(expert_scores.size(), 0.0);
  for (const auto& scores : expert_scores) {
    if (scores.size() < 2) throw InvalidInput("expert bootstrap needs at least 2 experts");
  }
  ParallelFor(0, expert_scores.size(), [&](std::size_t i) {
    const auto& scores = expert_scores[i];
    std::mt19937_64 rng(SubSeed(seed, i));
    std::uniform_int_distribution<std::size_t> pick(0, scores.size() - 1);
    std::vector<double> means(reps);
    for (std::size_t b = 0; b < reps; ++b) {
      double sum = 0.0;
      for (std::size_t k = 0; k < scores.size(); ++k) sum += scores[pick(rng)];
      means[b] = sum / static_cast<double>(scores.size());
    }
    const Moments m = MeanStd(means);
    var[i] = m.pop_std * m.pop_std;
  });
  return std::sqrt(std::accumulate(var.begin(), var.end(), 0.0) /
                   static_cast<double>(var.size()));
}

ZscoreReport ErrorZscores(std::span<const double> crowd_aligned,
                          std::span<const double> expert_mos, double expert_std) {
  if (crowd_aligned.size() != expert_mos.size()) {
    throw InvalidInput("z-score inputs differ in length");
  }
  if (!(expert_std > 0.0)) throw InvalidInput("expert std must be positive");
  ZscoreReport r;
  std::size_t within = 0;
  for (std::size_t i = 0; i < crowd_aligned.size(); ++i) {
    const double z = (crowd_aligned[i] - expert_mos[i]) / expert_std;
    r.z.push_back(z);
    const double a = std::abs(z);
    ++r.abs_histogram[std::min<std::size_t>(3, static_cast<std::size_t>(a))];
    if (a <= 2.0) ++within;
  }
  r.fraction_within_2 =
      r.z.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(r.z.size());
  return r;
}

std::vector<int> ValidAnswers(double mos, double sigma) {
  if (!(mos >= 1.0 && mos <= 5.0)) throw InvalidInput("expert MOS must lie in [1,5]");
  if (!(sigma >= 0.0)) throw InvalidInput("sigma must be non-negative");
  const int lo = std::max(1, static_cast<int>(std::lround(mos - sigma)));
  const int hi = std::min(5, static_cast<int>(std::lround(mos + sigma)));
  std::vector<int> answers;
  for (int v = lo; v <= hi; ++v) answers.push_back(v);
  if (answers.size() > 3) {
    const int center = static_cast<int>(std::lround(mos));
    std::stable_sort(answers.begin(), answers.end(), [&](int a, int b) {
      return std::abs(a - center) < std::abs(b - center);
    });
    answers.resize(3);
    std::sort(answers.begin(), answers.end());
  }
  return answers;
}

std::vector<TestQuestion> GenerateTestQuestions(
    const std::map<std::string, std::vector<double>>& expert_scores) {
  std::vector<TestQuestion> out;
  for (const auto& [id, scores] : expert_scores) {
    if (scores.empty()) throw InvalidInput("image " + id + " has no expert scores");
    const Moments m = MeanStd(scores);
    out.push_back({id, ValidAnswers(m.mean, m.pop_std)});
  }
  return out;
}

std::vector<WorkerAccuracy> ScoreWorkers(std::span<const RatingEvent> ratings,
                                         std::span<const TestQuestion> questions,
                                         double threshold) {
  std::unordered_map<std::string, const TestQuestion*> by_image;
  for (const auto& q : questions) by_image[q.image_id] = &q;
  std::map<std::string, WorkerAccuracy> acc;
  for (const auto& r : ratings) {
    if (!r.is_test_question) continue;
    const auto it = by_image.find(r.image_id);
    if (it == by_image.end()) continue;
    auto& a = acc[r.worker_id];
    a.worker_id = r.worker_id;
    ++a.answered;
    const auto& valid = it->second->valid_answers;
    if (std::find(valid.begin(), valid.end(), r.score) != valid.end()) ++a.correct;
  }
  std::vector<WorkerAccuracy> out;
  for (auto& [id, a] : acc) {
    a.accuracy = static_cast<double>(a.correct) / static_cast<double>(a.answered);
    a.pass = a.accuracy > threshold;
    out.push_back(a);
  }
  return out;
}

double Icc(const std::vector<std::vector<double>>& groups) {
  std::size_t a = 0;
  std::size_t n_total = 0;
  double sum_sq_n = 0.0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    ++a;
    n_total += g.size();
    sum_sq_n += static_cast<double>(g.size()) * static_cast<double>(g.size());
    for (double v : g) grand += v;
  }
  if (a < 2) throw InvalidInput("ICC needs at least 2 rated images");
  if (n_total <= a) throw InvalidInput("ICC needs an image with at least 2 ratings");
  const double N = static_cast<double>(n_total);
  grand /= N;
  double ssb = 0.0;
  double ssw = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    const Moments m = MeanStd(g);
    ssb += static_cast<double>(g.size()) * (m.mean - grand) * (m.mean - grand);
    ssw += m.pop_std * m.pop_std * static_cast<double>(g.size());
  }
  if (ssb <= 0.0) return 0.0;
  if (ssw <= 0.0) return 1.0;
  const double msb = ssb / static_cast<double>(a - 1);
  const double msw = ssw / (N - static_cast<double>(a));
  const double k0 = (N - sum_sq_n / N) / static_cast<double>(a - 1);
  return std::clamp((msb - msw) / (msb + (k0 - 1.0) * msw), -1.0, 1.0);
}

double Icc(std::span<const RatingEvent> ratings) {
  std::map<std::string, std::vector<double>> by_image;
  for (const auto& r : ratings) by_image[r.image_id].push_back(MapScore(r.score));
  std::vector<std::vector<double>> groups;
  for (auto& [id, g] : by_image) groups.push_back(std::move(g));
  return Icc(groups);
}

double Plcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const auto r = PlccOrNone(x, y);
  if (!r) throw InvalidInput("PLCC undefined for constant input");
  return *r;
}

double Srocc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const auto r = PlccOrNone(AverageRanks(x), AverageRanks(y));
  if (!r) throw InvalidInput("SROCC undefined for constant input");
  return *r;
}

void RidgeRegressor::Fit(const std::vector<std::vector<double>>& x,
                         std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw InvalidInput("ridge: bad training shape");
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  mean_.assign(d, 0.0);
  scale_.assign(d, 1.0);
  for (const auto& row : x) {
    if (row.size() != d) throw InvalidInput("ridge: ragged features");
    for (std::size_t j = 0; j < d; ++j) mean_[j] += row[j];
  }
  for (double& m : mean_) m /= static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    double ss = 0.0;
    for (const auto& row : x) ss += (row[j] - mean_[j]) * (row[j] - mean_[j]);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    scale_[j] = sd > 0.0 ? sd : 0.0;
  }
  Eigen::MatrixXd a(n, d);
  Eigen::VectorXd b(n);
  const double ymean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      a(i, j) = scale_[j] > 0.0 ? (x[i][j] - mean_[j]) / scale_[j] : 0.0;
    }
    b(i) = y[i] - ymean;
  }
  Eigen::MatrixXd gram = a.transpose() * a;
  gram.diagonal().array() += lambda_ * static_cast<double>(n);
  const Eigen::VectorXd w = gram.ldlt().solve(a.transpose() * b);
  weights_.assign(w.data(), w.data() + d);
  intercept_ = ymean;
}

std::vector<double> RidgeRegressor::Predict(const std::vector<std::vector<double>>& x) const {
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& row : x) {
    if (row.size() != weights_.size()) throw InvalidInput("ridge: feature width mismatch");
    double v = intercept_;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (scale_[j] > 0.0) v += weights_[j] * (row[j] - mean_[j]) / scale_[j];
    }
    out.push_back(v);
  }
  return out;
}

CrossValidationReport CrossValidate(const std::vector<std::vector<double>>& features,
                                    std::span<const double> mos,
                                    const CrossValidationOptions& options,
                                    const RegressorFactory& factory) {
  if (features.size() != mos.size()) throw InvalidInput("features and MOS differ in length");
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw InvalidInput("train fraction must lie in (0,1)");
  }
  if (options.reps == 0) throw InvalidInput("cross-validation needs repetitions");
  const std::size_t n = features.size();
  const auto n_train =
      static_cast<std::size_t>(std::lround(options.train_fraction * static_cast<double>(n)));
  if (n_train < 2 || n < n_train + 3) {
    throw InvalidInput("too few items for a train/test split (" + std::to_string(n) + ")");
  }
  const RegressorFactory make =
      factory ? factory : RegressorFactory([] { return std::make_unique<RidgeRegressor>(); });

  CrossValidationReport report;
  report.srocc.assign(options.reps, 0.0);
  report.plcc.assign(options.reps, 0.0);
  report.test_indices.assign(options.reps, {});
  ParallelFor(0, options.reps, [&](std::size_t rep) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(SubSeed(options.seed, rep));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<double>> xtr;
    std::vector<double> ytr;
    std::vector<std::vector<double>> xte;
    std::vector<double> yte;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = order[k];
      if (k < n_train) {
        xtr.push_back(features[i]);
        ytr.push_back(mos[i]);
      } else {
        xte.push_back(features[i]);
        yte.push_back(mos[i]);
        report.test_indices[rep].push_back(i);
      }
    }
    auto model = make();
    model->Fit(xtr, ytr);
    const std::vector<double> pred = model->Predict(xte);
    const auto p = PlccOrNone(pred, yte);
    const auto s = PlccOrNone(AverageRanks(pred), AverageRanks(yte));
    report.plcc[rep] = p ? *p : std::nan("");
    report.srocc[rep] = s ? *s : std::nan("");
  });

  auto summarize = [](const std::vector<double>& v, double& mean, double& sd) {
    std::vector<double> ok;
    for (double x : v) {
      if (!std::isnan(x)) ok.push_back(x);
    }
    const Moments m = MeanStd(ok);
    mean = ok.empty() ? std::nan("") : m.mean;
    sd = ok.empty() ? std::nan("") : m.pop_std;
  };
  summarize(report.srocc, report.srocc_mean, report.srocc_std);
  summarize(report.plcc, report.plcc_mean, report.plcc_std);
  for (std::size_t r = 0; r < options.reps; ++r) {
    if (std::isnan(report.srocc[r]) || std::isnan(report.plcc[r])) ++report.undefined_reps;
  }
  return report;
}

}  // namespace curate
