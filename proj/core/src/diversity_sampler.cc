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

#include "curate/diversity_sampler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

#include "curate/errors.h"
#include "curate/parallel.h"

namespace curate {

namespace {

constexpr double kImprovementEps = 1e-9;
constexpr int kMissingJpegQuality = 100;

// Improvement of a move. L1 deviation first; the squared deviation only
// separates equal L1 values.
struct Gain {
  double l1 = 0.0;
  double spread = 0.0;
};

bool Better(const Gain& a, const Gain& b) {
  if (a.l1 > b.l1 + kImprovementEps) return true;
  if (a.l1 < b.l1 - kImprovementEps) return false;
  return a.spread > b.spread + kImprovementEps;
}

// Integer sort key so equal gains compare equal regardless of summation order.
std::int64_t Key(double v) { return std::llround(v * 1048576.0); }

// Occupancy of every (dim, bin) cell plus the per-cell objective terms.
class Occupancy {
 public:
  Occupancy(const BinnedDataset& data, const SamplingProblem& problem)
      : data_(data), offsets_(data.dims() + 1, 0) {
    for (std::size_t d = 0; d < data.dims(); ++d) {
      offsets_[d + 1] = offsets_[d] + data.bins_per_dim[d];
      targets_.push_back(static_cast<double>(problem.target_size) / data.bins_per_dim[d]);
      weights_.push_back(problem.weights.empty() ? 1.0 : problem.weights[d]);
    }
    occ_.assign(offsets_.back(), 0);
  }

  int& cell(std::size_t d, int b) { return occ_[offsets_[d] + b]; }
  int cell(std::size_t d, int b) const { return occ_[offsets_[d] + b]; }

  // Objective decrease when one more image lands in (d, b).
  double AddTerm(std::size_t d, int b) const {
    const double o = cell(d, b);
    const double t = targets_[d];
    return weights_[d] * (std::abs(o - t) - std::abs(o + 1 - t));
  }

  // Objective decrease when one image leaves (d, b).
  double RemoveTerm(std::size_t d, int b) const {
    const double o = cell(d, b);
    const double t = targets_[d];
    return weights_[d] * (std::abs(o - t) - std::abs(o - 1 - t));
  }

  // Decrease of the squared deviation when one more image lands in (d, b).
  double AddSpreadTerm(std::size_t d, int b) const {
    return weights_[d] * (targets_[d] - cell(d, b) - 0.5) * 2.0;
  }

  double AddSpread(std::size_t i) const {
    double g = 0.0;
    for (std::size_t d = 0; d < data_.dims(); ++d) g += AddSpreadTerm(d, data_.bin(i, d));
    return g;
  }

  double AddGain(std::size_t i) const {
    double g = 0.0;
    for (std::size_t d = 0; d < data_.dims(); ++d) g += AddTerm(d, data_.bin(i, d));
    return g;
  }

  double RemoveGain(std::size_t i) const {
    double g = 0.0;
    for (std::size_t d = 0; d < data_.dims(); ++d) g += RemoveTerm(d, data_.bin(i, d));
    return g;
  }

  // Exact objective change (positive = better) of swapping `out` for `in`.
  double SwapGain(std::size_t out, std::size_t in, double remove_gain, double add_gain) const {
    double g = remove_gain + add_gain;
    for (std::size_t d = 0; d < data_.dims(); ++d) {
      const int b = data_.bin(out, d);
      if (b == data_.bin(in, d)) g -= RemoveTerm(d, b) + AddTerm(d, b);
    }
    return g;
  }

  // Upper bound on the shared-bin correction of any swap removing `out`.
  double SharedSlack(std::size_t out) const {
    double c = 0.0;
    for (std::size_t d = 0; d < data_.dims(); ++d) {
      const int b = data_.bin(out, d);
      c -= RemoveTerm(d, b) + AddTerm(d, b);
    }
    return c;
  }

  void Add(std::size_t i) {
    for (std::size_t d = 0; d < data_.dims(); ++d) ++cell(d, data_.bin(i, d));
  }
  void Remove(std::size_t i) {
    for (std::size_t d = 0; d < data_.dims(); ++d) --cell(d, data_.bin(i, d));
  }
  void Reset() { std::fill(occ_.begin(), occ_.end(), 0); }

  // Weighted squared deviation from the targets.
  double Spread() const {
    double total = 0.0;
    for (std::size_t d = 0; d < data_.dims(); ++d) {
      for (int b = 0; b < data_.bins_per_dim[d]; ++b) {
        const double e = cell(d, b) - targets_[d];
        total += weights_[d] * e * e;
      }
    }
    return total;
  }

  double Objective() const {
    double total = 0.0;
    for (std::size_t d = 0; d < data_.dims(); ++d) {
      double dim_total = 0.0;
      for (int b = 0; b < data_.bins_per_dim[d]; ++b) {
        dim_total += std::abs(cell(d, b) - targets_[d]);
      }
      total += weights_[d] * dim_total;
    }
    return total;
  }

  double target(std::size_t d) const { return targets_[d]; }
  double weight(std::size_t d) const { return weights_[d]; }

 private:
  const BinnedDataset& data_;
  std::vector<std::size_t> offsets_;
  std::vector<double> targets_;
  std::vector<double> weights_;
  std::vector<int> occ_;
};

void CheckProblem(const BinnedDataset& data, const SamplingProblem& problem) {
  if (problem.target_size > data.size()) {
    throw InvalidInput("sample size " + std::to_string(problem.target_size) +
                       " exceeds dataset size " + std::to_string(data.size()));
  }
  if (!problem.weights.empty()) {
    if (problem.weights.size() != data.dims()) {
      throw InvalidInput("one weight per dimension required");
    }
    for (double w : problem.weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be finite, >= 0");
    }
  }
}

SampleResult Finish(const BinnedDataset& data, const SamplingProblem& problem,
                    std::vector<std::size_t> members) {
  std::sort(members.begin(), members.end());
  SampleResult r;
  r.objective = Objective(data, problem, members);
  r.histograms = Histograms(data, members);
  for (std::size_t i : members) r.ids.push_back(data.ids[i]);
  r.members = std::move(members);
  return r;
}

class SwapSearch {
 public:
  SwapSearch(const BinnedDataset& data, Occupancy& occ, std::vector<char>& in_set,
             std::vector<std::size_t>& members, std::mt19937_64& rng)
      : data_(data), occ_(occ), in_set_(in_set), members_(members), rng_(rng),
        gain_(data.size()) {}

  // Best-improvement over the unselected candidates of each removal, with
  // removals visited in a seeded order; first improving removal wins. Runs
  // until no improving swap exists or the budget is spent.
  void Run(std::size_t& budget, double& objective, std::vector<double>& trace) {
    while (budget > 0) {
      ParallelFor(0, data_.size(), [&](std::size_t i) {
        gain_[i] = in_set_[i] ? occ_.RemoveGain(i) : occ_.AddGain(i);
      });
      std::vector<std::size_t> candidates;
      candidates.reserve(data_.size() - members_.size());
      for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!in_set_[i]) candidates.push_back(i);
      }
      std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        const auto ka = Key(gain_[a]), kb = Key(gain_[b]);
        if (ka != kb) return ka > kb;
        return a < b;
      });
      std::vector<std::size_t> order(members_.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng_);

      bool improved = false;
      for (std::size_t slot : order) {
        const std::size_t out = members_[slot];
        const double remove_gain = gain_[out];
        const double slack = occ_.SharedSlack(out);
        double best = kImprovementEps;
        std::size_t best_in = data_.size();
        for (std::size_t in : candidates) {
          if (remove_gain + gain_[in] + slack <= best) break;
          const double g = occ_.SwapGain(out, in, remove_gain, gain_[in]);
          if (g > best) {
            best = g;
            best_in = in;
          }
        }
        if (best_in == data_.size()) continue;
        occ_.Remove(out);
        occ_.Add(best_in);
        in_set_[out] = 0;
        in_set_[best_in] = 1;
        members_[slot] = best_in;
        objective -= best;
        trace.push_back(objective);
        --budget;
        improved = true;
        break;
      }
      if (!improved) return;
    }
  }

 private:
  const BinnedDataset& data_;
  Occupancy& occ_;
  std::vector<char>& in_set_;
  std::vector<std::size_t>& members_;
  std::mt19937_64& rng_;
  std::vector<double> gain_;
};

// Per-dimension relaxation for branch and bound: cheapest way to place
// `slots` more images into this dimension's bins given per-bin availability.
double DimensionBound(const Occupancy& occ, std::size_t d, int bins,
                      const std::vector<int>& avail, std::size_t offset, int slots) {
  const double t = occ.target(d);
  const double w = occ.weight(d);
  double base = 0.0;
  std::vector<double> costs;
  int plus_units = 0;
  for (int b = 0; b < bins; ++b) {
    const double o = occ.cell(d, b);
    base += std::abs(o - t);
    for (int x = 0; x < avail[offset + b]; ++x) {
      const double c = std::abs(o + x + 1 - t) - std::abs(o + x - t);
      if (c >= 1.0) {
        plus_units += avail[offset + b] - x;
        break;
      }
      costs.push_back(c);
    }
  }
  std::sort(costs.begin(), costs.end());
  double extra = 0.0;
  int taken = 0;
  for (double c : costs) {
    if (taken == slots) break;
    extra += c;
    ++taken;
  }
  const int rest = std::min(slots - taken, plus_units);
  extra += rest;
  return w * (base + extra);
}

class BranchAndBound {
 public:
  BranchAndBound(const BinnedDataset& data, const SamplingProblem& problem)
      : data_(data), problem_(problem), occ_(data, problem), offsets_(data.dims() + 1, 0) {
    for (std::size_t d = 0; d < data.dims(); ++d) {
      offsets_[d + 1] = offsets_[d] + data.bins_per_dim[d];
    }
    avail_.assign(offsets_.back(), 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t d = 0; d < data.dims(); ++d) ++avail_[offsets_[d] + data.bin(i, d)];
    }
  }

  std::vector<std::size_t> Solve() {
    Dfs(0);
    return best_members_;
  }

 private:
  double LowerBound() const {
    const int slots = static_cast<int>(problem_.target_size - chosen_.size());
    double lb = 0.0;
    for (std::size_t d = 0; d < data_.dims(); ++d) {
      lb += DimensionBound(occ_, d, data_.bins_per_dim[d], avail_, offsets_[d], slots);
    }
    return lb;
  }

  void Take(std::size_t i, int delta) {
    for (std::size_t d = 0; d < data_.dims(); ++d) avail_[offsets_[d] + data_.bin(i, d)] -= delta;
  }

  void Dfs(std::size_t pos) {
    const std::size_t need = problem_.target_size - chosen_.size();
    if (need == 0) {
      const double obj = occ_.Objective();
      if (obj < best_ - 1e-12) {
        best_ = obj;
        best_members_ = chosen_;
      }
      return;
    }
    if (data_.size() - pos < need) return;
    if (LowerBound() >= best_ - 1e-12) return;

    Take(pos, 1);
    occ_.Add(pos);
    chosen_.push_back(pos);
    Dfs(pos + 1);
    chosen_.pop_back();
    occ_.Remove(pos);
    Dfs(pos + 1);
    Take(pos, -1);
  }

  const BinnedDataset& data_;
  const SamplingProblem& problem_;
  Occupancy occ_;
  std::vector<std::size_t> offsets_;
  std::vector<int> avail_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> best_members_;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

int EqualWidthBin(double value, double lo, double hi, int bins) {
  if (!(hi > lo)) return 0;
  const double pos = (value - lo) / (hi - lo) * bins;
  const int b = static_cast<int>(std::ceil(pos)) - 1;
  return std::clamp(b, 0, bins - 1);
}

BinnedDataset BinColumns(std::vector<std::string> ids, std::vector<ScalarColumn> columns,
                         int bins, const std::optional<std::vector<int>>& categories,
                         const std::string& category_name) {
  if (bins < 2) throw InvalidInput("at least 2 bins per dimension required");
  const std::size_t n = ids.size();
  for (const auto& c : columns) {
    if (c.values.size() != n) throw InvalidInput("column " + c.name + " has wrong length");
    for (double v : c.values) {
      if (!std::isfinite(v)) throw InvalidInput("column " + c.name + " has non-finite values");
    }
  }
  if (categories && categories->size() != n) throw InvalidInput("category column length");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  for (std::size_t i = 1; i < n; ++i) {
    if (ids[perm[i]] == ids[perm[i - 1]]) throw InvalidInput("duplicate id " + ids[perm[i]]);
  }

  BinnedDataset out;
  out.ids.reserve(n);
  for (std::size_t i : perm) out.ids.push_back(ids[i]);
  const std::size_t dims = columns.size() + (categories ? 1 : 0);
  out.bin_of.assign(n * dims, 0);

  for (std::size_t d = 0; d < columns.size(); ++d) {
    const auto& col = columns[d].values;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : col) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const bool constant = n == 0 || !(hi > lo);
    const int nb = constant ? 1 : bins;
    out.dim_names.push_back(columns[d].name);
    out.bins_per_dim.push_back(nb);
    out.categorical.push_back(false);
    out.degenerate.push_back(constant);
    std::vector<double> edges(nb + 1);
    for (int j = 0; j <= nb; ++j) {
      edges[j] = constant ? (n == 0 ? 0.0 : lo) : lo + (hi - lo) * j / nb;
    }
    if (!constant) edges[nb] = hi;
    out.bin_edges.push_back(std::move(edges));
    for (std::size_t i = 0; i < n; ++i) {
      out.bin_of[i * dims + d] = constant ? 0 : EqualWidthBin(col[perm[i]], lo, hi, nb);
    }
  }
  if (categories) {
    int max_cat = 0;
    for (int c : *categories) {
      if (c < 0) throw InvalidInput("category ids must be non-negative");
      max_cat = std::max(max_cat, c);
    }
    const std::size_t d = columns.size();
    out.dim_names.push_back(category_name);
    out.bins_per_dim.push_back(max_cat + 1);
    out.categorical.push_back(true);
    out.degenerate.push_back(false);
    out.bin_edges.emplace_back();
    for (std::size_t i = 0; i < n; ++i) out.bin_of[i * dims + d] = (*categories)[perm[i]];
  }
  return out;
}

BinnedDataset BinDataset(std::span<const IndicatorVector> vectors, int bins,
                         bool include_content) {
  std::vector<std::string> ids;
  std::vector<ScalarColumn> columns(kNumIndicators);
  for (int k = 0; k < kNumIndicators; ++k) columns[k].name = std::string(kIndicatorNames[k]);
  std::optional<std::vector<int>> categories;
  if (include_content) categories.emplace();
  for (const auto& v : vectors) {
    ids.push_back(v.id);
    for (int k = 0; k < kNumIndicators; ++k) {
      columns[k].values.push_back(
          v.Get(static_cast<Indicator>(k)).value_or(static_cast<double>(kMissingJpegQuality)));
    }
    if (include_content) {
      if (!v.cluster_id) throw InvalidInput("image " + v.id + " has no content cluster");
      categories->push_back(*v.cluster_id);
    }
  }
  return BinColumns(std::move(ids), std::move(columns), bins, categories);
}

double Objective(const BinnedDataset& data, const SamplingProblem& problem,
                 std::span<const std::size_t> members) {
  Occupancy occ(data, problem);
  for (std::size_t i : members) occ.Add(i);
  return occ.Objective();
}

std::vector<std::vector<int>> Histograms(const BinnedDataset& data,
                                         std::span<const std::size_t> members) {
  std::vector<std::vector<int>> h(data.dims());
  for (std::size_t d = 0; d < data.dims(); ++d) h[d].assign(data.bins_per_dim[d], 0);
  for (std::size_t i : members) {
    for (std::size_t d = 0; d < data.dims(); ++d) ++h[d][data.bin(i, d)];
  }
  return h;
}

SampleResult UniformSample(const BinnedDataset& data, const SamplingProblem& problem,
                           const UniformSampleOptions& options) {
  CheckProblem(data, problem);
  const std::size_t n = data.size();
  const std::size_t m = problem.target_size;
  if (m == n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    SampleResult r = Finish(data, problem, std::move(all));
    r.greedy_objective = r.objective;
    r.greedy_steps = n;
    return r;
  }

  Occupancy occ(data, problem);
  std::vector<char> in_set(n, 0);
  std::vector<std::size_t> members;
  members.reserve(m);
  double objective = occ.Objective();

  // Lazy greedy: gains only shrink as occupancy grows, so a popped entry
  // whose refreshed gain still beats the next stale key is the true argmax.
  // Ties in L1 gain go to the larger squared-deviation decrease, then the
  // lower index.
  struct Entry {
    std::int64_t gain;
    std::int64_t spread;
    std::size_t index;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    if (a.spread != b.spread) return a.spread < b.spread;
    return a.index > b.index;
  };
  auto entry = [&occ](std::size_t i) {
    return Entry{Key(occ.AddGain(i)), Key(occ.AddSpread(i)), i};
  };
  std::vector<Entry> initial(n);
  ParallelFor(0, n, [&](std::size_t i) { initial[i] = entry(i); });
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse, std::move(initial));
  while (members.size() < m) {
    Entry top = heap.top();
    heap.pop();
    const Entry refreshed = entry(top.index);
    if (!heap.empty() && worse(refreshed, heap.top())) {
      heap.push(refreshed);
      continue;
    }
    occ.Add(top.index);
    in_set[top.index] = 1;
    members.push_back(top.index);
  }

  SampleResult result;
  result.greedy_steps = members.size();
  objective = occ.Objective();
  result.greedy_objective = objective;

  std::mt19937_64 rng(options.seed);
  std::size_t budget = options.swap_budget ? options.swap_budget : std::max<std::size_t>(1000, 2 * m);
  const std::size_t initial_budget = budget;
  SwapSearch search(data, occ, in_set, members, rng);
  std::vector<std::size_t> best_members = members;
  if (m > 0) {
    search.Run(budget, objective, result.swap_trace);
    objective = occ.Objective();

    best_members = members;
    Gain best{-objective, -occ.Spread()};
    for (int kick = 0; kick < options.kicks && budget > 0 && best.l1 < -kImprovementEps; ++kick) {
      // Kick strength cycles upwards so deeper basins are also left.
      const int strength = options.kick_size + kick % 8;
      for (int s = 0; s < strength; ++s) {
        // Move one image from an over-full to an under-full bin of a random
        // dimension; fall back to a random exchange.
        const std::size_t d = std::uniform_int_distribution<std::size_t>(0, data.dims() - 1)(rng);
        std::vector<std::size_t> over, under;
        for (std::size_t k = 0; k < m; ++k) {
          if (occ.cell(d, data.bin(members[k], d)) > occ.target(d)) over.push_back(k);
        }
        for (std::size_t i = 0; i < n; ++i) {
          if (!in_set[i] && occ.cell(d, data.bin(i, d)) + 1 <= occ.target(d)) under.push_back(i);
        }
        std::size_t slot, in;
        if (!over.empty() && !under.empty()) {
          slot = over[std::uniform_int_distribution<std::size_t>(0, over.size() - 1)(rng)];
          in = under[std::uniform_int_distribution<std::size_t>(0, under.size() - 1)(rng)];
        } else {
          slot = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
          in = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
          while (in_set[in]) in = (in + 1) % n;
        }
        occ.Remove(members[slot]);
        occ.Add(in);
        in_set[members[slot]] = 0;
        in_set[in] = 1;
        members[slot] = in;
      }
      objective = occ.Objective();
      std::vector<double> scratch;
      search.Run(budget, objective, scratch);
      objective = occ.Objective();
      const Gain now{-objective, -occ.Spread()};
      if (Better(now, best)) {
        best = now;
        best_members = members;
        result.swap_trace.push_back(objective);
      } else if (now.l1 < best.l1 - kImprovementEps) {
        // Worse L1: restart from the best state. Equal L1 keeps drifting.
        members = best_members;
        occ.Reset();
        std::fill(in_set.begin(), in_set.end(), 0);
        for (std::size_t i : members) {
          occ.Add(i);
          in_set[i] = 1;
        }
      }
    }
  }

  SampleResult finished = Finish(data, problem, best_members);
  finished.greedy_steps = result.greedy_steps;
  finished.greedy_objective = result.greedy_objective;
  finished.swaps = initial_budget - budget;
  finished.swap_trace = std::move(result.swap_trace);
  return finished;
}

SampleResult ExactSample(const BinnedDataset& data, const SamplingProblem& problem,
                         const ExactSampleOptions& options) {
  CheckProblem(data, problem);
  if (data.size() > options.max_size) {
    throw InvalidInput("exact sampling refused: " + std::to_string(data.size()) +
                       " images exceed the cap of " + std::to_string(options.max_size));
  }
  BranchAndBound bnb(data, problem);
  return Finish(data, problem, bnb.Solve());
}

double ChiSquareVsUniform(std::span<const int> histogram) {
  if (histogram.empty()) return 0.0;
  double total = 0.0;
  for (int v : histogram) total += v;
  if (total <= 0.0) return 0.0;
  const double expected = total / static_cast<double>(histogram.size());
  double chi = 0.0;
  for (int v : histogram) chi += (v - expected) * (v - expected) / expected;
  return chi;
}

}  // namespace curate
