// include/avwws/eval.hpp

// Copyright 2026  The avwws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace avwws {

struct EvalCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool operator==(const EvalCounts&) const = default;
};

struct Metrics {
  double frr = 0.0;
  double far = 0.0;
  double score = 0.0;
};

/// Prediction is 1 iff score >= threshold.
EvalCounts confusion_counts(std::span<const double> scores, std::span<const int> labels, double threshold);

/// frr = fn / (fn + tp), far = fp / (fp + tn), score = frr + far.
/// Throws UndefinedMetricError when either denominator is zero.
Metrics metrics(const EvalCounts& c);

struct SweepPoint {
  double threshold = 0.0;
  Metrics metrics;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::size_t best = 0;  // lowest score, ties to the lower threshold

  const SweepPoint& best_point() const { return points.at(best); }
};

SweepResult threshold_sweep(std::span<const double> scores, std::span<const int> labels,
                            std::span<const double> grid);

/// 0.00, 0.01, ..., 1.00
std::vector<double> default_threshold_grid();

int majority_vote(int r1, int r2, int r3);

struct ScoreRecord {
  std::string id;
  double score = 0.0;
};

struct LabelRecord {
  std::string id;
  int label = 0;
};

/// Binarizes each list by its own threshold, votes per utterance and scores
/// the result. Every list must carry the label ids in the same order;
/// otherwise ContractError names the first mismatched id.
Metrics ensemble_eval(const std::vector<std::vector<ScoreRecord>>& score_lists, std::span<const double> thresholds,
                      std::span<const LabelRecord> labels);

/// Per-utterance ensemble decisions, same alignment rules as ensemble_eval.
std::vector<int> ensemble_decisions(const std::vector<std::vector<ScoreRecord>>& score_lists,
                                    std::span<const double> thresholds, std::span<const LabelRecord> labels);

// "id<TAB>score" and "id<TAB>0|1" text files.
void write_scores(const std::string& path, std::span<const ScoreRecord> scores);
std::vector<ScoreRecord> read_scores(const std::string& path);
void write_labels(const std::string& path, std::span<const LabelRecord> labels);
std::vector<LabelRecord> read_labels(const std::string& path);

}  // namespace avwws
