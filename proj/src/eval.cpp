// src/eval.cpp

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

#include "avwws/eval.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "avwws/error.hpp"

namespace avwws {

EvalCounts confusion_counts(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) {
    throw ContractError("confusion_counts: " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw ContractError("confusion_counts: no scores");
  EvalCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else if (labels[i] == 0) {
      predicted ? ++c.fp : ++c.tn;
    } else {
      throw ContractError("confusion_counts: label " + std::to_string(labels[i]) + " is not 0 or 1");
    }
  }
  return c;
}

Metrics metrics(const EvalCounts& c) {
  if (c.fn + c.tp == 0) throw UndefinedMetricError("FRR is undefined without positive labels");
  if (c.fp + c.tn == 0) throw UndefinedMetricError("FAR is undefined without negative labels");
  Metrics m;
  m.frr = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
  m.far = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  m.score = m.frr + m.far;
  return m;
}

SweepResult threshold_sweep(std::span<const double> scores, std::span<const int> labels,
                            std::span<const double> grid) {
  if (grid.empty()) throw ContractError("threshold_sweep: empty grid");
  SweepResult r;
  r.points.resize(grid.size());
  r.points[0] = {grid[0], metrics(confusion_counts(scores, labels, grid[0]))};
#pragma omp parallel for
  for (long i = 1; i < static_cast<long>(grid.size()); ++i) {
    r.points[i].threshold = grid[i];
    r.points[i].metrics = metrics(confusion_counts(scores, labels, grid[i]));
  }
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    const SweepPoint& p = r.points[i];
    const SweepPoint& b = r.points[r.best];
    if (p.metrics.score < b.metrics.score || (p.metrics.score == b.metrics.score && p.threshold < b.threshold)) {
      r.best = i;
    }
  }
  return r;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

int majority_vote(int r1, int r2, int r3) {
  for (int r : {r1, r2, r3}) {
    if (r != 0 && r != 1) throw ContractError("majority_vote: inputs must be 0 or 1");
  }
  return r1 + r2 + r3 >= 2 ? 1 : 0;
}

std::vector<int> ensemble_decisions(const std::vector<std::vector<ScoreRecord>>& score_lists,
                                    std::span<const double> thresholds, std::span<const LabelRecord> labels) {
  if (score_lists.size() != 3 || thresholds.size() != 3) {
    throw ContractError("ensemble needs three score lists and three thresholds");
  }
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& list = score_lists[m];
    const std::size_t n = std::min(list.size(), labels.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (list[i].id != labels[i].id) {
        throw ContractError("score list " + std::to_string(m + 1) + " is misaligned at id '" + list[i].id +
                            "' (expected '" + labels[i].id + "')");
      }
    }
    if (list.size() != labels.size()) {
      const std::string id = list.size() > n ? list[n].id : labels[n].id;
      throw ContractError("score list " + std::to_string(m + 1) + " is misaligned at id '" + id + "'");
    }
  }
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int r[3];
    for (std::size_t m = 0; m < 3; ++m) r[m] = score_lists[m][i].score >= thresholds[m] ? 1 : 0;
    out[i] = majority_vote(r[0], r[1], r[2]);
  }
  return out;
}

Metrics ensemble_eval(const std::vector<std::vector<ScoreRecord>>& score_lists, std::span<const double> thresholds,
                      std::span<const LabelRecord> labels) {
  const std::vector<int> votes = ensemble_decisions(score_lists, thresholds, labels);
  std::vector<double> as_scores(votes.begin(), votes.end());
  std::vector<int> y;
  for (const LabelRecord& l : labels) y.push_back(l.label);
  return metrics(confusion_counts(as_scores, y, 0.5));
}

namespace {

std::vector<std::pair<std::string, std::string>> read_tab_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected two tab-separated fields");
    }
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

void write_lines(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

}  // namespace

void write_scores(const std::string& path, std::span<const ScoreRecord> scores) {
  std::ostringstream os;
  os.precision(17);
  for (const ScoreRecord& s : scores) os << s.id << '\t' << s.score << '\n';
  write_lines(path, os.str());
}

std::vector<ScoreRecord> read_scores(const std::string& path) {
  std::vector<ScoreRecord> out;
  for (auto& [id, value] : read_tab_pairs(path)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
      throw InputError(path + ": bad score '" + value + "' for " + id);
    }
    out.push_back({id, v});
  }
  return out;
}

void write_labels(const std::string& path, std::span<const LabelRecord> labels) {
  std::ostringstream os;
  for (const LabelRecord& l : labels) os << l.id << '\t' << l.label << '\n';
  write_lines(path, os.str());
}

std::vector<LabelRecord> read_labels(const std::string& path) {
  std::vector<LabelRecord> out;
  for (auto& [id, value] : read_tab_pairs(path)) {
    if (value != "0" && value != "1") throw InputError(path + ": bad label '" + value + "' for " + id);
    out.push_back({id, value == "1" ? 1 : 0});
  }
  return out;
}

}  // namespace avwws
