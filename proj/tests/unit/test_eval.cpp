// tests/unit/test_eval.cpp

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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "avwws/error.hpp"
#include "avwws/eval.hpp"
#include "oracles.hpp"

using namespace avwws;

namespace {

struct Fixture {
  std::vector<double> scores;
  std::vector<int> labels;
};

Fixture random_fixture(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    f.labels.push_back(i < 2 ? static_cast<int>(i) : static_cast<int>(rng() % 2));
    // Quantized so that some scores land exactly on grid thresholds.
    f.scores.push_back(i % 5 == 0 ? std::round(u(rng) * 100.0) / 100.0 : u(rng));
  }
  return f;
}

std::vector<ScoreRecord> records(const std::vector<double>& scores) {
  std::vector<ScoreRecord> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({"u" + std::to_string(i), scores[i]});
  return out;
}

std::vector<LabelRecord> label_records(const std::vector<int>& labels) {
  std::vector<LabelRecord> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({"u" + std::to_string(i), labels[i]});
  return out;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("avwws_eval_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("confusion counts") {
  const std::vector<double> s = {0.9, 0.1};
  const std::vector<int> y = {1, 0};
  CHECK(confusion_counts(s, y, 0.5) == EvalCounts{1, 0, 1, 0});
  const EvalCounts all = confusion_counts(s, y, 0.0);
  CHECK(all.fp == 1);
  CHECK(all.fn == 0);
  CHECK(confusion_counts(std::vector<double>{0.5}, std::vector<int>{1}, 0.5).tp == 1);
  CHECK_THROWS_AS(confusion_counts(s, std::vector<int>{1}, 0.5), ContractError);
  CHECK_THROWS_AS(confusion_counts(std::vector<double>{}, std::vector<int>{}, 0.5), ContractError);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = random_fixture(200, seed);
    for (double thr : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      const EvalCounts c = confusion_counts(f.scores, f.labels, thr);
      const oracle::Tally t = oracle::tally(f.scores, f.labels, thr);
      CHECK(c.tp == static_cast<std::size_t>(t.tp));
      CHECK(c.fp == static_cast<std::size_t>(t.fp));
      CHECK(c.tn == static_cast<std::size_t>(t.tn));
      CHECK(c.fn == static_cast<std::size_t>(t.fn));
    }
  }
}

TEST_CASE("rates and score") {
  const Metrics m = metrics({3, 1, 9, 1});
  CHECK(m.frr == 0.25);
  CHECK(m.far == 0.1);
  CHECK(m.score == doctest::Approx(0.35));
  CHECK(metrics({5, 0, 7, 0}).score == 0.0);
  CHECK(metrics({0, 7, 0, 5}).score == 2.0);
  CHECK_THROWS_AS(metrics({0, 1, 2, 0}), UndefinedMetricError);
  CHECK_THROWS_AS(metrics({1, 0, 0, 2}), UndefinedMetricError);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Fixture f = random_fixture(50, seed);
    const Metrics r = metrics(confusion_counts(f.scores, f.labels, 0.3));
    CHECK(r.frr >= 0.0);
    CHECK(r.frr <= 1.0);
    CHECK(r.far >= 0.0);
    CHECK(r.far <= 1.0);
    CHECK(r.score == r.frr + r.far);
  }
}

TEST_CASE("metrics survive monotone transforms of scores and threshold") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = random_fixture(100, seed);
    std::vector<double> logit;
    for (double s : f.scores) logit.push_back(std::exp(3.0 * s) - 2.0);
    for (double thr : {0.2, 0.5, 0.9}) {
      CHECK(confusion_counts(f.scores, f.labels, thr) == confusion_counts(logit, f.labels, std::exp(3.0 * thr) - 2.0));
    }
  }
}

TEST_CASE("threshold sweep") {
  const std::vector<double> sep = {0.1, 0.2, 0.3, 0.7, 0.8};
  const std::vector<int> sep_y = {0, 0, 0, 1, 1};
  const SweepResult r = threshold_sweep(sep, sep_y, default_threshold_grid());
  CHECK(r.best_point().metrics.score == 0.0);
  CHECK(r.best_point().threshold == doctest::Approx(0.31));
  CHECK(r.points.size() == 101);

  const std::vector<double> one = {0.42};
  CHECK(threshold_sweep(sep, sep_y, one).best_point().threshold == 0.42);
  CHECK_THROWS_AS(threshold_sweep(sep, sep_y, std::vector<double>{}), ContractError);
  CHECK_THROWS_AS(threshold_sweep(sep, std::vector<int>{1, 1, 1, 1, 1}, one), UndefinedMetricError);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Fixture f = random_fixture(80, seed);
    const auto grid = default_threshold_grid();
    const SweepResult sw = threshold_sweep(f.scores, f.labels, grid);
    std::size_t best = 0;
    double best_score = INFINITY;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const oracle::Tally t = oracle::tally(f.scores, f.labels, grid[i]);
      const double score = static_cast<double>(t.fn) / static_cast<double>(t.fn + t.tp) +
                           static_cast<double>(t.fp) / static_cast<double>(t.fp + t.tn);
      CHECK(sw.points[i].metrics.score == doctest::Approx(score).epsilon(1e-15));
      if (score < best_score) {
        best_score = score;
        best = i;
      }
    }
    CHECK(sw.best == best);
  }
}

TEST_CASE("majority vote truth table") {
  for (int a : {0, 1})
    for (int b : {0, 1})
      for (int c : {0, 1}) {
        const int v = majority_vote(a, b, c);
        CHECK(v == (a + b + c >= 2 ? 1 : 0));
        CHECK(v == majority_vote(b, c, a));
        CHECK(v == majority_vote(c, a, b));
        CHECK(v == majority_vote(b, a, c));
        CHECK(majority_vote(a, a, b) == a);
      }
  CHECK(majority_vote(1, 1, 0) == 1);
  CHECK(majority_vote(0, 1, 0) == 0);
  CHECK_THROWS_AS(majority_vote(2, 0, 0), ContractError);
}

TEST_CASE("ensemble of three score lists") {
  const Fixture f = random_fixture(60, 3);
  const auto labels = label_records(f.labels);
  const auto list = records(f.scores);
  const std::vector<double> thr = {0.4, 0.4, 0.4};
  const Metrics single = metrics(confusion_counts(f.scores, f.labels, 0.4));
  const Metrics ens = ensemble_eval({list, list, list}, thr, labels);
  CHECK(ens.score == single.score);
  CHECK(ens.frr == single.frr);

  std::vector<double> perfect;
  for (int y : f.labels) perfect.push_back(y ? 0.9 : 0.1);
  CHECK(ensemble_eval({records(perfect), list, records(perfect)}, std::vector<double>{0.5, 0.5, 0.5}, labels).score ==
        0.0);

  // Each model errs on a disjoint third of the utterances.
  std::vector<std::vector<ScoreRecord>> lists;
  double worst = 0.0;
  for (std::size_t m = 0; m < 3; ++m) {
    std::vector<double> s = perfect;
    for (std::size_t i = m; i < s.size(); i += 3) s[i] = 1.0 - s[i];
    worst = std::max(worst, metrics(confusion_counts(s, f.labels, 0.5)).score);
    lists.push_back(records(s));
  }
  const Metrics voted = ensemble_eval(lists, std::vector<double>{0.5, 0.5, 0.5}, labels);
  CHECK(voted.score <= worst);
  CHECK(voted.score == 0.0);
  CHECK(ensemble_decisions(lists, std::vector<double>{0.5, 0.5, 0.5}, labels) == f.labels);

  auto shuffled = list;
  std::swap(shuffled[7], shuffled[8]);
  try {
    ensemble_eval({list, shuffled, list}, thr, labels);
    FAIL("expected misalignment");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("u8") != std::string::npos);
  }
  CHECK_THROWS_AS(ensemble_eval({list, list}, std::vector<double>{0.5, 0.5}, labels), ContractError);
  CHECK_THROWS_AS(ensemble_eval({list, list, list}, std::vector<double>{0.5, 0.5}, labels), ContractError);
}

TEST_CASE("score and label files round-trip") {
  const auto dir = temp_dir();
  const Fixture f = random_fixture(30, 5);
  const auto scores = records(f.scores);
  write_scores((dir / "s.txt").string(), scores);
  const auto back = read_scores((dir / "s.txt").string());
  REQUIRE(back.size() == scores.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == scores[i].id);
    CHECK(back[i].score == scores[i].score);
  }
  const auto labels = label_records(f.labels);
  write_labels((dir / "l.txt").string(), labels);
  const auto lback = read_labels((dir / "l.txt").string());
  REQUIRE(lback.size() == labels.size());
  for (std::size_t i = 0; i < lback.size(); ++i) CHECK(lback[i].label == labels[i].label);

  std::ofstream((dir / "bad.txt").string()) << "u0\t0.5\nu1 nope\n";
  CHECK_THROWS_AS(read_scores((dir / "bad.txt").string()), InputError);
  std::ofstream((dir / "badl.txt").string()) << "u0\t2\n";
  CHECK_THROWS_AS(read_labels((dir / "badl.txt").string()), InputError);
  CHECK_THROWS_AS(read_scores((dir / "missing.txt").string()), InputError);
  std::filesystem::remove_all(dir);
}
