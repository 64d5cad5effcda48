#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>

#include "mtlse/errors.hpp"
#include "mtlse/eval/metrics.hpp"
#include "mtlse/eval/report.hpp"

using namespace mtlse;
using namespace mtlse::eval;

namespace {

BinaryMatrix roll(std::size_t t, std::size_t m, std::initializer_list<int> cells) {
  BinaryMatrix b(t, m);
  std::size_t i = 0;
  for (int v : cells) b.values[i++] = static_cast<std::uint8_t>(v);
  return b;
}

BinaryMatrix from_bits(std::size_t t, std::size_t m, unsigned bits) {
  BinaryMatrix b(t, m);
  for (std::size_t i = 0; i < t * m; ++i) b.values[i] = (bits >> i) & 1u;
  return b;
}

struct Tally {
  double micro = 0.0, macro = 0.0;
  std::vector<double> per_class;
};

double f_of(double tp, double fp, double fn) { return tp + fp + fn == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn); }

/// Cell-by-cell event tally.
Tally brute_events(const BinaryMatrix& p, const BinaryMatrix& r) {
  Tally out;
  double TP = 0, FP = 0, FN = 0;
  for (std::size_t m = 0; m < p.cols; ++m) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t t = 0; t < p.rows; ++t) {
      const bool a = p.at(t, m), b = r.at(t, m);
      if (a && b) ++tp;
      if (a && !b) ++fp;
      if (!a && b) ++fn;
    }
    out.per_class.push_back(f_of(tp, fp, fn));
    TP += tp, FP += fp, FN += fn;
  }
  out.micro = f_of(TP, FP, FN);
  for (double f : out.per_class) out.macro += f / static_cast<double>(p.cols);
  return out;
}

/// Clip-by-clip scene tally.
Tally brute_scenes(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& ref, std::size_t n) {
  Tally out;
  double TP = 0, FP = 0, FN = 0;
  for (std::size_t c = 0; c < n; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == c && ref[i] == c) ++tp;
      if (pred[i] == c && ref[i] != c) ++fp;
      if (pred[i] != c && ref[i] == c) ++fn;
    }
    out.per_class.push_back(f_of(tp, fp, fn));
    TP += tp, FP += fp, FN += fn;
  }
  out.micro = f_of(TP, FP, FN);
  for (double f : out.per_class) out.macro += f / static_cast<double>(n);
  return out;
}

}  // namespace

TEST(Binarize, StrictThreshold) {
  const ProbMatrix p(3, 2, 0.5);
  for (auto v : binarize_events(p, 0.5).values) EXPECT_EQ(v, 0);
}

TEST(Binarize, ZeroThresholdOnPositiveProbs) {
  ProbMatrix p(2, 3, 1e-9);
  p.values[4] = 0.9;
  for (auto v : binarize_events(p, 0.0).values) EXPECT_EQ(v, 1);
}

TEST(Binarize, MatchesBruteForceCount) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ProbMatrix p(17, 5);
    for (auto& v : p.values) v = u(rng);
    const double thr = u(rng);
    const auto b = binarize_events(p, thr);
    std::size_t ones = 0, expect = 0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      ones += b.values[i];
      if (p.values[i] > thr) ++expect;
    }
    EXPECT_EQ(ones, expect);
  }
}

TEST(EventScores, PerfectDetection) {
  const auto r = roll(3, 2, {1, 0, 0, 1, 1, 0});
  const auto s = event_fscores(r, r);
  EXPECT_EQ(s.micro_f, 1.0);
  EXPECT_DOUBLE_EQ(s.macro_f, 1.0);
}

TEST(EventScores, TotalMissAndSilentClasses) {
  const auto ref = roll(2, 3, {1, 0, 0, 1, 0, 0});
  const auto s = event_fscores(BinaryMatrix(2, 3), ref);
  EXPECT_EQ(s.micro_f, 0.0);
  EXPECT_EQ(s.macro_f, 0.0);
  // Class 1 and 2: perfect on class 0 only, silent elsewhere.
  const auto p = roll(2, 3, {1, 0, 0, 1, 0, 0});
  const auto t = event_fscores(p, ref);
  EXPECT_DOUBLE_EQ(t.macro_f, 1.0 / 3.0);
  EXPECT_EQ(t.per_class_f[1], 0.0);
}

TEST(EventScores, HandcraftedRoll) {
  // 4 frames x 3 classes.
  const auto ref = roll(4, 3, {1, 0, 0,  //
                               1, 1, 0,  //
                               0, 1, 0,  //
                               0, 0, 1});
  const auto pred = roll(4, 3, {1, 1, 0,  //
                                0, 1, 0,  //
                                0, 0, 1,  //
                                0, 0, 1});
  // class 0: tp1 fn1 -> 2/3; class 1: tp1 fp1 fn1 -> 1/2; class 2: tp1 fp1 -> 2/3.
  const auto s = event_fscores(pred, ref);
  EXPECT_NEAR(s.per_class_f[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.per_class_f[1], 0.5, 1e-15);
  EXPECT_NEAR(s.per_class_f[2], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.micro_f, 6.0 / 10.0, 1e-15);
  EXPECT_NEAR(s.macro_f, (2.0 / 3.0 + 0.5 + 2.0 / 3.0) / 3.0, 1e-15);
}

TEST(EventScores, ShapeMismatchThrows) { EXPECT_THROW(event_fscores(BinaryMatrix(2, 3), BinaryMatrix(3, 2)), ShapeError); }

TEST(EventScores, ExhaustiveSmallRolls) {
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {1, 3}, {2, 2}, {3, 2}, {2, 3}, {4, 1}};
  for (const auto& [t, m] : shapes) {
    const unsigned n = 1u << (t * m);
    for (unsigned a = 0; a < n; ++a)
      for (unsigned b = 0; b < n; ++b) {
        const auto p = from_bits(t, m, a), r = from_bits(t, m, b);
        const auto got = event_fscores(p, r);
        const auto want = brute_events(p, r);
        ASSERT_NEAR(got.micro_f, want.micro, 1e-15);
        ASSERT_NEAR(got.macro_f, want.macro, 1e-15);
        for (std::size_t k = 0; k < m; ++k) ASSERT_NEAR(got.per_class_f[k], want.per_class[k], 1e-15);
      }
  }
}

TEST(EventScores, RandomStackedClipsMatchTally) {
  // Up to 5 clips of 4 frames each, stacked, 3 classes.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t frames = 4 * (1 + rng() % 5);
    BinaryMatrix p(frames, 3), r(frames, 3);
    for (auto& v : p.values) v = rng() % 2;
    for (auto& v : r.values) v = rng() % 2;
    const auto got = event_fscores(p, r);
    const auto want = brute_events(p, r);
    ASSERT_NEAR(got.micro_f, want.micro, 1e-15);
    ASSERT_NEAR(got.macro_f, want.macro, 1e-15);
  }
}

TEST(EventScores, FalsePositiveToTrueNegativeNeverLowersF) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    BinaryMatrix p(6, 2), r(6, 2);
    for (auto& v : p.values) v = rng() % 2;
    for (auto& v : r.values) v = rng() % 2;
    const auto before = event_fscores(p, r);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      if (p.values[i] && !r.values[i]) {
        BinaryMatrix q = p;
        q.values[i] = 0;
        const auto after = event_fscores(q, r);
        const std::size_t m = i % 2;
        EXPECT_GE(after.per_class_f[m], before.per_class_f[m]);
      }
    }
  }
}

TEST(EventScores, PermutingFramesLeavesScoresUnchanged) {
  std::mt19937_64 rng(6);
  BinaryMatrix p(12, 3), r(12, 3);
  for (auto& v : p.values) v = rng() % 2;
  for (auto& v : r.values) v = rng() % 2;
  std::vector<std::size_t> order(12);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  BinaryMatrix p2(12, 3), r2(12, 3);
  for (std::size_t t = 0; t < 12; ++t)
    for (std::size_t m = 0; m < 3; ++m) {
      p2.at(t, m) = p.at(order[t], m);
      r2.at(t, m) = r.at(order[t], m);
    }
  const auto a = event_fscores(p, r), b = event_fscores(p2, r2);
  EXPECT_EQ(a.micro_f, b.micro_f);
  EXPECT_EQ(a.per_class_f, b.per_class_f);
}

TEST(SceneScores, AllCorrect) {
  const std::vector<std::size_t> y{0, 1, 2, 3, 1};
  const auto s = scene_fscores(y, y, 4);
  EXPECT_EQ(s.micro_f, 1.0);
  // Class 3 has one clip, all classes present.
  EXPECT_DOUBLE_EQ(s.macro_f, 1.0);
}

TEST(SceneScores, ConstantPredictionHandTally) {
  const std::vector<std::size_t> ref{0, 1, 2, 3}, pred{0, 0, 0, 0};
  const auto s = scene_fscores(pred, ref, 4);
  EXPECT_NEAR(s.micro_f, 0.25, 1e-15);
  EXPECT_NEAR(s.per_class_f[0], 0.4, 1e-15);
  EXPECT_NEAR(s.macro_f, 0.1, 1e-15);
}

TEST(SceneScores, MicroEqualsAccuracy) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 30, k = 2 + rng() % 5;
    std::vector<std::size_t> p(n), r(n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng() % k;
      r[i] = rng() % k;
      correct += p[i] == r[i];
    }
    EXPECT_NEAR(scene_fscores(p, r, k).micro_f, static_cast<double>(correct) / static_cast<double>(n), 1e-15);
  }
}

TEST(SceneScores, ExhaustiveSmallSequences) {
  for (std::size_t k = 2; k <= 3; ++k)
    for (std::size_t n = 1; n <= 5; ++n) {
      std::size_t total = 1;
      for (std::size_t i = 0; i < n; ++i) total *= k;
      for (std::size_t a = 0; a < total; ++a)
        for (std::size_t b = 0; b < total; ++b) {
          std::vector<std::size_t> p(n), r(n);
          for (std::size_t i = 0, x = a, y = b; i < n; ++i, x /= k, y /= k) {
            p[i] = x % k;
            r[i] = y % k;
          }
          const auto got = scene_fscores(p, r, k);
          const auto want = brute_scenes(p, r, k);
          ASSERT_NEAR(got.micro_f, want.micro, 1e-15);
          ASSERT_NEAR(got.macro_f, want.macro, 1e-15);
        }
    }
}

TEST(SceneScores, PermutationInvariance) {
  std::mt19937_64 rng(13);
  std::vector<std::size_t> p(40), r(40);
  for (auto& v : p) v = rng() % 4;
  for (auto& v : r) v = rng() % 4;
  const auto a = scene_fscores(p, r, 4);
  std::vector<std::size_t> order(40);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> p2(40), r2(40);
  for (std::size_t i = 0; i < 40; ++i) p2[i] = p[order[i]], r2[i] = r[order[i]];
  const auto b = scene_fscores(p2, r2, 4);
  EXPECT_EQ(a.micro_f, b.micro_f);
  EXPECT_EQ(a.per_class_f, b.per_class_f);
  const auto c1 = confusion_recall(p, r, 4), c2 = confusion_recall(p2, r2, 4);
  EXPECT_EQ(c1.recall_percent, c2.recall_percent);
}

TEST(SceneScores, Errors) {
  const std::vector<std::size_t> empty;
  EXPECT_THROW(scene_fscores(empty, empty, 4), InputError);
  EXPECT_THROW(scene_fscores(std::vector<std::size_t>{0}, std::vector<std::size_t>{0, 1}, 4), ShapeError);
  EXPECT_THROW(scene_fscores(std::vector<std::size_t>{5}, std::vector<std::size_t>{0}, 4), ShapeError);
}

TEST(Confusion, PerfectClassifier) {
  const std::vector<std::size_t> y{0, 1, 2, 2, 1, 0};
  const auto c = confusion_recall(y, y, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(c.recall_percent.at(i, j), i == j ? 100.0 : 0.0);
}

TEST(Confusion, HandcraftedRecall) {
  const std::vector<std::size_t> ref{0, 0, 0, 0, 1, 1}, pred{0, 0, 1, 0, 1, 1};
  const auto c = confusion_recall(pred, ref, 2);
  EXPECT_DOUBLE_EQ(c.recall_percent.at(0, 0), 75.0);
  EXPECT_DOUBLE_EQ(c.recall_percent.at(0, 1), 25.0);
  EXPECT_EQ(c.counts.at(0, 1), 1u);
}

TEST(Confusion, RowsSumToHundred) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> p(25), r(25);
    for (auto& v : p) v = rng() % 4;
    for (auto& v : r) v = rng() % 4;
    const auto c = confusion_recall(p, r, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      if (!c.row_defined[i]) continue;
      double sum = 0.0;
      for (std::size_t j = 0; j < 4; ++j) sum += c.recall_percent.at(i, j);
      EXPECT_NEAR(sum, 100.0, 1e-6);
    }
  }
}

TEST(Confusion, MissingReferenceRowIsUndefined) {
  const std::vector<std::size_t> ref{0, 0, 2}, pred{1, 0, 2};
  const auto c = confusion_recall(pred, ref, 3);
  EXPECT_FALSE(c.row_defined[1]);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(c.recall_percent.at(1, j), 0.0);
}

TEST(Report, CsvMeanAndStd) {
  RunReport r;
  r.method = "mtl";
  r.event_names = {"a", "b"};
  for (double v : {0.5, 0.7}) {
    MetricReport m;
    m.scene_micro_f = v;
    m.event_micro_f = v / 2;
    m.per_event_f = {v, 1.0 - v};
    r.seeds.push_back({static_cast<std::uint64_t>(v * 10), m});
  }
  const auto mean = r.mean(), sd = r.stddev();
  EXPECT_NEAR(*mean.scene_micro_f, 0.6, 1e-15);
  EXPECT_NEAR(*sd.scene_micro_f, std::sqrt(0.02), 1e-15);
  EXPECT_FALSE(mean.scene_macro_f.has_value());
  const std::string csv = report_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "method,seed,scene_micro_f,scene_macro_f,event_micro_f,event_macro_f,event_f.a,event_f.b");
  EXPECT_NE(csv.find("\nmtl,5,0.5,,0.25,,0.5,0.5\n"), std::string::npos);
  EXPECT_NE(csv.find("\nmtl,mean,"), std::string::npos);
  EXPECT_NE(csv.find("\nmtl,std,"), std::string::npos);
}

TEST(Report, SingleSeedStdIsZero) {
  RunReport r;
  MetricReport m;
  m.event_macro_f = 0.3;
  r.seeds.push_back({1, m});
  EXPECT_EQ(*r.stddev().event_macro_f, 0.0);
}

TEST(Report, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 0.123456789012345678, 0.0, 1.0})
    EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Report, JsonIsParseable) {
  RunReport r;
  r.method = "asc";
  r.scene_names = {"x", "y"};
  MetricReport m;
  m.scene_micro_f = 0.5;
  m.confusion = confusion_recall(std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{0, 0}, 2);
  r.seeds.push_back({3, m});
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["method"], "asc");
  const std::string cm = confusion_csv(*r.mean().confusion, r.scene_names);
  EXPECT_EQ(cm.substr(0, cm.find('\n')), "reference\\predicted,x,y");
}
