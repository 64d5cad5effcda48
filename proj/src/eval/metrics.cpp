#include "mtlse/eval/metrics.hpp"

#include <string>

#include "mtlse/errors.hpp"

namespace mtlse::eval {

BinaryMatrix binarize_events(const ProbMatrix& probs, double threshold) {
  BinaryMatrix out(probs.rows, probs.cols);
  for (std::size_t i = 0; i < probs.values.size(); ++i) out.values[i] = probs.values[i] > threshold ? 1 : 0;
  return out;
}

double f_score(const ClassCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

EventScores event_fscores(const BinaryMatrix& pred, const BinaryMatrix& ref) {
  if (pred.rows != ref.rows || pred.cols != ref.cols || pred.values.size() != ref.values.size()) {
    throw ShapeError("event_fscores: prediction " + std::to_string(pred.rows) + "x" + std::to_string(pred.cols) +
                     " vs reference " + std::to_string(ref.rows) + "x" + std::to_string(ref.cols));
  }
  EventScores s;
  s.counts.assign(pred.cols, {});
  for (std::size_t r = 0; r < pred.rows; ++r) {
    for (std::size_t m = 0; m < pred.cols; ++m) {
      const bool p = pred.at(r, m) != 0;
      const bool t = ref.at(r, m) != 0;
      auto& c = s.counts[m];
      if (p && t) ++c.tp;
      else if (p) ++c.fp;
      else if (t) ++c.fn;
    }
  }
  ClassCounts pooled;
  s.per_class_f.reserve(pred.cols);
  double sum = 0.0;
  for (const auto& c : s.counts) {
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    s.per_class_f.push_back(f_score(c));
    sum += s.per_class_f.back();
  }
  s.micro_f = f_score(pooled);
  s.macro_f = pred.cols ? sum / static_cast<double>(pred.cols) : 0.0;
  return s;
}

namespace {

void check_labels(std::span<const std::size_t> pred, std::span<const std::size_t> ref, std::size_t n) {
  if (pred.size() != ref.size()) throw ShapeError("scene labels: prediction and reference lengths differ");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= n || ref[i] >= n) throw ShapeError("scene labels: class index out of range");
  }
}

}  // namespace

SceneScores scene_fscores(std::span<const std::size_t> pred, std::span<const std::size_t> ref,
                          std::size_t n_classes) {
  if (pred.empty() && ref.empty()) throw InputError("scene_fscores: empty input");
  check_labels(pred, ref, n_classes);
  std::vector<ClassCounts> counts(n_classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == ref[i]) {
      ++counts[pred[i]].tp;
    } else {
      ++counts[pred[i]].fp;
      ++counts[ref[i]].fn;
    }
  }
  SceneScores s;
  ClassCounts pooled;
  double sum = 0.0;
  for (const auto& c : counts) {
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    s.per_class_f.push_back(f_score(c));
    sum += s.per_class_f.back();
  }
  s.micro_f = f_score(pooled);
  s.macro_f = sum / static_cast<double>(n_classes);
  return s;
}

ConfusionMatrix confusion_recall(std::span<const std::size_t> pred, std::span<const std::size_t> ref,
                                 std::size_t n_classes) {
  check_labels(pred, ref, n_classes);
  ConfusionMatrix cm;
  cm.n = n_classes;
  cm.counts = Matrix<std::size_t>(n_classes, n_classes, 0);
  cm.recall_percent = Matrix<double>(n_classes, n_classes, 0.0);
  cm.row_defined.assign(n_classes, false);
  for (std::size_t i = 0; i < pred.size(); ++i) ++cm.counts.at(ref[i], pred[i]);
  for (std::size_t r = 0; r < n_classes; ++r) {
    std::size_t total = 0;
    for (std::size_t c = 0; c < n_classes; ++c) total += cm.counts.at(r, c);
    if (total == 0) continue;
    cm.row_defined[r] = true;
    for (std::size_t c = 0; c < n_classes; ++c) {
      cm.recall_percent.at(r, c) = 100.0 * static_cast<double>(cm.counts.at(r, c)) / static_cast<double>(total);
    }
  }
  return cm;
}

}  // namespace mtlse::eval
