#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mtlse::eval {

template <class T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), values(r * c, fill) {}

  T& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Frame x class probabilities and decisions. Rows from several clips may be
/// stacked; frame-based scoring does not care about clip boundaries.
using ProbMatrix = Matrix<double>;
using BinaryMatrix = Matrix<std::uint8_t>;

/// 1 where prob > threshold (strict), else 0.
BinaryMatrix binarize_events(const ProbMatrix& probs, double threshold = 0.5);

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// 2TP / (2TP + FP + FN); 0 when the denominator is 0.
double f_score(const ClassCounts& c);

struct EventScores {
  double micro_f = 0.0;
  double macro_f = 0.0;
  std::vector<double> per_class_f;
  std::vector<ClassCounts> counts;
};

/// Frame-based scores. Micro pools counts over all classes; macro averages
/// F over every class, silent ones included. Throws ShapeError on mismatch.
EventScores event_fscores(const BinaryMatrix& pred, const BinaryMatrix& ref);

struct SceneScores {
  double micro_f = 0.0;
  double macro_f = 0.0;
  std::vector<double> per_class_f;
};

/// Single-label clip scores over classes [0, n_classes). Throws InputError on
/// empty input and ShapeError on length mismatch or out-of-range labels.
SceneScores scene_fscores(std::span<const std::size_t> pred, std::span<const std::size_t> ref, std::size_t n_classes);

struct ConfusionMatrix {
  std::size_t n = 0;
  /// Row i, column j: percent of true-class-i clips predicted as j.
  Matrix<double> recall_percent;
  Matrix<std::size_t> counts;
  /// False for classes with no reference clip; such rows are all zero.
  std::vector<bool> row_defined;
};

ConfusionMatrix confusion_recall(std::span<const std::size_t> pred, std::span<const std::size_t> ref,
                                 std::size_t n_classes);

}  // namespace mtlse::eval
