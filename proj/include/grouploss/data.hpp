#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "grouploss/scoring.hpp"

namespace grouploss {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Rows of (features, score vector, class label). Features are shared with
/// every view derived from the dataset.
class LabeledDataset {
 public:
  /// features may have zero columns. Throws std::invalid_argument when a
  /// score row is off the simplex (1e-6), a label is out of range, or row
  /// counts disagree.
  LabeledDataset(Matrix features, Matrix scores, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t feature_dim() const { return features_->cols(); }
  std::size_t num_classes() const { return scores_.cols(); }

  std::span<const double> feature_row(std::size_t i) const { return features_->row(i); }
  std::span<const double> score_row(std::size_t i) const { return scores_.row(i); }
  int label(std::size_t i) const { return labels_[i]; }
  ProbVector one_hot(std::size_t i) const;

  const std::shared_ptr<const Matrix>& features() const { return features_; }
  const Matrix& scores() const { return scores_; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::shared_ptr<const Matrix> features_;
  Matrix scores_;
  std::vector<int> labels_;
};

enum class Provenance { Native, TopLabel, Classwise };

/// Binary problem: positive-class score and 0/1 label per row.
struct BinaryView {
  std::shared_ptr<const Matrix> features;
  std::vector<double> score;
  std::vector<int> label;
  Provenance provenance = Provenance::Native;
  int class_index = -1;  // set for Classwise

  std::size_t size() const { return score.size(); }
  std::size_t feature_dim() const { return features ? features->cols() : 0; }
  std::span<const double> feature_row(std::size_t i) const { return features->row(i); }

  /// Validates score in [0, 1], label in {0, 1} and row counts.
  static BinaryView native(std::shared_ptr<const Matrix> features, std::vector<double> score,
                           std::vector<int> label);
};

/// Predicted class is the argmax (lowest index on ties); label is 1 when it
/// matches the true class.
BinaryView top_label_reduce(const LabeledDataset& ds);

/// One-vs-rest view of class k. Throws std::out_of_range for a bad k.
BinaryView classwise_slice(const LabeledDataset& ds, std::size_t k);

/// Positive-class view of a K = 2 dataset.
BinaryView native_binary(const LabeledDataset& ds);

struct SplitIndex {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::size_t bin_count_used_for_stratification = 0;
};

/// Equal-width score bins; inside each bin rows are shuffled with the seeded
/// generator and dealt alternately to train and test, so per-bin counts
/// differ by at most one. Row lists are returned sorted.
SplitIndex stratified_split(const BinaryView& bv, std::size_t n_bins, std::uint64_t seed);

}  // namespace grouploss
