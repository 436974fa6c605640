#include "grouploss/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "grouploss/binning.hpp"
#include "grouploss/random.hpp"

namespace grouploss {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("matrix data size mismatch");
}

LabeledDataset::LabeledDataset(Matrix features, Matrix scores, std::vector<int> labels)
    : features_(std::make_shared<const Matrix>(std::move(features))),
      scores_(std::move(scores)),
      labels_(std::move(labels)) {
  const std::size_t n = labels_.size();
  if (scores_.rows() != n) throw std::invalid_argument("scores/labels row count mismatch");
  if (features_->rows() != n && !(features_->cols() == 0 && features_->rows() == 0))
    throw std::invalid_argument("features/labels row count mismatch");
  if (features_->rows() == 0 && n > 0) features_ = std::make_shared<const Matrix>(n, 0);
  if (scores_.cols() < 2) throw std::invalid_argument("need at least two classes");
  const int k = static_cast<int>(scores_.cols());
  for (std::size_t i = 0; i < n; ++i) {
    if (labels_[i] < 0 || labels_[i] >= k)
      throw std::invalid_argument("label out of range at row " + std::to_string(i));
    double sum = 0.0;
    for (double v : scores_.row(i)) {
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("score outside [0, 1] at row " + std::to_string(i));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("score row does not sum to 1 at row " + std::to_string(i));
  }
}

ProbVector LabeledDataset::one_hot(std::size_t i) const {
  ProbVector v(num_classes(), 0.0);
  v[static_cast<std::size_t>(labels_[i])] = 1.0;
  return v;
}

BinaryView BinaryView::native(std::shared_ptr<const Matrix> features, std::vector<double> score,
                              std::vector<int> label) {
  if (score.size() != label.size()) throw std::invalid_argument("score/label size mismatch");
  if (!features) features = std::make_shared<const Matrix>(score.size(), 0);
  if (features->rows() != score.size()) throw std::invalid_argument("features row count mismatch");
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (!(score[i] >= 0.0 && score[i] <= 1.0))
      throw std::invalid_argument("score outside [0, 1] at row " + std::to_string(i));
    if (label[i] != 0 && label[i] != 1)
      throw std::invalid_argument("label not in {0, 1} at row " + std::to_string(i));
  }
  return BinaryView{std::move(features), std::move(score), std::move(label), Provenance::Native, -1};
}

BinaryView top_label_reduce(const LabeledDataset& ds) {
  BinaryView bv;
  bv.features = ds.features();
  bv.provenance = Provenance::TopLabel;
  bv.score.resize(ds.size());
  bv.label.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.score_row(i);
    const auto best = std::max_element(row.begin(), row.end());  // first maximum
    bv.score[i] = *best;
    bv.label[i] = (best - row.begin()) == ds.label(i) ? 1 : 0;
  }
  return bv;
}

BinaryView classwise_slice(const LabeledDataset& ds, std::size_t k) {
  if (k >= ds.num_classes()) throw std::out_of_range("class index out of range");
  BinaryView bv;
  bv.features = ds.features();
  bv.provenance = Provenance::Classwise;
  bv.class_index = static_cast<int>(k);
  bv.score.resize(ds.size());
  bv.label.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bv.score[i] = ds.scores()(i, k);
    bv.label[i] = ds.label(i) == static_cast<int>(k) ? 1 : 0;
  }
  return bv;
}

BinaryView native_binary(const LabeledDataset& ds) {
  if (ds.num_classes() != 2) throw std::invalid_argument("native binary view needs K = 2");
  BinaryView bv = classwise_slice(ds, 1);
  bv.provenance = Provenance::Native;
  bv.class_index = -1;
  return bv;
}

SplitIndex stratified_split(const BinaryView& bv, std::size_t n_bins, std::uint64_t seed) {
  if (bv.size() < 2) throw std::invalid_argument("need at least two rows to split");
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");

  std::vector<std::vector<std::size_t>> members(n_bins);
  for (std::size_t i = 0; i < bv.size(); ++i) members[bin_index(bv.score[i], n_bins)].push_back(i);

  Rng rng(derive_seed(seed, 0x5eed));
  SplitIndex split;
  split.bin_count_used_for_stratification = n_bins;
  // Odd-sized bins alternate which side receives the extra row so the two
  // halves stay balanced overall.
  bool train_first = true;
  for (auto& rows : members) {
    shuffle(std::span<std::size_t>(rows), rng);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const bool to_train = (r % 2 == 0) == train_first;
      (to_train ? split.train_rows : split.test_rows).push_back(rows[r]);
    }
    if (rows.size() % 2 == 1) train_first = !train_first;
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  return split;
}

}  // namespace grouploss
