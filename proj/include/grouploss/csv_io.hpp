#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grouploss/data.hpp"

namespace grouploss {

/// Malformed input; carries the 1-based line number (0 when not line bound).
class InputError : public std::runtime_error {
 public:
  InputError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvDataset {
  LabeledDataset dataset;
  bool binary_format = false;               // `label,score,...` shortcut
  std::optional<std::vector<double>> q_true;  // oracle column, when present
};

/// Reads either `label,score_0..score_{K-1}[,feature_*]` or the binary
/// shortcut `label,score[,feature_*]`; an optional `q_true` column is kept.
/// Binary rows become K = 2 score vectors (1 - s, s).
CsvDataset read_dataset_csv(std::istream& in);
CsvDataset read_dataset_csv(const std::filesystem::path& path);

/// Writes `label,score,feature_0..,[q_true]` in shortest round-trip form.
void write_binary_csv(std::ostream& out, const BinaryView& bv,
                      const std::vector<double>* q_true = nullptr);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace grouploss
