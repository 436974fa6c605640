#include "grouploss/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

namespace grouploss {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line, std::string_view column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty())
    throw InputError(line, "column '" + std::string(column) + "': not a number: '" + std::string(field) + "'");
  return v;
}

int parse_int(std::string_view field, std::size_t line) {
  int v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty())
    throw InputError(line, "column 'label': not an integer: '" + std::string(field) + "'");
  return v;
}

// Index of `prefix<i>` columns for i = 0.., requiring them to be contiguous.
std::vector<std::size_t> numbered_columns(const std::map<std::string, std::size_t>& index,
                                          const std::string& prefix) {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0;; ++i) {
    auto it = index.find(prefix + std::to_string(i));
    if (it == index.end()) break;
    cols.push_back(it->second);
  }
  for (const auto& [name, col] : index) {
    if (name.rfind(prefix, 0) == 0) {
      const std::string rest = name.substr(prefix.size());
      bool numeric = !rest.empty() && rest.find_first_not_of("0123456789") == std::string::npos;
      if (numeric && std::stoul(rest) >= cols.size())
        throw InputError(1, "column '" + name + "' is not contiguous with " + prefix + "0..");
    }
  }
  return cols;
}

}  // namespace

InputError::InputError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

CsvDataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw InputError(0, "empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::map<std::string, std::size_t> index;
  const auto header = split_fields(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!index.emplace(std::string(header[c]), c).second)
      throw InputError(line_no, "duplicate column '" + std::string(header[c]) + "'");
  }
  if (!index.count("label")) throw InputError(line_no, "missing 'label' column");
  const std::size_t label_col = index["label"];

  const bool binary = index.count("score") > 0;
  std::vector<std::size_t> score_cols;
  if (binary) {
    if (index.count("score_0")) throw InputError(line_no, "both 'score' and 'score_0' columns present");
    score_cols = {index["score"]};
  } else {
    score_cols = numbered_columns(index, "score_");
    if (score_cols.size() < 2) throw InputError(line_no, "need 'score' or at least score_0, score_1");
  }
  const auto feature_cols = numbered_columns(index, "feature_");
  const bool has_q = index.count("q_true") > 0;
  const std::size_t q_col = has_q ? index["q_true"] : 0;
  const std::size_t n_classes = binary ? 2 : score_cols.size();

  std::vector<double> features;
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<double> q_true;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw InputError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    const int label = parse_int(fields[label_col], line_no);
    if (label < 0 || label >= static_cast<int>(n_classes))
      throw InputError(line_no, "label " + std::to_string(label) + " out of range");
    labels.push_back(label);

    if (binary) {
      const double s = parse_double(fields[score_cols[0]], line_no, "score");
      if (!(s >= 0.0 && s <= 1.0)) throw InputError(line_no, "score outside [0, 1]");
      scores.push_back(1.0 - s);
      scores.push_back(s);
    } else {
      double sum = 0.0;
      for (std::size_t k = 0; k < score_cols.size(); ++k) {
        const double v = parse_double(fields[score_cols[k]], line_no, header[score_cols[k]]);
        if (!(v >= 0.0 && v <= 1.0)) throw InputError(line_no, "score outside [0, 1]");
        sum += v;
        scores.push_back(v);
      }
      if (std::abs(sum - 1.0) > 1e-6) throw InputError(line_no, "scores do not sum to 1");
    }
    for (std::size_t c : feature_cols) features.push_back(parse_double(fields[c], line_no, header[c]));
    if (has_q) {
      const double q = parse_double(fields[q_col], line_no, "q_true");
      if (!(q >= 0.0 && q <= 1.0)) throw InputError(line_no, "q_true outside [0, 1]");
      q_true.push_back(q);
    }
  }
  if (labels.empty()) throw InputError(0, "no data rows");

  const std::size_t n = labels.size();
  CsvDataset out{LabeledDataset(Matrix(n, feature_cols.size(), std::move(features)),
                                Matrix(n, n_classes, std::move(scores)), std::move(labels)),
                 binary, std::nullopt};
  if (has_q) out.q_true = std::move(q_true);
  return out;
}

CsvDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(0, "cannot open " + path.string());
  return read_dataset_csv(in);
}

void write_binary_csv(std::ostream& out, const BinaryView& bv, const std::vector<double>* q_true) {
  const std::size_t d = bv.feature_dim();
  out << "label,score";
  for (std::size_t j = 0; j < d; ++j) out << ",feature_" << j;
  if (q_true) out << ",q_true";
  out << '\n';
  for (std::size_t i = 0; i < bv.size(); ++i) {
    out << bv.label[i] << ',' << format_double(bv.score[i]);
    for (double v : bv.feature_row(i)) out << ',' << format_double(v);
    if (q_true) out << ',' << format_double((*q_true)[i]);
    out << '\n';
  }
}

}  // namespace grouploss
