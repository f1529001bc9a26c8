#include "shiftlab_cli/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace shiftlab::cli {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trimmed(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

bool is_missing(const std::string& cell) {
  std::string lower = cell;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return lower.empty() || lower == "na" || lower == "nan" || lower == "null";
}

bool parse_number(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

}  // namespace

CsvIngest ingest_csv(const std::string& path, const std::string& label_column,
                     TaskKind kind) {
  std::ifstream file(path);
  if (!file) throw UsageError("csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(file, line)) throw UsageError("csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_row(line);
  for (std::string& name : header) name = trimmed(name);
  if (header.empty()) throw UsageError("csv: missing header row");

  Eigen::Index label_index = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) label_index = static_cast<Eigen::Index>(j);
  if (label_index < 0)
    throw UsageError("csv: label column '" + label_column + "' not found");

  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (static_cast<Eigen::Index>(j) != label_index)
      feature_names.push_back(header[j]);

  std::vector<std::vector<double>> feature_rows;
  std::vector<std::string> raw_labels;
  int dropped = 0;
  int row_number = 1;  // header was row 1
  while (std::getline(file, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    std::vector<std::string> cells = split_row(line);
    if (cells.size() != header.size())
      throw UsageError("csv: row " + std::to_string(row_number) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));

    bool missing = false;
    for (std::string& cell : cells) {
      cell = trimmed(cell);
      if (is_missing(cell)) missing = true;
    }
    if (missing) {
      ++dropped;
      continue;
    }

    std::vector<double> row;
    row.reserve(feature_names.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<Eigen::Index>(j) == label_index) continue;
      double value = 0.0;
      if (!parse_number(cells[j], value))
        throw UsageError("csv: cannot parse value '" + cells[j] + "' at row " +
                         std::to_string(row_number) + ", column '" + header[j] +
                         "'");
      row.push_back(value);
    }
    feature_rows.push_back(std::move(row));
    raw_labels.push_back(cells[label_index]);
  }

  if (feature_rows.empty()) throw UsageError("csv: no usable rows in '" + path + "'");
  if (feature_names.empty()) throw UsageError("csv: no feature columns");

  const Eigen::Index m = static_cast<Eigen::Index>(feature_rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(feature_names.size());
  Matrix features(m, p);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < p; ++j) features(i, j) = feature_rows[i][j];

  Vector labels(m);
  std::vector<std::string> label_names;
  if (kind == TaskKind::Regression) {
    for (Eigen::Index i = 0; i < m; ++i) {
      double value = 0.0;
      if (!parse_number(raw_labels[i], value))
        throw UsageError("csv: cannot parse regression target '" +
                         raw_labels[i] + "'");
      labels[i] = value;
    }
  } else {
    std::map<std::string, int> mapping;
    for (const std::string& value : raw_labels) mapping.emplace(value, 0);
    int next = 0;
    for (auto& [value, id] : mapping) {
      id = next++;
      label_names.push_back(value);
    }
    for (Eigen::Index i = 0; i < m; ++i) labels[i] = mapping.at(raw_labels[i]);
  }

  return CsvIngest{LabeledDataset(std::move(features), std::move(labels)),
                   std::move(feature_names), std::move(label_names), dropped};
}

}  // namespace shiftlab::cli
