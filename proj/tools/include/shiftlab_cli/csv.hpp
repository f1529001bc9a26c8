#pragma once

#include "shiftlab/core.hpp"

#include <string>
#include <vector>

namespace shiftlab::cli {

/// Raised for malformed invocations or configs; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TaskKind { Classification, Regression };

struct CsvIngest {
  LabeledDataset data;
  std::vector<std::string> feature_names;
  /// Label-value map for classification (index = class id); empty for
  /// regression.
  std::vector<std::string> label_names;
  int dropped_rows = 0;
};

/// Reads a comma-separated file (header row required, UTF-8, '.' decimal,
/// no quoting). Rows with missing cells (empty, NA, NaN or null) are
/// dropped and counted; any other non-numeric feature cell is an error
/// naming the row and column.
CsvIngest ingest_csv(const std::string& path, const std::string& label_column,
                     TaskKind kind);

}  // namespace shiftlab::cli
