#pragma once

#include "dphuber/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace dphuber {

// Malformed CSV input; the message carries the offending line number.
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Comma-separated, first row header, UTF-8, '.' decimal, no quoting of
// numerics.
struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;  // rows x columns
};

CsvTable read_csv(const std::string& path);

// Builds the regression dataset from a parsed table: the response column is
// selected by name (or the first column when empty), the remaining columns
// become covariates in file order, and the intercept is prepended.
struct CsvRegression {
  RegressionData data;
  std::vector<std::string> design_columns;  // "(Intercept)" first
  std::string response_column;
};
CsvRegression regression_from_csv(const CsvTable& table, const std::string& response);

}  // namespace dphuber
