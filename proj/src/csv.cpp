#include "dphuber/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dphuber {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, std::size_t line_no, std::size_t col) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw CsvError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                   ": not a number: '" + cell + "'");
  }
  return value;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw CsvError("line 1: empty file, header expected");
  CsvTable table;
  for (const std::string& name : split_line(line)) {
    const std::string trimmed = trim(name);
    if (trimmed.empty()) throw CsvError("line 1: empty column name in header");
    table.columns.push_back(trimmed);
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.columns.size()) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(table.columns.size()) + " fields, got " +
                     std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_cell(cells[c], line_no, c);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError("no data rows after the header");

  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return table;
}

CsvRegression regression_from_csv(const CsvTable& table, const std::string& response) {
  Index response_col = 0;
  if (!response.empty()) {
    response_col = -1;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (table.columns[j] == response) {
        response_col = static_cast<Index>(j);
        break;
      }
    }
    if (response_col < 0) throw CsvError("response column '" + response + "' not found");
  }

  const Index n = table.values.rows();
  const Index cols = table.values.cols();
  Matrix covariates(n, cols - 1);
  std::vector<std::string> names;
  names.emplace_back("(Intercept)");
  Index k = 0;
  for (Index j = 0; j < cols; ++j) {
    if (j == response_col) continue;
    covariates.col(k++) = table.values.col(j);
    names.push_back(table.columns[static_cast<std::size_t>(j)]);
  }
  return CsvRegression{make_regression_data(covariates, table.values.col(response_col)), names,
                       table.columns[static_cast<std::size_t>(response_col)]};
}

}  // namespace dphuber
