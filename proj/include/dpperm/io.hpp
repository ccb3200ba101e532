// Copyright 2026 The dpperm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPPERM_IO_HPP_
#define DPPERM_IO_HPP_

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace dpperm {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal representation; keeps CSV and JSON output
// byte-stable across runs.
inline std::string format_double(double value) {
  char buffer[32];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace detail {

inline bool parse_double(std::string_view text, double* out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  const auto result = std::from_chars(begin, end, *out);
  return result.ec == std::errc() && result.ptr == end;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace detail

// Numeric CSV reader (comma separators, dot decimals, LF lines); a
// non-numeric first row is treated as a header and skipped.
inline Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw io_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  bool maybe_header = true;
  while (std::getline(file, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!detail::parse_double(fields[i], &row[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (maybe_header) {
        maybe_header = false;
        continue;
      }
      throw io_error(path + ":" + std::to_string(line_number) +
                     ": non-numeric field");
    }
    maybe_header = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw io_error(path + ":" + std::to_string(line_number) +
                     ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error(path + ": no numeric rows");
  Eigen::MatrixXd matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.front().size(); ++j) {
      matrix(i, j) = rows[i][j];
    }
  }
  return matrix;
}

inline void write_csv(const std::string& path, const Eigen::MatrixXd& matrix) {
  std::ofstream file(path);
  if (!file) throw io_error("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) file << ',';
      file << format_double(matrix(i, j));
    }
    file << '\n';
  }
}

}  // namespace dpperm

#endif  // DPPERM_IO_HPP_
