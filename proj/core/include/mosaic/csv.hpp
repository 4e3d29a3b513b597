#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mosaic::csv {

/// A parsed comma-separated table. Lines starting with '#' before the header
/// are kept as metadata; blank lines are skipped.
struct Table {
  std::vector<std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position of `name`, or throws ConfigError.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

Table read(const std::filesystem::path& path);
std::vector<std::string> split_line(const std::string& line);

/// Parses a decimal cell; throws DataError naming the row and column.
double to_double(const std::string& cell, std::size_t row, const std::string& column);

/// Shortest text that round-trips the value exactly.
std::string format(double value);

/// Quotes a cell when it contains a delimiter, quote or newline.
std::string escape(const std::string& cell);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace mosaic::csv
