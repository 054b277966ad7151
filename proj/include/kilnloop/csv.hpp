#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kilnloop::csv {

/// A parsed comma-separated file. Quoted fields may contain commas,
/// doubled quotes and newlines.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const;
};

Table parse(std::string_view text);
Table read_file(const std::string& path);
std::string read_text(const std::string& path);

std::string escape(std::string_view field);

/// Joins escaped fields with commas and terminates with '\n'.
std::string format_row(const std::vector<std::string>& fields);

}  // namespace kilnloop::csv
