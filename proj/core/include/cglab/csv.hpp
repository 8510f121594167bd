#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cglab {

/// Locale-free rendering with 17 significant digits.
std::string format_double(double v);
/// Locale-free parse; throws Error on malformed input.
double parse_double(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(std::string_view name) const;  // throws if absent
  double number(std::size_t row, std::string_view name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace cglab
