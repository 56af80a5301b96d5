#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

#include "fspde/path.hpp"

namespace fspde::harness {

/// Shortest round-trip text for a double: 17 significant digits.
std::string format_number(double v);

/// A table of text cells. Numbers go through format_number so that reruns
/// produce identical bytes.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string config_hash;
  /// Further "# key=value" header lines written after the hash line.
  std::vector<std::pair<std::string, std::string>> comments;

  template <typename... Cells>
  void add(const Cells&... cells) {
    rows.push_back({cell(cells)...});
  }

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return format_number(static_cast<double>(v));
    }
  }
};

/// Layout: "# config_hash=<hash>", the extra comment lines, the header row,
/// then one line per row. Cells holding a comma or quote are quoted.
void write_csv(const std::filesystem::path& file, const CsvTable& table);
std::string to_csv_text(const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& file);
CsvTable parse_csv_text(const std::string& text);

/// Header t,v0[,v1,...], one row per grid point.
CsvTable path_table(const Path& path, const std::string& config_hash);

}  // namespace fspde::harness
