#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vcg::csv {

/// A header-addressed CSV table held as strings. Fields are comma-separated;
/// double-quoted fields may contain commas. Line numbers are 1-based and count
/// the header as line 1.
class Table {
 public:
  static Table parse(std::istream& in, std::string_view source = "<stream>");
  static Table read(const std::filesystem::path& path);

  [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
  [[nodiscard]] std::size_t rows() const noexcept { return cells_.size(); }
  [[nodiscard]] std::optional<std::size_t> find(std::string_view column) const;
  /// Throws MissingColumn naming the source.
  [[nodiscard]] std::size_t require(std::string_view column) const;

  [[nodiscard]] const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }
  [[nodiscard]] std::size_t line_of(std::size_t row) const { return row + 2; }
  [[nodiscard]] const std::string& source() const noexcept { return source_; }

  [[nodiscard]] double number(std::size_t row, std::size_t col) const;
  [[nodiscard]] long integer(std::size_t row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
};

/// Shortest round-trip decimal representation of a double.
[[nodiscard]] std::string format_double(double value);

/// Parses a decimal number; accepts "nan"/"inf" spellings so callers can
/// report non-finite values by row instead of failing at parse time.
[[nodiscard]] std::optional<double> parse_double(std::string_view text);

std::vector<std::string> split_row(std::string_view line);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace vcg::csv
