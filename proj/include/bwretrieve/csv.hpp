#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace bwretrieve {

/// Formats a double with round-trip precision; NaN/inf as nan, inf, -inf.
std::string format_double(double value);
std::string format_optional(const std::optional<double>& value);

class CsvWriter {
 public:
  /// Opens `path` and writes the header row. Throws Io with the path.
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);

  /// Fields are written verbatim; they must not contain commas or newlines.
  void row(const std::vector<std::string>& fields);
  void close();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::size_t columns_;
  std::ofstream os_;
};

/// Reads a CSV written by CsvWriter: header followed by rows of plain fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace bwretrieve
