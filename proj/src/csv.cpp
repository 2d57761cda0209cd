#include "bwretrieve/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "bwretrieve/error.hpp"

namespace bwretrieve {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string());
  }
  os_.open(path, std::ios::binary | std::ios::trunc);
  if (!os_) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) {
    throw Error(ErrorKind::InvalidInput, "row width does not match header in " + path_.string());
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << fields[i];
  }
  os_ << '\n';
  if (!os_) throw Error(ErrorKind::Io, "write failed for " + path_.string());
}

void CsvWriter::close() {
  os_.close();
  if (os_.fail()) throw Error(ErrorKind::Io, "close failed for " + path_.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::InvalidInput, "no column named " + name);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

}  // namespace bwretrieve
