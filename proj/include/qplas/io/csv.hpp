#pragma once

// CSV output: header row, comma separator, '.' decimal point, shortest
// round-trip formatting of doubles, RFC 4180 quoting where needed.

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "qplas/core/error.hpp"

namespace qplas::io {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw InvalidArgument("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
  }

  void add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(csv_number(v));
    add_row(std::move(cells));
  }

  std::size_t rows() const noexcept { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
      out += "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// The common (tau_ns, value, error) curve layout.
inline CsvTable curve_table(const std::vector<double>& tau, const std::vector<double>& value,
                            const std::vector<double>& error) {
  if (tau.size() != value.size() || value.size() != error.size())
    throw InvalidArgument("curve columns must have equal length");
  CsvTable t({"tau_ns", "value", "error"});
  for (std::size_t k = 0; k < tau.size(); ++k) t.add_row(std::vector<double>{tau[k], value[k], error[k]});
  return t;
}

/// Parses a numeric CSV with a header row; blank lines are skipped.
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InvalidArgument("CSV has no column '" + name + "'");
  }
};

inline CsvData parse_numeric_csv(const std::string& text) {
  CsvData d;
  std::size_t pos = 0, line_no = 0;
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    auto cells = split(line);
    if (d.header.empty()) {
      d.header = std::move(cells);
      continue;
    }
    if (cells.size() != d.header.size())
      throw InvalidArgument("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(d.header.size()) +
                            " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      double x = 0.0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), x);
      if (ec != std::errc() || p != c.data() + c.size())
        throw InvalidArgument("CSV line " + std::to_string(line_no) + ": '" + c + "' is not a number");
      row.push_back(x);
    }
    d.rows.push_back(std::move(row));
  }
  if (d.header.empty()) throw InvalidArgument("CSV is empty");
  return d;
}

}  // namespace qplas::io
