#pragma once

// CSV ingestion: comma-separated real rows, optional single header line.

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ucpd/core.hpp"

namespace ucpd {

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace detail

/// Rows of equal width. The first non-empty line is a header when any of its cells is not numeric.
inline Sample parse_csv(std::istream& in) {
  Sample out;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line);
    row.assign(cells.size(), 0.0);
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!detail::parse_double(cells[i], row[i])) {
        numeric = false;
        bad = i;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError(lineno, "non-numeric cell '" + std::string(detail::trim(cells[bad])) + "' in column " +
                                   std::to_string(bad + 1));
    }
    first = false;
    if (!out.empty() && row.size() != out.dim()) {
      throw ParseError(lineno, "expected " + std::to_string(out.dim()) + " columns, found " +
                                   std::to_string(row.size()));
    }
    out.push_back(row);
  }
  return out;
}

inline Sample parse_csv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

inline Sample parse_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_csv(in);
}

inline void write_csv(std::ostream& os, const Sample& s) {
  os.precision(17);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = s[i];
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
    os << '\n';
  }
}

}  // namespace ucpd
