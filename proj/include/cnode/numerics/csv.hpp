#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <cnode/errors.hpp>
#include <cnode/numerics/matrix.hpp>

namespace cnode {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) throw ParseError("empty numeric field", line);
  double v = 0.0;
  const char* first = text.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("non-numeric field '" + std::string(text) + "'", line);
  }
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

/// One row per line, comma separated, no header.
inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_for_write(path);
  write_matrix_csv(out, m);
  if (!out) throw IoError("write failed: " + path.string());
}

inline Matrix read_matrix_csv(std::istream& in) {
  std::vector<double> data;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) throw ParseError("ragged matrix row", lineno);
    for (auto f : fields) data.push_back(parse_double(f, lineno));
    ++rows;
  }
  Matrix m(rows, cols, std::move(data));
  require_finite(m, "read_matrix_csv");
  return m;
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_matrix_csv(in);
}

}  // namespace cnode
