#pragma once

#include <cerrno>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <fmt/format.h>

#include "hpmp/error.hpp"

// Shared reader for the line-oriented file formats.
namespace hpmp::detail {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

inline std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    Line line{number, {}};
    for (std::string w; words >> w;) line.tokens.push_back(w);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

inline double parse_number(const std::string& token, std::size_t line, const std::string& field) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(value)) {
    throw ParseError(line, field, fmt::format("'{}' is not a finite number", token));
  }
  return value;
}

inline std::size_t parse_count(const std::string& token, std::size_t line, const std::string& field) {
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError(line, field, fmt::format("'{}' is not a nonnegative integer", token));
  }
  errno = 0;
  const unsigned long long value = std::strtoull(token.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ParseError(line, field, "integer out of range");
  return static_cast<std::size_t>(value);
}

class Cursor {
 public:
  explicit Cursor(std::vector<Line> lines) : lines_(std::move(lines)) {}

  bool done() const { return pos_ >= lines_.size(); }
  const Line& next(const std::string& field) {
    if (done()) throw ParseError(last_line(), field, "unexpected end of file");
    return lines_[pos_++];
  }
  std::size_t last_line() const { return lines_.empty() ? 0 : lines_.back().number; }

  Eigen::VectorXd inline_vector(const Line& line, const std::string& field) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(line.tokens.size() - 1));
    for (std::size_t i = 1; i < line.tokens.size(); ++i) {
      v(static_cast<Eigen::Index>(i - 1)) = parse_number(line.tokens[i], line.number, field);
    }
    return v;
  }

  Eigen::MatrixXd matrix_block(const Line& header, const std::string& field) {
    if (header.tokens.size() != 3) {
      throw ParseError(header.number, field, "expected '<name> <rows> <cols>'");
    }
    const std::size_t rows = parse_count(header.tokens[1], header.number, field);
    const std::size_t cols = parse_count(header.tokens[2], header.number, field);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      const Line& row = next(field);
      if (row.tokens.size() != cols) {
        throw ParseError(row.number, field,
                         fmt::format("row {} has {} entries, expected {}", r + 1, row.tokens.size(), cols));
      }
      for (std::size_t c = 0; c < cols; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            parse_number(row.tokens[c], row.number, field);
      }
    }
    return m;
  }

  void expect_header(const char* format) {
    const Line& line = next("format");
    if (line.tokens.size() != 3 || line.tokens[0] != "format" || line.tokens[1] != format) {
      throw ParseError(line.number, "format", fmt::format("expected 'format {} 1'", format));
    }
    if (line.tokens[2] != "1") {
      throw ParseError(line.number, "format", fmt::format("unsupported version '{}'", line.tokens[2]));
    }
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

}  // namespace hpmp::detail
