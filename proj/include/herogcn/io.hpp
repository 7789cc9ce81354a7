#pragma once

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "herogcn/errors.hpp"
#include "herogcn/graph.hpp"
#include "herogcn/matrix.hpp"

// Plain-text dataset files:
//   edges       one "i j" pair of 0-based node indices per line, '#' comments
//   attributes  one node per line, d reals; optional "n d" header line
//   labels      one integer per line
namespace herogcn::io {

namespace detail {

inline std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open file: " + path.string());
  return in;
}

inline std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline bool skip_line(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

template <class Int>
bool parse_int(std::string_view tok, Int& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline bool parse_real(std::string_view tok, double& out) {
  // from_chars for floating point is incomplete in some libstdc++ builds; strtod is fine here.
  std::string s(tok);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && !s.empty() && errno != ERANGE && std::isfinite(out);
}

}  // namespace detail

inline std::vector<Edge> load_edges(const std::filesystem::path& path) {
  auto in = detail::open(path);
  std::vector<Edge> edges;
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (detail::skip_line(line)) continue;
    const auto tok = detail::tokens(line);
    std::size_t i = 0, j = 0;
    if (tok.size() != 2 || !detail::parse_int(tok[0], i) || !detail::parse_int(tok[1], j)) {
      throw ParseError(detail::where(path, ln) + "expected two non-negative integer node indices");
    }
    edges.emplace_back(i, j);
  }
  return edges;
}

template <std::floating_point T>
Matrix<T> load_attributes(const std::filesystem::path& path) {
  auto in = detail::open(path);
  std::vector<std::string> lines;
  std::string line;
  std::vector<std::size_t> line_numbers;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (detail::skip_line(line)) continue;
    lines.push_back(line);
    line_numbers.push_back(ln);
  }
  if (lines.empty()) throw ParseError(detail::where(path, 1) + "attribute file is empty");

  // A first line "n d" of two integers is a header when the rest of the file agrees with it.
  std::size_t first = 0;
  {
    const auto tok = detail::tokens(lines[0]);
    std::size_t hn = 0, hd = 0;
    if (tok.size() == 2 && detail::parse_int(tok[0], hn) && detail::parse_int(tok[1], hd) && hn == lines.size() - 1 &&
        hd > 0 && (lines.size() == 1 || detail::tokens(lines[1]).size() == hd)) {
      first = 1;
    }
  }
  const std::size_t n = lines.size() - first;
  if (n == 0) throw ParseError(detail::where(path, line_numbers[0]) + "header declares zero nodes");
  const std::size_t d = detail::tokens(lines[first]).size();
  Matrix<T> x(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto tok = detail::tokens(lines[first + r]);
    const auto ln = line_numbers[first + r];
    if (tok.size() != d) {
      throw ParseError(detail::where(path, ln) + "expected " + std::to_string(d) + " values, found " +
                       std::to_string(tok.size()));
    }
    for (std::size_t c = 0; c < d; ++c) {
      double v = 0.0;
      if (!detail::parse_real(tok[c], v)) {
        throw ParseError(detail::where(path, ln) + "malformed real '" + std::string(tok[c]) + "'");
      }
      x(r, c) = static_cast<T>(v);
    }
  }
  return x;
}

inline LabelVector load_labels(const std::filesystem::path& path) {
  auto in = detail::open(path);
  LabelVector labels;
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (detail::skip_line(line)) continue;
    const auto tok = detail::tokens(line);
    int v = 0;
    if (tok.size() != 1 || !detail::parse_int(tok[0], v) || v < 0) {
      throw ParseError(detail::where(path, ln) + "expected one non-negative integer label");
    }
    labels.push_back(v);
  }
  return labels;
}

inline void save_edges(const std::filesystem::path& path, const std::vector<Edge>& edges) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write file: " + path.string());
  for (auto [i, j] : edges) out << i << ' ' << j << '\n';
}

template <std::floating_point T>
void save_attributes(const std::filesystem::path& path, const Matrix<T>& x) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write file: " + path.string());
  out << x.rows() << ' ' << x.cols() << '\n' << std::setprecision(std::numeric_limits<T>::max_digits10);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? " " : "") << x(i, j);
    out << '\n';
  }
}

inline void save_labels(const std::filesystem::path& path, const LabelVector& labels) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write file: " + path.string());
  for (int v : labels) out << v << '\n';
}

}  // namespace herogcn::io
