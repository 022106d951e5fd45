#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "deconv/numeric.hpp"

namespace deconv {

// Shortest decimal form that parses back to the same double, so repeated
// write/read cycles are loss-free and output bytes are platform-stable.
inline std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt_size(std::size_t v) { return std::to_string(v); }

// Strict parse: the whole token must be one finite-or-inf real.
inline double parse_double_strict(const std::string& tok,
                                  const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw DataError(where + ": expected a real number, got '" + tok + "'");
  return v;
}

namespace detail {

inline std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return (pos == std::string::npos) ? line : line.substr(0, pos);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// One real per line; blank lines and '#' comments are ignored.
inline std::vector<double> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open samples file '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string tok = detail::trim(detail::strip_comment(line));
    if (tok.empty()) continue;
    out.push_back(parse_double_strict(
        tok, path + ":" + std::to_string(lineno)));
  }
  if (out.empty())
    throw DataError("samples file '" + path + "' holds no observations");
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec)
    throw DataError("cannot create output directory '" + path +
                    "': " + ec.message());
}

}  // namespace deconv
