#pragma once

#include <charconv>
#include <cstdint>
#include <string>

#include "core/error.hpp"

namespace fopdg {

// Shortest round-trip decimal form; identical across runs and platforms.
inline std::string fmt(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

inline std::string fmt(std::uint64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

inline double parse_double_token(std::string_view tok, const char* what) {
  double out = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw Error(ErrorCode::parse, std::string("bad numeric field in ") + what);
  return out;
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fopdg
