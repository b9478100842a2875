#pragma once

#include <cstddef>
#include <string>

namespace fopdg {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::string& path);

}  // namespace fopdg
